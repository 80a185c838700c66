#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <sys/wait.h>

#include "veason/commands.hpp"
#include "veason/cotgen.hpp"
#include "veason/errors.hpp"

using namespace veason;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const char* name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

RunConfig tiny_config() {
    RunConfig cfg;
    cfg.seed = 7;
    cfg.env.n_videos = 10;
    cfg.env.negative_fraction = 0.2;
    cfg.train.batch_size = 4;
    cfg.train.steps = 6;
    cfg.grpo.group_size = 4;
    return cfg;
}

int run_cli(const std::string& args) {
    std::string command = std::string(VEASON_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config loads from json and toml with identical results") {
    TempDir dir("veason_cfg_test");
    spit(dir.path / "run.json", R"({
      "seed": 11,
      "propagator": "oracle",
      "env": {"n_videos": 5, "noise": 0.1},
      "rewards": {"alpha_s": 0.5},
      "grpo": {"group_size": 4, "beta": 0.01},
      "train": {"batch": 2, "steps": 3}
    })");
    spit(dir.path / "run.toml",
         "seed = 11\n"
         "propagator = \"oracle\"\n"
         "\n"
         "[env]\n"
         "n_videos = 5\n"
         "noise = 0.1  # observation noise\n"
         "\n"
         "[rewards]\n"
         "alpha_s = 0.5\n"
         "\n"
         "[grpo]\n"
         "group_size = 4\n"
         "beta = 0.01\n"
         "\n"
         "[train]\n"
         "batch = 2\n"
         "steps = 3\n");

    RunConfig a = load_run_config(dir.path / "run.json");
    RunConfig b = load_run_config(dir.path / "run.toml");
    CHECK(a.seed == 11);
    CHECK(b.seed == 11);
    CHECK(a.env.n_videos == b.env.n_videos);
    CHECK(a.env.noise == b.env.noise);
    CHECK(a.weights.alpha_s == b.weights.alpha_s);
    CHECK(a.grpo.beta == b.grpo.beta);
    CHECK(a.train.steps == b.train.steps);
    CHECK(a.propagator == b.propagator);
}

TEST_CASE("config validation names the offending field") {
    TempDir dir("veason_cfg_bad");
    spit(dir.path / "bad.json", R"({"env": {"n_videos": 0}})");
    try {
        load_run_config(dir.path / "bad.json");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("n_videos") != std::string::npos);
    }

    spit(dir.path / "unknown.json", R"({"env": {"n_video": 5}})");
    CHECK_THROWS_AS(load_run_config(dir.path / "unknown.json"), ValidationError);
    spit(dir.path / "bad.toml", "seed 7\n");
    CHECK_THROWS_AS(load_run_config(dir.path / "bad.toml"), ValidationError);
    CHECK_THROWS_AS(load_run_config(dir.path / "absent.json"), IoError);
    spit(dir.path / "bad.yaml", "");
    CHECK_THROWS_AS(load_run_config(dir.path / "bad.yaml"), ValidationError);
}

TEST_CASE("gen and cot are deterministic across reruns") {
    TempDir dir("veason_cmd_det");
    RunConfig cfg = tiny_config();
    auto m1 = cmd_gen(cfg, dir.path / "a");
    auto m2 = cmd_gen(cfg, dir.path / "b");
    CHECK(slurp(m1) == slurp(m2));

    auto c1 = cmd_cot(m1, cfg, dir.path / "a");
    auto c2 = cmd_cot(m2, cfg, dir.path / "b");
    CHECK(slurp(c1) == slurp(c2));

    auto records = read_cot_jsonl(c1);
    int positives = 0;
    Dataset ds = load_manifest(m1);
    for (const Sample& s : ds.samples) positives += !s.negative();
    CHECK(static_cast<int>(records.size()) == positives);
    for (const auto& r : records) CHECK(parse_response(r.target_text).ok());
}

TEST_CASE("score command reproduces hand scores and flags unknown ids") {
    TempDir dir("veason_cmd_score");
    RunConfig cfg = tiny_config();
    cfg.propagator = "oracle";
    auto manifest = cmd_gen(cfg, dir.path);
    Dataset ds = load_manifest(manifest);

    std::ofstream resp(dir.path / "responses.jsonl");
    for (const Sample& s : ds.samples) {
        std::string text = serialize_response(canonical_ground_truth_response(s));
        resp << "{\"sample_id\": \"" << s.sample_id << "\", \"response\": "
             << std::quoted(text) << "}\n";
    }
    resp.close();

    auto scores = cmd_score(manifest, dir.path / "responses.jsonl", cfg, dir.path);
    std::ifstream in(scores);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.find("\"r_total\":4.0") != std::string::npos);
    }
    CHECK(rows == static_cast<int>(ds.samples.size()));

    spit(dir.path / "bad_responses.jsonl",
         "{\"sample_id\": \"sXXXX\", \"response\": \"garbage\"}\n");
    CHECK_THROWS_AS(cmd_score(manifest, dir.path / "bad_responses.jsonl", cfg, dir.path),
                    ValidationError);
}

TEST_CASE("score handles a mixed fixture file with hand-computed totals") {
    TempDir dir("veason_cmd_mixed");
    RunConfig cfg = tiny_config();
    cfg.propagator = "oracle";
    auto manifest = cmd_gen(cfg, dir.path);
    Dataset ds = load_manifest(manifest);
    const Sample* positive = nullptr;
    for (const Sample& s : ds.samples)
        if (!s.negative()) positive = &s;
    REQUIRE(positive);

    StructuredResponse canonical = canonical_ground_truth_response(*positive);
    StructuredResponse empty_answer;  // right keyframe, no boxes: 1 + 1 + 0 + 0
    empty_answer.think_text = "nothing to ground";
    empty_answer.keyframe_timestamp = canonical.keyframe_timestamp;

    std::ofstream resp(dir.path / "mixed.jsonl");
    resp << "{\"sample_id\": \"" << positive->sample_id << "\", \"response\": "
         << std::quoted(serialize_response(canonical)) << "}\n";
    resp << "{\"sample_id\": \"" << positive->sample_id
         << "\", \"response\": \"no tags at all\"}\n";
    resp << "{\"sample_id\": \"" << positive->sample_id << "\", \"response\": "
         << std::quoted(serialize_response(empty_answer)) << "}\n";
    resp.close();

    auto scores = cmd_score(manifest, dir.path / "mixed.jsonl", cfg, dir.path);
    std::ifstream in(scores);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].find("\"r_total\":4.0") != std::string::npos);
    CHECK(lines[1].find("\"r_total\":0.0") != std::string::npos);
    CHECK(lines[2].find("\"r_total\":2.0") != std::string::npos);

    // scoring is idempotent byte for byte
    auto scores2 = cmd_score(manifest, dir.path / "mixed.jsonl", cfg, dir.path / "again");
    CHECK(slurp(scores) == slurp(scores2));
}

TEST_CASE("train, infer and eval chain together") {
    TempDir dir("veason_cmd_train");
    RunConfig cfg = tiny_config();
    auto manifest = cmd_gen(cfg, dir.path);
    TrainArtifacts t1 = cmd_train(manifest, cfg, dir.path / "t1");
    TrainArtifacts t2 = cmd_train(manifest, cfg, dir.path / "t2");
    CHECK(slurp(t1.checkpoint) == slurp(t2.checkpoint));
    CHECK(slurp(t1.curves) == slurp(t2.curves));

    auto preds = cmd_infer(manifest, t1.checkpoint, cfg, dir.path);
    auto preds2 = cmd_infer(manifest, t1.checkpoint, cfg, dir.path / "p2");
    CHECK(slurp(preds) == slurp(preds2));
    EvalArtifacts eval = cmd_eval(manifest, preds, dir.path);
    CHECK(std::filesystem::exists(eval.json_path));
    CHECK(eval.report.per_sample.size() == 10);

    auto svg = cmd_report(t1.curves, dir.path);
    std::string svg_text = slurp(svg);
    CHECK(svg_text.find("<svg") != std::string::npos);
    CHECK(svg_text.find("id=\"reward\"") != std::string::npos);
    CHECK(svg_text.find("id=\"kl\"") != std::string::npos);
    CHECK(svg_text.find("id=\"actions\"") != std::string::npos);
}

TEST_CASE("report turns a monotone csv into monotone polyline coordinates") {
    TempDir dir("veason_cmd_report");
    std::vector<StepStats> stats(6);
    for (int i = 0; i < 6; ++i) {
        stats[i].step = i;
        stats[i].mean_reward = 1.0 + 0.4 * i;  // strictly increasing
        stats[i].kl = 0.01 * i;
        stats[i].mean_response_actions = 2.0;
    }
    write_curves_csv(dir.path / "curves.csv", stats);
    auto svg = cmd_report(dir.path / "curves.csv", dir.path);
    std::string text = slurp(svg);

    auto start = text.find("id=\"reward\"");
    REQUIRE(start != std::string::npos);
    auto points_at = text.find("points=\"", start);
    REQUIRE(points_at != std::string::npos);
    auto end = text.find('"', points_at + 8);
    std::istringstream points(text.substr(points_at + 8, end - points_at - 8));
    std::string pair_text;
    double prev_y = 1e300;
    int count = 0;
    while (points >> pair_text) {
        auto comma = pair_text.find(',');
        double y = std::stod(pair_text.substr(comma + 1));
        CHECK(y <= prev_y);  // larger values plot higher, i.e. smaller y
        prev_y = y;
        ++count;
    }
    CHECK(count == 6);

    spit(dir.path / "empty.csv",
         "step,mean_reward,mean_r_f,mean_r_k,mean_r_s,mean_r_u,kl,grad_norm,"
         "mean_response_actions\n");
    CHECK_THROWS_AS(cmd_report(dir.path / "empty.csv", dir.path), ValidationError);
    spit(dir.path / "bad.csv", "nope\n");
    CHECK_THROWS_AS(cmd_report(dir.path / "bad.csv", dir.path), ValidationError);
}

TEST_CASE("cli exit codes") {
    TempDir dir("veason_cli_exit");
    spit(dir.path / "ok.json", R"({"env": {"n_videos": 3}, "train": {"steps": 2, "batch": 2}})");
    spit(dir.path / "bad.json", R"({"env": {"n_videos": 0}})");

    std::string out = (dir.path / "out").string();
    CHECK(run_cli("gen --config " + (dir.path / "ok.json").string() + " --out " + out) == 0);
    CHECK(run_cli("gen --config " + (dir.path / "bad.json").string() + " --out " + out) == 2);
    CHECK(run_cli("gen --config " + (dir.path / "missing.json").string() + " --out " + out) == 3);
    CHECK(run_cli("eval --manifest " + out + "/manifest.json --predictions " + out +
                  "/nope.jsonl --out " + out) == 3);
    CHECK(run_cli("definitely-not-a-command") == 2);
}

TEST_CASE("shipped example configs stay loadable") {
    auto configs = std::filesystem::path(VEASON_SOURCE_DIR) / "configs";
    RunConfig def = load_run_config(configs / "default.json");
    CHECK(def.seed == 7);
    CHECK(def.train.steps == 300);
    RunConfig quick = load_run_config(configs / "quick.toml");
    CHECK(quick.env.n_videos == 24);
    CHECK(quick.train.steps == 40);
}
