#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "veason/commands.hpp"
#include "veason/errors.hpp"

namespace veason {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

nlohmann::json parse_toml_scalar(const std::string& raw) {
    std::string v = trim(raw);
    if (v.empty()) throw ValidationError("toml: empty value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') throw ValidationError("toml: unterminated string");
        return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    try {
        if (v.find_first_of(".eE") == std::string::npos)
            return static_cast<std::int64_t>(std::stoll(v));
        return std::stod(v);
    } catch (const std::exception&) {
        throw ValidationError("toml: cannot parse value '" + v + "'");
    }
}

nlohmann::json parse_toml_value(const std::string& raw) {
    std::string v = trim(raw);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') throw ValidationError("toml: unterminated array");
        auto arr = nlohmann::json::array();
        std::string inner = v.substr(1, v.size() - 2);
        std::string item;
        bool in_string = false;
        for (char c : inner) {
            if (c == '"') in_string = !in_string;
            if (c == ',' && !in_string) {
                if (!trim(item).empty()) arr.push_back(parse_toml_scalar(item));
                item.clear();
            } else {
                item += c;
            }
        }
        if (!trim(item).empty()) arr.push_back(parse_toml_scalar(item));
        return arr;
    }
    return parse_toml_scalar(v);
}

nlohmann::json parse_toml(const std::string& text) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* current = &root;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ValidationError("toml line " + std::to_string(line_no) + ": bad section");
            std::string name = trim(s.substr(1, s.size() - 2));
            if (name.empty())
                throw ValidationError("toml line " + std::to_string(line_no) + ": empty section");
            current = &root[name];
            if (current->is_null()) *current = nlohmann::json::object();
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ValidationError("toml line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        if (key.empty())
            throw ValidationError("toml line " + std::to_string(line_no) + ": empty key");
        (*current)[key] = parse_toml_value(s.substr(eq + 1));
    }
    return root;
}

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (std::string_view a : allowed) known |= key == a;
        if (!known) throw ValidationError("config: unknown key " + where + key);
    }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string("config: bad value for ") + key);
    }
}

RunConfig config_from_tree(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config: top level must be an object");
    reject_unknown_keys(j, {"seed", "propagator", "env", "rewards", "grpo", "train"}, "");
    RunConfig cfg;
    read_field(j, "seed", cfg.seed);
    read_field(j, "propagator", cfg.propagator);

    if (j.contains("env")) {
        const auto& e = j.at("env");
        reject_unknown_keys(e,
                            {"n_videos", "negative_fraction", "frames", "frame_stride", "width",
                             "height", "grid", "size_bins", "noise", "min_objects", "max_objects",
                             "min_size", "max_size", "min_speed", "max_speed", "max_occluders"},
                            "env.");
        read_field(e, "n_videos", cfg.env.n_videos);
        read_field(e, "negative_fraction", cfg.env.negative_fraction);
        read_field(e, "frames", cfg.env.frames);
        read_field(e, "frame_stride", cfg.env.frame_stride);
        read_field(e, "width", cfg.env.width);
        read_field(e, "height", cfg.env.height);
        read_field(e, "grid", cfg.env.grid);
        read_field(e, "size_bins", cfg.env.size_bins);
        read_field(e, "noise", cfg.env.noise);
        read_field(e, "min_objects", cfg.env.min_objects);
        read_field(e, "max_objects", cfg.env.max_objects);
        read_field(e, "min_size", cfg.env.min_size);
        read_field(e, "max_size", cfg.env.max_size);
        read_field(e, "min_speed", cfg.env.min_speed);
        read_field(e, "max_speed", cfg.env.max_speed);
        read_field(e, "max_occluders", cfg.env.max_occluders);
    }
    if (j.contains("rewards")) {
        const auto& r = j.at("rewards");
        reject_unknown_keys(r, {"alpha_f", "alpha_k", "alpha_s", "alpha_u"}, "rewards.");
        read_field(r, "alpha_f", cfg.weights.alpha_f);
        read_field(r, "alpha_k", cfg.weights.alpha_k);
        read_field(r, "alpha_s", cfg.weights.alpha_s);
        read_field(r, "alpha_u", cfg.weights.alpha_u);
    }
    if (j.contains("grpo")) {
        const auto& g = j.at("grpo");
        reject_unknown_keys(g,
                            {"group_size", "beta", "learning_rate", "epsilon_std", "clip_range",
                             "max_grad_norm"},
                            "grpo.");
        read_field(g, "group_size", cfg.grpo.group_size);
        read_field(g, "beta", cfg.grpo.beta);
        read_field(g, "learning_rate", cfg.grpo.learning_rate);
        read_field(g, "epsilon_std", cfg.grpo.epsilon_std);
        if (g.contains("clip_range") && !g.at("clip_range").is_null()) {
            double c = 0;
            read_field(g, "clip_range", c);
            cfg.grpo.clip_range = c;
        }
        read_field(g, "max_grad_norm", cfg.grpo.max_grad_norm);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        reject_unknown_keys(t, {"batch", "steps", "epochs"}, "train.");
        read_field(t, "batch", cfg.train.batch_size);
        read_field(t, "steps", cfg.train.steps);
        if (t.contains("epochs")) {
            int e = 0;
            read_field(t, "epochs", e);
            cfg.train.epochs = e;
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace

void RunConfig::validate() const {
    env.validate();
    grpo.validate();
    train.validate();
    for (double a : {weights.alpha_f, weights.alpha_k, weights.alpha_s, weights.alpha_u})
        if (!(a >= 0) || !std::isfinite(a))
            throw ValidationError("rewards.alpha_* must be finite and >= 0");
    if (propagator != "labelmap" && propagator != "oracle")
        throw ValidationError("propagator must be 'labelmap' or 'oracle'");
}

std::string toml_to_json_text(const std::string& toml_text) {
    return parse_toml(toml_text).dump();
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    nlohmann::json tree;
    std::string ext = path.extension().string();
    if (ext == ".json") {
        tree = nlohmann::json::parse(text, nullptr, false);
        if (tree.is_discarded()) throw ValidationError("config: invalid JSON in " + path.string());
    } else if (ext == ".toml") {
        tree = parse_toml(text);
    } else {
        throw ValidationError("config: expected a .json or .toml file, got " + path.string());
    }
    return config_from_tree(tree);
}

std::unique_ptr<MaskPropagator> make_propagator(const std::string& name) {
    if (name == "oracle") return std::make_unique<OraclePropagator>();
    if (name == "labelmap") return std::make_unique<LabelMapPropagator>();
    throw ValidationError("propagator must be 'labelmap' or 'oracle'");
}

}  // namespace veason
