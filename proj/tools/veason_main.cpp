#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "veason/commands.hpp"
#include "veason/errors.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

struct Options {
    std::string config;
    std::string out = ".";
    std::string manifest;
    std::string responses;
    std::string checkpoint;
    std::string predictions;
    std::string curves;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"veason: synthetic video reasoning segmentation training and evaluation"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* cmd, bool need_config) {
        auto* c = cmd->add_option("--config", opt.config, "run configuration (.json or .toml)");
        if (need_config) c->required();
        cmd->add_option("--out", opt.out, "output directory");
        return cmd;
    };

    CLI::App* gen = add_common(app.add_subcommand("gen", "generate a dataset manifest"), true);
    CLI::App* cot = add_common(app.add_subcommand("cot", "build supervised reasoning records"), true);
    cot->add_option("--manifest", opt.manifest, "dataset manifest")->required();
    CLI::App* score = add_common(app.add_subcommand("score", "score a responses file"), true);
    score->add_option("--manifest", opt.manifest, "dataset manifest")->required();
    score->add_option("--responses", opt.responses, "responses JSONL")->required();
    CLI::App* train = add_common(app.add_subcommand("train", "train the toy policy"), true);
    train->add_option("--manifest", opt.manifest, "dataset manifest")->required();
    CLI::App* infer = add_common(app.add_subcommand("infer", "greedy inference to predictions"), true);
    infer->add_option("--manifest", opt.manifest, "dataset manifest")->required();
    infer->add_option("--checkpoint", opt.checkpoint, "policy checkpoint")->required();
    CLI::App* eval = add_common(app.add_subcommand("eval", "evaluate predictions"), false);
    eval->add_option("--manifest", opt.manifest, "dataset manifest")->required();
    eval->add_option("--predictions", opt.predictions, "predictions JSONL")->required();
    CLI::App* report = add_common(app.add_subcommand("report", "plot training curves"), false);
    report->add_option("--curves", opt.curves, "curves CSV from train")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    try {
        veason::RunConfig cfg;
        if (!opt.config.empty()) cfg = veason::load_run_config(opt.config);

        if (gen->parsed()) {
            auto path = veason::cmd_gen(cfg, opt.out);
            std::cout << "wrote " << path.string() << "\n";
        } else if (cot->parsed()) {
            auto path = veason::cmd_cot(opt.manifest, cfg, opt.out);
            std::cout << "wrote " << path.string() << "\n";
        } else if (score->parsed()) {
            auto path = veason::cmd_score(opt.manifest, opt.responses, cfg, opt.out);
            std::cout << "wrote " << path.string() << "\n";
        } else if (train->parsed()) {
            auto artifacts = veason::cmd_train(opt.manifest, cfg, opt.out);
            std::cout << "wrote " << artifacts.checkpoint.string() << "\n";
            std::cout << "wrote " << artifacts.curves.string() << "\n";
        } else if (infer->parsed()) {
            auto path = veason::cmd_infer(opt.manifest, opt.checkpoint, cfg, opt.out);
            std::cout << "wrote " << path.string() << "\n";
        } else if (eval->parsed()) {
            auto artifacts = veason::cmd_eval(opt.manifest, opt.predictions, opt.out);
            std::cout << veason::render_report(artifacts.report);
            std::cout << "wrote " << artifacts.json_path.string() << "\n";
        } else if (report->parsed()) {
            auto path = veason::cmd_report(opt.curves, opt.out);
            std::cout << "wrote " << path.string() << "\n";
        }
    } catch (const veason::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const veason::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const veason::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
