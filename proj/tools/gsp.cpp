#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gsp/errors.hpp"
#include "gsp/harness.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda;
    std::optional<std::string> method;
    std::optional<std::string> out_dir;
    bool plots = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "run configuration JSON")->required();
    cmd->add_option("--seed", f.seed, "replace the config seed list with one seed");
    cmd->add_option("--lambda", f.lambda, "penalty weight (gsfp/gsmfp)");
    cmd->add_option("--method", f.method, "gpf|gpfplus|gsfp|gsmfp|ft-head-only");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_flag("--plots", f.plots, "emit SVG plots");
}

gsp::CliOverrides to_overrides(const CommonFlags& f) {
    gsp::CliOverrides o;
    o.seed = f.seed;
    o.lambda = f.lambda;
    o.method = f.method;
    o.out_dir = f.out_dir;
    o.plots = f.plots;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse prompt tuning for frozen graph networks"};
    app.require_subcommand(1);

    CommonFlags pre_f, tune_f, sweep_f;
    CLI::App* pre = app.add_subcommand("pretrain", "train backbone weights by edge prediction");
    add_common(pre, pre_f);
    CLI::App* tune = app.add_subcommand("tune", "prompt-tune against a frozen backbone");
    add_common(tune, tune_f);
    CLI::App* sweep = app.add_subcommand("sweep", "tune across a lambda grid");
    add_common(sweep, sweep_f);

    std::vector<std::string> report_dirs;
    std::string report_out = ".";
    CLI::App* report = app.add_subcommand("report", "tabulate finished runs");
    report->add_option("dirs", report_dirs, "run directories holding report.json")->required();
    report->add_option("--out", report_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (pre->parsed()) {
            gsp::RunConfig cfg = gsp::load_run_config(pre_f.config_path, to_overrides(pre_f));
            gsp::run_pretrain(cfg);
        } else if (tune->parsed()) {
            gsp::RunConfig cfg = gsp::load_run_config(tune_f.config_path, to_overrides(tune_f));
            gsp::run_tune(cfg);
        } else if (sweep->parsed()) {
            gsp::RunConfig cfg = gsp::load_run_config(sweep_f.config_path, to_overrides(sweep_f));
            gsp::run_sweep(cfg);
        } else if (report->parsed()) {
            gsp::run_report(report_dirs, report_out);
        }
    } catch (const gsp::DivergenceError& e) {
        std::fprintf(stderr, "gsp: divergence at epoch %d: %s\n", e.epoch, e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "gsp: %s\n", e.what());
        return 2;
    }
    return 0;
}
