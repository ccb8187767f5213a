#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "groupinv/commands.hpp"
#include "groupinv/errors.hpp"

namespace {

// Stable exit codes: 0 success, 2 config error, 3 numerical abort,
// 4 missing artifact.
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalAbort = 3;
constexpr int kMissingArtifact = 4;

struct Options {
    std::string config_path;
    bool force = false;
    int jobs = 1;
    bool has_seed = false;
    unsigned long long seed = 0;
    std::string run_dir;
    std::vector<std::string> run_dirs;
    std::string attribute = "both";
};

groupinv::ExperimentConfig effective_config(const Options& opt, const char* command) {
    groupinv::ExperimentConfig cfg = opt.config_path.empty()
                                         ? groupinv::default_config()
                                         : groupinv::load_config(opt.config_path);
    if (opt.has_seed) {
        if (std::string(command) == "gen-data") {
            cfg.data.seed = opt.seed;
        } else if (std::string(command) == "train") {
            cfg.seeds = {opt.seed};
        }
        cfg.validate();
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Group-invariant representation learning on synthetic content/style data"};
    app.require_subcommand(1);

    Options opt;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path,
                        "Experiment config JSON (defaults used when omitted)");
        sub->add_flag("--force", opt.force, "Overwrite existing outputs");
    };

    CLI::App* gen = app.add_subcommand("gen-data", "Generate the synthetic dataset splits");
    add_common(gen);
    gen->add_option("--seed", opt.seed, "Override the data seed")->each([&](const std::string&) {
        opt.has_seed = true;
    });

    CLI::App* train = app.add_subcommand("train", "Train invariant/baseline runs over all seeds");
    add_common(train);
    train->add_option("--seed", opt.seed, "Train only this seed")->each([&](const std::string&) {
        opt.has_seed = true;
    });
    train->add_option("--jobs", opt.jobs, "Parallel training runs")->check(CLI::PositiveNumber);

    CLI::App* eval = app.add_subcommand("eval", "Recompute metrics and embeddings from checkpoints");
    add_common(eval);
    eval->add_option("--run", opt.run_dir, "Evaluate a single run directory (default: all)");

    CLI::App* mcc = app.add_subcommand("mcc", "Pairwise MCC between run embeddings");
    add_common(mcc);
    mcc->add_option("runs", opt.run_dirs, "Run directories (default: all under output_dir)");

    CLI::App* report = app.add_subcommand("report", "Aggregate per-mode AUROC/delta tables");
    add_common(report);
    report->add_option("runs", opt.run_dirs, "Run directories (default: all under output_dir)");

    CLI::App* plot = app.add_subcommand("plot", "KDE plots of scaled PC1 embeddings");
    add_common(plot);
    plot->add_option("--run", opt.run_dir, "Run directory to plot")->required();
    plot->add_option("--attribute", opt.attribute, "class, group, or both");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    const char* command = gen->parsed()      ? "gen-data"
                          : train->parsed()  ? "train"
                          : eval->parsed()   ? "eval"
                          : mcc->parsed()    ? "mcc"
                          : report->parsed() ? "report"
                                             : "plot";
    try {
        const groupinv::ExperimentConfig cfg = effective_config(opt, command);
        if (gen->parsed()) {
            groupinv::cmd_gen_data(cfg, opt.force);
        } else if (train->parsed()) {
            groupinv::cmd_train(cfg, opt.force, opt.jobs);
        } else if (eval->parsed()) {
            groupinv::cmd_eval(cfg, opt.run_dir, opt.force);
        } else if (mcc->parsed()) {
            groupinv::cmd_mcc(cfg, opt.run_dirs, opt.force);
        } else if (report->parsed()) {
            groupinv::cmd_report(cfg, opt.run_dirs, opt.force);
        } else if (plot->parsed()) {
            groupinv::cmd_plot(cfg, opt.run_dir, opt.attribute, opt.force);
        }
    } catch (const groupinv::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const groupinv::ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return kConfigError;
    } catch (const groupinv::MissingArtifactError& e) {
        std::fprintf(stderr, "missing artifact: %s\n", e.what());
        return kMissingArtifact;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "aborted: %s\n", e.what());
        return kNumericalAbort;
    }
    return kOk;
}
