#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "scqa/config.hpp"
#include "scqa/errors.hpp"

namespace {

struct JobArgs {
    std::string config_path;
    std::string out_dir = ".";
    int threads = 1;
    bool verbose = false;
};

void add_common(CLI::App* cmd, JobArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--threads", args.threads, "worker threads for grid evaluations");
    cmd->add_flag("--verbose", args.verbose, "progress notes on stderr");
}

using Runner = int (*)(const scqa::ExperimentConfig&, const std::string&, int, bool);

int dispatch(const JobArgs& args, Runner runner) {
    try {
        const scqa::ExperimentConfig cfg = scqa::load_config(args.config_path);
        return runner(cfg, args.out_dir, args.threads, args.verbose);
    } catch (const scqa::ConfigError& ex) {
        std::fprintf(stderr, "config error: %s\n", ex.what());
        return 2;
    } catch (const scqa::TruncationError& ex) {
        std::fprintf(stderr, "truncation failure: %s\n", ex.what());
        return 4;
    } catch (const scqa::Error& ex) {
        std::fprintf(stderr, "numerical failure: %s\n", ex.what());
        return 3;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase-space Gaussian dynamics and nonlinear response toolkit"};
    app.set_version_flag("--version", std::string("scqa ") + scqa::kToolVersion);
    app.require_subcommand(1);

    JobArgs args;

    CLI::App* evolve = app.add_subcommand("evolve", "integrate the propagator equations");
    CLI::App* respond = app.add_subcommand("respond", "nonlinear response functions");
    CLI::App* compare = app.add_subcommand("compare", "cross-check against the Fock oracle");
    CLI::App* stationary = app.add_subcommand("stationary", "solve for a stationary Gaussian");
    CLI::App* invariants = app.add_subcommand("invariants", "conserved quantities of a state");
    for (CLI::App* cmd : {evolve, respond, compare, stationary, invariants})
        add_common(cmd, args);

    CLI11_PARSE(app, argc, argv);

    if (evolve->parsed()) return dispatch(args, scqa::run_evolve);
    if (respond->parsed()) return dispatch(args, scqa::run_respond);
    if (compare->parsed()) return dispatch(args, scqa::run_compare);
    if (stationary->parsed()) return dispatch(args, scqa::run_stationary);
    if (invariants->parsed()) return dispatch(args, scqa::run_invariants);
    return 1;
}
