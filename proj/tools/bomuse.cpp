// Command-line front end: batch experiments, theory audits and the HTTP service.

#include "bomuse/errors.hpp"
#include "bomuse/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

std::optional<double> env_double(const char* name) {
    if (const char* v = std::getenv(name); v && *v) {
        return std::stod(v);
    }
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Human-AI collaborative Bayesian optimization"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Compare modes on a builtin benchmark over repeated seeds");
    std::string benchmark = "matyas-2d";
    std::string modes = "bo_muse,generic_bo,human_only,human_plus_pure_exploration";
    std::string seeds = "0-9";
    int iterations = 20;
    int num_init = 3;
    std::optional<double> sigma;
    double zeta = 7.0;
    double delta = 0.1;
    std::string out;
    int jobs = 0;
    run->add_option("--benchmark", benchmark, "matyas-2d, ackley-4d, rastrigin-5d or levy-6d")
        ->capture_default_str();
    run->add_option("--modes", modes, "Comma-separated modes")->capture_default_str();
    run->add_option("--seeds", seeds, "Seed list such as 0-9 or 1,4,7")->capture_default_str();
    run->add_option("--batches,--iterations", iterations, "Evaluations per mode after the initial design")
        ->capture_default_str();
    run->add_option("--init", num_init, "Initial design size")->capture_default_str();
    run->add_option("--sigma", sigma, "Observation noise std (default: 1% of the objective range)");
    run->add_option("--zeta", zeta, "Exploration multiplier")->capture_default_str();
    run->add_option("--delta", delta, "Confidence parameter in (0, 1)")->capture_default_str();
    run->add_option("--out", out, "Aggregated CSV path (tidy CSV written alongside)");
    run->add_option("--jobs", jobs, "Worker threads (0: all cores)")->capture_default_str();

    // verify-theory
    auto* verify = app.add_subcommand("verify-theory", "Randomized audit of the power-mean lemmas");
    int trials = 10000;
    std::uint64_t audit_seed = 0;
    verify->add_option("--trials", trials, "Random trials per check")->capture_default_str();
    verify->add_option("--seed", audit_seed, "Audit seed")->capture_default_str();

    // serve
    auto* serve = app.add_subcommand("serve", "Serve sessions over HTTP");
    bomuse::ServeOptions serve_opts;
    std::string data_dir = serve_opts.data_dir.string();
    std::optional<double> serve_sigma;
    std::optional<double> serve_zeta;
    std::optional<double> serve_delta;
    serve->add_option("--data-dir", data_dir, "Directory holding one JSON file per session")
        ->envname("BOMUSE_DATA_DIR")
        ->capture_default_str();
    serve->add_option("--bind", serve_opts.bind, "host:port")->envname("BOMUSE_BIND")->capture_default_str();
    serve->add_option("--sigma", serve_sigma, "Default observation noise std for new sessions");
    serve->add_option("--zeta", serve_zeta, "Default exploration multiplier for new sessions");
    serve->add_option("--delta", serve_delta, "Default confidence parameter for new sessions");
    serve->add_option("--threads", serve_opts.threads, "Worker threads")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            bomuse::ExperimentPlan plan;
            plan.benchmark = benchmark;
            plan.modes = bomuse::parse_mode_list(modes);
            plan.seeds = bomuse::parse_seed_list(seeds);
            plan.iterations = iterations;
            plan.num_init = num_init;
            plan.noise_std = sigma;
            plan.zeta = zeta;
            plan.delta = delta;
            plan.out = out;
            plan.jobs = jobs;
            return bomuse::cmd_run(plan, std::cout);
        }
        if (*verify) {
            return bomuse::cmd_verify_theory(trials, std::cout, audit_seed);
        }
        if (*serve) {
            serve_opts.data_dir = data_dir;
            serve_opts.defaults.noise_std = serve_sigma ? serve_sigma : env_double("BOMUSE_SIGMA");
            serve_opts.defaults.zeta = serve_zeta ? serve_zeta : env_double("BOMUSE_ZETA");
            serve_opts.defaults.delta = serve_delta ? serve_delta : env_double("BOMUSE_DELTA");
            return bomuse::cmd_serve(serve_opts, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
