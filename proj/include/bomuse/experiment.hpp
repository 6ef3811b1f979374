#pragma once

#include "bomuse/engine.hpp"
#include "bomuse/service.hpp"
#include "bomuse/theory.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bomuse {

/// A comparison of several modes on one builtin benchmark over repeated seeds.
struct ExperimentPlan {
    std::string benchmark = "matyas-2d";
    std::vector<Mode> modes{Mode::BoMuse, Mode::GenericBo, Mode::HumanOnly, Mode::HumanPlusPureExploration};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    /// Evaluations after the initial design, per mode.
    int iterations = 20;
    int num_init = 3;
    std::optional<double> noise_std;
    double zeta = 7.0;
    double delta = 0.1;
    /// Aggregated CSV path; the tidy CSV goes next to it as <stem>_tidy.csv.
    std::filesystem::path out;
    /// Worker threads; 0 uses the hardware concurrency.
    int jobs = 0;

    [[nodiscard]] int repeats() const noexcept { return static_cast<int>(seeds.size()); }
    void validate() const;
    [[nodiscard]] SessionConfig session_config(Mode mode, std::uint64_t seed) const;
};

/// Parses "0,1,5" or "0-9" (inclusive), or a mix such as "0-4,10".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<Mode> parse_mode_list(const std::string& text);

struct SeedRun {
    std::uint64_t seed = 0;
    SessionResult result;
    /// Simple regret per evaluation, carried forward to the plan's evaluation
    /// count when the mode's batch size leaves the last slot unused.
    std::vector<double> regret;
};

struct ModeRuns {
    Mode mode = Mode::BoMuse;
    std::vector<SeedRun> runs;  // in plan seed order
};

struct ExperimentResult {
    ExperimentPlan plan;
    int evaluations = 0;  // num_init + iterations
    std::vector<ModeRuns> modes;

    [[nodiscard]] const ModeRuns& of(Mode mode) const;
    /// Final simple regret of every seed for `mode`.
    [[nodiscard]] std::vector<double> final_regret(Mode mode) const;
};

/// Runs every (mode, seed) pair, in parallel, collecting results in plan order.
ExperimentResult run_experiment(const ExperimentPlan& plan);

/// t, then <mode>_mean,<mode>_se per mode: mean simple regret and its
/// standard error across seeds at each evaluation.
void write_aggregate_csv(std::ostream& out, const ExperimentResult& result);
/// One row per mode x seed x evaluation.
void write_tidy_csv(std::ostream& out, const ExperimentResult& result);
/// Human-readable final-regret table with paired win counts against the first mode.
void print_summary(std::ostream& out, const ExperimentResult& result);

double median(std::vector<double> values);
/// Sample standard deviation / sqrt(n); 0 for fewer than two values.
double standard_error(const std::vector<double>& values);

/// Runs the plan and writes both CSVs. Returns the process exit code.
int cmd_run(const ExperimentPlan& plan, std::ostream& log);

/// Prints the JSON audit report; 0 iff no hard check was violated.
int cmd_verify_theory(int trials, std::ostream& out, std::uint64_t seed = 0,
                      const MeanFunction& mean = generalized_mean);

struct ServeOptions {
    std::filesystem::path data_dir = "bomuse-data";
    /// host:port; port 0 picks a free one.
    std::string bind = "127.0.0.1:8080";
    ServiceDefaults defaults;
    int threads = 8;
};

/// Splits "host:port"; a bare port binds 127.0.0.1.
std::pair<std::string, int> parse_bind(const std::string& bind);

/// Serves until SIGTERM or SIGINT. Returns 2 when the address cannot be bound.
int cmd_serve(const ServeOptions& options, std::ostream& log);

}  // namespace bomuse
