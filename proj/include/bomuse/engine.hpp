#pragma once

#include "bomuse/agents.hpp"
#include "bomuse/benchmarks.hpp"
#include "bomuse/gp.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bomuse {

/// Experiment arms. Paired modes evaluate a human and an AI point per batch;
/// single modes evaluate one point per step.
enum class Mode { BoMuse, GenericBo, HumanOnly, HumanPlusPureExploration };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);
bool uses_human(Mode mode);
bool uses_ai(Mode mode);
/// Objective evaluations consumed per loop step.
int evaluations_per_step(Mode mode);

struct SessionConfig {
    ObjectiveConfig objective;
    /// Search box; the objective's own bounds when absent.
    std::optional<Bounds> bounds;
    int num_init = 3;
    /// Loop steps S. Paired modes spend 2 evaluations per step.
    int budget_batches = 10;
    double delta = 0.1;
    double zeta = 7.0;
    std::uint64_t seed = 0;
    AgentSpec human_agent;
    AgentSpec ai_agent;
    Mode mode = Mode::BoMuse;
    /// Std of the injected observation noise; 1e-2 * estimated range when absent.
    std::optional<double> noise_std;
    /// GP noise variance on standardized targets (also sets sigma in the beta schedule).
    double model_noise_variance = 1e-4;

    /// Throws InputError describing the first invalid field.
    void validate() const;

    /// Ready-made arm for a builtin benchmark with an evaluation budget split
    /// evenly across the mode's steps (odd remainders rounded down).
    static SessionConfig for_benchmark(const std::string& benchmark, Mode mode, std::uint64_t seed,
                                       int num_init, int evaluation_budget);
};

void to_json(nlohmann::json& j, const SessionConfig& c);
void from_json(const nlohmann::json& j, SessionConfig& c);

struct BatchRecord {
    int s = 0;
    std::optional<Vector> x_human;
    std::optional<double> y_human;
    std::optional<Vector> x_ai;
    std::optional<double> y_ai;
    double gamma_after = 0.0;
    double B_after = 1.0;
    /// AI exploration weight used this step (absent for pure exploration / human-only).
    std::optional<double> beta_used;

    bool operator==(const BatchRecord& other) const;
};

void to_json(nlohmann::json& j, const BatchRecord& r);
void from_json(const nlohmann::json& j, BatchRecord& r);

struct RegretTrace {
    /// False when the optimum or a true value is unknown; simple/batch regret are then empty.
    bool has_optimum = false;
    /// Per evaluation (initial design included), non-increasing.
    std::vector<double> simple_regret;
    /// Best measured y so far, in the objective's own orientation.
    std::vector<double> best_observed;
    /// Per batch: the smaller regret of the batch's points.
    std::vector<double> batch_regret;
    std::vector<double> cumulative;
};

RegretTrace compute_regret(const std::vector<Observation>& observations, const ObjectiveSpec& objective);

/// Everything needed to resume a session exactly.
struct SessionSnapshot {
    SessionConfig config;
    std::vector<Observation> observations;
    std::vector<BatchRecord> records;
    double initial_gamma = 0.0;
    double gamma = 0.0;
    double B = 1.0;
    std::optional<Vector> pending_human;
};

void to_json(nlohmann::json& j, const SessionSnapshot& s);
void from_json(const nlohmann::json& j, SessionSnapshot& s);

/// The batch loop. Each call to run_batch performs one step atomically: on any
/// exception the session is left exactly as before the call.
class Session {
public:
    /// Fresh session: resolves the objective and evaluates the initial design.
    explicit Session(SessionConfig config);
    /// Fresh session against an in-process objective (config.objective is informational).
    Session(SessionConfig config, ObjectiveSpec objective);
    /// Resume from a snapshot; nothing is re-evaluated.
    explicit Session(SessionSnapshot snapshot);
    Session(SessionSnapshot snapshot, ObjectiveSpec objective);

    BatchRecord run_batch();

    /// Record a live human's suggestion for the current batch.
    void post_human_suggestion(const Vector& x);

    [[nodiscard]] bool finished() const noexcept;
    [[nodiscard]] bool awaiting_human() const noexcept;
    [[nodiscard]] const SessionConfig& config() const noexcept { return config_; }
    [[nodiscard]] const ObjectiveSpec& objective() const noexcept { return objective_; }
    [[nodiscard]] const Bounds& bounds() const noexcept { return bounds_; }
    [[nodiscard]] const std::vector<Observation>& observations() const noexcept { return observations_; }
    [[nodiscard]] const std::vector<BatchRecord>& records() const noexcept { return records_; }
    [[nodiscard]] double gamma() const noexcept { return gamma_; }
    [[nodiscard]] double rkhs_bound() const noexcept { return B_; }
    [[nodiscard]] double initial_gamma() const noexcept { return initial_gamma_; }
    [[nodiscard]] double noise_std() const noexcept { return noise_std_; }
    [[nodiscard]] const std::optional<Vector>& pending_human() const noexcept { return pending_human_; }
    [[nodiscard]] BetaSchedule schedule() const;
    [[nodiscard]] SessionSnapshot snapshot() const;

private:
    void resolve();
    void draw_initial_design();
    Observation evaluate(const Vector& x, Source source, int batch, Rng& noise) const;

    SessionConfig config_;
    ObjectiveSpec objective_;
    Bounds bounds_;
    double noise_std_ = 0.0;
    std::vector<Observation> observations_;
    std::vector<BatchRecord> records_;
    double initial_gamma_ = 0.0;
    double gamma_ = 0.0;
    double B_ = 1.0;
    std::optional<Vector> pending_human_;
};

struct SessionResult {
    std::vector<Observation> observations;
    std::vector<BatchRecord> records;
    RegretTrace regret;
    double initial_gamma = 0.0;
};

/// Runs every batch of a machine-only session. Throws StateError for live humans.
SessionResult run_session(const SessionConfig& config);
SessionResult run_session(const SessionConfig& config, ObjectiveSpec objective);

/// Writes one row per evaluation:
/// s,t,source,x0..x{d-1},y,f_star,simple_regret,batch_regret,gamma,B,beta.
/// f_star and regret columns are left empty unless `include_truth`.
void write_session_csv(std::ostream& out, const std::vector<Observation>& observations,
                       const std::vector<BatchRecord>& records, const RegretTrace& regret, double initial_gamma,
                       int dim, bool include_truth = true);

/// Shortest round-trip decimal form of a double.
std::string format_number(double value);

}  // namespace bomuse
