#pragma once

#include "bomuse/acquisition.hpp"
#include "bomuse/benchmarks.hpp"
#include "bomuse/gp.hpp"
#include "bomuse/kernels.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bomuse {

enum class AgentRole { Ai, Human };

enum class Policy {
    BoMuseAi,            // GP-UCB with the over-explorative beta schedule
    GenericUcb,          // GP-UCB with the classical log schedule (baseline)
    SimulatedExpertUcb,  // mu + sqrt(beta_hat) sigma with tiny beta_hat
    SimulatedExpertEi,   // expected improvement over the best observation
    PureExplorer,        // argmax of posterior standard deviation
    LiveHuman,           // waits for an externally posted suggestion
};

std::string to_string(AgentRole role);
AgentRole agent_role_from_string(const std::string& name);
std::string to_string(Policy policy);
Policy policy_from_string(const std::string& name);

struct AgentSpec {
    std::string id = "agent";
    AgentRole role = AgentRole::Ai;
    Policy policy = Policy::BoMuseAi;
    /// sqrt(beta_hat) = 0.001 reproduces mu + 0.001 sigma.
    double beta_hat = 1e-6;
    KernelSpec kernel;
    double noise_variance = 1e-4;
    /// Refit the lengthscale by marginal likelihood on every call.
    bool fit_hyperparameters = true;

    /// Throws InputError on role/policy combinations that make no sense.
    void validate() const;
};

void to_json(nlohmann::json& j, const AgentSpec& a);
void from_json(const nlohmann::json& j, AgentSpec& a);

AgentSpec bo_muse_ai(const std::string& id = "ai");
AgentSpec generic_ucb_ai(const std::string& id = "ai");
AgentSpec pure_explorer_ai(const std::string& id = "ai");
/// Simulated expert with an SE kernel over `features` (identity when null).
AgentSpec simulated_expert(std::shared_ptr<const FeatureMap> features, Policy policy = Policy::SimulatedExpertUcb,
                           const std::string& id = "human");
AgentSpec live_human(const std::string& id = "human");

/// An agent's private GP over the shared data. Targets are oriented for
/// maximization and standardized; `offset`/`scale` undo that.
struct AgentModel {
    GpPosterior gp;
    double offset = 0.0;
    double scale = 1.0;
    /// Best standardized target seen, 0 with no data.
    double best_target = 0.0;
};

AgentModel fit_agent_model(const AgentSpec& agent, const std::vector<Observation>& shared, Sense sense,
                           const Bounds& bounds);

struct SuggestContext {
    Bounds bounds;
    Sense sense = Sense::Minimize;
    std::uint64_t seed = 0;
    /// Suggestion posted by a live human for this batch, if any.
    std::optional<Vector> posted;
    MaximizerOptions maximizer;
};

/// Acquisition the policy maximizes, given the schedule and the agent's model.
/// Not meaningful for LiveHuman (throws StateError).
AcquisitionSpec acquisition_for(const AgentSpec& agent, const BetaSchedule& schedule, const AgentModel& model);

/// Next query point, or nullopt when a LiveHuman has not posted yet.
/// Throws InputError for an out-of-bounds live suggestion.
std::optional<Vector> suggest(const AgentSpec& agent, const std::vector<Observation>& shared,
                              const BetaSchedule& schedule, const SuggestContext& context);

/// Same as suggest() but reusing an already fitted model.
std::optional<Vector> suggest_with_model(const AgentSpec& agent, const AgentModel& model,
                                         const BetaSchedule& schedule, const SuggestContext& context);

/// Per-dimension bounds check; message names the first offending dimension and its [lo, hi].
void check_in_bounds(const Bounds& bounds, const Vector& x);

}  // namespace bomuse
