#include "bomuse/agents.hpp"

#include "bomuse/errors.hpp"

#include <cmath>
#include <sstream>

namespace bomuse {

std::string to_string(AgentRole role) {
    return role == AgentRole::Ai ? "ai" : "human";
}

AgentRole agent_role_from_string(const std::string& name) {
    if (name == "ai") return AgentRole::Ai;
    if (name == "human") return AgentRole::Human;
    throw InputError("unknown agent role '" + name + "'");
}

std::string to_string(Policy policy) {
    switch (policy) {
        case Policy::BoMuseAi: return "bo_muse_ai";
        case Policy::GenericUcb: return "generic_ucb";
        case Policy::SimulatedExpertUcb: return "simulated_expert_ucb";
        case Policy::SimulatedExpertEi: return "simulated_expert_ei";
        case Policy::PureExplorer: return "pure_explorer";
        case Policy::LiveHuman: return "live_human";
    }
    return "unknown";
}

Policy policy_from_string(const std::string& name) {
    for (Policy p : {Policy::BoMuseAi, Policy::GenericUcb, Policy::SimulatedExpertUcb, Policy::SimulatedExpertEi,
                     Policy::PureExplorer, Policy::LiveHuman}) {
        if (to_string(p) == name) {
            return p;
        }
    }
    throw InputError("unknown agent policy '" + name + "'");
}

void AgentSpec::validate() const {
    kernel.validate();
    if (!(noise_variance > 0.0)) {
        throw InputError("agent '" + id + "': noise_variance must be positive");
    }
    if (!(beta_hat >= 0.0)) {
        throw InputError("agent '" + id + "': beta_hat must be >= 0");
    }
    if (policy == Policy::LiveHuman && role != AgentRole::Human) {
        throw InputError("agent '" + id + "': a live human must have role=human");
    }
}

void to_json(nlohmann::json& j, const AgentSpec& a) {
    j = nlohmann::json{{"id", a.id},
                       {"role", to_string(a.role)},
                       {"policy", to_string(a.policy)},
                       {"beta_hat", a.beta_hat},
                       {"kernel", a.kernel},
                       {"noise_variance", a.noise_variance},
                       {"fit_hyperparameters", a.fit_hyperparameters}};
}

void from_json(const nlohmann::json& j, AgentSpec& a) {
    a = AgentSpec{};
    a.id = j.value("id", std::string("agent"));
    a.role = agent_role_from_string(j.value("role", std::string("ai")));
    a.policy = policy_from_string(j.value("policy", std::string("bo_muse_ai")));
    a.beta_hat = j.value("beta_hat", 1e-6);
    if (j.contains("kernel")) {
        a.kernel = j.at("kernel").get<KernelSpec>();
    }
    a.noise_variance = j.value("noise_variance", 1e-4);
    a.fit_hyperparameters = j.value("fit_hyperparameters", true);
    a.validate();
}

AgentSpec bo_muse_ai(const std::string& id) {
    AgentSpec a;
    a.id = id;
    a.role = AgentRole::Ai;
    a.policy = Policy::BoMuseAi;
    return a;
}

AgentSpec generic_ucb_ai(const std::string& id) {
    AgentSpec a = bo_muse_ai(id);
    a.policy = Policy::GenericUcb;
    return a;
}

AgentSpec pure_explorer_ai(const std::string& id) {
    AgentSpec a = bo_muse_ai(id);
    a.policy = Policy::PureExplorer;
    return a;
}

AgentSpec simulated_expert(std::shared_ptr<const FeatureMap> features, Policy policy, const std::string& id) {
    AgentSpec a;
    a.id = id;
    a.role = AgentRole::Human;
    a.policy = policy;
    a.kernel = KernelSpec::squared_exponential(1.0, 1.0, std::move(features));
    return a;
}

AgentSpec live_human(const std::string& id) {
    AgentSpec a;
    a.id = id;
    a.role = AgentRole::Human;
    a.policy = Policy::LiveHuman;
    return a;
}

AgentModel fit_agent_model(const AgentSpec& agent, const std::vector<Observation>& shared, Sense sense,
                           const Bounds& bounds) {
    std::vector<Vector> X;
    X.reserve(shared.size());
    Vector t(static_cast<Eigen::Index>(shared.size()));
    for (std::size_t i = 0; i < shared.size(); ++i) {
        X.push_back(shared[i].x);
        t[static_cast<Eigen::Index>(i)] = sense == Sense::Minimize ? -shared[i].y : shared[i].y;
    }

    double offset = 0.0;
    double scale = 1.0;
    if (t.size() > 0) {
        offset = t.mean();
        const double sd = std::sqrt((t.array() - offset).square().mean());
        scale = sd > 1e-12 ? sd : 1.0;
    }
    Vector z = (t.array() - offset) / scale;

    KernelSpec kernel = agent.kernel;
    if (agent.fit_hyperparameters && X.size() >= 2) {
        kernel = fit_hyperparameters(kernel, X, z, agent.noise_variance,
                                     default_lengthscale_grid(feature_space_diagonal(kernel, bounds)));
    }
    const double best = z.size() > 0 ? z.maxCoeff() : 0.0;
    return AgentModel{GpPosterior(kernel, std::move(X), std::move(z), agent.noise_variance), offset, scale, best};
}

AcquisitionSpec acquisition_for(const AgentSpec& agent, const BetaSchedule& schedule, const AgentModel& model) {
    switch (agent.policy) {
        case Policy::BoMuseAi: return GpUcb{bo_muse_beta(schedule)};
        case Policy::GenericUcb: return GpUcb{srinivas_beta(schedule.iteration, schedule.delta)};
        case Policy::SimulatedExpertUcb: return GpUcb{agent.beta_hat};
        case Policy::SimulatedExpertEi: return ExpectedImprovement{model.best_target};
        case Policy::PureExplorer: return PureExploration{};
        case Policy::LiveHuman: break;
    }
    throw StateError("agent '" + agent.id + "' has no machine acquisition");
}

void check_in_bounds(const Bounds& bounds, const Vector& x) {
    if (x.size() != bounds.dim()) {
        throw InputError("suggestion has " + std::to_string(x.size()) + " coordinates, expected " +
                         std::to_string(bounds.dim()));
    }
    for (int i = 0; i < bounds.dim(); ++i) {
        if (!(x[i] >= bounds.lower[i] && x[i] <= bounds.upper[i])) {
            std::ostringstream msg;
            msg << "suggestion out of bounds on dimension " << i << ": value " << x[i] << " not in ["
                << bounds.lower[i] << ", " << bounds.upper[i] << "]";
            throw OutOfBoundsError(msg.str(), i, x[i], bounds.lower[i], bounds.upper[i]);
        }
    }
}

std::optional<Vector> suggest_with_model(const AgentSpec& agent, const AgentModel& model,
                                         const BetaSchedule& schedule, const SuggestContext& context) {
    if (agent.policy == Policy::LiveHuman) {
        if (!context.posted) {
            return std::nullopt;
        }
        check_in_bounds(context.bounds, *context.posted);
        return context.posted;
    }
    const AcquisitionSpec acq = acquisition_for(agent, schedule, model);
    return maximize(acq, model.gp, context.bounds, context.seed, context.maximizer);
}

std::optional<Vector> suggest(const AgentSpec& agent, const std::vector<Observation>& shared,
                              const BetaSchedule& schedule, const SuggestContext& context) {
    if (agent.policy == Policy::LiveHuman) {
        return suggest_with_model(agent, AgentModel{GpPosterior(agent.kernel, {}, Vector(0), agent.noise_variance)},
                                  schedule, context);
    }
    return suggest_with_model(agent, fit_agent_model(agent, shared, context.sense, context.bounds), schedule,
                              context);
}

}  // namespace bomuse
