#include "bomuse/engine.hpp"

#include "bomuse/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

namespace bomuse {

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::BoMuse: return "bo_muse";
        case Mode::GenericBo: return "generic_bo";
        case Mode::HumanOnly: return "human_only";
        case Mode::HumanPlusPureExploration: return "human_plus_pure_exploration";
    }
    return "unknown";
}

Mode mode_from_string(const std::string& name) {
    for (Mode m : {Mode::BoMuse, Mode::GenericBo, Mode::HumanOnly, Mode::HumanPlusPureExploration}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    if (name == "human_pe") return Mode::HumanPlusPureExploration;
    throw InputError("unknown mode '" + name + "'");
}

bool uses_human(Mode mode) {
    return mode != Mode::GenericBo;
}

bool uses_ai(Mode mode) {
    return mode != Mode::HumanOnly;
}

int evaluations_per_step(Mode mode) {
    return (uses_human(mode) && uses_ai(mode)) ? 2 : 1;
}

void SessionConfig::validate() const {
    if (budget_batches < 1) {
        throw InputError("config: budget_batches must be >= 1");
    }
    if (num_init < 0) {
        throw InputError("config: num_init must be >= 0");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InputError("config: delta must lie in (0, 1)");
    }
    if (!(zeta >= 1.0)) {
        throw InputError("config: zeta must be >= 1");
    }
    if (noise_std && !(*noise_std >= 0.0)) {
        throw InputError("config: noise_std must be >= 0");
    }
    if (!(model_noise_variance > 0.0)) {
        throw InputError("config: model_noise_variance must be positive");
    }
    human_agent.validate();
    ai_agent.validate();
    if (human_agent.role != AgentRole::Human) {
        throw InputError("config: human_agent must have role=human");
    }
    if (ai_agent.role != AgentRole::Ai || ai_agent.policy == Policy::LiveHuman) {
        throw InputError("config: ai_agent must be a machine policy with role=ai");
    }
}

SessionConfig SessionConfig::for_benchmark(const std::string& benchmark, Mode mode, std::uint64_t seed,
                                           int num_init, int evaluation_budget) {
    const ObjectiveSpec objective = builtin(benchmark);
    SessionConfig c;
    c.objective.kind = "builtin";
    c.objective.name = objective.name;
    c.objective.sense = objective.sense;
    c.num_init = num_init;
    c.seed = seed;
    c.mode = mode;
    c.budget_batches = std::max(1, evaluation_budget / evaluations_per_step(mode));
    c.human_agent = simulated_expert(objective.feature_map);
    switch (mode) {
        case Mode::GenericBo: c.ai_agent = generic_ucb_ai(); break;
        case Mode::HumanPlusPureExploration: c.ai_agent = pure_explorer_ai(); break;
        default: c.ai_agent = bo_muse_ai(); break;
    }
    return c;
}

void to_json(nlohmann::json& j, const SessionConfig& c) {
    j = nlohmann::json{{"objective", c.objective},
                       {"num_init", c.num_init},
                       {"budget_batches", c.budget_batches},
                       {"delta", c.delta},
                       {"zeta", c.zeta},
                       {"seed", c.seed},
                       {"human_agent", c.human_agent},
                       {"ai_agent", c.ai_agent},
                       {"mode", to_string(c.mode)},
                       {"model_noise_variance", c.model_noise_variance}};
    j["noise_std"] = c.noise_std ? nlohmann::json(*c.noise_std) : nlohmann::json();
    if (c.bounds) {
        nlohmann::json b = nlohmann::json::array();
        for (int i = 0; i < c.bounds->dim(); ++i) {
            b.push_back({c.bounds->lower[i], c.bounds->upper[i]});
        }
        j["bounds"] = b;
    } else {
        j["bounds"] = nlohmann::json();
    }
}

void from_json(const nlohmann::json& j, SessionConfig& c) {
    c = SessionConfig{};
    c.objective = j.at("objective").get<ObjectiveConfig>();
    c.num_init = j.value("num_init", 3);
    c.budget_batches = j.value("budget_batches", 10);
    c.delta = j.value("delta", 0.1);
    c.zeta = j.value("zeta", 7.0);
    c.seed = j.value("seed", std::uint64_t{0});
    c.mode = mode_from_string(j.value("mode", std::string("bo_muse")));
    c.model_noise_variance = j.value("model_noise_variance", 1e-4);
    if (j.contains("noise_std") && !j.at("noise_std").is_null()) {
        c.noise_std = j.at("noise_std").get<double>();
    }
    if (j.contains("bounds") && !j.at("bounds").is_null()) {
        // Reuse the objective parser for [[lo, hi], ...].
        ObjectiveConfig tmp = nlohmann::json{{"kind", "builtin"}, {"bounds", j.at("bounds")}}.get<ObjectiveConfig>();
        c.bounds = tmp.bounds;
    }
    if (j.contains("human_agent")) {
        c.human_agent = j.at("human_agent").get<AgentSpec>();
    } else {
        std::shared_ptr<const FeatureMap> features;
        if (c.objective.kind == "builtin") {
            features = builtin(c.objective.name).feature_map;
        }
        c.human_agent = simulated_expert(features);
    }
    if (j.contains("ai_agent")) {
        c.ai_agent = j.at("ai_agent").get<AgentSpec>();
    } else {
        c.ai_agent = c.mode == Mode::GenericBo                  ? generic_ucb_ai()
                     : c.mode == Mode::HumanPlusPureExploration ? pure_explorer_ai()
                                                                : bo_muse_ai();
    }
}

bool BatchRecord::operator==(const BatchRecord& other) const {
    auto same_vec = [](const std::optional<Vector>& a, const std::optional<Vector>& b) {
        if (a.has_value() != b.has_value()) return false;
        if (!a) return true;
        return a->size() == b->size() && *a == *b;
    };
    return s == other.s && same_vec(x_human, other.x_human) && y_human == other.y_human &&
           same_vec(x_ai, other.x_ai) && y_ai == other.y_ai && gamma_after == other.gamma_after &&
           B_after == other.B_after && beta_used == other.beta_used;
}

namespace {

nlohmann::json opt_vec(const std::optional<Vector>& v) {
    return v ? nlohmann::json(to_std(*v)) : nlohmann::json();
}

nlohmann::json opt_num(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json();
}

std::optional<Vector> read_vec(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return from_std(j.at(key).get<std::vector<double>>());
}

std::optional<double> read_num(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const BatchRecord& r) {
    j = nlohmann::json{{"s", r.s},
                       {"x_human", opt_vec(r.x_human)},
                       {"y_human", opt_num(r.y_human)},
                       {"x_ai", opt_vec(r.x_ai)},
                       {"y_ai", opt_num(r.y_ai)},
                       {"gamma_after", r.gamma_after},
                       {"B_after", r.B_after},
                       {"beta_used", opt_num(r.beta_used)}};
}

void from_json(const nlohmann::json& j, BatchRecord& r) {
    r.s = j.at("s").get<int>();
    r.x_human = read_vec(j, "x_human");
    r.y_human = read_num(j, "y_human");
    r.x_ai = read_vec(j, "x_ai");
    r.y_ai = read_num(j, "y_ai");
    r.gamma_after = j.at("gamma_after").get<double>();
    r.B_after = j.at("B_after").get<double>();
    r.beta_used = read_num(j, "beta_used");
}

void to_json(nlohmann::json& j, const SessionSnapshot& s) {
    j = nlohmann::json{{"config", s.config},           {"observations", s.observations},
                       {"records", s.records},         {"initial_gamma", s.initial_gamma},
                       {"gamma", s.gamma},             {"B", s.B},
                       {"pending_human", opt_vec(s.pending_human)}};
}

void from_json(const nlohmann::json& j, SessionSnapshot& s) {
    s.config = j.at("config").get<SessionConfig>();
    s.observations = j.at("observations").get<std::vector<Observation>>();
    s.records = j.at("records").get<std::vector<BatchRecord>>();
    s.initial_gamma = j.at("initial_gamma").get<double>();
    s.gamma = j.at("gamma").get<double>();
    s.B = j.at("B").get<double>();
    s.pending_human = read_vec(j, "pending_human");
}

RegretTrace compute_regret(const std::vector<Observation>& observations, const ObjectiveSpec& objective) {
    RegretTrace trace;
    double best_y = objective.sense == Sense::Minimize ? std::numeric_limits<double>::infinity()
                                                       : -std::numeric_limits<double>::infinity();
    for (const auto& o : observations) {
        best_y = objective.sense == Sense::Minimize ? std::min(best_y, o.y) : std::max(best_y, o.y);
        trace.best_observed.push_back(best_y);
    }

    trace.has_optimum = objective.optimum_value.has_value() &&
                        std::all_of(observations.begin(), observations.end(),
                                    [](const Observation& o) { return o.f_true.has_value(); });
    if (!trace.has_optimum) {
        return trace;
    }

    // Work in the maximize orientation: regret = g(x*) - g(x) >= 0.
    const double optimum = objective.oriented(*objective.optimum_value);
    double best = -std::numeric_limits<double>::infinity();
    int current_batch = 0;
    double batch_min = 0.0;
    bool in_batch = false;
    auto flush = [&] {
        if (in_batch) {
            trace.batch_regret.push_back(batch_min);
            const double prev = trace.cumulative.empty() ? 0.0 : trace.cumulative.back();
            trace.cumulative.push_back(prev + batch_min);
        }
        in_batch = false;
    };
    for (const auto& o : observations) {
        const double g = objective.oriented(*o.f_true);
        best = std::max(best, g);
        trace.simple_regret.push_back(std::max(0.0, optimum - best));
        if (o.batch > 0) {
            const double r = std::max(0.0, optimum - g);
            if (!in_batch || o.batch != current_batch) {
                flush();
                current_batch = o.batch;
                batch_min = r;
                in_batch = true;
            } else {
                batch_min = std::min(batch_min, r);
            }
        }
    }
    flush();
    return trace;
}

Session::Session(SessionConfig config) : config_(std::move(config)) {
    config_.validate();
    objective_ = make_objective(config_.objective);
    resolve();
    draw_initial_design();
}

Session::Session(SessionConfig config, ObjectiveSpec objective)
    : config_(std::move(config)), objective_(std::move(objective)) {
    config_.validate();
    resolve();
    draw_initial_design();
}

Session::Session(SessionSnapshot snapshot) : Session(snapshot, make_objective(snapshot.config.objective)) {}

Session::Session(SessionSnapshot snapshot, ObjectiveSpec objective)
    : config_(std::move(snapshot.config)),
      objective_(std::move(objective)),
      observations_(std::move(snapshot.observations)),
      records_(std::move(snapshot.records)),
      initial_gamma_(snapshot.initial_gamma),
      gamma_(snapshot.gamma),
      B_(snapshot.B),
      pending_human_(std::move(snapshot.pending_human)) {
    config_.validate();
    resolve();
    if (static_cast<int>(records_.size()) > config_.budget_batches) {
        throw InputError("snapshot has more records than the batch budget");
    }
}

void Session::resolve() {
    if (!objective_.eval) {
        throw InputError("session: objective has no evaluator");
    }
    bounds_ = config_.bounds ? *config_.bounds : objective_.bounds;
    if (bounds_.dim() == 0) {
        throw InputError("session: empty bounds");
    }
    if (objective_.dim != 0 && bounds_.dim() != objective_.dim) {
        throw InputError("session: bounds dimension does not match the objective");
    }
    if (auto d = config_.human_agent.kernel.input_dim(); d && uses_human(config_.mode) && *d != bounds_.dim()) {
        throw InputError("session: human kernel feature map expects dimension " + std::to_string(*d));
    }
    if (auto d = config_.ai_agent.kernel.input_dim(); d && *d != bounds_.dim()) {
        throw InputError("session: ai kernel feature map expects dimension " + std::to_string(*d));
    }
    if (config_.noise_std) {
        noise_std_ = *config_.noise_std;
    } else {
        noise_std_ = objective_.noiseless ? 1e-2 * estimate_range(objective_) : 0.0;
    }
}

Observation Session::evaluate(const Vector& x, Source source, int batch, Rng& noise) const {
    const double f = objective_.eval(x);
    if (!std::isfinite(f)) {
        throw EvaluationError("objective returned a non-finite value");
    }
    Observation o;
    o.x = x;
    o.source = source;
    o.batch = batch;
    if (objective_.noiseless) {
        o.f_true = f;
        o.y = f + noise_std_ * noise.normal();
    } else {
        o.y = f;
    }
    return o;
}

void Session::draw_initial_design() {
    Rng design = stream_rng(config_.seed, Stream::InitialDesign, 0);
    Rng noise = stream_rng(config_.seed, Stream::Noise, 0);
    std::vector<Observation> initial;
    for (int i = 0; i < config_.num_init; ++i) {
        initial.push_back(evaluate(design.uniform_in(bounds_), Source::Init, 0, noise));
    }
    // The initial design enters the information gain as one batch under the prior.
    const AgentModel prior = fit_agent_model(config_.ai_agent, {}, objective_.sense, bounds_);
    double gain = 0.0;
    for (const auto& o : initial) {
        gain += prior.gp.information_gain_increment(o.x);
    }
    observations_ = std::move(initial);
    initial_gamma_ = gamma_ = gain;
    B_ = 1.0;
}

bool Session::finished() const noexcept {
    return static_cast<int>(records_.size()) >= config_.budget_batches;
}

bool Session::awaiting_human() const noexcept {
    return !finished() && uses_human(config_.mode) && config_.human_agent.policy == Policy::LiveHuman &&
           !pending_human_;
}

BetaSchedule Session::schedule() const {
    BetaSchedule s;
    s.delta = config_.delta;
    s.running_gamma = gamma_;
    s.running_B = B_;
    s.sigma = std::sqrt(config_.model_noise_variance);
    s.zeta = config_.zeta;
    s.iteration = static_cast<int>(records_.size()) + 1;
    return s;
}

SessionSnapshot Session::snapshot() const {
    return SessionSnapshot{config_, observations_, records_, initial_gamma_, gamma_, B_, pending_human_};
}

void Session::post_human_suggestion(const Vector& x) {
    if (finished()) {
        throw StateError("session is finished");
    }
    if (!uses_human(config_.mode) || config_.human_agent.policy != Policy::LiveHuman) {
        throw StateError("session has no live human agent");
    }
    if (pending_human_) {
        throw StateError("a human suggestion was already posted for this batch");
    }
    check_in_bounds(bounds_, x);
    pending_human_ = x;
}

BatchRecord Session::run_batch() {
    if (finished()) {
        throw StateError("session is finished");
    }
    if (awaiting_human()) {
        throw StateError("awaiting the human suggestion for this batch");
    }
    const int s = static_cast<int>(records_.size()) + 1;
    const BetaSchedule sched = schedule();

    // Models see D_{s-1} only.
    const AgentModel ai_model = fit_agent_model(config_.ai_agent, observations_, objective_.sense, bounds_);

    BatchRecord record;
    record.s = s;
    std::optional<Vector> x_human;
    std::optional<Vector> x_ai;

    if (uses_ai(config_.mode)) {
        SuggestContext ctx{bounds_, objective_.sense,
                           stream_rng(config_.seed, Stream::AiMaximizer, static_cast<std::uint64_t>(s)).next_u64(),
                           std::nullopt, {}};
        x_ai = suggest_with_model(config_.ai_agent, ai_model, sched, ctx);
        const AcquisitionSpec acq = acquisition_for(config_.ai_agent, sched, ai_model);
        if (const auto* ucb = std::get_if<GpUcb>(&acq)) {
            record.beta_used = ucb->beta;
        }
    }
    if (uses_human(config_.mode)) {
        SuggestContext ctx{bounds_, objective_.sense,
                           stream_rng(config_.seed, Stream::HumanMaximizer, static_cast<std::uint64_t>(s)).next_u64(),
                           pending_human_, {}};
        x_human = suggest(config_.human_agent, observations_, sched, ctx);
        if (!x_human) {
            throw StateError("awaiting the human suggestion for this batch");
        }
    }

    Rng noise = stream_rng(config_.seed, Stream::Noise, static_cast<std::uint64_t>(s));
    std::vector<Observation> fresh;
    if (x_human) {
        fresh.push_back(evaluate(*x_human, Source::Human, s, noise));
        record.x_human = fresh.back().x;
        record.y_human = fresh.back().y;
    }
    if (x_ai) {
        fresh.push_back(evaluate(*x_ai, Source::Ai, s, noise));
        record.x_ai = fresh.back().x;
        record.y_ai = fresh.back().y;
    }

    double gamma = gamma_;
    for (const auto& o : fresh) {
        gamma += ai_model.gp.information_gain_increment(o.x);
    }
    std::vector<Observation> next = observations_;
    next.insert(next.end(), fresh.begin(), fresh.end());
    const AgentModel refit = fit_agent_model(config_.ai_agent, next, objective_.sense, bounds_);
    const double B = std::max(B_, refit.gp.rkhs_norm_estimate());

    record.gamma_after = gamma;
    record.B_after = B;

    // Commit.
    observations_ = std::move(next);
    records_.push_back(record);
    gamma_ = gamma;
    B_ = B;
    pending_human_.reset();
    return record;
}

SessionResult run_session(const SessionConfig& config) {
    return run_session(config, make_objective(config.objective));
}

SessionResult run_session(const SessionConfig& config, ObjectiveSpec objective) {
    if (uses_human(config.mode) && config.human_agent.policy == Policy::LiveHuman) {
        throw StateError("run_session needs machine agents; drive live sessions through the service");
    }
    Session session(config, std::move(objective));
    while (!session.finished()) {
        session.run_batch();
    }
    return SessionResult{session.observations(), session.records(),
                         compute_regret(session.observations(), session.objective()), session.initial_gamma()};
}

std::string format_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

void write_session_csv(std::ostream& out, const std::vector<Observation>& observations,
                       const std::vector<BatchRecord>& records, const RegretTrace& regret, double initial_gamma,
                       int dim, bool include_truth) {
    out << "s,t,source";
    for (int i = 0; i < dim; ++i) {
        out << ",x" << i;
    }
    out << ",y,f_star,simple_regret,batch_regret,gamma,B,beta\n";

    const bool truth = include_truth && regret.has_optimum;
    for (std::size_t t = 0; t < observations.size(); ++t) {
        const auto& o = observations[t];
        out << o.batch << ',' << (t + 1) << ',' << to_string(o.source);
        for (int i = 0; i < dim; ++i) {
            out << ',' << (i < o.x.size() ? format_number(o.x[i]) : std::string());
        }
        out << ',' << format_number(o.y) << ',';
        if (include_truth && o.f_true) out << format_number(*o.f_true);
        out << ',';
        if (truth) out << format_number(regret.simple_regret[t]);
        out << ',';
        const BatchRecord* rec = nullptr;
        if (o.batch > 0 && o.batch <= static_cast<int>(records.size())) {
            rec = &records[static_cast<std::size_t>(o.batch - 1)];
        }
        if (truth && o.batch > 0 && o.batch <= static_cast<int>(regret.batch_regret.size())) {
            out << format_number(regret.batch_regret[static_cast<std::size_t>(o.batch - 1)]);
        }
        out << ',';
        if (rec) {
            out << format_number(rec->gamma_after) << ',' << format_number(rec->B_after) << ',';
            if (rec->beta_used) out << format_number(*rec->beta_used);
        } else {
            out << format_number(initial_gamma) << ",1,";
        }
        out << '\n';
    }
}

}  // namespace bomuse
