#include "bomuse/service.hpp"

#include "bomuse/errors.hpp"

#include <httplib.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace bomuse {

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::AwaitingHuman: return "awaiting_human";
        case Phase::AwaitingAdvance: return "awaiting_advance";
        case Phase::Finished: return "finished";
    }
    return "unknown";
}

Phase phase_from_string(const std::string& name) {
    if (name == "awaiting_human") return Phase::AwaitingHuman;
    if (name == "awaiting_advance") return Phase::AwaitingAdvance;
    if (name == "finished") return Phase::Finished;
    throw InputError("unknown session phase '" + name + "'");
}

Phase phase_of(const Session& session) {
    if (session.finished()) return Phase::Finished;
    if (session.awaiting_human()) return Phase::AwaitingHuman;
    return Phase::AwaitingAdvance;
}

namespace {

nlohmann::json bounds_json(const Bounds& b) {
    nlohmann::json out = nlohmann::json::array();
    for (int i = 0; i < b.dim(); ++i) {
        out.push_back({b.lower[i], b.upper[i]});
    }
    return out;
}

Bounds bounds_from_json(const nlohmann::json& j) {
    Vector lo(static_cast<Eigen::Index>(j.size()));
    Vector hi(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        lo[static_cast<Eigen::Index>(i)] = j[i].at(0).get<double>();
        hi[static_cast<Eigen::Index>(i)] = j[i].at(1).get<double>();
    }
    return Bounds(lo, hi);
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

SessionState state_of(const std::string& id, const Session& session, std::string created_at) {
    SessionState s;
    s.id = id;
    s.snapshot = session.snapshot();
    s.bounds = session.bounds();
    s.phase = phase_of(session);
    s.created_at = std::move(created_at);
    s.updated_at = utc_now();
    return s;
}

}  // namespace

void to_json(nlohmann::json& j, const SessionState& s) {
    j = nlohmann::json{{"id", s.id},
                       {"snapshot", s.snapshot},
                       {"bounds", bounds_json(s.bounds)},
                       {"phase", to_string(s.phase)},
                       {"created_at", s.created_at},
                       {"updated_at", s.updated_at}};
}

void from_json(const nlohmann::json& j, SessionState& s) {
    s.id = j.at("id").get<std::string>();
    s.snapshot = j.at("snapshot").get<SessionSnapshot>();
    s.bounds = bounds_from_json(j.at("bounds"));
    s.phase = phase_from_string(j.at("phase").get<std::string>());
    s.created_at = j.at("created_at").get<std::string>();
    s.updated_at = j.at("updated_at").get<std::string>();
}

nlohmann::json public_view(const SessionState& state) {
    const SessionSnapshot& snap = state.snapshot;
    const bool reveal = snap.config.objective.public_optimum || state.phase == Phase::Finished;
    const Sense sense = snap.config.objective.sense;

    nlohmann::json observations = nlohmann::json::array();
    std::optional<double> best;
    for (const auto& o : snap.observations) {
        nlohmann::json item = o;
        if (!reveal) {
            item.erase("f_true");
        }
        observations.push_back(std::move(item));
        if (!best || (sense == Sense::Minimize ? o.y < *best : o.y > *best)) {
            best = o.y;
        }
    }
    nlohmann::json config = snap.config;
    if (!reveal) {
        config["objective"].erase("optimum_value");
    }
    return nlohmann::json{
        {"id", state.id},
        {"phase", to_string(state.phase)},
        {"created_at", state.created_at},
        {"updated_at", state.updated_at},
        {"config", config},
        {"bounds", bounds_json(state.bounds)},
        {"sense", to_string(sense)},
        {"observations", observations},
        {"records", snap.records},
        {"batches_done", snap.records.size()},
        {"budget_batches", snap.config.budget_batches},
        {"gamma", snap.gamma},
        {"B", snap.B},
        {"best_y", best ? nlohmann::json(*best) : nlohmann::json()},
        {"pending_human", snap.pending_human ? nlohmann::json(to_std(*snap.pending_human)) : nlohmann::json()},
    };
}

bool valid_session_id(const std::string& id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                        c == '-';
        if (!ok) return false;
    }
    return true;
}

struct SessionStore::Entry {
    // Serializes mutations on this id.
    std::mutex commit;
    // Guards the swap of `committed`; readers copy the pointer and go.
    mutable std::mutex publish;
    std::shared_ptr<const SessionState> committed;
    // Live engine object, rebuilt from `committed` on first use after a reload.
    std::unique_ptr<Session> session;

    std::shared_ptr<const SessionState> current() const {
        std::lock_guard lock(publish);
        return committed;
    }
    void set(SessionState state) {
        auto next = std::make_shared<const SessionState>(std::move(state));
        std::lock_guard lock(publish);
        committed = std::move(next);
    }
    Session& live() {
        if (!session) {
            session = std::make_unique<Session>(current()->snapshot);
        }
        return *session;
    }
};

SessionStore::SessionStore(std::filesystem::path data_dir, ServiceDefaults defaults)
    : dir_(std::move(data_dir)), defaults_(defaults) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_)) {
        throw StartupError("cannot use data directory '" + dir_.string() + "'");
    }
}

SessionStore::~SessionStore() = default;

std::filesystem::path SessionStore::path_for(const std::string& id) const {
    return dir_ / (id + ".json");
}

void SessionStore::persist(const SessionState& state) const {
    const auto target = path_for(state.id);
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << nlohmann::json(state).dump(2) << '\n';
        out.flush();
        if (!out) {
            throw std::runtime_error("failed to write " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, target);
}

std::shared_ptr<SessionStore::Entry> SessionStore::entry(const std::string& id, bool must_exist) {
    if (!valid_session_id(id)) {
        throw NotFoundError("no session '" + id + "'");
    }
    std::lock_guard lock(map_mutex_);
    if (auto it = entries_.find(id); it != entries_.end()) {
        return it->second;
    }
    const auto path = path_for(id);
    if (!std::filesystem::exists(path)) {
        if (must_exist) throw NotFoundError("no session '" + id + "'");
        return nullptr;
    }
    std::ifstream in(path, std::ios::binary);
    auto e = std::make_shared<Entry>();
    e->set(nlohmann::json::parse(in).get<SessionState>());
    entries_[id] = e;
    return e;
}

SessionState SessionStore::create(std::string id, const nlohmann::json& config) {
    if (!config.is_object()) {
        throw InputError("session config must be a JSON object");
    }
    nlohmann::json merged = config;
    if (defaults_.delta && !merged.contains("delta")) merged["delta"] = *defaults_.delta;
    if (defaults_.zeta && !merged.contains("zeta")) merged["zeta"] = *defaults_.zeta;
    if (defaults_.noise_std && (!merged.contains("noise_std") || merged["noise_std"].is_null())) {
        merged["noise_std"] = *defaults_.noise_std;
    }
    SessionConfig parsed;
    try {
        parsed = merged.get<SessionConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid session config: ") + e.what());
    }
    return create(std::move(id), std::move(parsed));
}

SessionState SessionStore::create(std::string id, SessionConfig config) {
    config.validate();
    {
        std::lock_guard lock(map_mutex_);
        if (id.empty()) {
            do {
                id = "session-" + std::to_string(++counter_);
            } while (entries_.count(id) || std::filesystem::exists(path_for(id)));
        } else if (!valid_session_id(id)) {
            throw InputError("session id must be 1-64 characters from [A-Za-z0-9_-]");
        } else if (entries_.count(id) || std::filesystem::exists(path_for(id))) {
            throw ConflictError("session '" + id + "' already exists");
        }
        // Reserve the id while the initial design is evaluated.
        entries_[id] = nullptr;
    }
    try {
        auto e = std::make_shared<Entry>();
        e->session = std::make_unique<Session>(std::move(config));
        SessionState state = state_of(id, *e->session, utc_now());
        state.updated_at = state.created_at;
        persist(state);
        e->set(state);
        std::lock_guard lock(map_mutex_);
        entries_[id] = e;
        return state;
    } catch (...) {
        std::lock_guard lock(map_mutex_);
        entries_.erase(id);
        throw;
    }
}

namespace {

/// Entries reserved by an in-flight create hold a null pointer.
void require_ready(const std::shared_ptr<void>& e, const std::string& id) {
    if (!e) throw NotFoundError("no session '" + id + "'");
}

}  // namespace

SessionState SessionStore::get(const std::string& id) {
    auto e = entry(id, true);
    require_ready(e, id);
    return *e->current();
}

SessionState SessionStore::post_suggestion(const std::string& id, const Vector& x) {
    auto e = entry(id, true);
    require_ready(e, id);
    std::lock_guard lock(e->commit);
    Session next = e->live();
    if (next.finished()) {
        throw StateError("session is finished");
    }
    next.post_human_suggestion(x);
    SessionState state = state_of(id, next, e->current()->created_at);
    persist(state);
    *e->session = std::move(next);
    e->set(state);
    return state;
}

std::pair<BatchRecord, SessionState> SessionStore::advance(const std::string& id) {
    auto e = entry(id, true);
    require_ready(e, id);
    std::lock_guard lock(e->commit);
    Session next = e->live();
    BatchRecord record = next.run_batch();
    SessionState state = state_of(id, next, e->current()->created_at);
    persist(state);
    *e->session = std::move(next);
    e->set(state);
    return {record, state};
}

std::string SessionStore::export_csv(const std::string& id) {
    auto e = entry(id, true);
    require_ready(e, id);
    std::lock_guard lock(e->commit);
    const Session& session = e->live();
    const auto snap = e->current()->snapshot;
    const bool truth = session.finished() || snap.config.objective.public_optimum;
    std::ostringstream out;
    write_session_csv(out, snap.observations, snap.records, compute_regret(snap.observations, session.objective()),
                      snap.initial_gamma, session.bounds().dim(), truth);
    return out.str();
}

std::vector<std::string> SessionStore::list() const {
    std::set<std::string> ids;
    for (const auto& f : std::filesystem::directory_iterator(dir_)) {
        if (f.path().extension() == ".json") {
            ids.insert(f.path().stem().string());
        }
    }
    return {ids.begin(), ids.end()};
}

// ---------------------------------------------------------------------------

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message,
                nlohmann::json extra = nlohmann::json::object()) {
    extra["error"] = kind;
    extra["message"] = message;
    send_json(res, status, extra);
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const OutOfBoundsError& e) {
        send_error(res, 400, "out_of_bounds", e.what(),
                   {{"dimension", e.dimension}, {"value", e.value}, {"lower", e.lower}, {"upper", e.upper}});
    } catch (const NotFoundError& e) {
        send_error(res, 404, "not_found", e.what());
    } catch (const ConflictError& e) {
        send_error(res, 409, "conflict", e.what());
    } catch (const StateError& e) {
        send_error(res, 409, "state", e.what());
    } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, "invalid_json", e.what());
    } catch (const std::invalid_argument& e) {
        send_error(res, 400, "invalid", e.what());
    } catch (const DomainError& e) {
        send_error(res, 400, "invalid", e.what());
    } catch (const EvaluationError& e) {
        send_error(res, 502, "evaluation", e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
    }
}

nlohmann::json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    return nlohmann::json::parse(req.body);
}

}  // namespace

Server::Server(SessionStore& store, ServerOptions options)
    : store_(store), options_(std::move(options)), http_(std::make_unique<httplib::Server>()) {
    // The library default adds SO_REUSEPORT, which would let a second server
    // silently share an occupied port.
    http_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    http_->new_task_queue = [n = options_.threads] { return new httplib::ThreadPool(static_cast<size_t>(n)); };
    routes();
}

Server::~Server() {
    stop();
}

void Server::routes() {
    auto& http = *http_;
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    http.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    http.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });

    http.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, {{"sessions", store_.list()}}); });
    });

    http.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            nlohmann::json body = parse_body(req);
            std::string id = body.value("id", std::string());
            nlohmann::json config;
            if (body.contains("config")) {
                config = body.at("config");
            } else {
                config = body;
                config.erase("id");
            }
            send_json(res, 201, public_view(store_.create(id, config)));
        });
    });

    http.Get(R"(/sessions/([A-Za-z0-9_\-]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, public_view(store_.get(req.matches[1]))); });
    });

    http.Post(R"(/sessions/([A-Za-z0-9_\-]+)/suggestion)",
              [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                      const nlohmann::json body = parse_body(req);
                      if (!body.contains("x") || !body.at("x").is_array()) {
                          throw InputError("body must be {\"x\": [numbers]}");
                      }
                      const Vector x = from_std(body.at("x").get<std::vector<double>>());
                      send_json(res, 200, public_view(store_.post_suggestion(req.matches[1], x)));
                  });
              });

    http.Post(R"(/sessions/([A-Za-z0-9_\-]+)/advance)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto [record, state] = store_.advance(req.matches[1]);
            nlohmann::json body = record;
            body["phase"] = to_string(state.phase);
            send_json(res, 200, body);
        });
    });

    http.Get(R"(/sessions/([A-Za-z0-9_\-]+)/export\.csv)",
             [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] { res.set_content(store_.export_csv(req.matches[1]), "text/csv"); });
             });
}

void Server::bind() {
    if (options_.port == 0) {
        port_ = http_->bind_to_any_port(options_.host);
        if (port_ <= 0) {
            throw StartupError("cannot bind " + options_.host);
        }
    } else {
        if (!http_->bind_to_port(options_.host, options_.port)) {
            throw StartupError("cannot bind " + options_.host + ":" + std::to_string(options_.port) +
                               " (address in use?)");
        }
        port_ = options_.port;
    }
}

void Server::listen() {
    if (port_ == 0) {
        throw StateError("Server::listen called before bind");
    }
    http_->listen_after_bind();
}

void Server::stop() {
    if (http_) http_->stop();
}

bool Server::running() const {
    return http_->is_running();
}

}  // namespace bomuse
