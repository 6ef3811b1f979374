#pragma once

#include "bomuse/engine.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace httplib {
class Server;
}

namespace bomuse {

enum class Phase { AwaitingHuman, AwaitingAdvance, Finished };

std::string to_string(Phase phase);
Phase phase_from_string(const std::string& name);
Phase phase_of(const Session& session);

struct SessionState {
    std::string id;
    SessionSnapshot snapshot;
    /// Resolved search box (config bounds or the objective's own).
    Bounds bounds;
    Phase phase = Phase::AwaitingAdvance;
    std::string created_at;
    std::string updated_at;
};

void to_json(nlohmann::json& j, const SessionState& s);
void from_json(const nlohmann::json& j, SessionState& s);

/// Client-facing view: true objective values are dropped unless the
/// objective's optimum is public.
nlohmann::json public_view(const SessionState& state);

/// Fallbacks applied to a session config that does not set them.
struct ServiceDefaults {
    std::optional<double> delta;
    std::optional<double> zeta;
    std::optional<double> noise_std;
};

/// Session ids: 1-64 characters from [A-Za-z0-9_-].
bool valid_session_id(const std::string& id);

/// One JSON document per session under `data_dir`, replaced by atomic rename
/// on every mutation. Mutations on one id are serialized; reads return the
/// last committed state.
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path data_dir, ServiceDefaults defaults = {});
    ~SessionStore();
    SessionStore(const SessionStore&) = delete;
    SessionStore& operator=(const SessionStore&) = delete;

    /// Creates and persists a session. An empty id gets a generated one.
    SessionState create(std::string id, const nlohmann::json& config);
    SessionState create(std::string id, SessionConfig config);
    [[nodiscard]] SessionState get(const std::string& id);
    SessionState post_suggestion(const std::string& id, const Vector& x);
    std::pair<BatchRecord, SessionState> advance(const std::string& id);
    /// Engine CSV; truth columns only once finished or when the optimum is public.
    [[nodiscard]] std::string export_csv(const std::string& id);
    [[nodiscard]] std::vector<std::string> list() const;

    [[nodiscard]] std::filesystem::path path_for(const std::string& id) const;
    [[nodiscard]] const std::filesystem::path& data_dir() const noexcept { return dir_; }
    [[nodiscard]] const ServiceDefaults& defaults() const noexcept { return defaults_; }

private:
    struct Entry;
    std::shared_ptr<Entry> entry(const std::string& id, bool must_exist);
    void persist(const SessionState& state) const;

    std::filesystem::path dir_;
    ServiceDefaults defaults_;
    mutable std::mutex map_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> entries_;
    std::uint64_t counter_ = 0;
};

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    int threads = 8;
};

/// HTTP front end:
///   POST /sessions, GET /sessions, GET /sessions/{id},
///   POST /sessions/{id}/suggestion, POST /sessions/{id}/advance,
///   GET /sessions/{id}/export.csv, GET /healthz
class Server {
public:
    Server(SessionStore& store, ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds the socket; throws StartupError if the address is unavailable.
    /// Port 0 picks a free port, reported by port().
    void bind();
    /// Serves until stop(); call bind() first.
    void listen();
    void stop();
    [[nodiscard]] int port() const noexcept { return port_; }
    [[nodiscard]] bool running() const;

private:
    void routes();

    SessionStore& store_;
    ServerOptions options_;
    std::unique_ptr<httplib::Server> http_;
    int port_ = 0;
};

}  // namespace bomuse
