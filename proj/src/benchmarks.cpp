#include "bomuse/benchmarks.hpp"

#include "bomuse/errors.hpp"

#include <httplib.h>

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <mutex>
#include <numbers>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

namespace bomuse {

std::string to_string(Sense sense) {
    return sense == Sense::Minimize ? "minimize" : "maximize";
}

Sense sense_from_string(const std::string& name) {
    if (name == "minimize" || name == "min") return Sense::Minimize;
    if (name == "maximize" || name == "max") return Sense::Maximize;
    throw InputError("unknown objective sense '" + name + "'");
}

double matyas(const Vector& x) {
    return 0.26 * (x[0] * x[0] + x[1] * x[1]) - 0.48 * x[0] * x[1];
}

double ackley(const Vector& x, double a, double b, double c) {
    const double d = static_cast<double>(x.size());
    const double sq = x.squaredNorm() / d;
    const double cs = (c * x.array()).cos().sum() / d;
    return -a * std::exp(-b * std::sqrt(sq)) - std::exp(cs) + a + std::numbers::e;
}

double rastrigin(const Vector& x) {
    const double d = static_cast<double>(x.size());
    return 10.0 * d + (x.array().square() - 10.0 * (2.0 * std::numbers::pi * x.array()).cos()).sum();
}

double levy(const Vector& x) {
    const Eigen::Index d = x.size();
    const Eigen::ArrayXd w = 1.0 + (x.array() - 1.0) / 4.0;
    const double pi = std::numbers::pi;
    auto sin2 = [](double v) {
        const double s = std::sin(v);
        return s * s;
    };
    double s = 0.0;
    for (Eigen::Index i = 0; i + 1 < d; ++i) {
        s += (w[i] - 1.0) * (w[i] - 1.0) * (1.0 + 10.0 * sin2(pi * w[i] + 1.0));
    }
    const double wd = w[d - 1];
    return sin2(pi * w[0]) + s + (wd - 1.0) * (wd - 1.0) * (1.0 + sin2(2.0 * pi * wd));
}

namespace {

std::string canonical_builtin(const std::string& name) {
    if (name == "matyas" || name == "matyas-2d") return "matyas-2d";
    if (name == "ackley" || name == "ackley-4d") return "ackley-4d";
    if (name == "rastrigin" || name == "rastrigin-5d") return "rastrigin-5d";
    if (name == "levy" || name == "levy-6d") return "levy-6d";
    throw InputError("unknown benchmark '" + name + "'");
}

}  // namespace

std::vector<std::string> builtin_names() {
    return {"matyas-2d", "ackley-4d", "rastrigin-5d", "levy-6d"};
}

ObjectiveSpec builtin(const std::string& requested) {
    const std::string name = canonical_builtin(requested);
    ObjectiveSpec spec;
    spec.name = name;
    spec.sense = Sense::Minimize;
    spec.noiseless = true;
    spec.optimum_value = 0.0;
    spec.feature_map = builtin_feature_map(name);
    if (name == "matyas-2d") {
        spec.dim = 2;
        spec.bounds = Bounds::uniform(2, -10.0, 10.0);
        spec.eval = [](const Vector& x) { return matyas(x); };
        spec.optimum_x = Vector::Zero(2);
    } else if (name == "ackley-4d") {
        spec.dim = 4;
        spec.bounds = Bounds::uniform(4, -32.768, 32.768);
        spec.eval = [](const Vector& x) { return ackley(x); };
        spec.optimum_x = Vector::Zero(4);
    } else if (name == "rastrigin-5d") {
        spec.dim = 5;
        spec.bounds = Bounds::uniform(5, -5.12, 5.12);
        spec.eval = [](const Vector& x) { return rastrigin(x); };
        spec.optimum_x = Vector::Zero(5);
    } else {
        spec.dim = 6;
        spec.bounds = Bounds::uniform(6, -10.0, 10.0);
        spec.eval = [](const Vector& x) { return levy(x); };
        spec.optimum_x = Vector::Ones(6);
    }
    return spec;
}

double estimate_range(const ObjectiveSpec& objective, int probes) {
    Rng rng(0xbe9c4, 0, 0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < probes; ++i) {
        const double v = objective.eval(rng.uniform_in(objective.bounds));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (objective.optimum_value) {
        lo = std::min(lo, *objective.optimum_value);
        hi = std::max(hi, *objective.optimum_value);
    }
    return hi - lo;
}

void to_json(nlohmann::json& j, const ObjectiveConfig& c) {
    j = nlohmann::json{{"kind", c.kind}, {"name", c.name}, {"sense", to_string(c.sense)},
                       {"public_optimum", c.public_optimum}};
    if (!c.command.empty()) j["command"] = c.command;
    if (!c.url.empty()) j["url"] = c.url;
    if (c.bounds) {
        nlohmann::json b = nlohmann::json::array();
        for (int i = 0; i < c.bounds->dim(); ++i) {
            b.push_back({c.bounds->lower[i], c.bounds->upper[i]});
        }
        j["bounds"] = b;
    }
    if (c.feature_map) j["feature_map"] = *c.feature_map;
    if (c.optimum_value) j["optimum_value"] = *c.optimum_value;
}

void from_json(const nlohmann::json& j, ObjectiveConfig& c) {
    c = ObjectiveConfig{};
    c.kind = j.value("kind", std::string("builtin"));
    c.name = j.value("name", std::string());
    c.command = j.value("command", std::string());
    c.url = j.value("url", std::string());
    c.sense = sense_from_string(j.value("sense", std::string(c.kind == "builtin" ? "minimize" : "maximize")));
    c.public_optimum = j.value("public_optimum", false);
    if (j.contains("bounds") && !j.at("bounds").is_null()) {
        const auto& b = j.at("bounds");
        Vector lo(static_cast<Eigen::Index>(b.size()));
        Vector hi(static_cast<Eigen::Index>(b.size()));
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (!b[i].is_array() || b[i].size() != 2) {
                throw InputError("objective bounds: entry " + std::to_string(i) + " must be [lo, hi]");
            }
            lo[static_cast<Eigen::Index>(i)] = b[i][0].get<double>();
            hi[static_cast<Eigen::Index>(i)] = b[i][1].get<double>();
        }
        c.bounds = Bounds(lo, hi);
    }
    if (j.contains("feature_map") && !j.at("feature_map").is_null()) {
        c.feature_map = j.at("feature_map").get<std::string>();
    }
    if (j.contains("optimum_value") && !j.at("optimum_value").is_null()) {
        c.optimum_value = j.at("optimum_value").get<double>();
    }
}

ObjectiveSpec make_objective(const ObjectiveConfig& config) {
    if (config.kind == "builtin") {
        ObjectiveSpec spec = builtin(config.name);
        spec.public_optimum = config.public_optimum;
        if (config.bounds) {
            if (config.bounds->dim() != spec.dim) {
                throw InputError("objective bounds: dimension does not match builtin '" + spec.name + "'");
            }
            spec.bounds = *config.bounds;
        }
        return spec;
    }
    if (config.kind != "subprocess" && config.kind != "http") {
        throw InputError("unknown objective kind '" + config.kind + "'");
    }
    if (!config.bounds) {
        throw InputError("external objective '" + config.name + "' needs explicit bounds");
    }
    ObjectiveSpec spec;
    spec.name = config.name.empty() ? config.kind : config.name;
    spec.bounds = *config.bounds;
    spec.dim = spec.bounds.dim();
    spec.sense = config.sense;
    spec.noiseless = false;
    spec.optimum_value = config.optimum_value;
    spec.public_optimum = config.public_optimum;
    if (config.feature_map) {
        spec.feature_map = builtin_feature_map(*config.feature_map);
    }
    if (config.kind == "subprocess") {
        if (config.command.empty()) {
            throw InputError("subprocess objective needs a command");
        }
        auto proc = std::make_shared<SubprocessObjective>(config.command);
        auto mutex = std::make_shared<std::mutex>();
        spec.eval = [proc, mutex](const Vector& x) {
            std::lock_guard lock(*mutex);
            return (*proc)(x);
        };
    } else {
        if (config.url.empty()) {
            throw InputError("http objective needs a url");
        }
        spec.eval = [url = config.url](const Vector& x) { return http_objective_call(url, x); };
    }
    return spec;
}

namespace {

double parse_reply(const std::string& body) {
    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw EvaluationError(std::string("objective reply is not JSON: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("y") || !reply.at("y").is_number()) {
        throw EvaluationError("objective reply lacks a numeric \"y\": " + body);
    }
    const double y = reply.at("y").get<double>();
    if (!std::isfinite(y)) {
        throw EvaluationError("objective returned a non-finite value");
    }
    return y;
}

}  // namespace

SubprocessObjective::SubprocessObjective(std::string command) : command_(std::move(command)) {}

SubprocessObjective::~SubprocessObjective() {
    stop();
}

void SubprocessObjective::start() {
    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
        throw EvaluationError(std::string("pipe: ") + std::strerror(errno));
    }
    const pid_t pid = fork();
    if (pid < 0) {
        throw EvaluationError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
    fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    buffer_.clear();
}

void SubprocessObjective::stop() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
        int status = 0;
        if (waitpid(pid_, &status, WNOHANG) == 0) {
            kill(pid_, SIGTERM);
            waitpid(pid_, &status, 0);
        }
    }
    pid_ = -1;
}

double SubprocessObjective::operator()(const Vector& x) {
    if (pid_ < 0) {
        start();
    }
    const std::string line = nlohmann::json{{"x", to_std(x)}}.dump() + "\n";
    // Writing to a dead child must not kill the whole process.
    std::signal(SIGPIPE, SIG_IGN);
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = write(to_child_, line.data() + written, line.size() - written);
        if (n <= 0) {
            stop();
            throw EvaluationError("objective process closed its input");
        }
        written += static_cast<std::size_t>(n);
    }
    while (true) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string reply = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return parse_reply(reply);
        }
        char chunk[4096];
        const ssize_t n = read(from_child_, chunk, sizeof(chunk));
        if (n <= 0) {
            stop();
            throw EvaluationError("objective process exited without replying");
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

double http_objective_call(const std::string& url, const Vector& x) {
    // Split "scheme://host[:port]/path".
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw InputError("http objective url must include a scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(10);
    client.set_read_timeout(3600);
    const std::string body = nlohmann::json{{"x", to_std(x)}}.dump();
    auto res = client.Post(path, body, "application/json");
    if (!res) {
        throw EvaluationError("http objective: request to " + url + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw EvaluationError("http objective: " + url + " answered status " + std::to_string(res->status));
    }
    return parse_reply(res->body);
}

}  // namespace bomuse
