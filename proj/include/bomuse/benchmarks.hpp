#pragma once

#include "bomuse/kernels.hpp"
#include "bomuse/types.hpp"

#include <json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bomuse {

enum class Sense { Minimize, Maximize };

std::string to_string(Sense sense);
Sense sense_from_string(const std::string& name);

/// An objective the engine can query. Builtins are pure and noiseless; the
/// engine adds observation noise. External objectives report what they measure.
struct ObjectiveSpec {
    std::string name;
    int dim = 0;
    Bounds bounds;
    std::function<double(const Vector&)> eval;
    std::optional<Vector> optimum_x;
    std::optional<double> optimum_value;
    std::shared_ptr<const FeatureMap> feature_map;
    Sense sense = Sense::Minimize;
    /// Engine injects Gaussian noise only when true.
    bool noiseless = true;
    /// Whether true objective values may be shown while a session is running.
    bool public_optimum = false;

    /// Value in the engine's maximize orientation.
    [[nodiscard]] double oriented(double value) const { return sense == Sense::Minimize ? -value : value; }
};

/// matyas-2d, ackley-4d, rastrigin-5d, levy-6d (short names without the
/// dimension suffix are accepted). Throws InputError for anything else.
ObjectiveSpec builtin(const std::string& name);
std::vector<std::string> builtin_names();

double matyas(const Vector& x);
double ackley(const Vector& x, double a = 20.0, double b = 0.2, double c = 2.0 * 3.14159265358979323846);
double rastrigin(const Vector& x);
double levy(const Vector& x);

/// max - min of eval over a fixed probe set; used to scale the default noise.
double estimate_range(const ObjectiveSpec& objective, int probes = 256);

/// Serializable description of where an objective comes from.
struct ObjectiveConfig {
    std::string kind = "builtin";  // builtin | subprocess | http
    std::string name;              // builtin name, or a label for external objectives
    std::string command;           // subprocess: shell command speaking the line protocol
    std::string url;               // http: endpoint receiving {"x": [...]} and answering {"y": v}
    std::optional<Bounds> bounds;  // required for external objectives
    Sense sense = Sense::Maximize;
    std::optional<std::string> feature_map;
    std::optional<double> optimum_value;
    bool public_optimum = false;
};

void to_json(nlohmann::json& j, const ObjectiveConfig& c);
void from_json(const nlohmann::json& j, ObjectiveConfig& c);

/// Resolve a config into something evaluable. External objectives spawn their
/// process or client lazily on first evaluation.
ObjectiveSpec make_objective(const ObjectiveConfig& config);

/// Line-delimited JSON over a child process's stdin/stdout:
/// one request {"x":[...]} per line, one reply {"y":v} per line.
class SubprocessObjective {
public:
    explicit SubprocessObjective(std::string command);
    ~SubprocessObjective();
    SubprocessObjective(const SubprocessObjective&) = delete;
    SubprocessObjective& operator=(const SubprocessObjective&) = delete;

    double operator()(const Vector& x);

private:
    void start();
    void stop();

    std::string command_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

/// POSTs {"x":[...]} to `url` and reads {"y": v} from the response body.
double http_objective_call(const std::string& url, const Vector& x);

}  // namespace bomuse
