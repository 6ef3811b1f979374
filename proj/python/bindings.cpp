#include "bomuse/acquisition.hpp"
#include "bomuse/benchmarks.hpp"
#include "bomuse/engine.hpp"
#include "bomuse/errors.hpp"
#include "bomuse/gp.hpp"
#include "bomuse/theory.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace bomuse;

namespace {

std::vector<Vector> rows(const std::vector<std::vector<double>>& X) {
    std::vector<Vector> out;
    out.reserve(X.size());
    for (const auto& r : X) out.push_back(from_std(r));
    return out;
}

std::pair<std::vector<double>, std::vector<double>> gp_predict(const std::string& kernel_json,
                                                                 const std::vector<std::vector<double>>& X,
                                                                 const std::vector<double>& y, double noise_variance,
                                                                 const std::vector<std::vector<double>>& queries) {
    const KernelSpec kernel = nlohmann::json::parse(kernel_json).get<KernelSpec>();
    const GpPosterior gp(kernel, rows(X), from_std(y), noise_variance);
    std::vector<double> mu;
    std::vector<double> var;
    for (const auto& q : queries) {
        const auto [m, v] = gp.predict(from_std(q));
        mu.push_back(m);
        var.push_back(v);
    }
    return {mu, var};
}

std::string run_session_json(const std::string& config_json) {
    const SessionConfig config = nlohmann::json::parse(config_json).get<SessionConfig>();
    const SessionResult r = run_session(config);
    std::ostringstream csv;
    write_session_csv(csv, r.observations, r.records, r.regret, r.initial_gamma,
                      static_cast<int>(r.observations.empty() ? 0 : r.observations.front().x.size()));
    nlohmann::json out{{"observations", r.observations},
                       {"records", r.records},
                       {"initial_gamma", r.initial_gamma},
                       {"has_optimum", r.regret.has_optimum},
                       {"simple_regret", r.regret.simple_regret},
                       {"cumulative_regret", r.regret.cumulative},
                       {"csv", csv.str()}};
    return out.dump();
}

BetaSchedule schedule(double delta, double gamma, double B, double sigma, double zeta) {
    BetaSchedule s;
    s.delta = delta;
    s.running_gamma = gamma;
    s.running_B = B;
    s.sigma = sigma;
    s.zeta = zeta;
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Human-AI collaborative Bayesian optimization core";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("benchmark_names", &builtin_names);
    m.def(
        "benchmark_eval",
        [](const std::string& name, const std::vector<double>& x) {
            const ObjectiveSpec spec = builtin(name);
            const Vector v = from_std(x);
            if (v.size() != spec.dim) throw InputError("expected " + std::to_string(spec.dim) + " coordinates");
            return spec.eval(v);
        },
        py::arg("name"), py::arg("x"));
    m.def(
        "benchmark_bounds",
        [](const std::string& name) {
            const ObjectiveSpec spec = builtin(name);
            return std::make_pair(to_std(spec.bounds.lower), to_std(spec.bounds.upper));
        },
        py::arg("name"));

    m.def("gp_predict", &gp_predict, py::arg("kernel_json"), py::arg("X"), py::arg("y"), py::arg("noise_variance"),
          py::arg("queries"), "Posterior mean and variance at each query point.");

    m.def(
        "bo_muse_beta",
        [](double delta, double gamma, double B, double sigma, double zeta) {
            return bo_muse_beta(schedule(delta, gamma, B, sigma, zeta));
        },
        py::arg("delta"), py::arg("gamma"), py::arg("B"), py::arg("sigma"), py::arg("zeta") = 7.0);
    m.def(
        "confidence_chi",
        [](double delta, double gamma, double B, double sigma) {
            return confidence_chi(schedule(delta, gamma, B, sigma, 1.0));
        },
        py::arg("delta"), py::arg("gamma"), py::arg("B"), py::arg("sigma"));
    m.def("srinivas_beta", &srinivas_beta, py::arg("t"), py::arg("delta"), py::arg("grid_size") = 1e4);
    m.def("zeta_lower_bound", &zeta_lower_bound, py::arg("phi"));

    m.def(
        "generalized_mean",
        [](double theta, const std::vector<double>& a) { return generalized_mean(MeanOrder{theta}, a); },
        py::arg("theta"), py::arg("a"));

    m.def(
        "default_config_json",
        [](const std::string& benchmark, const std::string& mode, std::uint64_t seed, int num_init, int evaluations) {
            return nlohmann::json(
                       SessionConfig::for_benchmark(benchmark, mode_from_string(mode), seed, num_init, evaluations))
                .dump();
        },
        py::arg("benchmark"), py::arg("mode"), py::arg("seed"), py::arg("num_init"), py::arg("evaluations"));
    m.def("run_session_json", &run_session_json, py::arg("config_json"),
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "verify_theory_json",
        [](int trials, std::uint64_t seed) { return verify_theory(trials, seed).to_json().dump(); },
        py::arg("trials"), py::arg("seed") = 0, py::call_guard<py::gil_scoped_release>());
}
