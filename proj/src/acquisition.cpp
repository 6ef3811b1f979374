#include "bomuse/acquisition.hpp"

#include "bomuse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace bomuse {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void validate(const AcquisitionSpec& a) {
    std::visit(overloaded{
                   [](const GpUcb& u) {
                       if (!(u.beta >= 0.0)) throw InputError("GpUcb: beta must be >= 0");
                   },
                   [](const EcGpUcb& u) {
                       if (!(u.beta >= 0.0)) throw InputError("EcGpUcb: beta must be >= 0");
                       if (!(u.epsilon >= 0.0)) throw InputError("EcGpUcb: epsilon must be >= 0");
                       if (u.t < 1) throw InputError("EcGpUcb: t must be >= 1");
                       if (!(u.sigma_noise > 0.0)) throw InputError("EcGpUcb: sigma must be > 0");
                   },
                   [](const ExpectedImprovement&) {},
                   [](const PureExploration&) {},
               },
               a);
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double acquisition_value(const AcquisitionSpec& a, const GpPosterior& gp, const Vector& x) {
    const auto [mu, var] = gp.predict(x);
    const double sd = std::sqrt(var);
    return std::visit(overloaded{
                          [&](const GpUcb& u) { return mu + std::sqrt(u.beta) * sd; },
                          [&](const EcGpUcb& u) {
                              const double widen = u.epsilon * std::sqrt(static_cast<double>(u.t)) / u.sigma_noise;
                              return mu + (std::sqrt(u.beta) + widen) * sd;
                          },
                          [&](const ExpectedImprovement& e) {
                              if (sd <= 0.0) {
                                  return 0.0;
                              }
                              const double z = (mu - e.best_y) / sd;
                              return std::max(0.0, (mu - e.best_y) * normal_cdf(z) + sd * normal_pdf(z));
                          },
                          [&](const PureExploration&) { return sd; },
                      },
                      a);
}

double confidence_chi(const BetaSchedule& s) {
    if (!(s.delta > 0.0 && s.delta < 1.0)) {
        throw DomainError("beta schedule: delta must lie in (0, 1)");
    }
    const double root = std::sqrt(s.sigma) * std::sqrt(2.0 * std::log(1.0 / s.delta) + 1.0 + s.running_gamma);
    return (root + s.running_B) * (root + s.running_B);
}

double bo_muse_beta(const BetaSchedule& s) {
    return s.zeta * confidence_chi(s);
}

double srinivas_beta(int t, double delta, double grid_size) {
    if (t < 1) {
        throw DomainError("srinivas_beta: t must be >= 1");
    }
    const double tt = static_cast<double>(t);
    return 2.0 * std::log(grid_size * tt * tt * std::numbers::pi * std::numbers::pi / (6.0 * delta));
}

double zeta_lower_bound(double phi) {
    if (!(phi > 0.0 && phi < std::numbers::ln2)) {
        throw DomainError("zeta_lower_bound: phi must lie in (0, ln 2)");
    }
    // -log(2 - e^phi) = -log1p(1 - e^phi) = -log1p(-expm1(phi)); stays accurate near 0.
    const double h = -std::log1p(-std::expm1(phi)) / phi;
    return (1.0 + h) * (1.0 + h);
}

MaximizeResult maximize_function(const std::function<double(const Vector&)>& f, const Bounds& bounds,
                                 std::uint64_t seed, const MaximizerOptions& options) {
    if (bounds.dim() == 0) {
        throw InputError("maximize: empty box");
    }
    auto score = [&](const Vector& x) {
        const double v = f(x);
        return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    };

    Rng rng(seed);
    const int probes = std::max(1, options.probes);
    std::vector<Vector> points;
    std::vector<double> values;
    points.reserve(static_cast<std::size_t>(probes));
    values.reserve(static_cast<std::size_t>(probes));
    for (int i = 0; i < probes; ++i) {
        points.push_back(rng.uniform_in(bounds));
        values.push_back(score(points.back()));
    }

    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    const Vector width = bounds.upper - bounds.lower;
    const int starts = std::min<int>(options.starts, static_cast<int>(order.size()));
    for (int s = 0; s < starts; ++s) {
        Vector x = points[order[static_cast<std::size_t>(s)]];
        double fx = values[order[static_cast<std::size_t>(s)]];
        double step = options.initial_step;
        for (int round = 0; round < options.rounds; ++round) {
            for (int d = 0; d < bounds.dim(); ++d) {
                if (width[d] <= 0.0) {
                    continue;
                }
                for (double dir : {1.0, -1.0}) {
                    Vector trial = x;
                    trial[d] = std::clamp(x[d] + dir * step * width[d], bounds.lower[d], bounds.upper[d]);
                    if (trial[d] == x[d]) {
                        continue;
                    }
                    const double ft = score(trial);
                    if (ft > fx) {
                        x = std::move(trial);
                        fx = ft;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        points.push_back(std::move(x));
        values.push_back(fx);
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return {points[best], values[best]};
}

Vector maximize(const AcquisitionSpec& a, const GpPosterior& gp, const Bounds& bounds, std::uint64_t seed,
                const MaximizerOptions& options) {
    validate(a);
    return maximize_function([&](const Vector& x) { return acquisition_value(a, gp, x); }, bounds, seed, options)
        .x;
}

}  // namespace bomuse
