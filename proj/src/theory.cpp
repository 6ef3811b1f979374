#include "bomuse/theory.hpp"

#include "bomuse/errors.hpp"

#include <algorithm>
#include <cmath>

namespace bomuse {

double generalized_mean(MeanOrder order, std::span<const double> a) {
    if (a.empty()) {
        throw InputError("generalized_mean: empty input");
    }
    for (double v : a) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw DomainError("generalized_mean: entries must be positive and finite");
        }
    }
    const double theta = order.theta;
    if (std::isnan(theta)) {
        throw DomainError("generalized_mean: order is NaN");
    }
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    if (theta < -kMeanOrderSaturation) {
        return *lo;
    }
    if (theta > kMeanOrderSaturation) {
        return *hi;
    }
    const double n = static_cast<double>(a.size());
    if (theta == 0.0) {
        double s = 0.0;
        for (double v : a) s += std::log(v);
        return std::exp(s / n);
    }
    // Scale so every ratio^theta is <= 1, and use expm1/log1p so that small
    // |theta| converges smoothly to the geometric mean.
    const double ref = theta > 0.0 ? *hi : *lo;
    double acc = 0.0;
    for (double v : a) {
        acc += std::expm1(theta * std::log(v / ref));
    }
    return ref * std::exp(std::log1p(acc / n) / theta);
}

bool check_mean_monotonicity(std::span<const double> a, double theta1, double theta2, const MeanFunction& mean) {
    if (!(theta1 <= theta2)) {
        throw DomainError("check_mean_monotonicity: requires theta1 <= theta2");
    }
    const double m1 = mean(MeanOrder{theta1}, a);
    const double m2 = mean(MeanOrder{theta2}, a);
    return m1 <= m2 + 1e-12 * std::max(1.0, std::abs(m2));
}

bool HadamardReport::all_pass() const {
    return std::all_of(bounds.begin(), bounds.end(), [](const BoundCheck& c) { return c.pass; });
}

namespace {

/// |z| * factor with 0 * inf taken as 0 (the z = 0 geometric case).
double scaled_order(double z, double factor) {
    if (z == 0.0) return 0.0;
    return std::abs(z) * factor;
}

}  // namespace

HadamardReport check_hadamard_mean_bounds(std::span<const double> a, std::span<const double> b, double z,
                                          double q, double tolerance, const MeanFunction& mean) {
    if (a.size() != b.size()) {
        throw InputError("check_hadamard_mean_bounds: a and b differ in length");
    }
    if (a.empty()) {
        throw InputError("check_hadamard_mean_bounds: empty input");
    }
    if (!(q >= 1.0)) {
        throw DomainError("check_hadamard_mean_bounds: q must lie in [1, inf]");
    }
    const double inf = std::numeric_limits<double>::infinity();
    // Conjugate exponent q' = q / (q - 1).
    const double q_conj = q == 1.0 ? inf : (std::isinf(q) ? 1.0 : q / (q - 1.0));

    std::vector<double> ab(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab[i] = a[i] * b[i];
    }
    HadamardReport report;
    report.lhs = mean(MeanOrder::minimum(), ab);

    const std::array<double, 3> rhs{
        mean(MeanOrder{-z}, a) * mean(MeanOrder{z}, b),
        mean(MeanOrder{scaled_order(z, q)}, a) * mean(MeanOrder{scaled_order(z, q_conj)}, b),
        mean(MeanOrder{-std::abs(z)}, a) * mean(MeanOrder{scaled_order(z, q_conj)}, b),
    };
    const std::array<const char*, 3> names{"neg_z_pos_z", "holder_q_qconj", "neg_abs_z_qconj"};
    for (std::size_t i = 0; i < 3; ++i) {
        BoundCheck& c = report.bounds[i];
        c.name = names[i];
        c.rhs = rhs[i];
        c.slack = (rhs[i] - report.lhs) / std::max(std::abs(rhs[i]), std::numeric_limits<double>::min());
        c.pass = c.slack >= -tolerance;
    }
    return report;
}

VarianceBracket posterior_variance_bracket(const GpPosterior& gp, const Vector& x_star, double tolerance) {
    const KernelSpec& k = gp.kernel();
    const double kss = kernel_eval(k, x_star, x_star);
    const auto& X = gp.inputs();
    for (const auto& x : X) {
        const double ktt = kernel_eval(k, x, x);
        if (std::abs(ktt - kss) > 1e-12 * std::max(1.0, std::abs(kss))) {
            throw UnsupportedConfiguration("posterior_variance_bracket: kernel diagonal is not constant");
        }
    }
    const double noise = gp.noise_variance();
    const double n = static_cast<double>(X.size());

    double sum_d = 0.0;
    double sum_d2 = 0.0;
    double min_d = kss;
    for (const auto& x : X) {
        const double d = kss - std::abs(kernel_eval(k, x_star, x));
        sum_d += d;
        sum_d2 += d * d;
        min_d = std::min(min_d, d);
    }
    if (X.empty()) {
        min_d = 0.0;
    }
    const double denom = noise + n * kss;
    VarianceBracket out;
    out.lower = kss * (noise + 2.0 * n * min_d - n * min_d * min_d / kss) / denom;
    out.upper = kss * (noise + 2.0 * sum_d - sum_d2 / kss) / denom;
    out.actual = gp.variance(x_star);
    const double scale = std::max(1.0, std::abs(kss));
    out.above_lower = out.actual >= out.lower - tolerance * scale;
    out.below_upper = out.actual <= out.upper + tolerance * scale;
    return out;
}

void to_json(nlohmann::json& j, const AuditReport& r) {
    j = nlohmann::json{{"check", r.check},
                       {"trials", r.trials},
                       {"violations", r.violations},
                       {"max_slack", r.max_slack},
                       {"hard", r.hard}};
}

namespace {

std::vector<double> random_positive(Rng& rng, int n) {
    std::vector<double> a(static_cast<std::size_t>(n));
    for (auto& v : a) {
        v = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
    }
    return a;
}

double random_order(Rng& rng) {
    const double u = rng.uniform();
    if (u < 0.05) return -std::numeric_limits<double>::infinity();
    if (u < 0.10) return std::numeric_limits<double>::infinity();
    if (u < 0.15) return 0.0;
    return rng.uniform(-60.0, 60.0);
}

}  // namespace

AuditReport audit_mean_monotonicity(int trials, std::uint64_t seed, const MeanFunction& mean) {
    AuditReport report{"mean_monotonicity", trials, 0, 0.0, true};
    Rng rng(seed, 101, 0);
    for (int t = 0; t < trials; ++t) {
        const int n = 1 + static_cast<int>(rng.uniform() * 8);
        const auto a = random_positive(rng, n);
        double t1 = random_order(rng);
        double t2 = random_order(rng);
        if (t1 > t2) std::swap(t1, t2);
        const double m1 = mean(MeanOrder{t1}, a);
        const double m2 = mean(MeanOrder{t2}, a);
        const double excess = (m1 - m2) / std::max(std::abs(m2), std::numeric_limits<double>::min());
        if (excess > 1e-10 || !std::isfinite(excess)) {
            ++report.violations;
            report.max_slack = std::max(report.max_slack, std::isfinite(excess) ? excess : 1.0);
        }
    }
    return report;
}

AuditReport audit_hadamard_bounds(int trials, std::uint64_t seed, const MeanFunction& mean) {
    AuditReport report{"hadamard_mean_bounds", trials, 0, 0.0, true};
    Rng rng(seed, 102, 0);
    for (int t = 0; t < trials; ++t) {
        const int n = 1 + static_cast<int>(rng.uniform() * 8);
        const auto a = random_positive(rng, n);
        const auto b = random_positive(rng, n);
        const double z = rng.uniform() < 0.05 ? 0.0 : rng.uniform(-5.0, 5.0);
        const double q = rng.uniform() < 0.05 ? 1.0 : rng.uniform(1.0, 10.0);
        const HadamardReport r = check_hadamard_mean_bounds(a, b, z, q, 1e-10, mean);
        bool violated = false;
        for (const auto& c : r.bounds) {
            if (!c.pass || !std::isfinite(c.slack)) {
                violated = true;
                report.max_slack = std::max(report.max_slack, std::isfinite(c.slack) ? -c.slack : 1.0);
            }
        }
        if (violated) ++report.violations;
    }
    return report;
}

std::array<AuditReport, 2> audit_variance_bracket(int trials, std::uint64_t seed) {
    AuditReport upper{"variance_bracket_upper", trials, 0, 0.0, true};
    AuditReport lower{"variance_bracket_lower", trials, 0, 0.0, false};
    Rng rng(seed, 103, 0);
    for (int t = 0; t < trials; ++t) {
        const int dim = 1 + static_cast<int>(rng.uniform() * 3);
        const int n = static_cast<int>(rng.uniform() * 21);
        const double l = rng.uniform(0.1, 2.0);
        const double v = rng.uniform(0.5, 2.0);
        const double noise = std::exp(rng.uniform(std::log(1e-3), 0.0));
        const Bounds box = Bounds::uniform(dim, 0.0, 1.0);
        std::vector<Vector> X;
        Vector y(n);
        for (int i = 0; i < n; ++i) {
            X.push_back(rng.uniform_in(box));
            y[i] = rng.normal();
        }
        const GpPosterior gp(KernelSpec::squared_exponential(l, v), X, y, noise);
        const VarianceBracket b = posterior_variance_bracket(gp, rng.uniform_in(box));
        if (!b.below_upper) {
            ++upper.violations;
            upper.max_slack = std::max(upper.max_slack, (b.actual - b.upper) / v);
        }
        if (!b.above_lower) {
            ++lower.violations;
            lower.max_slack = std::max(lower.max_slack, (b.lower - b.actual) / v);
        }
    }
    return {upper, lower};
}

bool TheoryReport::passed() const {
    return std::none_of(audits.begin(), audits.end(), [](const AuditReport& r) { return r.hard && r.violations > 0; });
}

nlohmann::json TheoryReport::to_json() const {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& a : audits) {
        checks.push_back(a);
    }
    return nlohmann::json{{"passed", passed()}, {"checks", checks}};
}

TheoryReport verify_theory(int trials, std::uint64_t seed, const MeanFunction& mean) {
    if (trials < 1) {
        throw InputError("verify_theory: trials must be >= 1");
    }
    TheoryReport report;
    report.audits.push_back(audit_mean_monotonicity(trials, seed, mean));
    report.audits.push_back(audit_hadamard_bounds(trials, seed, mean));
    const auto bracket = audit_variance_bracket(std::min(trials, 100), seed);
    report.audits.push_back(bracket[0]);
    report.audits.push_back(bracket[1]);
    return report;
}

}  // namespace bomuse
