#pragma once

#include "bomuse/gp.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace bomuse {

/// Order of a power mean, anywhere in [-inf, +inf].
struct MeanOrder {
    double theta = 1.0;

    static constexpr MeanOrder minimum() { return {-std::numeric_limits<double>::infinity()}; }
    static constexpr MeanOrder maximum() { return {std::numeric_limits<double>::infinity()}; }
    static constexpr MeanOrder geometric() { return {0.0}; }
};

/// Orders with |theta| above this are evaluated as min / max.
inline constexpr double kMeanOrderSaturation = 50.0;

/// Power mean M_theta(a) = ((1/n) sum a_i^theta)^(1/theta), with the min,
/// geometric and max means at theta = -inf, 0, +inf. Entries must be positive.
double generalized_mean(MeanOrder order, std::span<const double> a);

using MeanFunction = std::function<double(MeanOrder, std::span<const double>)>;

/// True iff M_theta1(a) <= M_theta2(a) up to 1e-12 relative. Requires theta1 <= theta2.
bool check_mean_monotonicity(std::span<const double> a, double theta1, double theta2,
                             const MeanFunction& mean = generalized_mean);

struct BoundCheck {
    std::string name;
    double rhs = 0.0;
    /// (rhs - lhs) / |rhs|; negative means the bound was exceeded.
    double slack = 0.0;
    bool pass = true;
};

struct HadamardReport {
    double lhs = 0.0;  // M_{-inf}(a .* b) = min_i a_i b_i
    std::array<BoundCheck, 3> bounds;
    [[nodiscard]] bool all_pass() const;
};

/// Evaluates the three upper bounds on min_i a_i b_i:
///   M_{-z}(a) M_z(b),  M_{|zq|}(a) M_{|zq'|}(b),  M_{-|z|}(a) M_{q|z|/(q-1)}(b)
/// with 1/q + 1/q' = 1. `tolerance` is the relative slack allowed before a fail.
HadamardReport check_hadamard_mean_bounds(std::span<const double> a, std::span<const double> b, double z,
                                          double q, double tolerance = 1e-10,
                                          const MeanFunction& mean = generalized_mean);

struct VarianceBracket {
    double lower = 0.0;
    double upper = 0.0;
    double actual = 0.0;
    bool above_lower = true;
    bool below_upper = true;
};

/// Worst/best-case bracket on the posterior variance at `x_star` built from
/// D_t = K(x*,x*) - |K(x*, x_t)|. Requires a kernel whose diagonal is constant
/// over the data and x_star (UnsupportedConfiguration otherwise).
VarianceBracket posterior_variance_bracket(const GpPosterior& gp, const Vector& x_star, double tolerance = 1e-8);

struct AuditReport {
    std::string check;
    int trials = 0;
    int violations = 0;
    /// Largest relative amount by which any trial exceeded its bound (0 if none).
    double max_slack = 0.0;
    /// Hard checks fail the verification; soft ones are only reported.
    bool hard = true;
};

void to_json(nlohmann::json& j, const AuditReport& r);

AuditReport audit_mean_monotonicity(int trials, std::uint64_t seed, const MeanFunction& mean = generalized_mean);
AuditReport audit_hadamard_bounds(int trials, std::uint64_t seed, const MeanFunction& mean = generalized_mean);
/// Returns {upper (hard), lower (soft)}.
std::array<AuditReport, 2> audit_variance_bracket(int trials, std::uint64_t seed);

struct TheoryReport {
    std::vector<AuditReport> audits;
    [[nodiscard]] bool passed() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Full lemma audit: `trials` random draws for the mean checks, min(trials, 100)
/// instances for the variance bracket.
TheoryReport verify_theory(int trials, std::uint64_t seed = 0, const MeanFunction& mean = generalized_mean);

}  // namespace bomuse
