#pragma once

#include "bomuse/gp.hpp"
#include "bomuse/types.hpp"

#include <cstdint>
#include <functional>
#include <variant>

namespace bomuse {

/// mu + sqrt(beta) * sigma.
struct GpUcb {
    double beta = 0.0;
};

/// Enlarged-confidence UCB for a mis-specified model:
/// mu + (sqrt(beta) + epsilon * sqrt(t) / sigma_noise) * sigma.
struct EcGpUcb {
    double beta = 0.0;
    double epsilon = 0.0;
    int t = 1;
    double sigma_noise = 1.0;
};

struct ExpectedImprovement {
    double best_y = 0.0;
};

/// Posterior standard deviation only.
struct PureExploration {};

using AcquisitionSpec = std::variant<GpUcb, EcGpUcb, ExpectedImprovement, PureExploration>;

/// Throws InputError on a negative beta / epsilon or non-positive noise scale.
void validate(const AcquisitionSpec& a);

double acquisition_value(const AcquisitionSpec& a, const GpPosterior& gp, const Vector& x);

/// Running state behind the AI's exploration weight.
struct BetaSchedule {
    double delta = 0.1;
    double running_gamma = 0.0;  // accumulated information gain
    double running_B = 1.0;      // non-decreasing RKHS-norm estimate, starts at 1
    double sigma = 0.01;         // model noise standard deviation
    double zeta = 7.0;           // over-exploration multiplier
    int iteration = 1;           // 1-based batch / iteration counter
};

/// (sqrt(sigma) * sqrt(2 ln(1/delta) + 1 + gamma) + B)^2, i.e. the schedule with zeta = 1.
double confidence_chi(const BetaSchedule& s);

/// zeta * confidence_chi(s).
double bo_muse_beta(const BetaSchedule& s);

/// 2 ln(grid_size * t^2 * pi^2 / (6 delta)): the classical finite-domain GP-UCB
/// schedule, used for the generic BO baseline on a virtual grid.
double srinivas_beta(int t, double delta, double grid_size = 1e4);

/// (1 + ln(1 / (2 - e^phi)) / phi)^2 for phi in (0, ln 2). Throws DomainError outside.
double zeta_lower_bound(double phi);

/// Standard normal pdf / cdf.
double normal_pdf(double z);
double normal_cdf(double z);

struct MaximizerOptions {
    int probes = 512;
    int starts = 8;
    int rounds = 20;
    double initial_step = 0.25;  // fraction of each box side
};

struct MaximizeResult {
    Vector x;
    double value = 0.0;
};

/// Random probes followed by shrinking-step coordinate search from the best
/// starts. Deterministic in `seed`; ties go to the earliest candidate.
MaximizeResult maximize_function(const std::function<double(const Vector&)>& f, const Bounds& bounds,
                                 std::uint64_t seed, const MaximizerOptions& options = {});

Vector maximize(const AcquisitionSpec& a, const GpPosterior& gp, const Bounds& bounds, std::uint64_t seed,
                const MaximizerOptions& options = {});

}  // namespace bomuse
