#pragma once

#include "bomuse/kernels.hpp"
#include "bomuse/types.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace bomuse {

enum class Source { Init, Human, Ai };

std::string to_string(Source source);
Source source_from_string(const std::string& name);

/// One evaluated experiment. `y` is the noisy measurement in the objective's own
/// orientation; `f_true` is the noiseless value when the objective can provide it.
struct Observation {
    Vector x;
    double y = 0.0;
    Source source = Source::Init;
    int batch = 0;
    std::optional<double> f_true;

    bool operator==(const Observation& other) const;
};

void to_json(nlohmann::json& j, const Observation& o);
void from_json(const nlohmann::json& j, Observation& o);

/// Exact GP posterior with zero prior mean, conditioned on (X, y) with
/// homoscedastic Gaussian noise. Immutable after construction.
class GpPosterior {
public:
    /// Factorizes K + noise_variance * I. Escalates diagonal jitter from
    /// 1e-10 * trace/n by x10 up to 1e-4 * trace/n; throws NumericalError past that.
    GpPosterior(KernelSpec kernel, std::vector<Vector> X, Vector y, double noise_variance);

    [[nodiscard]] double mean(const Vector& x) const;
    [[nodiscard]] double variance(const Vector& x) const;
    [[nodiscard]] double stddev(const Vector& x) const;
    /// Mean and variance sharing one cross-covariance evaluation.
    [[nodiscard]] std::pair<double, double> predict(const Vector& x) const;

    /// ln(1 + variance(x) / noise_variance): information gained by observing x next.
    [[nodiscard]] double information_gain_increment(const Vector& x) const;

    /// y^T (K + noise I)^-1 y. Throws InputError on an empty posterior.
    [[nodiscard]] double rkhs_norm_estimate() const;

    [[nodiscard]] double log_marginal_likelihood() const;

    [[nodiscard]] const KernelSpec& kernel() const noexcept { return kernel_; }
    [[nodiscard]] double noise_variance() const noexcept { return noise_variance_; }
    [[nodiscard]] double jitter() const noexcept { return jitter_; }
    [[nodiscard]] std::size_t size() const noexcept { return X_.size(); }
    [[nodiscard]] bool empty() const noexcept { return X_.empty(); }
    [[nodiscard]] const std::vector<Vector>& inputs() const noexcept { return X_; }
    [[nodiscard]] const Vector& targets() const noexcept { return y_; }
    /// Lower-triangular L with L L^T = K + (noise + jitter) I.
    [[nodiscard]] const Matrix& factor() const noexcept { return L_; }
    /// alpha = (K + noise I)^-1 y.
    [[nodiscard]] const Vector& weights() const noexcept { return alpha_; }
    [[nodiscard]] std::optional<int> input_dim() const;

private:
    [[nodiscard]] Vector cross(const Vector& x, double* prior_var) const;

    KernelSpec kernel_;
    std::vector<Vector> X_;
    std::vector<Vector> features_;
    Vector y_;
    double noise_variance_;
    double jitter_ = 0.0;
    Matrix L_;
    Vector alpha_;
};

GpPosterior fit(const KernelSpec& kernel, const std::vector<Observation>& data, double noise_variance);

/// Free-function spellings of the posterior queries.
inline double posterior_mean(const GpPosterior& gp, const Vector& x) { return gp.mean(x); }
inline double posterior_variance(const GpPosterior& gp, const Vector& x) { return gp.variance(x); }
inline double information_gain_increment(const GpPosterior& gp, const Vector& x) {
    return gp.information_gain_increment(x);
}
inline double rkhs_norm_estimate(const GpPosterior& gp) { return gp.rkhs_norm_estimate(); }

/// 25 log-spaced lengthscales spanning [1e-2, 1e1] * scale.
std::vector<double> default_lengthscale_grid(double scale, int points = 25);

/// Maximum-likelihood kernel selection over a lengthscale grid (SE family);
/// signal_variance is the sample variance of the targets. Other families only
/// take the signal variance. Ties go to the earliest grid entry.
KernelSpec fit_hyperparameters(const KernelSpec& base, const std::vector<Vector>& X, const Vector& y,
                               double noise_variance, const std::vector<double>& lengthscales);

/// Characteristic length of the kernel's input space over `box`: the box
/// diagonal, or for a feature-mapped kernel the diagonal of the bounding box of
/// mapped probe points.
double feature_space_diagonal(const KernelSpec& kernel, const Bounds& box);

}  // namespace bomuse
