#pragma once

#include "bomuse/types.hpp"

#include <json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bomuse {

/// Named, deterministic transform from the input space to a feature space.
/// Stands in for the hand-picked "high-level features" an expert reasons with.
class FeatureMap {
public:
    using Fn = std::function<Vector(const Vector&)>;

    FeatureMap(std::string name, int dim_in, int dim_out, Fn fn);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] int dim_in() const noexcept { return dim_in_; }
    [[nodiscard]] int dim_out() const noexcept { return dim_out_; }

    /// Throws InputError when x has the wrong length.
    [[nodiscard]] Vector apply(const Vector& x) const;

private:
    std::string name_;
    int dim_in_;
    int dim_out_;
    Fn fn_;
};

/// Built-in maps: matyas-2d, ackley-4d, rastrigin-5d, levy-6d.
std::shared_ptr<const FeatureMap> builtin_feature_map(const std::string& name);
std::vector<std::string> builtin_feature_map_names();

enum class KernelFamily { SquaredExponential, Linear, Polynomial };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

struct KernelSpec {
    KernelFamily family = KernelFamily::SquaredExponential;
    double lengthscale = 1.0;       // SE only
    double signal_variance = 1.0;
    int degree = 2;                 // Polynomial only
    std::shared_ptr<const FeatureMap> feature_map;  // identity when null

    static KernelSpec squared_exponential(double lengthscale, double signal_variance = 1.0,
                                          std::shared_ptr<const FeatureMap> map = nullptr);
    static KernelSpec linear(double signal_variance = 1.0, std::shared_ptr<const FeatureMap> map = nullptr);
    static KernelSpec polynomial(int degree, double signal_variance = 1.0,
                                 std::shared_ptr<const FeatureMap> map = nullptr);

    /// Throws InputError on a non-positive lengthscale / variance or degree < 1.
    void validate() const;

    /// Input dimension the kernel accepts, or nullopt if any (identity map).
    [[nodiscard]] std::optional<int> input_dim() const;
    /// Kernel value on the diagonal does not depend on x (true for SE).
    [[nodiscard]] bool stationary() const noexcept { return family == KernelFamily::SquaredExponential; }

    bool operator==(const KernelSpec& other) const;
};

/// Features of x under the kernel's map (x itself when there is none).
Vector kernel_features(const KernelSpec& k, const Vector& x);

double kernel_eval(const KernelSpec& k, const Vector& x, const Vector& x2);

/// Same as kernel_eval but on already-mapped features; no dimension checks.
double kernel_eval_features(const KernelSpec& k, const Vector& fx, const Vector& fx2);

/// Symmetric Gram matrix over the given rows (0x0 when rows is empty).
Matrix gram(const KernelSpec& k, const std::vector<Vector>& rows);

/// Cross-covariance column k(X, x).
Vector cross_covariance(const KernelSpec& k, const std::vector<Vector>& rows, const Vector& x);

void to_json(nlohmann::json& j, const KernelSpec& k);
void from_json(const nlohmann::json& j, KernelSpec& k);

}  // namespace bomuse
