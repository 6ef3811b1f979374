#include "bomuse/kernels.hpp"

#include "bomuse/errors.hpp"

#include <cmath>
#include <map>

namespace bomuse {

FeatureMap::FeatureMap(std::string name, int dim_in, int dim_out, Fn fn)
    : name_(std::move(name)), dim_in_(dim_in), dim_out_(dim_out), fn_(std::move(fn)) {
    if (dim_in_ <= 0 || dim_out_ <= 0) {
        throw InputError("feature map '" + name_ + "': dimensions must be positive");
    }
}

Vector FeatureMap::apply(const Vector& x) const {
    if (x.size() != dim_in_) {
        throw InputError("feature map '" + name_ + "' expects " + std::to_string(dim_in_) + " inputs, got " +
                         std::to_string(x.size()));
    }
    Vector out = fn_(x);
    if (out.size() != dim_out_) {
        throw InputError("feature map '" + name_ + "' produced the wrong number of features");
    }
    return out;
}

namespace {

std::map<std::string, std::shared_ptr<const FeatureMap>> make_builtin_maps() {
    std::map<std::string, std::shared_ptr<const FeatureMap>> maps;

    maps["matyas-2d"] = std::make_shared<FeatureMap>("matyas-2d", 2, 3, [](const Vector& x) {
        Vector f(3);
        f << x[0] * x[0], x[1] * x[1], x[0] * x[1];
        return f;
    });

    maps["ackley-4d"] = std::make_shared<FeatureMap>("ackley-4d", 4, 5, [](const Vector& x) {
        Vector f(5);
        for (int i = 0; i < 4; ++i) {
            f[i] = std::cos(x[i]);
        }
        f[4] = x.norm();
        return f;
    });

    maps["rastrigin-5d"] = std::make_shared<FeatureMap>("rastrigin-5d", 5, 10, [](const Vector& x) {
        Vector f(10);
        for (int i = 0; i < 5; ++i) {
            f[i] = x[i] * x[i];
            f[i + 5] = std::cos(x[i]);
        }
        return f;
    });

    // sin^2(x1), then x_j^2 sin^2(x_j) for j = 1..6.
    maps["levy-6d"] = std::make_shared<FeatureMap>("levy-6d", 6, 7, [](const Vector& x) {
        Vector f(7);
        const double s0 = std::sin(x[0]);
        f[0] = s0 * s0;
        for (int j = 0; j < 6; ++j) {
            const double s = std::sin(x[j]);
            f[j + 1] = x[j] * x[j] * s * s;
        }
        return f;
    });

    return maps;
}

const std::map<std::string, std::shared_ptr<const FeatureMap>>& builtin_maps() {
    static const auto maps = make_builtin_maps();
    return maps;
}

}  // namespace

std::shared_ptr<const FeatureMap> builtin_feature_map(const std::string& name) {
    const auto& maps = builtin_maps();
    auto it = maps.find(name);
    if (it == maps.end()) {
        throw InputError("unknown feature map '" + name + "'");
    }
    return it->second;
}

std::vector<std::string> builtin_feature_map_names() {
    std::vector<std::string> names;
    for (const auto& [name, map] : builtin_maps()) {
        names.push_back(name);
    }
    return names;
}

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::SquaredExponential: return "squared_exponential";
        case KernelFamily::Linear: return "linear";
        case KernelFamily::Polynomial: return "polynomial";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "squared_exponential" || name == "se") return KernelFamily::SquaredExponential;
    if (name == "linear") return KernelFamily::Linear;
    if (name == "polynomial") return KernelFamily::Polynomial;
    throw InputError("unknown kernel family '" + name + "'");
}

KernelSpec KernelSpec::squared_exponential(double lengthscale, double signal_variance,
                                           std::shared_ptr<const FeatureMap> map) {
    KernelSpec k;
    k.family = KernelFamily::SquaredExponential;
    k.lengthscale = lengthscale;
    k.signal_variance = signal_variance;
    k.feature_map = std::move(map);
    k.validate();
    return k;
}

KernelSpec KernelSpec::linear(double signal_variance, std::shared_ptr<const FeatureMap> map) {
    KernelSpec k;
    k.family = KernelFamily::Linear;
    k.signal_variance = signal_variance;
    k.feature_map = std::move(map);
    k.validate();
    return k;
}

KernelSpec KernelSpec::polynomial(int degree, double signal_variance, std::shared_ptr<const FeatureMap> map) {
    KernelSpec k;
    k.family = KernelFamily::Polynomial;
    k.degree = degree;
    k.signal_variance = signal_variance;
    k.feature_map = std::move(map);
    k.validate();
    return k;
}

void KernelSpec::validate() const {
    if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
        throw InputError("kernel: lengthscale must be positive");
    }
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
        throw InputError("kernel: signal_variance must be positive");
    }
    if (degree < 1) {
        throw InputError("kernel: degree must be >= 1");
    }
}

std::optional<int> KernelSpec::input_dim() const {
    if (feature_map) {
        return feature_map->dim_in();
    }
    return std::nullopt;
}

bool KernelSpec::operator==(const KernelSpec& other) const {
    const std::string a = feature_map ? feature_map->name() : std::string();
    const std::string b = other.feature_map ? other.feature_map->name() : std::string();
    return family == other.family && lengthscale == other.lengthscale &&
           signal_variance == other.signal_variance && degree == other.degree && a == b;
}

Vector kernel_features(const KernelSpec& k, const Vector& x) {
    return k.feature_map ? k.feature_map->apply(x) : x;
}

double kernel_eval_features(const KernelSpec& k, const Vector& fx, const Vector& fx2) {
    switch (k.family) {
        case KernelFamily::SquaredExponential: {
            const double d2 = (fx - fx2).squaredNorm();
            return k.signal_variance * std::exp(-d2 / (2.0 * k.lengthscale * k.lengthscale));
        }
        case KernelFamily::Linear:
            return k.signal_variance * fx.dot(fx2);
        case KernelFamily::Polynomial:
            return k.signal_variance * std::pow(1.0 + fx.dot(fx2), k.degree);
    }
    return 0.0;
}

double kernel_eval(const KernelSpec& k, const Vector& x, const Vector& x2) {
    if (x.size() != x2.size()) {
        throw InputError("kernel_eval: argument lengths differ (" + std::to_string(x.size()) + " vs " +
                         std::to_string(x2.size()) + ")");
    }
    return kernel_eval_features(k, kernel_features(k, x), kernel_features(k, x2));
}

Matrix gram(const KernelSpec& k, const std::vector<Vector>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix K(n, n);
    if (n == 0) {
        return K;
    }
    std::vector<Vector> features;
    features.reserve(rows.size());
    for (const auto& r : rows) {
        if (r.size() != rows.front().size()) {
            throw InputError("gram: rows have differing dimensions");
        }
        features.push_back(kernel_features(k, r));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = kernel_eval_features(k, features[i], features[i]);
        for (Eigen::Index j = 0; j < i; ++j) {
            K(i, j) = kernel_eval_features(k, features[i], features[j]);
            K(j, i) = K(i, j);
        }
    }
    return K;
}

Vector cross_covariance(const KernelSpec& k, const std::vector<Vector>& rows, const Vector& x) {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    const Vector fx = kernel_features(k, x);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != x.size()) {
            throw InputError("cross_covariance: dimension mismatch");
        }
        out[static_cast<Eigen::Index>(i)] = kernel_eval_features(k, kernel_features(k, rows[i]), fx);
    }
    return out;
}

void to_json(nlohmann::json& j, const KernelSpec& k) {
    j = nlohmann::json{{"family", to_string(k.family)},
                       {"lengthscale", k.lengthscale},
                       {"signal_variance", k.signal_variance},
                       {"degree", k.degree},
                       {"feature_map", k.feature_map ? nlohmann::json(k.feature_map->name()) : nlohmann::json()}};
}

void from_json(const nlohmann::json& j, KernelSpec& k) {
    k = KernelSpec{};
    k.family = kernel_family_from_string(j.value("family", std::string("squared_exponential")));
    k.lengthscale = j.value("lengthscale", 1.0);
    k.signal_variance = j.value("signal_variance", 1.0);
    k.degree = j.value("degree", 2);
    if (j.contains("feature_map") && !j.at("feature_map").is_null()) {
        k.feature_map = builtin_feature_map(j.at("feature_map").get<std::string>());
    }
    k.validate();
}

}  // namespace bomuse
