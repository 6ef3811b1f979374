#include "bomuse/gp.hpp"

#include "bomuse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace bomuse {

std::string to_string(Source source) {
    switch (source) {
        case Source::Init: return "init";
        case Source::Human: return "human";
        case Source::Ai: return "ai";
    }
    return "unknown";
}

Source source_from_string(const std::string& name) {
    if (name == "init") return Source::Init;
    if (name == "human") return Source::Human;
    if (name == "ai") return Source::Ai;
    throw InputError("unknown observation source '" + name + "'");
}

bool Observation::operator==(const Observation& other) const {
    return x.size() == other.x.size() && x == other.x && y == other.y && source == other.source &&
           batch == other.batch && f_true == other.f_true;
}

void to_json(nlohmann::json& j, const Observation& o) {
    j = nlohmann::json{{"x", to_std(o.x)}, {"y", o.y}, {"source", to_string(o.source)}, {"batch", o.batch}};
    j["f_true"] = o.f_true ? nlohmann::json(*o.f_true) : nlohmann::json();
}

void from_json(const nlohmann::json& j, Observation& o) {
    o.x = from_std(j.at("x").get<std::vector<double>>());
    o.y = j.at("y").get<double>();
    o.source = source_from_string(j.at("source").get<std::string>());
    o.batch = j.value("batch", 0);
    o.f_true.reset();
    if (j.contains("f_true") && !j.at("f_true").is_null()) {
        o.f_true = j.at("f_true").get<double>();
    }
}

GpPosterior::GpPosterior(KernelSpec kernel, std::vector<Vector> X, Vector y, double noise_variance)
    : kernel_(std::move(kernel)), X_(std::move(X)), y_(std::move(y)), noise_variance_(noise_variance) {
    kernel_.validate();
    if (!(noise_variance_ > 0.0)) {
        throw InputError("gp fit: noise_variance must be positive");
    }
    if (static_cast<Eigen::Index>(X_.size()) != y_.size()) {
        throw InputError("gp fit: inputs and targets differ in count");
    }
    const auto n = static_cast<Eigen::Index>(X_.size());
    features_.reserve(X_.size());
    for (const auto& x : X_) {
        if (x.size() != X_.front().size()) {
            throw InputError("gp fit: observations have differing dimensions");
        }
        features_.push_back(kernel_features(kernel_, x));
    }
    if (n == 0) {
        L_ = Matrix(0, 0);
        alpha_ = Vector(0);
        return;
    }

    Matrix K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = kernel_eval_features(kernel_, features_[i], features_[i]);
        for (Eigen::Index j = 0; j < i; ++j) {
            K(i, j) = K(j, i) = kernel_eval_features(kernel_, features_[i], features_[j]);
        }
    }
    K.diagonal().array() += noise_variance_;
    if (!K.allFinite() || !y_.allFinite()) {
        throw InputError("gp fit: non-finite kernel matrix or targets");
    }

    Eigen::LLT<Matrix> llt(K);
    std::vector<double> attempted{0.0};
    if (llt.info() != Eigen::Success) {
        const double base = K.trace() / static_cast<double>(n);
        bool ok = false;
        for (double scale = 1e-10; scale <= 1e-4 * 1.0000001; scale *= 10.0) {
            const double jitter = scale * base;
            attempted.push_back(jitter);
            Matrix Kj = K;
            Kj.diagonal().array() += jitter;
            llt.compute(Kj);
            if (llt.info() == Eigen::Success) {
                jitter_ = jitter;
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw NumericalError("gp fit: Cholesky factorization failed after jitter escalation", attempted);
        }
    }
    L_ = llt.matrixL();
    alpha_ = llt.solve(y_);
}

std::optional<int> GpPosterior::input_dim() const {
    if (auto d = kernel_.input_dim()) {
        return d;
    }
    if (!X_.empty()) {
        return static_cast<int>(X_.front().size());
    }
    return std::nullopt;
}

Vector GpPosterior::cross(const Vector& x, double* prior_var) const {
    if (auto d = input_dim(); d && x.size() != *d) {
        throw InputError("gp: query has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(*d));
    }
    const Vector fx = kernel_features(kernel_, x);
    if (prior_var != nullptr) {
        *prior_var = kernel_eval_features(kernel_, fx, fx);
    }
    Vector k(static_cast<Eigen::Index>(features_.size()));
    for (std::size_t i = 0; i < features_.size(); ++i) {
        k[static_cast<Eigen::Index>(i)] = kernel_eval_features(kernel_, features_[i], fx);
    }
    return k;
}

std::pair<double, double> GpPosterior::predict(const Vector& x) const {
    double prior = 0.0;
    const Vector k = cross(x, &prior);
    if (X_.empty()) {
        return {0.0, prior};
    }
    const double mu = k.dot(alpha_);
    const Vector v = L_.triangularView<Eigen::Lower>().solve(k);
    const double var = std::clamp(prior - v.squaredNorm(), 0.0, prior);
    return {mu, var};
}

double GpPosterior::mean(const Vector& x) const {
    if (X_.empty()) {
        (void)cross(x, nullptr);
        return 0.0;
    }
    return cross(x, nullptr).dot(alpha_);
}

double GpPosterior::variance(const Vector& x) const {
    return predict(x).second;
}

double GpPosterior::stddev(const Vector& x) const {
    return std::sqrt(variance(x));
}

double GpPosterior::information_gain_increment(const Vector& x) const {
    return std::log1p(variance(x) / noise_variance_);
}

double GpPosterior::rkhs_norm_estimate() const {
    if (X_.empty()) {
        throw InputError("rkhs_norm_estimate: posterior has no data");
    }
    return std::max(0.0, y_.dot(alpha_));
}

double GpPosterior::log_marginal_likelihood() const {
    const auto n = static_cast<double>(X_.size());
    if (X_.empty()) {
        return 0.0;
    }
    return -0.5 * y_.dot(alpha_) - L_.diagonal().array().log().sum() -
           0.5 * n * std::log(2.0 * std::numbers::pi);
}

GpPosterior fit(const KernelSpec& kernel, const std::vector<Observation>& data, double noise_variance) {
    std::vector<Vector> X;
    Vector y(static_cast<Eigen::Index>(data.size()));
    X.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        X.push_back(data[i].x);
        y[static_cast<Eigen::Index>(i)] = data[i].y;
    }
    return GpPosterior(kernel, std::move(X), std::move(y), noise_variance);
}

std::vector<double> default_lengthscale_grid(double scale, int points) {
    std::vector<double> grid;
    if (points <= 1) {
        grid.push_back(scale);
        return grid;
    }
    const double lo = std::log(1e-2 * scale);
    const double hi = std::log(1e1 * scale);
    for (int i = 0; i < points; ++i) {
        grid.push_back(std::exp(lo + (hi - lo) * i / (points - 1)));
    }
    return grid;
}

KernelSpec fit_hyperparameters(const KernelSpec& base, const std::vector<Vector>& X, const Vector& y,
                               double noise_variance, const std::vector<double>& lengthscales) {
    if (X.size() < 2) {
        throw InputError("fit_hyperparameters: need at least 2 observations");
    }
    if (lengthscales.empty()) {
        throw InputError("fit_hyperparameters: empty lengthscale grid");
    }
    const double mean = y.mean();
    double var = (y.array() - mean).square().mean();
    if (!(var > 1e-12)) {
        var = 1.0;
    }

    std::vector<double> candidates = lengthscales;
    if (base.family != KernelFamily::SquaredExponential) {
        candidates = {base.lengthscale};
    }

    std::optional<KernelSpec> best;
    double best_lml = -std::numeric_limits<double>::infinity();
    for (double l : candidates) {
        KernelSpec k = base;
        k.lengthscale = l;
        k.signal_variance = var;
        try {
            const GpPosterior gp(k, X, y, noise_variance);
            const double lml = gp.log_marginal_likelihood();
            if (std::isfinite(lml) && (!best || lml > best_lml)) {
                best = k;
                best_lml = lml;
            }
        } catch (const NumericalError&) {
            continue;
        }
    }
    if (!best) {
        throw NumericalError("fit_hyperparameters: every candidate failed to factorize", {});
    }
    return *best;
}

double feature_space_diagonal(const KernelSpec& kernel, const Bounds& box) {
    if (!kernel.feature_map) {
        const double d = box.diagonal();
        return d > 0.0 ? d : 1.0;
    }
    // Fixed probe stream so the scale depends only on (map, box).
    Rng rng(0x5eed, static_cast<std::uint64_t>(Stream::HyperparameterProbe), 0);
    const int dim_out = kernel.feature_map->dim_out();
    Vector lo = Vector::Constant(dim_out, std::numeric_limits<double>::infinity());
    Vector hi = Vector::Constant(dim_out, -std::numeric_limits<double>::infinity());
    auto include = [&](const Vector& x) {
        const Vector f = kernel.feature_map->apply(x);
        lo = lo.cwiseMin(f);
        hi = hi.cwiseMax(f);
    };
    include(box.lower);
    include(box.upper);
    include(box.center());
    for (int i = 0; i < 256; ++i) {
        include(rng.uniform_in(box));
    }
    const double d = (hi - lo).norm();
    return d > 0.0 ? d : 1.0;
}

}  // namespace bomuse
