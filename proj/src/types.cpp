#include "bomuse/types.hpp"

#include "bomuse/errors.hpp"

#include <cmath>
#include <numbers>

namespace bomuse {

Bounds::Bounds(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) {
        throw InputError("bounds: lower and upper differ in length");
    }
    if (lower.size() == 0) {
        throw InputError("bounds: empty box");
    }
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] <= upper[i])) {
            throw InputError("bounds: dimension " + std::to_string(i) + " has lo > hi or non-finite limits");
        }
    }
}

Bounds Bounds::uniform(int dim, double lo, double hi) {
    return Bounds(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
}

bool Bounds::contains(const Vector& x) const {
    if (x.size() != lower.size()) {
        return false;
    }
    return ((x.array() >= lower.array()) && (x.array() <= upper.array())).all();
}

Vector Bounds::clamp(const Vector& x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
}

bool Bounds::operator==(const Bounds& other) const {
    return lower.size() == other.lower.size() && lower == other.lower && upper == other.upper;
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng::Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    engine_.seed(seq);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
}

Vector Rng::uniform_in(const Bounds& box) {
    Vector x(box.dim());
    for (int i = 0; i < box.dim(); ++i) {
        x[i] = uniform(box.lower[i], box.upper[i]);
    }
    return x;
}

std::vector<double> to_std(const Vector& v) {
    return {v.data(), v.data() + v.size()};
}

Vector from_std(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace bomuse
