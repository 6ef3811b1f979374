#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace bomuse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned search box, lower[i] <= upper[i].
struct Bounds {
    Vector lower;
    Vector upper;

    Bounds() = default;
    Bounds(Vector lo, Vector hi);
    static Bounds uniform(int dim, double lo, double hi);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(lower.size()); }
    [[nodiscard]] bool contains(const Vector& x) const;
    [[nodiscard]] double diagonal() const { return (upper - lower).norm(); }
    [[nodiscard]] Vector center() const { return 0.5 * (lower + upper); }
    [[nodiscard]] Vector clamp(const Vector& x) const;

    bool operator==(const Bounds& other) const;
};

/// Deterministic random source. Distribution transforms are written out here
/// (rather than using <random> distributions) so that a seed produces the same
/// stream on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    /// Independent stream keyed by (seed, stream, index).
    Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    Vector uniform_in(const Bounds& box);
    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Stream identifiers used to derive per-purpose generators from a session seed.
enum class Stream : std::uint64_t {
    InitialDesign = 1,
    Noise = 2,
    HumanMaximizer = 3,
    AiMaximizer = 4,
    HyperparameterProbe = 5,
};

inline Rng stream_rng(std::uint64_t seed, Stream stream, std::uint64_t index) {
    return Rng(seed, static_cast<std::uint64_t>(stream), index);
}

std::vector<double> to_std(const Vector& v);
Vector from_std(const std::vector<double>& v);

}  // namespace bomuse
