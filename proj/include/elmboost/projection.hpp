#pragma once

// Seed-derived Gaussian projection matrices, element-wise activations, and
// random-hyperplane sign hashing.
//
// Every projection R for boosting position (level, step) is regenerated from
// the master seed, so models never store them. The stream layout is pinned by
// GeneratorId; changing any step below requires a new id.
//
//   substream = splitmix64(master_seed ^ (level * 2^32 + step))
//   u_k       = k-th output of a SplitMix64 generator seeded with substream
//   pair i    = Box-Muller(u_{2i}, u_{2i+1}) -> (z0, z1)
//   R[r][c]   = row-major entry e = r*M + c takes z0 of pair e/2 if e is even, z1 if odd

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "elmboost/error.hpp"
#include "elmboost/linalg.hpp"
#include "elmboost/matrix.hpp"

namespace elmboost {

inline constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer applied to x + gamma: one SplitMix64 output for state x.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    std::uint64_t z = x + kSplitMixGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Sequential SplitMix64 generator. The k-th output depends only on (seed, k).
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        const std::uint64_t out = splitmix64(state_);
        state_ += kSplitMixGamma;
        return out;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1], safe as a log argument.
    double uniform_open_zero() noexcept {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    /// Unbiased integer in [0, bound), bound > 0 (Lemire's multiply-and-reject).
    std::uint64_t below(std::uint64_t bound) noexcept {
        unsigned __int128 product = static_cast<unsigned __int128>(next()) * bound;
        auto low = static_cast<std::uint64_t>(product);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                product = static_cast<unsigned __int128>(next()) * bound;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

private:
    std::uint64_t state_;
};

/// Identifies the projection-stream scheme. Serialized into model files.
enum class GeneratorId : std::uint32_t {
    splitmix_box_muller = 1,
};

inline bool is_known_generator(std::uint32_t id) noexcept {
    return id == static_cast<std::uint32_t>(GeneratorId::splitmix_box_muller);
}

/// Everything that determines the projection matrices of a model.
struct ProjectionSpec {
    std::uint64_t master_seed = 0;
    std::size_t hidden = 1;  // J, rows of R
    std::size_t input = 1;   // M, columns of R
    GeneratorId generator = GeneratorId::splitmix_box_muller;
};

inline constexpr std::uint64_t kStepsPerLevel = std::uint64_t{1} << 32;

inline std::uint64_t substream_seed(std::uint64_t master_seed, std::size_t level, std::size_t step) {
    return splitmix64(master_seed ^ (static_cast<std::uint64_t>(level) * kStepsPerLevel +
                                     static_cast<std::uint64_t>(step)));
}

/// Fills `out` with standard normal deviates from the Box-Muller stream of `seed`.
inline void fill_gaussian(std::uint64_t seed, std::span<double> out) {
    SplitMix64 rng(seed);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::size_t i = 0;
    while (i < out.size()) {
        const double u1 = rng.uniform_open_zero();
        const double u2 = rng.uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = two_pi * u2;
        out[i++] = radius * std::cos(angle);
        if (i < out.size()) out[i++] = radius * std::sin(angle);
    }
}

/// The J×M Gaussian projection for boosting position (level, step).
inline Matrix generate_projection(const ProjectionSpec& spec, std::size_t level, std::size_t step) {
    if (spec.hidden == 0 || spec.input == 0) {
        throw ArgumentError("projection dimensions must be positive");
    }
    if (spec.generator != GeneratorId::splitmix_box_muller) {
        throw ArgumentError("unknown projection generator id " +
                            std::to_string(static_cast<std::uint32_t>(spec.generator)));
    }
    Matrix r(spec.hidden, spec.input);
    fill_gaussian(substream_seed(spec.master_seed, level, step), r.values());
    return r;
}

enum class Activation : std::uint8_t {
    tanh = 0,
    sign = 1,
};

inline std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "sign"; }

/// sign with sign(0) = +1, so the codomain is exactly {-1, +1}.
constexpr double sign_pm1(double v) noexcept { return v >= 0.0 ? 1.0 : -1.0; }

inline void apply_activation(Activation act, std::span<double> values) {
    switch (act) {
        case Activation::tanh:
            for (double& v : values) v = std::tanh(v);
            break;
        case Activation::sign:
            for (double& v : values) v = sign_pm1(v);
            break;
    }
}

/// h(x rᵀ): N×M samples through a J×M projection gives N×J features.
inline Matrix encode(const Matrix& x, const Matrix& r, Activation act) {
    if (x.cols() != r.cols()) {
        throw DimensionError("encode: samples " + x.shape() + " and projection " + r.shape() +
                             " differ in input width");
    }
    Matrix h = matmul_nt(x, r);
    apply_activation(act, h.values());
    return h;
}

/// One sign hash per hyperplane (row of r): [sign(x·r_0), ..., sign(x·r_{J-1})].
inline std::vector<int> hash_signature(std::span<const double> x, const Matrix& r) {
    if (x.size() != r.cols()) {
        throw DimensionError("hash_signature: vector of length " + std::to_string(x.size()) +
                             " against hyperplanes " + r.shape());
    }
    std::vector<int> sig(r.rows());
    for (std::size_t j = 0; j < r.rows(); ++j) {
        const auto rj = r.row(j);
        double dot = 0.0;
        for (std::size_t m = 0; m < x.size(); ++m) dot += x[m] * rj[m];
        sig[j] = dot >= 0.0 ? 1 : -1;
    }
    return sig;
}

/// Angle between two nonzero vectors, with the cosine clamped to [-1, 1].
inline double angle_between(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError("angle_between: length mismatch");
    double dot = 0.0, xx = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        xx += x[i] * x[i];
        yy += y[i] * y[i];
    }
    if (xx == 0.0 || yy == 0.0) throw ArgumentError("angle_between: zero vector");
    const double cosine = std::clamp(dot / std::sqrt(xx * yy), -1.0, 1.0);
    return std::acos(cosine);
}

/// Probability that one random-hyperplane sign hash agrees on x and y: 1 - θ/π.
inline double collision_probability(std::span<const double> x, std::span<const double> y) {
    return 1.0 - angle_between(x, y) / std::numbers::pi;
}

/// Fraction of `hashes` seeded random hyperplanes on which the signatures of x and y agree.
inline double estimate_collision_rate(std::span<const double> x, std::span<const double> y,
                                      std::size_t hashes, std::uint64_t seed) {
    if (hashes == 0) throw ArgumentError("estimate_collision_rate: need at least one hash");
    if (x.size() != y.size() || x.empty()) {
        throw DimensionError("estimate_collision_rate: vectors must be nonempty and equal length");
    }
    const Matrix r = generate_projection({seed, hashes, x.size()}, 0, 0);
    const auto sx = hash_signature(x, r);
    const auto sy = hash_signature(y, r);
    std::size_t agree = 0;
    for (std::size_t j = 0; j < hashes; ++j) agree += sx[j] == sy[j] ? 1 : 0;
    return static_cast<double>(agree) / static_cast<double>(hashes);
}

}  // namespace elmboost
