#ifndef RCOVER_TORUS_HPP
#define RCOVER_TORUS_HPP

// Geometry of the flat torus T^d = [0,1)^d and the seeded random streams
// used by every Monte Carlo routine in the library.

#include <rcover/errors.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>

namespace rcover {

inline constexpr int kMaxDim = 4;

using Coords = std::array<double, kMaxDim>;

/// Reduces x into [0,1).
inline double wrap_unit(double x) noexcept {
    double r = x - std::floor(x);
    // floor can leave r == 1.0 for tiny negative x
    return r < 1.0 ? r : 0.0;
}

/// Minimum-image representative of x in [-1/2, 1/2).
inline double min_image(double x) noexcept {
    return x - std::floor(x + 0.5);
}

/// A point of T^d stored with canonical coordinates in [0,1).
class TorusPoint {
public:
    TorusPoint() = default;

    /// Builds a point, reducing each coordinate mod 1.
    static TorusPoint wrap(std::span<const double> coords) {
        TorusPoint p;
        p.set_dim(static_cast<int>(coords.size()));
        for (int j = 0; j < p.dim_; ++j) {
            p.x_[j] = wrap_unit(coords[j]);
        }
        return p;
    }

    static TorusPoint wrap(std::initializer_list<double> coords) {
        return wrap(std::span<const double>(coords.begin(), coords.size()));
    }

    int dim() const noexcept { return dim_; }
    double operator[](int j) const noexcept { return x_[j]; }
    std::span<const double> coords() const noexcept { return {x_.data(), static_cast<std::size_t>(dim_)}; }
    const Coords& raw() const noexcept { return x_; }

    /// The point translated by `offset` (reduced mod 1).
    TorusPoint shifted(const Coords& offset) const noexcept {
        TorusPoint p = *this;
        for (int j = 0; j < dim_; ++j) {
            p.x_[j] = wrap_unit(x_[j] + offset[j]);
        }
        return p;
    }

    friend bool operator==(const TorusPoint& a, const TorusPoint& b) noexcept {
        if (a.dim_ != b.dim_) {
            return false;
        }
        for (int j = 0; j < a.dim_; ++j) {
            if (a.x_[j] != b.x_[j]) {
                return false;
            }
        }
        return true;
    }

private:
    void set_dim(int d) {
        detail::require(d >= 1 && d <= kMaxDim, "torus dimension must be in [1, 4], got " + std::to_string(d));
        dim_ = d;
    }

    Coords x_{};
    int dim_ = 0;
};

/// Coordinatewise minimum-image difference a - b, each component in [-1/2, 1/2).
inline Coords wrapped_difference(const TorusPoint& a, const TorusPoint& b) {
    detail::require(a.dim() == b.dim(), "torus points of different dimension");
    Coords z{};
    for (int j = 0; j < a.dim(); ++j) {
        z[j] = min_image(a[j] - b[j]);
    }
    return z;
}

/// Wrapped Euclidean distance on T^d; never exceeds sqrt(d)/2.
inline double torus_distance(const TorusPoint& a, const TorusPoint& b) {
    detail::require(a.dim() == b.dim(), "torus_distance: dimension mismatch");
    double s = 0.0;
    for (int j = 0; j < a.dim(); ++j) {
        double diff = std::abs(a[j] - b[j]);
        diff = std::min(diff, 1.0 - diff);
        s += diff * diff;
    }
    return std::sqrt(s);
}

inline double norm(const Coords& z, int d) noexcept {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
        s += z[j] * z[j];
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Random streams

/// SplitMix64 finalizer; used to derive PCG state and stream selectors.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix_stream(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// PCG32 (XSH-RR, 64-bit state) with an explicit stream selector.
///
/// Output depends only on integer arithmetic, so a (master_seed, stream_id)
/// pair reproduces the same sequence on every platform. Satisfies
/// UniformRandomBitGenerator.
class Pcg32 {
public:
    using result_type = std::uint32_t;

    Pcg32(std::uint64_t init_state, std::uint64_t init_seq) noexcept {
        inc_ = (init_seq << 1u) | 1u;
        state_ = 0;
        (*this)();
        state_ += init_state;
        (*this)();
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        auto rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
    }

private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

/// A reproducible random stream identified by (master_seed, stream_id).
///
/// Child streams are derived with `split`, so independent workers can each own
/// a stream whose content does not depend on scheduling.
class RngHandle {
public:
    RngHandle(std::uint64_t master_seed, std::uint64_t stream_id = 0) noexcept
        : master_seed_(master_seed),
          stream_id_(stream_id),
          gen_(splitmix64(master_seed ^ 0xA0761D6478BD642FULL), mix_stream(master_seed, stream_id)) {}

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Independent child stream; the same (this, index) always yields the same child.
    RngHandle split(std::uint64_t index) const noexcept {
        return RngHandle(master_seed_, mix_stream(stream_id_ + 0x5851F42D4C957F2DULL, index));
    }

    std::uint32_t next_u32() noexcept { return gen_(); }

    std::uint64_t next_u64() noexcept {
        std::uint64_t hi = gen_();
        return (hi << 32) | gen_();
    }

    /// Uniform double in [0,1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0,1].
    double uniform_open0() noexcept { return 1.0 - uniform(); }

    /// Uniform integer in [0, n) (Lemire's multiply-shift, rejection free of bias).
    std::uint64_t below(std::uint64_t n) noexcept {
        if (n <= 1) {
            return 0;
        }
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) {
                return r % n;
            }
        }
    }

    /// Standard normal via Box-Muller (cached second variate).
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform_open0();
        double u2 = uniform();
        double rad = std::sqrt(-2.0 * std::log(u1));
        double ang = 2.0 * std::numbers::pi * u2;
        spare_ = rad * std::sin(ang);
        has_spare_ = true;
        return rad * std::cos(ang);
    }

    /// Uniform direction on the unit sphere S^{d-1}.
    Coords direction(int d) noexcept {
        Coords u{};
        if (d == 1) {
            u[0] = (next_u32() & 1u) ? 1.0 : -1.0;
            return u;
        }
        double n2 = 0.0;
        do {
            n2 = 0.0;
            for (int j = 0; j < d; ++j) {
                u[j] = normal();
                n2 += u[j] * u[j];
            }
        } while (n2 == 0.0);
        double inv = 1.0 / std::sqrt(n2);
        for (int j = 0; j < d; ++j) {
            u[j] *= inv;
        }
        return u;
    }

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    Pcg32 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Uniform point on T^d.
inline TorusPoint uniform_point(RngHandle& rng, int d) {
    detail::require(d >= 1 && d <= kMaxDim, "uniform_point: d must be in [1, 4]");
    std::array<double, kMaxDim> c{};
    for (int j = 0; j < d; ++j) {
        c[j] = rng.uniform();
    }
    return TorusPoint::wrap(std::span<const double>(c.data(), static_cast<std::size_t>(d)));
}

/// Volume of the unit ball in R^d.
inline double unit_ball_volume(int d) noexcept {
    return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

/// Surface measure of S^{d-1} (2 for d = 1: the two directions).
inline double unit_sphere_area(int d) noexcept {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

} // namespace rcover

#endif
