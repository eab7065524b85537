#ifndef RCOVER_ENERGY_HPP
#define RCOVER_ENERGY_HPP

// Riesz t-energies  I_t(A) = iint_{A x A} |x - y|^{-t} dx dy  of the shapes in
// shapes.hpp, by closed form (intervals), deterministic quadrature (boxes,
// affine cubes, balls) and Monte Carlo.
//
// All shape energies are Euclidean energies in local coordinates. For a shape
// whose extent along every axis is at most 1/2 the wrapped torus distance
// between two of its points equals their Euclidean distance, so these are also
// the energies of the placed shapes on T^d.

#include <rcover/errors.hpp>
#include <rcover/parallel.hpp>
#include <rcover/quadrature.hpp>
#include <rcover/shapes.hpp>
#include <rcover/torus.hpp>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace rcover {

enum class EnergyMethod { closed_form, quadrature, monte_carlo };

inline std::string to_string(EnergyMethod m) {
    switch (m) {
    case EnergyMethod::closed_form: return "closed_form";
    case EnergyMethod::quadrature: return "quadrature";
    case EnergyMethod::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

struct EnergyEstimate {
    double value = 0.0;
    double t = 0.0;
    EnergyMethod method = EnergyMethod::closed_form;
    double std_error = 0.0;
    std::int64_t samples_or_nodes = 0;
};

/// Refinement level of the box quadrature. At level 1 a 2-d box with aspect
/// ratio up to 10^3 is resolved to better than 1e-10 relative error; the
/// interval closed form is reproduced to rounding at every level.
inline constexpr int kDefaultQuadratureLevel = 1;

/// I_t of an interval of length `length`: 2 l^{2-t} / ((1-t)(2-t)).
inline EnergyEstimate energy_interval_closed_form(double length, double t) {
    detail::require(t > 0.0 && t < 1.0, "interval energy: t must lie in (0,1)");
    detail::require(length > 0.0, "interval energy: length must be positive");
    EnergyEstimate e;
    e.value = 2.0 * std::pow(length, 2.0 - t) / ((1.0 - t) * (2.0 - t));
    e.t = t;
    e.method = EnergyMethod::closed_form;
    return e;
}

/// I_t of the box with the given side lengths:
///   int_{prod [-a_j, a_j]} prod_j (a_j - |z_j|) |z|^{-t} dz.
inline EnergyEstimate energy_box_quadrature(std::span<const double> sides, double t,
                                            int level = kDefaultQuadratureLevel) {
    const int d = static_cast<int>(sides.size());
    detail::require(d >= 1 && d <= kMaxDim, "box quadrature: dimension must be in [1, 4]");
    detail::require(t > 0.0 && t < d, "box quadrature: t must lie in (0, d)");
    Coords a{};
    for (int j = 0; j < d; ++j) {
        detail::require(sides[j] > 0.0, "box quadrature: sides must be positive");
        a[j] = sides[j];
    }
    auto overlap = [&](const Coords& z) {
        double g = 1.0;
        for (int j = 0; j < d; ++j) {
            g *= a[j] - z[j];
        }
        return g;
    };
    EnergyEstimate e;
    e.value = std::ldexp(quad::corner_integral(sides, t, overlap, level, &e.samples_or_nodes), d);
    e.t = t;
    e.method = EnergyMethod::quadrature;
    return e;
}

/// Torus kernel mass K_t(d) = int_{T^d} |z|^{-t} dz, cached per (d, t).
inline double torus_kernel_mass(int d, double t) {
    detail::require(d >= 1 && d <= kMaxDim, "kernel mass: dimension must be in [1, 4]");
    detail::require(t >= 0.0 && t < d, "kernel mass: need 0 <= t < d");
    static std::mutex mtx;
    static std::map<std::pair<int, double>, double> cache;
    std::lock_guard lock(mtx);
    auto key = std::make_pair(d, t);
    if (auto it = cache.find(key); it != cache.end()) {
        return it->second;
    }
    std::array<double, kMaxDim> half{0.5, 0.5, 0.5, 0.5};
    double v = std::ldexp(quad::corner_integral(std::span<const double>(half.data(), static_cast<std::size_t>(d)), t,
                                                [](const Coords&) { return 1.0; }, 2),
                          d);
    cache.emplace(key, v);
    return v;
}

namespace detail {

/// Volume of the intersection of two balls of radius r whose centres are rho apart.
inline double ball_lens_volume(int d, double r, double rho) {
    if (rho >= 2.0 * r) {
        return 0.0;
    }
    double x = 1.0 - rho * rho / (4.0 * r * r);
    return unit_ball_volume(d) * std::pow(r, d) * boost::math::ibeta(0.5 * (d + 1), 0.5, x);
}

} // namespace detail

/// I_t of a ball:  |S^{d-1}| int_0^{2r} lens(rho) rho^{d-1-t} drho  (tanh-sinh).
inline EnergyEstimate energy_ball_quadrature(int d, double radius, double t) {
    detail::require(d >= 1 && d <= kMaxDim, "ball quadrature: dimension must be in [1, 4]");
    detail::require(t > 0.0 && t < d, "ball quadrature: t must lie in (0, d)");
    detail::require(radius > 0.0, "ball quadrature: radius must be positive");
    // I_t(B_r) = r^{2d-t} I_t(B_1)
    static std::mutex mtx;
    static std::map<std::pair<int, double>, double> cache;
    double unit = 0.0;
    {
        std::lock_guard lock(mtx);
        auto key = std::make_pair(d, t);
        if (auto it = cache.find(key); it != cache.end()) {
            unit = it->second;
        } else {
            boost::math::quadrature::tanh_sinh<double> integrator;
            auto f = [&](double rho) { return detail::ball_lens_volume(d, 1.0, rho) * std::pow(rho, d - 1.0 - t); };
            unit = unit_sphere_area(d) * integrator.integrate(f, 0.0, 2.0, 1e-13);
            cache.emplace(key, unit);
        }
    }
    EnergyEstimate e;
    e.value = std::pow(radius, 2.0 * d - t) * unit;
    e.t = t;
    e.method = EnergyMethod::quadrature;
    return e;
}

/// Deterministic energy of any shape: closed form for intervals, quadrature otherwise.
///
/// Affine cubes go through the box path because the kernel is rotation invariant.
inline EnergyEstimate energy_deterministic(const ShapeSpec& s, double t, int level = kDefaultQuadratureLevel) {
    detail::require(t > 0.0 && t < s.dim(), "energy: t must lie in (0, d)");
    switch (s.kind()) {
    case ShapeKind::ball:
        if (s.dim() == 1) {
            return energy_interval_closed_form(2.0 * s.radius(), t);
        }
        return energy_ball_quadrature(s.dim(), s.radius(), t);
    case ShapeKind::box:
    case ShapeKind::affine_cube:
        return energy_box_quadrature(s.sides(), t, level);
    }
    return {};
}

/// Energy by quadrature for every shape kind (intervals included).
inline EnergyEstimate energy_quadrature(const ShapeSpec& s, double t, int level = kDefaultQuadratureLevel) {
    if (s.kind() == ShapeKind::ball && s.dim() == 1) {
        std::array<double, 1> side{2.0 * s.radius()};
        return energy_box_quadrature(side, t, level);
    }
    return energy_deterministic(s, t, level);
}

// ---------------------------------------------------------------------------
// Monte Carlo

enum class McScheme {
    automatic,    ///< plain when t < d/2, pair_distance otherwise
    plain,        ///< measure^2 * mean |X - Y|^{-t}; infinite variance when t >= d/2
    pair_distance ///< radial importance sampling of the pair offset
};

namespace detail {

inline constexpr std::int64_t kMcChunk = 1 << 15;

struct MomentSums {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::int64_t n = 0;

    void add(double x) noexcept {
        sum += x;
        sum_sq += x * x;
        ++n;
    }
    void merge(const MomentSums& o) noexcept {
        sum += o.sum;
        sum_sq += o.sum_sq;
        n += o.n;
    }
    double mean() const noexcept { return sum / static_cast<double>(n); }
    double variance() const noexcept {
        if (n < 2) {
            return 0.0;
        }
        double m = mean();
        return std::max(0.0, (sum_sq - n * m * m) / static_cast<double>(n - 1));
    }
    double std_error() const noexcept { return std::sqrt(variance() / static_cast<double>(n)); }
};

/// Runs `n` samples in fixed-size chunks, chunk c drawing from rng.split(c).
/// The result does not depend on the number of threads.
template <class Sampler>
MomentSums chunked_mc(std::int64_t n, const RngHandle& rng, int threads, Sampler&& sample) {
    std::int64_t chunks = (n + kMcChunk - 1) / kMcChunk;
    std::vector<MomentSums> parts(static_cast<std::size_t>(chunks));
    parallel_for(chunks, threads, [&](std::int64_t c) {
        RngHandle local = rng.split(static_cast<std::uint64_t>(c));
        std::int64_t count = std::min(kMcChunk, n - c * kMcChunk);
        MomentSums m;
        for (std::int64_t s = 0; s < count; ++s) {
            m.add(sample(local));
        }
        parts[static_cast<std::size_t>(c)] = m;
    });
    MomentSums total;
    for (const auto& p : parts) {
        total.merge(p);
    }
    return total;
}

/// Radial offset with density proportional to rho^{d-1-t} on [0, reach], uniform direction.
inline Coords radial_offset(RngHandle& rng, int d, double t, double reach) {
    double rho = reach * std::pow(rng.uniform_open0(), 1.0 / (d - t));
    Coords u = rng.direction(d);
    for (int j = 0; j < d; ++j) {
        u[j] *= rho;
    }
    return u;
}

/// Normalizer of the radial proposal: q(z) = |z|^{-t} / (Z |S^{d-1}|) on |z| < reach.
inline double radial_normalizer(int d, double t, double reach) {
    return std::pow(reach, d - t) / (d - t) * unit_sphere_area(d);
}

} // namespace detail

/// Monte Carlo estimate of I_t(s).
///
/// The plain estimator averages |X - Y|^{-t} over independent uniform pairs
/// and has finite variance only for t < d/2. The pair-distance scheme draws
/// X uniform in the shape and an offset Z with density proportional to
/// |z|^{-t} on the ball of radius diam(s); the estimator
/// measure * Z-normalizer * 1[X + Z in s] is bounded.
inline EnergyEstimate energy_monte_carlo(const ShapeSpec& s, double t, std::int64_t n_pairs, const RngHandle& rng,
                                         McScheme scheme = McScheme::automatic, int threads = 1) {
    const int d = s.dim();
    detail::require(t > 0.0 && t < d, "energy_monte_carlo: t must lie in (0, d)");
    detail::require(n_pairs >= 1000, "energy_monte_carlo: need at least 10^3 pairs");
    if (scheme == McScheme::automatic) {
        scheme = (2.0 * t < d) ? McScheme::plain : McScheme::pair_distance;
    }
    if (scheme == McScheme::plain && 2.0 * t >= d) {
        throw RefusedEstimate("energy_monte_carlo: plain pair sampling has infinite variance for t >= d/2");
    }
    const double lam = s.measure();
    detail::MomentSums m;
    if (scheme == McScheme::plain) {
        m = detail::chunked_mc(n_pairs, rng, threads, [&](RngHandle& r) {
            Coords x = s.sample_interior(r);
            Coords y = s.sample_interior(r);
            Coords z{};
            for (int j = 0; j < d; ++j) {
                z[j] = x[j] - y[j];
            }
            return lam * lam * std::pow(norm(z, d), -t);
        });
    } else {
        const double reach = s.diameter();
        const double scale = lam * detail::radial_normalizer(d, t, reach);
        m = detail::chunked_mc(n_pairs, rng, threads, [&](RngHandle& r) {
            Coords x = s.sample_interior(r);
            Coords z = detail::radial_offset(r, d, t, reach);
            for (int j = 0; j < d; ++j) {
                x[j] += z[j];
            }
            return s.contains_local(x) ? scale : 0.0;
        });
    }
    EnergyEstimate e;
    e.value = m.mean();
    e.t = t;
    e.method = EnergyMethod::monte_carlo;
    e.std_error = m.std_error();
    e.samples_or_nodes = n_pairs;
    return e;
}

// ---------------------------------------------------------------------------
// Energies of placed shapes on the torus

struct MixtureEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// One unbiased sample of E_{y ~ U(b)} |x - y|_T^{-t} for a fixed x.
///
/// y is drawn from an equal mixture of the uniform law on b and the radial
/// proposal around x (radius 1/2), and reweighted by the mixture density. The
/// sample is bounded by max(2 Z |S^{d-1}| / measure(b), 2^{1+t}), so the
/// estimator keeps finite variance across t in (0, d) even when a and b overlap.
inline double mixture_kernel_sample(const TorusPoint& x, const PlacedShape& b, double t, RngHandle& rng) {
    const int d = x.dim();
    const double reach = 0.5;
    const double norm_q = detail::radial_normalizer(d, t, reach);
    const double lam = b.measure();
    TorusPoint y;
    if (rng.uniform() < 0.5) {
        y = b.sample(rng);
    } else {
        y = x.shifted(detail::radial_offset(rng, d, t, reach));
    }
    if (!b.contains(y)) {
        return 0.0;
    }
    double rho = torus_distance(x, y);
    double kernel = std::pow(rho, -t);
    double q = 0.5 / lam + (rho < reach ? 0.5 * kernel / norm_q : 0.0);
    return kernel / lam / q;
}

/// Monte Carlo estimate of iint_{a x b} |x - y|_T^{-t} dx dy for placed shapes.
inline MixtureEstimate cross_energy_monte_carlo(const PlacedShape& a, const PlacedShape& b, double t,
                                                std::int64_t n_samples, RngHandle& rng) {
    detail::require(a.spec().dim() == b.spec().dim(), "cross energy: dimension mismatch");
    detail::require(t > 0.0 && t < a.spec().dim(), "cross energy: t must lie in (0, d)");
    detail::MomentSums m;
    const double ll = a.measure() * b.measure();
    for (std::int64_t s = 0; s < n_samples; ++s) {
        TorusPoint x = a.sample(rng);
        m.add(ll * mixture_kernel_sample(x, b, t, rng));
    }
    return {m.mean(), m.std_error()};
}

namespace detail {

/// Length of the intersection of two arcs [s1, s1+l1) and [s2, s2+l2) on the unit circle.
inline double arc_overlap(double s1, double l1, double s2, double l2) {
    double total = 0.0;
    double start = wrap_unit(s2 - s1);
    // second arc relative to the first, unrolled once to the left and right
    for (double shift : {-1.0, 0.0, 1.0}) {
        double lo = std::max(0.0, start + shift);
        double hi = std::min(l1, start + shift + l2);
        if (hi > lo) {
            total += hi - lo;
        }
    }
    return total;
}

} // namespace detail

/// Self-energy iint_{V x V} |x - y|_T^{-t} of a placed axis-aligned shape
/// (box, interval, or affine cube with identity rotation), computed on the
/// torus: the overlap volume lambda(V cap (V + z)) is evaluated from the
/// wrapped arcs at the actual translation and integrated against the torus
/// kernel over all 2^d orthants.
///
/// Requires every side to be at most 1/2.
inline EnergyEstimate placed_self_energy_quadrature(const PlacedShape& p, double t,
                                                    int level = kDefaultQuadratureLevel) {
    const ShapeSpec& s = p.spec();
    const int d = s.dim();
    detail::require(s.kind() != ShapeKind::ball || d == 1, "placed self-energy: balls supported only for d = 1");
    detail::require(s.kind() != ShapeKind::affine_cube || s.rotation() == identity_matrix(d),
                    "placed self-energy: affine cubes must be axis aligned");
    detail::require(t > 0.0 && t < d, "placed self-energy: t must lie in (0, d)");
    Coords sides{};
    Coords corner{};
    for (int j = 0; j < d; ++j) {
        sides[j] = s.kind() == ShapeKind::ball ? 2.0 * s.radius() : s.sides()[j];
        detail::require(sides[j] <= 0.5, "placed self-energy: sides must be <= 1/2");
        corner[j] = wrap_unit(p.translation()[j] - 0.5 * sides[j]);
    }
    std::int64_t nodes = 0;
    double total = 0.0;
    std::span<const double> extent(sides.data(), static_cast<std::size_t>(d));
    for (int orth = 0; orth < (1 << d); ++orth) {
        auto overlap = [&](const Coords& z) {
            double g = 1.0;
            for (int j = 0; j < d; ++j) {
                double zj = (orth >> j & 1) ? -z[j] : z[j];
                g *= detail::arc_overlap(corner[j], sides[j], wrap_unit(corner[j] + zj), sides[j]);
            }
            return g;
        };
        std::int64_t n = 0;
        total += quad::corner_integral(extent, t, overlap, level, &n);
        nodes += n;
    }
    EnergyEstimate e;
    e.value = total;
    e.t = t;
    e.method = EnergyMethod::quadrature;
    e.samples_or_nodes = nodes;
    return e;
}

/// Result of the cross-pair expectation experiment.
struct PairEnergyReport {
    double empirical_mean = 0.0;
    double std_error = 0.0;
    double predicted = 0.0;
    std::int64_t n_trials = 0;
};

/// Averages iint_{V_1 x V_2} |x - y|_T^{-t} over independent uniform
/// translations of the two shapes (inner integrals by Monte Carlo).
///
/// With `same_translation` both shapes are placed at one common translation
/// (the i = j case) and s1 must equal s2; the prediction is then I_t(s1).
/// Otherwise the prediction is measure(s1) measure(s2) K_t(d).
inline PairEnergyReport expected_pair_energy_check(const ShapeSpec& s1, const ShapeSpec& s2, double t,
                                                   std::int64_t n_trials, const RngHandle& rng,
                                                   bool same_translation = false, std::int64_t inner_samples = 2000,
                                                   int threads = 1) {
    const int d = s1.dim();
    detail::require(s2.dim() == d, "pair energy: dimension mismatch");
    detail::require(t > 0.0 && t < d, "pair energy: t must lie in (0, d)");
    detail::require(n_trials >= 1 && inner_samples >= 1, "pair energy: need positive sample counts");
    detail::require(!same_translation || s1 == s2, "pair energy: same translation requires identical shapes");
    std::vector<double> values(static_cast<std::size_t>(n_trials));
    parallel_for(n_trials, threads, [&](std::int64_t trial) {
        RngHandle r = rng.split(static_cast<std::uint64_t>(trial));
        TorusPoint v1 = uniform_point(r, d);
        TorusPoint v2 = same_translation ? v1 : uniform_point(r, d);
        PlacedShape a(s1, v1);
        PlacedShape b(s2, v2);
        values[static_cast<std::size_t>(trial)] = cross_energy_monte_carlo(a, b, t, inner_samples, r).mean;
    });
    detail::MomentSums m;
    for (double v : values) {
        m.add(v);
    }
    PairEnergyReport rep;
    rep.empirical_mean = m.mean();
    rep.std_error = m.std_error();
    rep.n_trials = n_trials;
    rep.predicted = same_translation ? energy_deterministic(s1, t).value
                                     : s1.measure() * s2.measure() * torus_kernel_mass(d, t);
    return rep;
}

} // namespace rcover

#endif
