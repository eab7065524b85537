#ifndef RCOVER_COVERING_HPP
#define RCOVER_COVERING_HPP

// Random coverings of T^d on a dyadic grid.
//
// A cell counts as covered by V_i when its centre lies in V_i. Counts are
// 16-bit and saturate; the grid is capped at 2^26 cells.

#include <rcover/errors.hpp>
#include <rcover/family.hpp>
#include <rcover/shapes.hpp>
#include <rcover/torus.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace rcover {

inline constexpr std::int64_t kMaxGridCells = std::int64_t{1} << 26;

/// Translations v_i for indices first..last of one realization.
///
/// v_i is drawn from its own child stream rng.split(i), so it depends only on
/// the seed and the index, never on how many shapes are placed.
class Realization {
public:
    Realization(int dim, std::int64_t first, std::int64_t last, const RngHandle& rng) : first_(first) {
        detail::require(first >= 1 && last >= first, "realization: need 1 <= first <= last");
        v_.reserve(static_cast<std::size_t>(last - first + 1));
        for (std::int64_t i = first; i <= last; ++i) {
            RngHandle r = rng.split(static_cast<std::uint64_t>(i));
            v_.push_back(uniform_point(r, dim));
        }
    }

    std::int64_t first() const noexcept { return first_; }
    std::int64_t last() const noexcept { return first_ + static_cast<std::int64_t>(v_.size()) - 1; }
    const TorusPoint& at(std::int64_t i) const {
        detail::require(i >= first_ && i <= last(), "realization: index out of range");
        return v_[static_cast<std::size_t>(i - first_)];
    }

private:
    std::int64_t first_;
    std::vector<TorusPoint> v_;
};

class CoverGrid {
public:
    CoverGrid(int dim, int resolution) : dim_(dim), n_(resolution) {
        detail::require(dim >= 1 && dim <= kMaxDim, "cover grid: dimension must be in [1, 4]");
        detail::require(resolution >= 1 && std::has_single_bit(static_cast<unsigned>(resolution)),
                        "cover grid: resolution must be a power of 2");
        double cells = std::pow(static_cast<double>(resolution), dim);
        detail::require(cells <= static_cast<double>(kMaxGridCells), "cover grid: more than 2^26 cells");
        counts_.assign(static_cast<std::size_t>(cells), 0);
    }

    int dim() const noexcept { return dim_; }
    int resolution() const noexcept { return n_; }
    std::int64_t n_shapes_placed() const noexcept { return placed_; }
    const std::vector<std::uint16_t>& counts() const noexcept { return counts_; }
    std::int64_t cell_count() const noexcept { return static_cast<std::int64_t>(counts_.size()); }

    /// Adds one to every cell whose centre lies in p.
    void place(const PlacedShape& p) {
        detail::require(p.spec().dim() == dim_, "cover grid: dimension mismatch");
        for_each_cell(p, [&](std::size_t cell) {
            if (counts_[cell] != std::numeric_limits<std::uint16_t>::max()) {
                ++counts_[cell];
            }
        });
        ++placed_;
    }

    /// Calls fn(linear cell index) for every cell whose centre lies in p.
    template <class Fn>
    void for_each_cell(const PlacedShape& p, Fn&& fn) const {
        const ShapeSpec& s = p.spec();
        const Coords h = s.half_extents();
        std::array<std::int64_t, kMaxDim> lo{};
        std::array<std::int64_t, kMaxDim> hi{};
        for (int j = 0; j < dim_; ++j) {
            double c = p.translation()[j];
            lo[j] = static_cast<std::int64_t>(std::ceil((c - h[j]) * n_ - 0.5));
            hi[j] = static_cast<std::int64_t>(std::floor((c + h[j]) * n_ - 0.5));
            hi[j] = std::min(hi[j], lo[j] + n_ - 1);
            if (hi[j] < lo[j]) {
                return;
            }
        }
        std::array<std::int64_t, kMaxDim> idx = lo;
        for (;;) {
            Coords z{};
            std::size_t cell = 0;
            std::size_t stride = 1;
            for (int j = 0; j < dim_; ++j) {
                std::int64_t w = ((idx[j] % n_) + n_) % n_;
                z[j] = min_image((static_cast<double>(w) + 0.5) / n_ - p.translation()[j]);
                cell += static_cast<std::size_t>(w) * stride;
                stride *= static_cast<std::size_t>(n_);
            }
            if (s.contains_centered(z)) {
                fn(cell);
            }
            int j = 0;
            while (j < dim_) {
                if (++idx[j] <= hi[j]) {
                    break;
                }
                idx[j] = lo[j];
                ++j;
            }
            if (j == dim_) {
                break;
            }
        }
    }

    /// Indicator of {count >= M}.
    std::vector<std::uint8_t> at_least(int multiplicity) const {
        std::vector<std::uint8_t> ind(counts_.size());
        for (std::size_t c = 0; c < counts_.size(); ++c) {
            ind[c] = counts_[c] >= multiplicity ? 1 : 0;
        }
        return ind;
    }

    double covered_fraction() const {
        auto n = std::count_if(counts_.begin(), counts_.end(), [](std::uint16_t c) { return c > 0; });
        return static_cast<double>(n) / static_cast<double>(counts_.size());
    }

    friend bool operator==(const CoverGrid&, const CoverGrid&) = default;

private:
    int dim_;
    int n_;
    std::vector<std::uint16_t> counts_;
    std::int64_t placed_ = 0;
};

/// Places V_i(v_i) for i = first..N (first defaults to f.i_min()) on an n^d grid.
inline CoverGrid simulate_cover(const SequenceFamily& f, std::int64_t N, int n, const RngHandle& rng,
                                std::optional<std::int64_t> first = std::nullopt) {
    std::int64_t start = first.value_or(f.i_min());
    detail::require(start >= f.i_min(), "simulate_cover: shape diameter >= 1 at index " + std::to_string(start));
    detail::require(N >= start, "simulate_cover: N must be at least the first index");
    CoverGrid grid(f.dim(), n);
    Realization v(f.dim(), start, N, rng);
    for (std::int64_t i = start; i <= N; ++i) {
        grid.place(PlacedShape(f.shape(i), v.at(i)));
    }
    return grid;
}

/// Cells covered by at least one V_i with m_k <= i <= k (the set E_k).
inline std::vector<std::uint8_t> window_union(const SequenceFamily& f, const Realization& v, std::int64_t m_k,
                                              std::int64_t k, int n) {
    detail::require(m_k < k, "window_union: need m_k < k");
    detail::require(m_k >= v.first() && k <= v.last(), "window_union: window outside the realization");
    CoverGrid probe(f.dim(), n);
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(probe.cell_count()), 0);
    for (std::int64_t i = m_k; i <= k; ++i) {
        probe.for_each_cell(PlacedShape(f.shape(i), v.at(i)), [&](std::size_t c) { cells[c] = 1; });
    }
    return cells;
}

struct DimensionEstimate {
    double value = 0.0;              ///< slope clamped to [0, d]
    double raw_slope = 0.0;
    std::vector<int> scales_used;    ///< cells per axis in the regression
    std::vector<std::int64_t> occupied_used;
    std::vector<int> all_scales;     ///< n, n/2, ..., 1
    std::vector<std::int64_t> all_occupied;
    double regression_r2 = 0.0;
    int multiplicity_threshold = 0;
};

/// Box-counting dimension of an indicator on an n^d grid.
///
/// The indicator is coarsened to n, n/2, ..., 1 cells per axis (a coarse cell
/// is occupied when any of its children is). The slope of log2(occupied)
/// against log2(cells per axis) is fitted by least squares after dropping the
/// two coarsest scales and the finest one.
inline DimensionEstimate box_dimension(const std::vector<std::uint8_t>& indicator, int dim, int n,
                                       int multiplicity = 0) {
    detail::require(std::has_single_bit(static_cast<unsigned>(n)), "box_dimension: resolution must be a power of 2");
    const int levels = std::countr_zero(static_cast<unsigned>(n));
    detail::require(levels + 1 - 3 >= 4, "box_dimension: need at least 4 regression scales (n >= 64)");
    if (std::find(indicator.begin(), indicator.end(), std::uint8_t{1}) == indicator.end()) {
        throw EmptySetError("box_dimension: no cell reaches the multiplicity threshold");
    }
    DimensionEstimate est;
    est.multiplicity_threshold = multiplicity;
    std::vector<std::uint8_t> cur = indicator;
    int res = n;
    for (;;) {
        est.all_scales.push_back(res);
        est.all_occupied.push_back(std::count(cur.begin(), cur.end(), std::uint8_t{1}));
        if (res == 1) {
            break;
        }
        int half = res / 2;
        std::size_t coarse_size = 1;
        for (int j = 0; j < dim; ++j) {
            coarse_size *= static_cast<std::size_t>(half);
        }
        std::vector<std::uint8_t> next(coarse_size, 0);
        for (std::size_t c = 0; c < cur.size(); ++c) {
            if (!cur[c]) {
                continue;
            }
            std::size_t rem = c;
            std::size_t out = 0;
            std::size_t stride = 1;
            for (int j = 0; j < dim; ++j) {
                std::size_t coord = rem % static_cast<std::size_t>(res);
                rem /= static_cast<std::size_t>(res);
                out += (coord / 2) * stride;
                stride *= static_cast<std::size_t>(half);
            }
            next[out] = 1;
        }
        cur = std::move(next);
        res = half;
    }
    // all_scales is finest first; drop the finest and the two coarsest
    for (std::size_t s = 1; s + 2 < est.all_scales.size(); ++s) {
        est.scales_used.push_back(est.all_scales[s]);
        est.occupied_used.push_back(est.all_occupied[s]);
    }
    const double m = static_cast<double>(est.scales_used.size());
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t s = 0; s < est.scales_used.size(); ++s) {
        sx += std::log2(static_cast<double>(est.scales_used[s]));
        sy += std::log2(static_cast<double>(est.occupied_used[s]));
    }
    double mx = sx / m;
    double my = sy / m;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t s = 0; s < est.scales_used.size(); ++s) {
        double x = std::log2(static_cast<double>(est.scales_used[s])) - mx;
        double y = std::log2(static_cast<double>(est.occupied_used[s])) - my;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    est.raw_slope = sxy / sxx;
    est.value = std::clamp(est.raw_slope, 0.0, static_cast<double>(dim));
    // a constant series is fitted exactly by a zero slope
    est.regression_r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return est;
}

/// Box-counting dimension of {count >= M}.
inline DimensionEstimate box_dimension(const CoverGrid& grid, int multiplicity) {
    detail::require(multiplicity >= 1, "box_dimension: multiplicity threshold must be >= 1");
    return box_dimension(grid.at_least(multiplicity), grid.dim(), grid.resolution(), multiplicity);
}

struct IntersectionReport {
    DimensionEstimate dim_1;
    DimensionEstimate dim_2;
    std::optional<DimensionEstimate> dim_intersection; ///< empty when the intersection is empty
    std::int64_t intersection_cells = 0;
};

/// Two independent realizations; box dimensions of both {count >= M} sets and of their intersection.
inline IntersectionReport intersection_experiment(const SequenceFamily& f, std::int64_t N, int n, int multiplicity,
                                                  const RngHandle& rng1, const RngHandle& rng2) {
    CoverGrid g1 = simulate_cover(f, N, n, rng1);
    CoverGrid g2 = simulate_cover(f, N, n, rng2);
    auto a = g1.at_least(multiplicity);
    auto b = g2.at_least(multiplicity);
    IntersectionReport rep;
    rep.dim_1 = box_dimension(a, f.dim(), n, multiplicity);
    rep.dim_2 = box_dimension(b, f.dim(), n, multiplicity);
    std::vector<std::uint8_t> both(a.size());
    for (std::size_t c = 0; c < a.size(); ++c) {
        both[c] = a[c] & b[c];
        rep.intersection_cells += both[c];
    }
    if (rep.intersection_cells > 0) {
        rep.dim_intersection = box_dimension(both, f.dim(), n, multiplicity);
    }
    return rep;
}

} // namespace rcover

#endif
