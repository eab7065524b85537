#ifndef RCOVER_SVF_HPP
#define RCOVER_SVF_HPP

// Singular value function and the critical exponents of power-law covering
// families.
//
// Every series considered here has terms comparable to i^{-p(t)} with p
// continuous, non-decreasing and piecewise linear in t, so convergence is
// decided from p(t) > 1 symbolically; p(t) = 1 is divergent (harmonic).

#include <rcover/energy.hpp>
#include <rcover/errors.hpp>
#include <rcover/family.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace rcover {

/// Phi^s = alpha_1 ... alpha_{m-1} alpha_m^{s-m+1} with m = ceil(s).
/// Singular values must be descending and in (0,1).
inline double phi(std::span<const double> singular_values, double s) {
    const int d = static_cast<int>(singular_values.size());
    detail::require(d >= 1, "phi: need at least one singular value");
    detail::require(s > 0.0 && s <= d, "phi: s must lie in (0, d]");
    for (int j = 0; j < d; ++j) {
        detail::require(singular_values[j] > 0.0 && singular_values[j] < 1.0, "phi: singular values must lie in (0,1)");
        detail::require(j == 0 || singular_values[j] <= singular_values[j - 1],
                        "phi: singular values must be descending");
    }
    int m = static_cast<int>(std::ceil(s));
    double v = 1.0;
    for (int j = 0; j < m - 1; ++j) {
        v *= singular_values[j];
    }
    return v * std::pow(singular_values[m - 1], s - m + 1);
}

inline double phi(std::initializer_list<double> singular_values, double s) {
    return phi(std::span<const double>(singular_values.begin(), singular_values.size()), s);
}

enum class Criterion {
    theorem1_energy,    ///< sum lambda(U_i)^2 / I_t(U_i)
    corollary1_measure, ///< sum lambda(U_i)^{t/d}
    corollary3_svf      ///< sum Phi^t(L_i)
};

inline std::string to_string(Criterion c) {
    switch (c) {
    case Criterion::theorem1_energy: return "theorem1_energy";
    case Criterion::corollary1_measure: return "corollary1";
    case Criterion::corollary3_svf: return "corollary3";
    }
    return "unknown";
}

/// The exponent function t -> p(t) of a series with terms ~ i^{-p(t)}.
///
/// Stored as breakpoints 0 = b_0 < ... < b_n = d with p linear between them.
struct ExponentFunction {
    std::vector<double> breaks;
    std::vector<double> values;

    double operator()(double t) const {
        auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
        std::size_t k = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - breaks.begin(), 1,
                                                                            static_cast<std::ptrdiff_t>(breaks.size()) - 1));
        double t0 = breaks[k - 1];
        double t1 = breaks[k];
        double w = (t - t0) / (t1 - t0);
        return values[k - 1] + w * (values[k] - values[k - 1]);
    }

    std::string describe() const {
        std::ostringstream os;
        os.precision(12);
        for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
            double slope = (values[k + 1] - values[k]) / (breaks[k + 1] - breaks[k]);
            if (k > 0) {
                os << "; ";
            }
            os << "p(t) = " << values[k] << " + " << slope << "*(t - " << breaks[k] << ") on (" << breaks[k] << ", "
               << breaks[k + 1] << "]";
        }
        return os.str();
    }
};

/// Exponent function of the chosen series for a family.
///
/// corollary1: lambda(U_i)^{t/d} ~ i^{-V t/d} with V the volume exponent.
/// corollary3 and theorem1_energy: Phi^t(L_i) ~ i^{-p(t)} with
///   p(t) = gamma_1 + ... + gamma_{m-1} + (t-m+1) gamma_m,
/// and for the energy series lambda^2 / I_t ~ Phi^t (balls: r^{2d}/r^{2d-t} = r^t).
inline ExponentFunction exponent_function(const SequenceFamily& f, Criterion c) {
    const int d = f.dim();
    ExponentFunction p;
    if (c == Criterion::corollary1_measure) {
        p.breaks = {0.0, static_cast<double>(d)};
        p.values = {0.0, f.volume_exponent()};
        return p;
    }
    std::vector<double> g = f.axis_exponents();
    p.breaks.push_back(0.0);
    p.values.push_back(0.0);
    double cum = 0.0;
    for (int m = 1; m <= d; ++m) {
        cum += g[static_cast<std::size_t>(m - 1)];
        p.breaks.push_back(m);
        p.values.push_back(cum);
    }
    return p;
}

struct SeriesClass {
    double p_t = 0.0;
    bool converges = false;
};

/// Classifies sum_i term_i(t) for term_i ~ i^{-p(t)}: converges iff p(t) > 1.
inline SeriesClass classify_series(const SequenceFamily& f, Criterion c, double t) {
    detail::require(t > 0.0 && t < f.dim(), "classify_series: t must lie in (0, d)");
    SeriesClass r;
    r.p_t = exponent_function(f, c)(t);
    r.converges = r.p_t > 1.0;
    return r;
}

struct ThresholdResult {
    double s_star = 0.0;
    Criterion criterion = Criterion::theorem1_energy;
    std::string exponent_function;
    bool full_dimension = false; ///< the "or t = d" branch was taken
};

/// s* = inf{ t : series converges, or t = d }, solved exactly on the linear
/// piece of p where p crosses 1.
inline ThresholdResult critical_exponent(const SequenceFamily& f, Criterion c) {
    ExponentFunction p = exponent_function(f, c);
    ThresholdResult r;
    r.criterion = c;
    r.exponent_function = p.describe();
    const double d = f.dim();
    if (p.values.back() <= 1.0) {
        r.s_star = d;
        r.full_dimension = true;
        return r;
    }
    for (std::size_t k = 1; k < p.breaks.size(); ++k) {
        if (p.values[k] >= 1.0) {
            double slope = (p.values[k] - p.values[k - 1]) / (p.breaks[k] - p.breaks[k - 1]);
            r.s_star = p.breaks[k - 1] + (1.0 - p.values[k - 1]) / slope;
            return r;
        }
    }
    r.s_star = d;
    r.full_dimension = true;
    return r;
}

/// Singular values of U_i in descending order (box sides sorted, ball radius repeated).
inline std::vector<double> singular_values(const ShapeSpec& s) {
    std::vector<double> v;
    if (s.kind() == ShapeKind::ball) {
        v.assign(static_cast<std::size_t>(s.dim()), s.radius());
    } else {
        v.assign(s.sides().begin(), s.sides().end());
    }
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
}

/// Ratios K_i = I_t(U_i) Phi^t(L_i) / lambda(U_i)^2 over the given indices.
struct SvfConstantFit {
    std::vector<std::int64_t> indices;
    std::vector<double> ratios;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
};

inline SvfConstantFit fit_svf_constant(const SequenceFamily& f, double t, std::span<const std::int64_t> indices,
                                       int level = kDefaultQuadratureLevel) {
    detail::require(!indices.empty(), "fit_svf_constant: need at least one index");
    SvfConstantFit fit;
    for (std::int64_t i : indices) {
        ShapeSpec s = f.shape(i);
        double lam = s.measure();
        double energy = energy_deterministic(s, t, level).value;
        fit.indices.push_back(i);
        fit.ratios.push_back(energy * phi(singular_values(s), t) / (lam * lam));
    }
    auto [lo, hi] = std::minmax_element(fit.ratios.begin(), fit.ratios.end());
    fit.min_ratio = *lo;
    fit.max_ratio = *hi;
    return fit;
}

} // namespace rcover

#endif
