#ifndef RCOVER_QUADRATURE_HPP
#define RCOVER_QUADRATURE_HPP

// Quadrature rules for integrals of the form  int g(z) |z|^{-t} dz  over a box
// with the singular point at a corner.
//
// The box is split into d pyramids with apex at the origin. On pyramid k,
//   z_k = e_k rho,  z_j = e_j rho w_j  (j != k),  rho, w_j in [0,1],
// so that dz = (prod e) rho^{d-1} drho dw and |z|^{-t} = rho^{-t} n_k(w)^{-t}.
// The factor rho^{d-1-t} is absorbed into a Gauss-Jacobi rule in rho, which is
// exact whenever g is a polynomial of low degree along rays. The remaining
// w-integrand is smooth; it is integrated with composite Gauss-Legendre
// panels graded toward w = 0 on the scale e_k / e_j, where n_k(w) varies
// fastest for elongated boxes.

#include <rcover/errors.hpp>
#include <rcover/torus.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace rcover::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Jacobi rule on [-1,1] for the weight (1-x)^alpha (1+x)^beta (Golub-Welsch).
inline Rule gauss_jacobi(int n, double alpha, double beta) {
    detail::require(n >= 1, "gauss_jacobi: need at least one node");
    detail::require(alpha > -1.0 && beta > -1.0, "gauss_jacobi: exponents must exceed -1");
    const double ab = alpha + beta;
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(std::max(n - 1, 1));
    for (int k = 0; k < n; ++k) {
        double s = 2.0 * k + ab;
        diag(k) = (k == 0) ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        double s = 2.0 * k + ab;
        double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
        double den = s * s * (s + 1.0) * (s - 1.0);
        sub(k - 1) = std::sqrt(num / den);
    }
    double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                          std::lgamma(ab + 2.0));
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    if (n == 1) {
        r.nodes[0] = diag(0);
        r.weights[0] = mu0;
        return r;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
    for (int k = 0; k < n; ++k) {
        r.nodes[k] = es.eigenvalues()(k);
        double v0 = es.eigenvectors()(0, k);
        r.weights[k] = mu0 * v0 * v0;
    }
    return r;
}

inline const Rule& gauss_legendre(int n) {
    static std::mutex mtx;
    static std::map<int, Rule> cache;
    std::lock_guard lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, gauss_jacobi(n, 0.0, 0.0)).first;
    }
    return it->second;
}

/// Rule on [0,1] for the weight rho^beta.
inline Rule radial_rule(int n, double beta) {
    Rule gj = gauss_jacobi(n, 0.0, beta);
    // x = 2 rho - 1, (1+x)^beta dx = 2^{beta+1} rho^beta drho
    double scale = std::pow(2.0, -(beta + 1.0));
    for (int k = 0; k < n; ++k) {
        gj.nodes[k] = 0.5 * (gj.nodes[k] + 1.0);
        gj.weights[k] *= scale;
    }
    return gj;
}

inline constexpr int kPanelNodes = 8;

/// Composite Gauss-Legendre rule on [0,1] with panels graded geometrically
/// toward 0 down to `scale`/8; each panel is split into 2^level sub-panels.
inline Rule graded_rule(double scale, int level) {
    std::vector<double> breaks{0.0};
    if (scale < 0.5) {
        for (double b = scale / 8.0; b < 1.0; b *= 2.0) {
            breaks.push_back(b);
        }
    }
    breaks.push_back(1.0);
    const Rule& gl = gauss_legendre(kPanelNodes);
    const int sub = 1 << level;
    Rule r;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        double h = (breaks[p + 1] - breaks[p]) / sub;
        for (int s = 0; s < sub; ++s) {
            double a = breaks[p] + s * h;
            for (int q = 0; q < kPanelNodes; ++q) {
                r.nodes.push_back(a + 0.5 * h * (gl.nodes[q] + 1.0));
                r.weights.push_back(0.5 * h * gl.weights[q]);
            }
        }
    }
    return r;
}

/// Gauss-Jacobi nodes used along rays; exact for g polynomial of degree <= 7 in rho.
inline constexpr int kRadialNodes = 4;

/// Integral over [0,e_1] x ... x [0,e_d] of g(z) |z|^{-t}, 0 <= t < d.
///
/// `g` is called with the point z (non-negative coordinates) and must be a
/// low-degree polynomial along rays from the origin for the radial rule to be
/// exact; smooth g is handled with spectral accuracy in any case.
template <class G>
double corner_integral(std::span<const double> extent, double t, G&& g, int level,
                       std::int64_t* evaluations = nullptr) {
    const int d = static_cast<int>(extent.size());
    detail::require(d >= 1 && d <= kMaxDim, "corner_integral: dimension must be in [1, 4]");
    detail::require(t >= 0.0 && t < d, "corner_integral: need 0 <= t < d");
    detail::require(level >= 0 && level <= 8, "corner_integral: level must be in [0, 8]");
    for (double e : extent) {
        detail::require(e > 0.0, "corner_integral: extents must be positive");
    }
    const Rule rad = radial_rule(kRadialNodes, d - 1.0 - t);
    double vol = 1.0;
    for (double e : extent) {
        vol *= e;
    }
    std::int64_t count = 0;
    double total = 0.0;
    for (int k = 0; k < d; ++k) {
        // per-axis w rules for the d-1 transverse directions
        std::array<Rule, kMaxDim> wr;
        std::array<int, kMaxDim> axes{};
        int m = 0;
        for (int j = 0; j < d; ++j) {
            if (j == k) {
                continue;
            }
            axes[m] = j;
            wr[m] = graded_rule(extent[k] / extent[j], level);
            ++m;
        }
        std::array<std::size_t, kMaxDim> idx{};
        double pyramid = 0.0;
        for (;;) {
            double wweight = 1.0;
            double n2 = extent[k] * extent[k];
            Coords dir{};
            dir[k] = extent[k];
            for (int a = 0; a < m; ++a) {
                double w = wr[a].nodes[idx[a]];
                wweight *= wr[a].weights[idx[a]];
                double c = extent[axes[a]] * w;
                dir[axes[a]] = c;
                n2 += c * c;
            }
            double ray = 0.0;
            for (std::size_t q = 0; q < rad.nodes.size(); ++q) {
                Coords z{};
                for (int j = 0; j < d; ++j) {
                    z[j] = rad.nodes[q] * dir[j];
                }
                ray += rad.weights[q] * g(z);
            }
            count += static_cast<std::int64_t>(rad.nodes.size());
            pyramid += wweight * std::pow(n2, -0.5 * t) * ray;
            // odometer over the transverse axes
            int a = 0;
            while (a < m) {
                if (++idx[a] < wr[a].nodes.size()) {
                    break;
                }
                idx[a] = 0;
                ++a;
            }
            if (a == m) {
                break;
            }
        }
        total += pyramid;
    }
    if (evaluations != nullptr) {
        *evaluations = count;
    }
    return vol * total;
}

} // namespace rcover::quad

#endif
