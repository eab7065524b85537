#ifndef RCOVER_FROSTMAN_HPP
#define RCOVER_FROSTMAN_HPP

// The probability measures mu_k = sum_{i=m_k}^k c_{i,k} lambda|_{V_i} spread
// over the window union E_k, with
//   c_{i,k} = c_k lambda(U_i) / I_t(U_i),   c_k = (sum_i lambda(U_i)^2 / I_t(U_i))^{-1},
// and the numerical checks of the bounds that make mu_k a Frostman-type
// family: bounded expected t-energy, and weak convergence to Lebesgue
// measure tested against a fixed trigonometric basis.

#include <rcover/covering.hpp>
#include <rcover/energy.hpp>
#include <rcover/errors.hpp>
#include <rcover/family.hpp>
#include <rcover/parallel.hpp>
#include <rcover/svf.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace rcover {

namespace detail {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Window schedules

/// Rule choosing the window start m_k for a given k.
struct WindowSchedule {
    enum class Kind {
        log_ratio, ///< m_k = ceil(k / log(k + 2))
        fixed      ///< m_k = start
    };
    Kind kind = Kind::log_ratio;
    std::int64_t start = 1;

    static WindowSchedule log_ratio() { return {Kind::log_ratio, 1}; }
    static WindowSchedule fixed(std::int64_t start) { return {Kind::fixed, start}; }

    /// Window start for k, never below the family's first valid index.
    std::int64_t m_for(std::int64_t k, std::int64_t i_min) const {
        std::int64_t m = start;
        if (kind == Kind::log_ratio) {
            m = static_cast<std::int64_t>(std::ceil(static_cast<double>(k) / std::log(static_cast<double>(k) + 2.0)));
        }
        return std::max(m, i_min);
    }

    std::string describe() const {
        return kind == Kind::log_ratio ? "log_ratio" : "fixed:" + std::to_string(start);
    }

    friend bool operator==(const WindowSchedule&, const WindowSchedule&) = default;
};

// ---------------------------------------------------------------------------
// Weights

struct MeasureWeights {
    double t = 0.0;
    std::int64_t m_k = 0;
    std::int64_t k = 0;
    std::vector<double> weights;  ///< c_{i,k}, i = m_k..k
    std::vector<double> energies; ///< I_t(U_i)
    std::vector<double> measures; ///< lambda(U_i)
    double c_k = 0.0;
    double identity_residual_1 = 0.0; ///< |sum c_{i,k} lambda(U_i) - 1|
    double identity_residual_2 = 0.0; ///< |sum c_{i,k}^2 I_t(U_i) - c_k| / c_k

    std::size_t size() const noexcept { return weights.size(); }
};

/// Deterministic I_t(U_i) for a family member (closed form or quadrature).
inline double family_energy(const SequenceFamily& f, std::int64_t i, double t) {
    return energy_deterministic(f.shape(i), t).value;
}

/// Builds c_{i,k} for the window [m_k, k]; m_k == k gives the one-shape window.
inline MeasureWeights build_weights(const SequenceFamily& f, std::int64_t k, std::int64_t m_k, double t) {
    detail::require(t > 0.0 && t < f.dim(), "build_weights: t must lie in (0, d)");
    detail::require(m_k <= k, "build_weights: degenerate window (m_k > k)");
    detail::require(m_k >= f.i_min(), "build_weights: window starts before the family's first valid index");
    MeasureWeights w;
    w.t = t;
    w.m_k = m_k;
    w.k = k;
    const auto n = static_cast<std::size_t>(k - m_k + 1);
    w.measures.resize(n);
    w.energies.resize(n);
    detail::CompensatedSum s;
    for (std::size_t q = 0; q < n; ++q) {
        std::int64_t i = m_k + static_cast<std::int64_t>(q);
        w.measures[q] = f.measure(i);
        w.energies[q] = family_energy(f, i, t);
        s.add(w.measures[q] * w.measures[q] / w.energies[q]);
    }
    w.c_k = 1.0 / s.value();
    w.weights.resize(n);
    detail::CompensatedSum id1;
    detail::CompensatedSum id2;
    for (std::size_t q = 0; q < n; ++q) {
        w.weights[q] = w.c_k * w.measures[q] / w.energies[q];
        id1.add(w.weights[q] * w.measures[q]);
        id2.add(w.weights[q] * w.weights[q] * w.energies[q]);
    }
    w.identity_residual_1 = std::abs(id1.value() - 1.0);
    w.identity_residual_2 = std::abs(id2.value() - w.c_k) / w.c_k;
    return w;
}

// ---------------------------------------------------------------------------
// c_k profile

struct DecayRow {
    std::int64_t k = 0;
    std::int64_t m_k = 0;
    double c_k = 0.0;
};

struct DecayProfile {
    double t = 0.0;
    double s_star = 0.0; ///< theorem1_energy threshold of the family
    std::vector<DecayRow> rows;
    double sup_c = 0.0; ///< L = max c_k over the computed rows
};

/// c_k for each k in k_list, from prefix sums of lambda(U_i)^2 / I_t(U_i).
inline DecayProfile c_k_decay_profile(const SequenceFamily& f, double t, std::span<const std::int64_t> k_list,
                                      const WindowSchedule& schedule = WindowSchedule::log_ratio()) {
    detail::require(t > 0.0 && t < f.dim(), "c_k_decay_profile: t must lie in (0, d)");
    detail::require(!k_list.empty(), "c_k_decay_profile: empty k list");
    DecayProfile prof;
    prof.t = t;
    prof.s_star = critical_exponent(f, Criterion::theorem1_energy).s_star;
    std::int64_t k_max = *std::max_element(k_list.begin(), k_list.end());
    std::int64_t base = f.i_min();
    detail::require(k_max >= base, "c_k_decay_profile: k below the family's first valid index");
    // prefix[q] = sum_{i=base}^{base+q-1} term_i, in long double to keep window differences accurate
    std::vector<long double> prefix(static_cast<std::size_t>(k_max - base + 2), 0.0L);
    long double comp = 0.0L;
    long double acc = 0.0L;
    for (std::int64_t i = base; i <= k_max; ++i) {
        double lam = f.measure(i);
        long double term = static_cast<long double>(lam) * lam / family_energy(f, i, t);
        long double y = term - comp;
        long double s = acc + y;
        comp = (s - acc) - y;
        acc = s;
        prefix[static_cast<std::size_t>(i - base + 1)] = acc;
    }
    for (std::int64_t k : k_list) {
        std::int64_t m = schedule.m_for(k, base);
        detail::require(m <= k, "c_k_decay_profile: window start exceeds k = " + std::to_string(k));
        long double window = prefix[static_cast<std::size_t>(k - base + 1)] - prefix[static_cast<std::size_t>(m - base)];
        DecayRow row{k, m, static_cast<double>(1.0L / window)};
        prof.sup_c = std::max(prof.sup_c, row.c_k);
        prof.rows.push_back(row);
    }
    return prof;
}

// ---------------------------------------------------------------------------
// Subsequence selection

struct SubsequenceSelection {
    std::vector<std::int64_t> indices; ///< n_1 < n_2 < ...
    std::vector<double> values;        ///< c_{n_k} <= 2^{-k}
    double partial_sum = 0.0;
    int next_level = 1; ///< first dyadic level the prefix could not reach
};

/// Greedy choice of n_k with c_{n_k} <= 2^{-k}, so that sum_k c_{n_k} <= 1.
///
/// `values` pairs an index with c at that index, in increasing index order.
/// The prefix must visibly decay: the minimum over its last quarter must be at
/// most half the maximum over its first quarter, and at least one level must
/// be reachable; otherwise SelectionExhausted is thrown.
inline SubsequenceSelection select_subsequence(std::span<const std::pair<std::int64_t, double>> values) {
    detail::require(values.size() >= 2, "select_subsequence: need at least two values");
    for (std::size_t q = 0; q < values.size(); ++q) {
        detail::require(values[q].second > 0.0, "select_subsequence: values must be positive");
        detail::require(q == 0 || values[q].first > values[q - 1].first,
                        "select_subsequence: indices must be increasing");
    }
    std::size_t quarter = std::max<std::size_t>(1, values.size() / 4);
    double head = 0.0;
    double tail = values.back().second;
    for (std::size_t q = 0; q < quarter; ++q) {
        head = std::max(head, values[q].second);
        tail = std::min(tail, values[values.size() - 1 - q].second);
    }
    if (!(tail <= 0.5 * head)) {
        throw SelectionExhausted("select_subsequence: values do not decay on the computed prefix", 0);
    }
    SubsequenceSelection sel;
    double level_bound = 0.5;
    for (const auto& [index, c] : values) {
        if (c <= level_bound) {
            sel.indices.push_back(index);
            sel.values.push_back(c);
            sel.partial_sum += c;
            level_bound *= 0.5;
        }
    }
    sel.next_level = static_cast<int>(sel.indices.size()) + 1;
    if (sel.indices.empty()) {
        throw SelectionExhausted("select_subsequence: no value reaches the first level 1/2", 0);
    }
    return sel;
}

// ---------------------------------------------------------------------------
// Energy of mu_k

struct MeasureEnergyCheck {
    double empirical = 0.0;
    double std_error = 0.0;
    double kernel_mass = 0.0; ///< K_t(d), the cross-term constant
    double c_k = 0.0;
    double bound = 0.0; ///< K_t(d) + c_k + 5 std_error
    bool within = false;
};

namespace detail {

inline std::size_t sample_index(const std::vector<double>& cumulative, RngHandle& rng) {
    double u = rng.uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

} // namespace detail

/// One realization of the translations; estimates iint |x - y|_T^{-t} dmu_k dmu_k.
///
/// Pairs pick shapes i, j with probability c_{i,k} lambda(U_i); x is uniform in
/// V_i and the inner expectation over V_j uses the bounded mixture estimator.
/// With `safeguard` false the plain estimator is used, which is refused for
/// t >= d/2.
inline MeasureEnergyCheck measure_energy_check(const SequenceFamily& f, const MeasureWeights& w,
                                               const RngHandle& rng, std::int64_t n_pairs, bool safeguard = true,
                                               int threads = 1) {
    const int d = f.dim();
    detail::require(n_pairs >= 1, "measure_energy_check: need at least one pair");
    detail::require(!w.weights.empty(), "measure_energy_check: empty weights");
    if (!safeguard && 2.0 * w.t >= d) {
        throw RefusedEstimate("measure_energy_check: plain estimator has infinite variance for t >= d/2");
    }
    Realization v(d, w.m_k, w.k, rng.split(0));
    std::vector<PlacedShape> placed;
    placed.reserve(w.size());
    std::vector<double> cumulative;
    double acc = 0.0;
    for (std::size_t q = 0; q < w.size(); ++q) {
        std::int64_t i = w.m_k + static_cast<std::int64_t>(q);
        placed.emplace_back(f.shape(i), v.at(i));
        acc += w.weights[q] * w.measures[q];
        cumulative.push_back(acc);
    }
    const double t = w.t;
    auto m = detail::chunked_mc(n_pairs, rng.split(1), threads, [&](RngHandle& r) {
        const PlacedShape& a = placed[detail::sample_index(cumulative, r)];
        const PlacedShape& b = placed[detail::sample_index(cumulative, r)];
        TorusPoint x = a.sample(r);
        if (safeguard) {
            return mixture_kernel_sample(x, b, t, r);
        }
        return std::pow(torus_distance(x, b.sample(r)), -t);
    });
    MeasureEnergyCheck chk;
    chk.empirical = m.mean();
    chk.std_error = m.std_error();
    chk.kernel_mass = torus_kernel_mass(d, t);
    chk.c_k = w.c_k;
    chk.bound = chk.kernel_mass + chk.c_k + 5.0 * chk.std_error;
    chk.within = chk.empirical <= chk.bound;
    return chk;
}

// ---------------------------------------------------------------------------
// Weak convergence against test functions

/// One of {1, cos(2 pi x_j), sin(2 pi x_j), cos(4 pi x_j)}.
struct TestFunction {
    enum class Kind { one, cos, sin };
    Kind kind = Kind::one;
    int frequency = 1; ///< multiples of 2 pi
    int axis = 0;      ///< zero based

    static TestFunction one() { return {}; }
    static TestFunction cos2pi(int axis) { return {Kind::cos, 1, axis}; }
    static TestFunction sin2pi(int axis) { return {Kind::sin, 1, axis}; }
    static TestFunction cos4pi(int axis) { return {Kind::cos, 2, axis}; }

    /// Parses "one", "cos2pi_x<j>", "sin2pi_x<j>", "cos4pi_x<j>" (j one based).
    static TestFunction parse(const std::string& id, int dim) {
        if (id == "one") {
            return one();
        }
        auto pos = id.find("_x");
        detail::require(pos != std::string::npos, "unknown test function '" + id + "'");
        std::string head = id.substr(0, pos);
        int axis = 0;
        try {
            axis = std::stoi(id.substr(pos + 2)) - 1;
        } catch (const std::exception&) {
            throw DomainError("unknown test function '" + id + "'");
        }
        detail::require(axis >= 0 && axis < dim, "test function axis out of range in '" + id + "'");
        if (head == "cos2pi") {
            return cos2pi(axis);
        }
        if (head == "sin2pi") {
            return sin2pi(axis);
        }
        if (head == "cos4pi") {
            return cos4pi(axis);
        }
        throw DomainError("unknown test function '" + id + "'");
    }

    std::string id() const {
        if (kind == Kind::one) {
            return "one";
        }
        std::string head = kind == Kind::sin ? "sin2pi" : (frequency == 1 ? "cos2pi" : "cos4pi");
        return head + "_x" + std::to_string(axis + 1);
    }

    double operator()(const TorusPoint& x) const {
        if (kind == Kind::one) {
            return 1.0;
        }
        double arg = 2.0 * std::numbers::pi * frequency * x[axis];
        return kind == Kind::cos ? std::cos(arg) : std::sin(arg);
    }

    /// lambda(phi) = int_{T^d} phi.
    double lebesgue_mean() const noexcept { return kind == Kind::one ? 1.0 : 0.0; }
    double sup() const noexcept { return 1.0; }
    /// C_phi = (sup phi)^2 - lambda(phi)^2.
    double variance_constant() const noexcept { return sup() * sup() - lebesgue_mean() * lebesgue_mean(); }
};

namespace detail {

inline double sinc(double x) noexcept { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

/// int_{U centred} exp(i omega z_axis) dz, real by central symmetry.
inline double indicator_fourier(const ShapeSpec& s, double omega, int axis) {
    const int d = s.dim();
    const double lam = s.measure();
    switch (s.kind()) {
    case ShapeKind::ball: {
        double x = omega * s.radius();
        if (d == 1) {
            return lam * sinc(x);
        }
        if (x < 1e-8) {
            return lam;
        }
        double nu = 0.5 * d;
        return lam * std::tgamma(nu + 1.0) * std::pow(2.0 / x, nu) * std::cyl_bessel_j(nu, x);
    }
    case ShapeKind::box: return lam * sinc(0.5 * omega * s.sides()[axis]);
    case ShapeKind::affine_cube: {
        double v = lam;
        for (int l = 0; l < d; ++l) {
            v *= sinc(0.5 * omega * s.rotation()[axis * kMaxDim + l] * s.sides()[l]);
        }
        return v;
    }
    }
    return lam;
}

} // namespace detail

/// int_{V} phi dlambda for a placed shape, from the Fourier transform of its indicator.
inline double integrate_test_function(const PlacedShape& p, const TestFunction& phi_fn) {
    if (phi_fn.kind == TestFunction::Kind::one) {
        return p.measure();
    }
    detail::require(phi_fn.axis < p.spec().dim(), "test function axis out of range");
    double omega = 2.0 * std::numbers::pi * phi_fn.frequency;
    double f = detail::indicator_fourier(p.spec(), omega, phi_fn.axis);
    double arg = omega * p.translation()[phi_fn.axis];
    return (phi_fn.kind == TestFunction::Kind::cos ? std::cos(arg) : std::sin(arg)) * f;
}

struct ChebyshevCheck {
    double epsilon = 0.0;
    double exceed_fraction = 0.0;
    double bound = 0.0; ///< variance / epsilon^2 * (1 + slack)
    bool ok = false;
};

struct ConvergenceDiagnostic {
    std::int64_t k = 0;
    std::int64_t m_k = 0;
    double c_k = 0.0;
    std::string phi_id;
    double lambda_phi = 0.0;
    double c_phi = 0.0;
    std::vector<double> samples; ///< S_k per trial
    double mean = 0.0;
    double variance = 0.0;
    double bound = 0.0; ///< C_phi c_k
    double slack = 0.0;
    bool mean_ok = false;
    bool variance_ok = false;
    std::vector<ChebyshevCheck> chebyshev;
};

struct DiagnosticReport {
    std::vector<ConvergenceDiagnostic> rows;
    std::optional<SubsequenceSelection> subsequence; ///< over the c_k of the rows, when they decay
};

inline constexpr int kMinDiagnosticTrials = 30;
inline constexpr double kDefaultVarianceSlack = 0.5;

/// S_k = sum c_{i,k} int_{V_i} phi over independent realizations, for each k.
///
/// Checks |mean - lambda(phi)| <= 4 sqrt(var / trials) and
/// var <= C_phi c_k (1 + slack).
inline DiagnosticReport weak_convergence_diagnostic(const SequenceFamily& f, double t,
                                                    std::span<const std::int64_t> k_list,
                                                    const TestFunction& phi_fn, int trials, const RngHandle& rng,
                                                    const WindowSchedule& schedule = WindowSchedule::log_ratio(),
                                                    double slack = kDefaultVarianceSlack, int threads = 1) {
    if (trials < kMinDiagnosticTrials) {
        throw DomainError("weak_convergence_diagnostic: at least 30 trials are required, got " +
                          std::to_string(trials));
    }
    detail::require(phi_fn.axis < f.dim(), "weak_convergence_diagnostic: test function axis out of range");
    DiagnosticReport rep;
    for (std::int64_t k : k_list) {
        std::int64_t m = schedule.m_for(k, f.i_min());
        MeasureWeights w = build_weights(f, k, m, t);
        ConvergenceDiagnostic row;
        row.k = k;
        row.m_k = m;
        row.c_k = w.c_k;
        row.phi_id = phi_fn.id();
        row.lambda_phi = phi_fn.lebesgue_mean();
        row.c_phi = phi_fn.variance_constant();
        row.slack = slack;
        row.samples.resize(static_cast<std::size_t>(trials));
        RngHandle krng = rng.split(static_cast<std::uint64_t>(k));
        parallel_for(trials, threads, [&](std::int64_t trial) {
            Realization v(f.dim(), m, k, krng.split(static_cast<std::uint64_t>(trial)));
            detail::CompensatedSum s;
            for (std::size_t q = 0; q < w.size(); ++q) {
                std::int64_t i = m + static_cast<std::int64_t>(q);
                s.add(w.weights[q] * integrate_test_function(PlacedShape(f.shape(i), v.at(i)), phi_fn));
            }
            row.samples[static_cast<std::size_t>(trial)] = s.value();
        });
        detail::MomentSums ms;
        for (double x : row.samples) {
            ms.add(x - row.lambda_phi);
        }
        row.mean = row.lambda_phi + ms.mean();
        row.variance = ms.variance();
        row.bound = row.c_phi * row.c_k;
        double dev = std::abs(row.mean - row.lambda_phi);
        row.mean_ok = dev <= 4.0 * std::sqrt(row.variance / trials) + 1e-12;
        row.variance_ok = row.variance <= row.bound * (1.0 + slack) + 1e-15;
        for (double eps : {0.1, 0.2}) {
            ChebyshevCheck c;
            c.epsilon = eps;
            auto exceed = std::count_if(row.samples.begin(), row.samples.end(),
                                        [&](double x) { return std::abs(x - row.lambda_phi) > eps; });
            c.exceed_fraction = static_cast<double>(exceed) / trials;
            c.bound = row.variance / (eps * eps) * (1.0 + slack);
            c.ok = c.exceed_fraction <= c.bound;
            row.chebyshev.push_back(c);
        }
        rep.rows.push_back(std::move(row));
    }
    if (rep.rows.size() >= 2) {
        std::vector<std::pair<std::int64_t, double>> cs;
        for (const auto& r : rep.rows) {
            cs.emplace_back(r.k, r.c_k);
        }
        std::sort(cs.begin(), cs.end());
        try {
            rep.subsequence = select_subsequence(cs);
        } catch (const SelectionExhausted&) {
            rep.subsequence.reset();
        }
    }
    return rep;
}

} // namespace rcover

#endif
