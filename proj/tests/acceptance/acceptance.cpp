// Acceptance gate: one PASS/FAIL line per criterion.
//
// Every criterion draws from its own child stream of one fixed master seed,
// so the run is reproducible. Criterion 10 is exploratory: its line is
// printed but does not affect the exit status.

#include <rcover/covering.hpp>
#include <rcover/energy.hpp>
#include <rcover/family.hpp>
#include <rcover/frostman.hpp>
#include <rcover/svf.hpp>

#include <support/oracles.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

using namespace rcover;

namespace {

constexpr std::uint64_t kMasterSeed = 1;

int hard_failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail, bool soft = false) {
    std::printf("CRITERION %2d: %s  %s%s | %s\n", id, ok ? "PASS" : "FAIL", what.c_str(), soft ? " (soft)" : "",
                detail.c_str());
    std::fflush(stdout);
    if (!ok && !soft) {
        ++hard_failures;
    }
}

std::string fmt(const char* f, auto... args) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

RngHandle stream(int criterion) { return RngHandle(kMasterSeed).split(static_cast<std::uint64_t>(criterion)); }

void criterion_1() {
    const double l = 1.0;
    const double t = 0.5;
    auto t0 = std::chrono::steady_clock::now();
    double closed = energy_interval_closed_form(l, t).value;
    std::array<double, 1> side{l};
    double quadv = energy_box_quadrature(side, t).value;
    auto mc = energy_monte_carlo(ShapeSpec::interval(l), t, 1000000, stream(1));
    double runtime = seconds_since(t0);
    double oracle = oracle::riemann_interval_energy(l, t, 10000);
    double e_quad = std::abs(quadv - closed) / closed;
    double e_mc = std::abs(mc.value - closed) / closed;
    double e_or = std::abs(oracle - closed) / closed;
    bool ok = e_quad <= 1e-6 && e_mc <= 0.01 && e_or <= 1e-3 && runtime < 5.0;
    report(1, ok, "interval energy closed form / quadrature / MC / Riemann oracle",
           fmt("closed=%.9f quad_rel=%.2e mc_rel=%.2e (se=%.2e) riemann_rel=%.2e runtime=%.2fs", closed, e_quad, e_mc,
               mc.std_error / closed, e_or, runtime));
}

void criterion_2() {
    bool ok = true;
    std::string detail;
    const double r = 0.1;
    for (double t : {0.5, 1.0}) {
        RngHandle rng = stream(2).split(static_cast<std::uint64_t>(t * 10));
        auto big = energy_monte_carlo(ShapeSpec::ball(2, 2.0 * r), t, 1000000, rng.split(0));
        auto small = energy_monte_carlo(ShapeSpec::ball(2, r), t, 1000000, rng.split(1));
        double ratio = big.value / small.value;
        double target = std::pow(2.0, 4.0 - t);
        double rel = std::abs(ratio / target - 1.0);
        ok = ok && rel <= 0.03;
        detail += fmt("t=%.1f ratio=%.4f target=%.4f rel=%.2e; ", t, ratio, target, rel);
    }
    report(2, ok, "ball scaling law I_t(B_2r)/I_t(B_r) = 2^(4-t), d=2", detail);
}

void criterion_3() {
    auto iv = ShapeSpec::interval(0.1);
    auto rep = expected_pair_energy_check(iv, iv, 0.5, 500, stream(3));
    double rel = std::abs(rep.empirical_mean / rep.predicted - 1.0);
    report(3, rel <= 0.03, "cross-pair energy mean equals lambda(U1) lambda(U2) K_t(1)",
           fmt("empirical=%.6f predicted=%.6f rel=%.3f se_rel=%.3f trials=%lld", rep.empirical_mean, rep.predicted,
               rel, rep.std_error / rep.predicted, static_cast<long long>(rep.n_trials)));
}

void criterion_4() {
    RngHandle rng = stream(4);
    double worst = 0.0;
    std::vector<ShapeSpec> shapes{ShapeSpec::interval(0.3), ShapeSpec::box({0.3, 0.2}),
                                  ShapeSpec::box({0.25, 0.1, 0.05})};
    const double t = 0.7;
    for (const auto& s : shapes) {
        double ref = energy_deterministic(s, t).value;
        for (int q = 0; q < 10; ++q) {
            PlacedShape p(s, uniform_point(rng, s.dim()));
            double e = placed_self_energy_quadrature(p, t).value;
            worst = std::max(worst, std::abs(e - ref) / ref);
        }
    }
    report(4, worst <= 1e-9, "placed self-energy equals I_t(U) at 10 random translations",
           fmt("worst relative difference %.2e over 3 shapes x 10 translations", worst));
}

void criterion_5() {
    auto boxes = SequenceFamily::boxes({0.5, 0.5}, {1.2, 1.8});
    double c1 = critical_exponent(boxes, Criterion::corollary1_measure).s_star;
    double c3 = critical_exponent(boxes, Criterion::corollary3_svf).s_star;
    double th = critical_exponent(boxes, Criterion::theorem1_energy).s_star;
    double worst = std::max({std::abs(c1 - 2.0 / 3.0), std::abs(c3 - 5.0 / 6.0), std::abs(th - 5.0 / 6.0)});
    for (double a : {1.1, 1.3, 2.0, 3.0}) {
        auto balls = SequenceFamily::balls(1, 1.0, a);
        for (auto c : {Criterion::corollary1_measure, Criterion::corollary3_svf, Criterion::theorem1_energy}) {
            worst = std::max(worst, std::abs(critical_exponent(balls, c).s_star - 1.0 / a));
        }
    }
    report(5, worst <= 1e-9, "critical exponents 2/3, 5/6 and 1/alpha",
           fmt("boxes: corollary1=%.12f corollary3=%.12f theorem1=%.12f; worst error %.1e", c1, c3, th, worst));
}

void criterion_6() {
    RngHandle rng = stream(6);
    double worst1 = 0.0;
    double worst2 = 0.0;
    for (int q = 0; q < 20; ++q) {
        int kind = static_cast<int>(rng.below(3));
        int d = 1 + static_cast<int>(rng.below(3));
        std::vector<double> g;
        std::vector<double> c;
        for (int j = 0; j < d; ++j) {
            g.push_back(0.3 + 1.5 * rng.uniform());
            c.push_back(0.2 + 0.6 * rng.uniform());
        }
        std::sort(g.begin(), g.end());
        std::sort(c.begin(), c.end(), std::greater<>());
        SequenceFamily f = kind == 0   ? SequenceFamily::balls(d, c[0], g[0])
                           : kind == 1 ? SequenceFamily::boxes(c, g)
                                       : SequenceFamily::affine_cubes(c, g, identity_matrix(d));
        double t = d * (0.05 + 0.9 * rng.uniform());
        std::int64_t m = f.i_min() + static_cast<std::int64_t>(rng.below(200));
        std::int64_t k = m + static_cast<std::int64_t>(rng.below(400));
        MeasureWeights w = build_weights(f, k, m, t);
        worst1 = std::max(worst1, w.identity_residual_1);
        worst2 = std::max(worst2, w.identity_residual_2);
    }
    report(6, worst1 <= 1e-12 && worst2 <= 1e-12, "weight identities on 20 random families and windows",
           fmt("max |sum c lambda - 1| = %.2e, max |sum c^2 I - c_k|/c_k = %.2e", worst1, worst2));
}

void criterion_7() {
    auto f = SequenceFamily::balls(1, 1.0, 1.3);
    std::vector<std::int64_t> ks{2000};
    auto t0 = std::chrono::steady_clock::now();
    auto rep = weak_convergence_diagnostic(f, 0.5, ks, TestFunction::cos2pi(0), 200, stream(7));
    double runtime = seconds_since(t0);
    const auto& r = rep.rows.front();
    double se = std::sqrt(r.variance / 200.0);
    bool var_ok = r.variance <= 1.5 * r.c_phi * r.c_k;
    bool mean_ok = std::abs(r.mean) <= 4.0 * se;
    report(7, var_ok && mean_ok && runtime < 120.0, "variance of S_k below 1.5 C_phi c_k, mean near 0",
           fmt("k=%lld m_k=%lld c_k=%.4e var=%.4e bound=%.4e mean=%.3e (4se=%.3e) runtime=%.1fs",
               static_cast<long long>(r.k), static_cast<long long>(r.m_k), r.c_k, r.variance,
               1.5 * r.c_phi * r.c_k, r.mean, 4.0 * se, runtime));
}

// Family for the c_k diagnostic: intervals of length 0.5 i^{-5}, s* = 0.2.
SequenceFamily decay_family() { return SequenceFamily::balls(1, 0.25, 5.0); }

void criterion_8() {
    auto f = decay_family();
    double s_star = critical_exponent(f, Criterion::theorem1_energy).s_star;
    std::vector<std::int64_t> ks{100, 100000};
    auto sched = WindowSchedule::fixed(1);
    auto below = c_k_decay_profile(f, s_star - 0.1, ks, sched);
    auto above = c_k_decay_profile(f, s_star + 0.1, ks, sched);
    double drop = below.rows[0].c_k / below.rows[1].c_k;
    double change = std::abs(above.rows[1].c_k / above.rows[0].c_k - 1.0);
    auto below_log = c_k_decay_profile(f, s_star - 0.1, ks, WindowSchedule::log_ratio());
    report(8, drop >= 10.0 && change <= 0.1, "c_k decays below s* and stabilizes above s*",
           fmt("s*=%.3f window start fixed at 1: t=s*-0.1 c_k drop %.1fx; t=s*+0.1 change %.1f%% (L=%.4f); "
               "log_ratio window drop %.1fx",
               s_star, drop, 100.0 * change, above.sup_c, below_log.rows[0].c_k / below_log.rows[1].c_k));
}

struct DimensionRuns {
    std::vector<CoverGrid> grids;
    double seconds = 0.0;
};

DimensionRuns dimension_runs(const SequenceFamily& f, RngHandle base) {
    DimensionRuns runs;
    auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t s = 0; s < 5; ++s) {
        runs.grids.push_back(simulate_cover(f, 100000, 4096, base.split(s)));
    }
    runs.seconds = seconds_since(t0);
    return runs;
}

void criterion_9(const SequenceFamily& f, const DimensionRuns& runs) {
    const double target = 1.0 / 1.3;
    bool ok = runs.seconds < 300.0;
    std::string detail;
    for (int m : {10, 20}) {
        std::vector<double> dims;
        std::vector<double> r2s;
        int empty = 0;
        for (const auto& g : runs.grids) {
            try {
                auto e = box_dimension(g, m);
                dims.push_back(e.value);
                r2s.push_back(e.regression_r2);
            } catch (const EmptySetError&) {
                ++empty;
            }
        }
        if (dims.size() < 3) {
            ok = false;
            detail += fmt("M=%d: {count>=M} empty for %d of 5 seeds; ", m, empty);
            continue;
        }
        // empty sets count as dimension 0 in the median
        for (int q = 0; q < empty; ++q) {
            dims.push_back(0.0);
            r2s.push_back(0.0);
        }
        double md = median(dims);
        double mr = median(r2s);
        ok = ok && std::abs(md - target) <= 0.15 && mr >= 0.98;
        detail += fmt("M=%d: median boxdim=%.3f (target %.3f) median r2=%.3f empty=%d; ", m, md, target, mr, empty);
    }
    std::vector<std::uint8_t> full(4096, 1);
    std::vector<std::uint8_t> single(4096, 0);
    single[777] = 1;
    double full_dim = box_dimension(full, 1, 4096).value;
    double single_dim = box_dimension(single, 1, 4096).value;
    bool anchors = full_dim == 1.0 && single_dim < 0.05;
    ok = ok && anchors;
    detail += fmt("anchors: full=%.3f single=%.3f; runtime %.1fs (i_min=%lld)", full_dim, single_dim, runs.seconds,
                  static_cast<long long>(f.i_min()));
    report(9, ok, "box-counting dimension of high-multiplicity set near 1/1.3", detail);
}

void criterion_10(const SequenceFamily& f, const DimensionRuns& runs) {
    RngHandle other = stream(10);
    std::vector<double> single;
    std::vector<double> inter;
    int empty = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const CoverGrid& g1 = runs.grids[s];
        CoverGrid g2 = simulate_cover(f, 100000, 4096, other.split(s));
        auto a = g1.at_least(10);
        auto b = g2.at_least(10);
        std::vector<std::uint8_t> both(a.size());
        for (std::size_t c = 0; c < a.size(); ++c) {
            both[c] = a[c] & b[c];
        }
        try {
            single.push_back(box_dimension(a, 1, 4096, 10).value);
        } catch (const EmptySetError&) {
            single.push_back(0.0);
        }
        try {
            inter.push_back(box_dimension(both, 1, 4096, 10).value);
        } catch (const EmptySetError&) {
            inter.push_back(0.0);
            ++empty;
        }
    }
    double ms = median(single);
    double mi = median(inter);
    report(10, mi >= ms - 0.2, "intersection dimension at least single dimension - 0.2",
           fmt("median single=%.3f median intersection=%.3f empty intersections=%d of 5", ms, mi, empty), true);
}

void criterion_11() {
    auto f = decay_family();
    double s_star = critical_exponent(f, Criterion::theorem1_energy).s_star;
    std::vector<std::int64_t> ks;
    for (double e = 2.0; e <= 5.0 + 1e-9; e += 0.05) {
        ks.push_back(static_cast<std::int64_t>(std::llround(std::pow(10.0, e))));
    }
    auto prof = c_k_decay_profile(f, s_star - 0.1, ks, WindowSchedule::fixed(1));
    std::vector<std::pair<std::int64_t, double>> cs;
    for (const auto& r : prof.rows) {
        cs.emplace_back(r.k, r.c_k);
    }
    bool ok = true;
    std::string detail;
    try {
        auto sel = select_subsequence(cs);
        double s = 0.0;
        for (std::size_t q = 0; q < sel.indices.size(); ++q) {
            s += sel.values[q];
            ok = ok && s <= 1.0 && (q == 0 || sel.indices[q] > sel.indices[q - 1]);
        }
        detail += fmt("profile: %zu levels selected, partial sum %.4f; ", sel.indices.size(), s);
    } catch (const SelectionExhausted& e) {
        ok = false;
        detail += std::string("profile: ") + e.what() + "; ";
    }
    RngHandle rng = stream(11);
    int checked = 0;
    int exhausted = 0;
    for (int rep = 0; rep < 200; ++rep) {
        double rate = 0.1 + 2.0 * rng.uniform();
        double scale = 0.1 + 4.0 * rng.uniform();
        std::vector<std::pair<std::int64_t, double>> v;
        std::int64_t n = 0;
        for (int q = 0; q < 300; ++q) {
            n += 1 + static_cast<std::int64_t>(rng.below(20));
            v.emplace_back(n, scale * (0.8 + 0.4 * rng.uniform()) * std::pow(static_cast<double>(n), -rate));
        }
        try {
            auto sel = select_subsequence(v);
            double s = 0.0;
            for (std::size_t q = 0; q < sel.indices.size(); ++q) {
                s += sel.values[q];
                ok = ok && s <= 1.0 && sel.values[q] <= std::ldexp(1.0, -static_cast<int>(q) - 1) &&
                     (q == 0 || sel.indices[q] > sel.indices[q - 1]);
            }
            ++checked;
        } catch (const SelectionExhausted&) {
            ++exhausted;
        }
    }
    detail += fmt("synthetic: %d selections checked, %d exhausted", checked, exhausted);
    report(11, ok, "subsequence selection increasing with partial sums <= 1", detail);
}

} // namespace

int main() {
    std::printf("acceptance run, master seed %llu\n", static_cast<unsigned long long>(kMasterSeed));
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    auto f = SequenceFamily::balls(1, 1.0, 1.3);
    DimensionRuns runs = dimension_runs(f, stream(9));
    criterion_9(f, runs);
    criterion_10(f, runs);
    criterion_11();
    std::printf("%d hard criteria failed\n", hard_failures);
    return hard_failures == 0 ? 0 : 1;
}
