#include <rcover/energy.hpp>

#include <support/oracles.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace rcover;

TEST(IntervalEnergy, ClosedFormExamples) {
    EXPECT_NEAR(energy_interval_closed_form(1.0, 0.5).value, 8.0 / 3.0, 1e-12);
    EXPECT_NEAR(energy_interval_closed_form(0.5, 0.5).value, 0.942809, 1e-6);
}

TEST(IntervalEnergy, ScalingLaw) {
    double t = 0.3;
    double base = energy_interval_closed_form(1.0, t).value;
    for (double l : {0.5, 0.1, 0.01}) {
        EXPECT_NEAR(energy_interval_closed_form(l, t).value, std::pow(l, 2.0 - t) * base, 1e-12 * base);
    }
}

TEST(IntervalEnergy, RejectsOutOfRangeExponent) {
    EXPECT_THROW(energy_interval_closed_form(1.0, 1.0), DomainError);
    EXPECT_THROW(energy_interval_closed_form(1.0, 0.0), DomainError);
    EXPECT_THROW(energy_interval_closed_form(0.0, 0.5), DomainError);
}

TEST(IntervalEnergy, RiemannOracleAgrees) {
    double oracle = oracle::riemann_interval_energy(1.0, 0.5, 2000);
    EXPECT_NEAR(oracle, 8.0 / 3.0, 1e-3 * 8.0 / 3.0);
}

TEST(IntervalEnergy, QuadratureMatchesClosedForm) {
    for (double t : {0.1, 0.5, 0.9}) {
        for (double l : {1.0, 0.5, 0.1}) {
            std::array<double, 1> side{l};
            double q = energy_box_quadrature(side, t).value;
            double c = energy_interval_closed_form(l, t).value;
            EXPECT_NEAR(q, c, 1e-6 * c) << "t = " << t << " l = " << l;
        }
    }
    auto unit = ShapeSpec::ball(1, 0.5);
    EXPECT_NEAR(energy_quadrature(unit, 0.5).value, 8.0 / 3.0, 1e-6);
    EXPECT_EQ(energy_quadrature(unit, 0.5).method, EnergyMethod::quadrature);
    EXPECT_EQ(energy_deterministic(unit, 0.5).method, EnergyMethod::closed_form);
}

TEST(BoxEnergy, MatchesNestedIntegralOracle) {
    for (auto [a, b, t] : {std::tuple{0.4, 0.1, 0.5}, std::tuple{0.3, 0.3, 1.5}, std::tuple{0.5, 0.001, 1.2}}) {
        std::array<double, 2> sides{a, b};
        double q = energy_box_quadrature(sides, t).value;
        double o = oracle::rectangle_energy(a, b, t);
        EXPECT_NEAR(q, o, 1e-8 * o) << a << " x " << b << " t = " << t;
    }
}

TEST(BoxEnergy, SymmetricInSides) {
    std::array<double, 3> s1{0.3, 0.1, 0.05};
    std::array<double, 3> s2{0.05, 0.3, 0.1};
    double e1 = energy_box_quadrature(s1, 1.7).value;
    double e2 = energy_box_quadrature(s2, 1.7).value;
    EXPECT_NEAR(e1, e2, 1e-10 * e1);
}

TEST(BoxEnergy, ConvergesUnderRefinement) {
    std::array<double, 3> s{0.4, 0.05, 0.01};
    double prev = energy_box_quadrature(s, 2.2, 0).value;
    double ref = energy_box_quadrature(s, 2.2, 3).value;
    double e1 = energy_box_quadrature(s, 2.2, 1).value;
    EXPECT_LT(std::fabs(e1 - ref), std::fabs(prev - ref) + 1e-15 * ref);
    EXPECT_NEAR(e1, ref, 1e-8 * ref);
}

TEST(BoxEnergy, ScalingLaw) {
    std::array<double, 2> s{0.2, 0.1};
    std::array<double, 2> s2{0.1, 0.05};
    double t = 1.3;
    EXPECT_NEAR(energy_box_quadrature(s2, t).value, std::pow(0.5, 4.0 - t) * energy_box_quadrature(s, t).value,
                1e-10 * energy_box_quadrature(s, t).value);
}

TEST(BallEnergy, MatchesLensOracles) {
    for (double t : {0.5, 1.0, 1.9}) {
        double q = energy_ball_quadrature(2, 0.2, t).value;
        double o = oracle::disk_energy(0.2, t);
        EXPECT_NEAR(q, o, 1e-9 * o) << "disk t = " << t;
    }
    for (double t : {0.5, 2.0, 2.9}) {
        double q = energy_ball_quadrature(3, 0.3, t).value;
        double o = oracle::ball3_energy(0.3, t);
        EXPECT_NEAR(q, o, 1e-9 * o) << "ball t = " << t;
    }
}

TEST(BallEnergy, OneDimensionalReducesToInterval) {
    EXPECT_NEAR(energy_ball_quadrature(1, 0.25, 0.4).value, energy_interval_closed_form(0.5, 0.4).value, 1e-10);
}

TEST(KernelMass, OneDimensionalClosedForm) {
    for (double t : {0.1, 0.5, 0.9}) {
        EXPECT_NEAR(torus_kernel_mass(1, t), 2.0 * std::pow(0.5, 1.0 - t) / (1.0 - t), 1e-12);
    }
    EXPECT_NEAR(torus_kernel_mass(1, 0.5), 2.8284271247, 1e-9);
}

TEST(KernelMass, ZeroExponentIsTorusVolume) {
    for (int d = 1; d <= 4; ++d) {
        EXPECT_NEAR(torus_kernel_mass(d, 0.0), 1.0, 1e-12);
    }
}

TEST(MonteCarlo, IntervalWithinOnePercent) {
    RngHandle rng(42);
    auto e = energy_monte_carlo(ShapeSpec::interval(1.0), 0.3, 400000, rng);
    double exact = energy_interval_closed_form(1.0, 0.3).value;
    EXPECT_NEAR(e.value, exact, 0.01 * exact);
    EXPECT_NEAR(e.value, exact, 4.0 * e.std_error);
    EXPECT_EQ(e.method, EnergyMethod::monte_carlo);
}

TEST(MonteCarlo, PairDistanceMatchesClosedFormAboveHalfDimension) {
    RngHandle rng(7);
    auto e = energy_monte_carlo(ShapeSpec::interval(0.5), 0.8, 400000, rng);
    double exact = energy_interval_closed_form(0.5, 0.8).value;
    EXPECT_NEAR(e.value, exact, 4.0 * e.std_error);
    EXPECT_NEAR(e.value, exact, 0.02 * exact);
}

TEST(MonteCarlo, PlainEstimatorRefusedWhenVarianceInfinite) {
    RngHandle rng(1);
    auto disk = ShapeSpec::ball(2, 0.2);
    EXPECT_THROW(energy_monte_carlo(disk, 1.0, 10000, rng, McScheme::plain), RefusedEstimate);
    EXPECT_THROW(energy_monte_carlo(disk, 1.5, 10000, rng, McScheme::plain), RefusedEstimate);
    EXPECT_NO_THROW(energy_monte_carlo(disk, 0.9, 10000, rng, McScheme::plain));
    EXPECT_NO_THROW(energy_monte_carlo(disk, 1.5, 10000, rng, McScheme::automatic));
}

TEST(MonteCarlo, BallScalingRatio) {
    // I_t(B_r) / I_t(B_{r/2}) = 2^{2d-t}
    RngHandle rng(2024);
    double t = 0.5;
    auto big = energy_monte_carlo(ShapeSpec::ball(2, 0.2), t, 400000, rng.split(0));
    auto small = energy_monte_carlo(ShapeSpec::ball(2, 0.1), t, 400000, rng.split(1));
    EXPECT_NEAR(big.value / small.value, std::pow(2.0, 3.5), 0.03 * std::pow(2.0, 3.5));
}

TEST(MonteCarlo, BoxAgreesWithQuadrature) {
    RngHandle rng(99);
    std::array<double, 2> sides{0.4, 0.1};
    for (double t : {0.5, 1.5}) {
        auto mc = energy_monte_carlo(ShapeSpec::box(sides), t, 200000, rng.split(static_cast<std::uint64_t>(t * 10)));
        double q = energy_box_quadrature(sides, t).value;
        EXPECT_NEAR(mc.value, q, 3.5 * mc.std_error) << "t = " << t;
    }
}

TEST(MonteCarlo, AffineCubeUsesSingularValues) {
    RngHandle rng(5);
    auto c = ShapeSpec::affine_cube(std::array<double, 2>{0.3, 0.1}, rotation_2d(0.6));
    auto mc = energy_monte_carlo(c, 1.2, 200000, rng);
    double q = energy_deterministic(c, 1.2).value;
    EXPECT_NEAR(mc.value, q, 3.5 * mc.std_error);
}

TEST(MonteCarlo, IndependentOfThreadCount) {
    RngHandle rng(11);
    auto s = ShapeSpec::box({0.2, 0.1});
    auto a = energy_monte_carlo(s, 1.0, 100000, rng, McScheme::automatic, 1);
    auto b = energy_monte_carlo(s, 1.0, 100000, rng, McScheme::automatic, 4);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
}

TEST(MonteCarlo, RequiresEnoughSamples) {
    RngHandle rng(3);
    EXPECT_THROW(energy_monte_carlo(ShapeSpec::interval(0.5), 0.5, 999, rng), DomainError);
}

TEST(PlacedSelfEnergy, IndependentOfTranslation) {
    auto box = ShapeSpec::box({0.3, 0.2});
    double ref = energy_box_quadrature(box.sides(), 1.1).value;
    RngHandle rng(8);
    for (int k = 0; k < 10; ++k) {
        TorusPoint v = uniform_point(rng, 2);
        double e = placed_self_energy_quadrature(PlacedShape(box, v), 1.1).value;
        EXPECT_NEAR(e, ref, 1e-9 * ref) << "translation " << v[0] << ", " << v[1];
    }
    double edge = placed_self_energy_quadrature(PlacedShape(box, TorusPoint::wrap({0.99, 0.01})), 1.1).value;
    EXPECT_NEAR(edge, ref, 1e-9 * ref);
}

TEST(PlacedSelfEnergy, IntervalAcrossTheSeam) {
    auto iv = ShapeSpec::interval(0.5);
    double ref = energy_interval_closed_form(0.5, 0.5).value;
    for (double v : {0.0, 0.1, 0.25, 0.8, 0.999}) {
        EXPECT_NEAR(placed_self_energy_quadrature(PlacedShape(iv, TorusPoint::wrap({v})), 0.5).value, ref, 1e-9 * ref);
    }
}

TEST(PlacedSelfEnergy, RejectsRotatedShapes) {
    auto c = ShapeSpec::affine_cube(std::array<double, 2>{0.3, 0.1}, rotation_2d(0.6));
    EXPECT_THROW(placed_self_energy_quadrature(PlacedShape(c, TorusPoint::wrap({0.5, 0.5})), 1.0), DomainError);
}

TEST(CrossEnergy, DisjointIntervalsMatchDirectIntegral) {
    // [0, 0.1] and [0.3, 0.4]: iint |x - y|^{-t} over the pair, t = 0.5
    auto iv = ShapeSpec::interval(0.1);
    PlacedShape a(iv, TorusPoint::wrap({0.05}));
    PlacedShape b(iv, TorusPoint::wrap({0.35}));
    auto F = [](double u) { return std::pow(u, 1.5) / (0.5 * 1.5); };
    double exact = F(0.4) - 2.0 * F(0.3) + F(0.2);
    RngHandle rng(13);
    auto m = cross_energy_monte_carlo(a, b, 0.5, 200000, rng);
    EXPECT_NEAR(m.mean, exact, 4.0 * m.std_error);
    EXPECT_NEAR(m.mean, exact, 0.01 * exact);
}

TEST(CrossEnergy, SelfPairMatchesEnergy) {
    auto s = ShapeSpec::box({0.2, 0.1});
    PlacedShape a(s, TorusPoint::wrap({0.95, 0.5}));
    RngHandle rng(17);
    auto m = cross_energy_monte_carlo(a, a, 1.5, 300000, rng);
    double ref = energy_box_quadrature(s.sides(), 1.5).value;
    EXPECT_NEAR(m.mean, ref, 4.0 * m.std_error);
}

TEST(PairExpectation, IndependentTranslationsGiveKernelMass) {
    auto iv = ShapeSpec::interval(0.1);
    RngHandle rng(21);
    auto rep = expected_pair_energy_check(iv, iv, 0.5, 400, rng);
    EXPECT_NEAR(rep.predicted, 0.0282842712, 1e-9);
    EXPECT_NEAR(rep.empirical_mean, rep.predicted, 4.0 * rep.std_error);
}

TEST(PairExpectation, SharedTranslationGivesSelfEnergy) {
    auto s = ShapeSpec::box({0.2, 0.2});
    RngHandle rng(22);
    auto rep = expected_pair_energy_check(s, s, 1.0, 100, rng, true);
    EXPECT_NEAR(rep.empirical_mean, rep.predicted, 4.0 * rep.std_error + 1e-3 * rep.predicted);
}
