#include "doctest.h"

#include "oracles.hpp"
#include "tsync/errors.hpp"
#include "tsync/model.hpp"
#include "tsync/rng.hpp"

#include <cmath>

using namespace tsync;

namespace {

const ModelParams symmetric{0.0, 1.0, 1.0, 1.0};

ModelParams random_params(Rng& rng)
{
    ModelParams p;
    p.v1 = 2.0 * rng.uniform();
    p.v2 = p.v1 + 0.05 + 2.0 * rng.uniform();
    p.alpha12 = 0.2 + 4.8 * rng.uniform();
    p.alpha21 = 0.2 + 4.8 * rng.uniform();
    return p;
}

} // namespace

TEST_CASE("parameter validation")
{
    CHECK_NOTHROW(symmetric.validate());
    CHECK_THROWS_AS((ModelParams{0.0, 1.0, 0.0, 1.0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((ModelParams{0.0, 1.0, 1.0, -1.0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((ModelParams{2.0, 1.0, 1.0, 1.0}.validate()), InvalidArgument);
    CHECK_NOTHROW((ModelParams{1.0, 1.0, 1.0, 1.0}.validate()));
}

TEST_CASE("limiting velocity")
{
    CHECK(limiting_velocity(symmetric) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(limiting_velocity({1.0, 3.0, 2.0, 1.0}) == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
    CHECK(limiting_velocity({2.0, 2.0, 0.3, 4.0}) == doctest::Approx(2.0).epsilon(1e-15));

    Rng rng(11);
    for (int k = 0; k < 1000; ++k) {
        const ModelParams p = random_params(rng);
        const double v = limiting_velocity(p);
        CHECK(v > p.v1);
        CHECK(v < p.v2);
    }
}

TEST_CASE("gap rate")
{
    CHECK(gap_rate(symmetric) == doctest::Approx(2.0));
    CHECK(gap_rate({0.0, 2.0, 0.5, 0.5}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(gap_rate({1.0, 1.0, 1.0, 1.0}), DegenerateVelocities);
}

TEST_CASE("velocity consistency residuals vanish")
{
    for (const ModelParams& p : {symmetric, ModelParams{1.0, 3.0, 2.0, 1.0}}) {
        const auto r = velocity_consistency_residuals(p);
        CHECK(std::abs(r.residual_1) < 1e-15);
        CHECK(std::abs(r.residual_2) < 1e-15);
    }
    Rng rng(12);
    for (int k = 0; k < 1000; ++k) {
        const auto r = velocity_consistency_residuals(random_params(rng));
        CHECK(std::abs(r.residual_1) < 1e-12);
        CHECK(std::abs(r.residual_2) < 1e-12);
    }
    CHECK_THROWS_AS(velocity_consistency_residuals({1.0, 1.0, 1.0, 1.0}), DegenerateVelocities);
}

TEST_CASE("mean trajectories")
{
    const InitialMoments init{0.3, -0.2, 0.0, 0.0};
    const MeanPair at0 = mean_trajectories(symmetric, init, 0.0);
    CHECK(at0.a1 == 0.3);
    CHECK(at0.a2 == -0.2);

    // gap started at its fixed point stays there
    const InitialMoments fixed{0.0, 0.5, 0.0, 0.0};
    for (double t : {0.1, 1.0, 7.0, 40.0}) {
        const MeanPair m = mean_trajectories(symmetric, fixed, t);
        CHECK(m.a2 - m.a1 == doctest::Approx(0.5).epsilon(1e-14));
    }

    // hand value 0.5 (1 - e^{-2}) and an RK4 cross-check
    const MeanPair m = mean_trajectories(symmetric, {}, 1.0);
    CHECK(m.a2 - m.a1 == doctest::Approx(0.5 * (1.0 - std::exp(-2.0))).epsilon(1e-14));
    CHECK(m.a2 - m.a1 == doctest::Approx(0.43233235838169365).epsilon(1e-14));
    const auto ode = oracle::moment_ode(0.0, 1.0, 1.0, 1.0, {0.0, 0.0, 0.0, 0.0}, 1.0);
    CHECK(m.a1 == doctest::Approx(ode[0]).epsilon(1e-10));
    CHECK(m.a2 == doctest::Approx(ode[1]).epsilon(1e-10));
}

TEST_CASE("mean and variance trajectories satisfy their ODEs (finite differences)")
{
    Rng rng(13);
    constexpr double h = 1e-5;
    for (int k = 0; k < 100; ++k) {
        const ModelParams p = random_params(rng);
        const InitialMoments init{rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform(),
                                  rng.uniform()};
        const double t = 0.01 + 5.0 * rng.uniform();

        const MeanPair lo = mean_trajectories(p, init, t - h);
        const MeanPair hi = mean_trajectories(p, init, t + h);
        const MeanPair mid = mean_trajectories(p, init, t);
        const double gap = mid.a2 - mid.a1;
        CHECK(std::abs((hi.a1 - lo.a1) / (2 * h) - (p.v1 + p.alpha12 * gap)) < 1e-6);
        CHECK(std::abs((hi.a2 - lo.a2) / (2 * h) - (p.v2 - p.alpha21 * gap)) < 1e-6);

        const VariancePair dlo = variance_trajectories(p, init, t - h);
        const VariancePair dhi = variance_trajectories(p, init, t + h);
        const VariancePair dmid = variance_trajectories(p, init, t);
        CHECK(std::abs((dhi.d1 - dlo.d1) / (2 * h) -
                       (p.alpha12 * (dmid.d2 - dmid.d1) + p.alpha12 * gap * gap)) < 1e-6);
        CHECK(std::abs((dhi.d2 - dlo.d2) / (2 * h) -
                       (p.alpha21 * (dmid.d1 - dmid.d2) + p.alpha21 * gap * gap)) < 1e-6);
    }
}

TEST_CASE("variance trajectories")
{
    const InitialMoments init{0.0, 0.0, 0.4, 0.7};
    const VariancePair at0 = variance_trajectories(symmetric, init, 0.0);
    CHECK(at0.d1 == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(at0.d2 == doctest::Approx(0.7).epsilon(1e-15));

    // symmetric rates, gap at its limit and equal variances stay equal
    const InitialMoments sym{0.0, 0.5, 0.2, 0.2};
    for (double t : {0.5, 3.0, 30.0}) {
        const VariancePair d = variance_trajectories(symmetric, sym, t);
        CHECK(d.d1 == doctest::Approx(d.d2).epsilon(1e-13));
    }

    // RK4 oracle for an asymmetric case
    const ModelParams p{0.2, 1.4, 0.7, 2.1};
    const InitialMoments mixed{0.1, -0.3, 0.25, 0.05};
    for (double t : {0.5, 2.0, 8.0}) {
        const VariancePair d = variance_trajectories(p, mixed, t);
        const auto ode = oracle::moment_ode(p.v1, p.v2, p.alpha12, p.alpha21,
                                            {mixed.a1_0, mixed.a2_0, mixed.d1_0, mixed.d2_0}, t);
        CHECK(d.d1 == doctest::Approx(ode[2]).epsilon(1e-9));
        CHECK(d.d2 == doctest::Approx(ode[3]).epsilon(1e-9));
    }
}

TEST_CASE("asymptotic constants")
{
    const auto sym = asymptotic_constants(symmetric);
    CHECK(sym.d_diff_inf == 0.0);
    CHECK(sym.d_slope == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(sym.h_kappa2 == sym.d_slope);
    CHECK(sym.gap_inf == doctest::Approx(0.5));
    CHECK(sym.v == doctest::Approx(0.5));

    const auto asym = asymptotic_constants({0.0, 1.0, 1.0, 3.0});
    CHECK(asym.gap_inf == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(asym.d_diff_inf == doctest::Approx(0.03125).epsilon(1e-15));

    CHECK_THROWS_AS(asymptotic_constants({1.0, 1.0, 1.0, 1.0}), DegenerateVelocities);

    // limits reached by the trajectories at t = 50 / (alpha12 + alpha21)
    Rng rng(14);
    for (int k = 0; k < 100; ++k) {
        const ModelParams p = random_params(rng);
        const InitialMoments init{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
        const double t = 50.0 / p.rate_sum();
        const auto c = asymptotic_constants(p);
        const VariancePair d = variance_trajectories(p, init, t);
        const double gap = mean_trajectories(p, init, t).a2 - mean_trajectories(p, init, t).a1;
        const double slope1 = p.alpha12 * (d.d2 - d.d1) + p.alpha12 * gap * gap;
        const double slope2 = p.alpha21 * (d.d1 - d.d2) + p.alpha21 * gap * gap;
        CHECK(std::abs(d.d2 - d.d1 - c.d_diff_inf) < 1e-6);
        CHECK(std::abs(slope1 - c.d_slope) < 1e-6);
        CHECK(std::abs(slope2 - c.d_slope) < 1e-6);
    }
}

TEST_CASE("regime curve")
{
    const double kappa2 = 1.7;
    const double h = 0.25 / kappa2;
    CHECK(regime_curve(symmetric, kappa2, 0.0) == 0.0);
    CHECK(regime_curve(symmetric, kappa2, 200.0) == doctest::Approx(h).epsilon(1e-15));
    for (double s : {1e-6, 1e-4}) {
        CHECK(regime_curve(symmetric, kappa2, s) == doctest::Approx(0.25 * s).epsilon(1e-3));
    }
    // region-1 value does not depend on kappa2
    CHECK(regime_curve(symmetric, 0.3, 1e-6) == doctest::Approx(regime_curve(symmetric, 30.0, 1e-6)).epsilon(1e-3));
    CHECK_THROWS_AS(regime_curve(symmetric, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("spectral eigenpair")
{
    const auto at0 = spectral_eigen(symmetric, 0.0);
    CHECK(std::abs(at0.lambda_plus) == 0.0);
    CHECK(std::abs(at0.lambda_minus - Complex{-2.0, 0.0}) < 1e-15);

    Rng rng(15);
    for (int k = 0; k < 200; ++k) {
        const ModelParams p = random_params(rng);
        const double q = 20.0 * (rng.uniform() - 0.5);
        const auto e = spectral_eigen(p, q);
        const double scale = std::abs(e.a_coef) + std::abs(e.b_coef) + 1.0;
        CHECK(std::abs(e.lambda_plus + e.lambda_minus + e.a_coef) < 1e-12 * scale);
        CHECK(std::abs(e.lambda_plus * e.lambda_minus - e.b_coef) < 1e-12 * scale * scale);
        CHECK(e.lambda_plus.real() >= e.lambda_minus.real());
    }

    // finite-difference slope at 0 for symmetric params is -0.5 i
    const double h = 1e-6;
    const Complex slope = (spectral_eigen(symmetric, h).lambda_plus -
                           spectral_eigen(symmetric, -h).lambda_plus) / (2.0 * h);
    CHECK(std::abs(slope - Complex{0.0, -0.5}) < 1e-8);

    // branch continuity along a fine grid
    const ModelParams p{0.0, 1.0, 0.5, 1.5};
    Complex prev = spectral_eigen(p, 0.0).lambda_plus;
    for (int k = 1; k <= 2000; ++k) {
        const Complex cur = spectral_eigen(p, k * 1e-3).lambda_plus;
        CHECK(std::abs(cur - prev) < 5e-3);
        prev = cur;
    }
}

TEST_CASE("lambda_plus expansion")
{
    const auto sym = lambda_plus_expansion(symmetric);
    CHECK(std::abs(sym.c1.imag() + 0.5) < 1e-6);
    CHECK(std::abs(sym.c1.real()) < 1e-6);
    CHECK(std::abs(sym.c2.real() + 0.125) < 1e-6);
    CHECK(sym.fit_residual < 1e-8);

    Rng rng(16);
    for (int k = 0; k < 100; ++k) {
        const ModelParams p = random_params(rng);
        const auto e = lambda_plus_expansion(p);
        const auto c = asymptotic_constants(p);
        CHECK(std::abs(e.c2) > 0.0);
        CHECK(std::abs(-2.0 * e.c2.real() - c.d_slope) < 1e-5 * c.d_slope);
        CHECK(std::abs(std::abs(e.c1.imag()) - c.v) < 1e-6);
    }
    CHECK_THROWS_AS(lambda_plus_expansion({1.0, 1.0, 1.0, 1.0}), DegenerateVelocities);
}
