#include <gtest/gtest.h>

#include "hwm/integrator.hpp"
#include "oracles.hpp"

using namespace hwm;

namespace {

Mat sigma3() {
    Mat s(2, 2);
    s << 1, 0, 0, -1;
    return s;
}

GrassmannLoop q_v(double v, int N) {
    BlaschkeProduct B;
    B.zeros = {0.0};
    return traveling_profile(B, v, Mat::Identity(2, 2), N);
}

} // namespace

TEST(Rhs, ConstantVanishes) {
    auto R = rhs(make_loop(FourierSeries::constant(sigma3(), 6), 1));
    EXPECT_LT(std::sqrt(R.l2_norm2()), 1e-15);
}

TEST(Rhs, HalfHarmonicVanishes) {
    CounterRng rng(1);
    auto Q = half_harmonic_map(random_blaschke(rng, 2, 0.4), random_unitary(rng, 2), 40);
    EXPECT_LT(std::sqrt(rhs(Q).l2_norm2()), 1e-10);
}

TEST(Rhs, PauliCrossProduct) {
    // [a.s, b.s] = 2i (a x b).s, so -(i/2)[u.s, |D|u.s] = (u x |D|u).s
    CounterRng rng(2);
    const auto s = pauli();
    const int K = 4, N = 8;
    for (int trial = 0; trial < 5; ++trial) {
        std::array<FourierSeries, 3> u{FourierSeries(1, K), FourierSeries(1, K), FourierSeries(1, K)};
        for (auto& c : u) c = oracle::random_hermitian_series(rng, 1, K);
        FourierSeries U(2, N);
        for (int n = -K; n <= K; ++n)
            for (int i = 0; i < 3; ++i) U[n] += u[i][n](0, 0) * s[i];
        auto R = PseudoSpectral(N).rhs(U);
        auto cross = [&](double th) {
            Eigen::Vector3cd a, b;
            for (int i = 0; i < 3; ++i) {
                a(i) = oracle::eval(u[i], th)(0, 0);
                b(i) = oracle::eval(fractional_derivative(u[i], DerivKind::abs), th)(0, 0);
            }
            Eigen::Vector3cd c = a.cross(b);
            Mat M = Mat::Zero(2, 2);
            for (int i = 0; i < 3; ++i) M += c(i) * s[i];
            return M;
        };
        for (int n = -N; n <= N; ++n) EXPECT_LT((R[n] - oracle::coefficient(cross, 2, n, 64)).norm(), 1e-10) << n;
    }
}

TEST(Rk4, ConstantIsFixedPoint) {
    auto U0 = make_loop(FourierSeries::constant(sigma3(), 4), 1);
    auto traj = integrate(U0, 0.5, 0.1);
    EXPECT_EQ(oracle::l2_dist(traj.back().loop.series, U0.series), 0.0);
    EXPECT_EQ(traj.back().t, 0.5);
}

TEST(Rk4, HalfHarmonicStationary) {
    auto Q = q_v(0.0, 16);
    auto traj = integrate(Q, 1.0, 1e-3, false, 1000);
    EXPECT_LT(oracle::l2_dist(traj.back().loop.series, Q.series), 1e-8);
    EXPECT_LT(traj.back().stats.energy_drift, 1e-12);
    EXPECT_EQ(traj.back().stats.steps, 1000);
}

TEST(Rk4, SingleStepKeepsDiagnostics) {
    auto Q = q_v(0.5, 32);
    IntegratorState s;
    s.loop = Q;
    auto out = step_rk4(s, 1e-3, false, sobolev_energy(Q.series));
    EXPECT_EQ(out.stats.steps, 1);
    EXPECT_NEAR(out.t, 1e-3, 1e-18);
    EXPECT_LT(out.stats.energy_drift, 1e-12);
    EXPECT_LT(out.loop.series.hermitian_defect(), 1e-15);
}

TEST(Rk4, FourthOrder) {
    auto Q = q_v(0.5, 32);
    auto a = cross_validate(Q, 1.0, 0.04, 32);
    auto b = cross_validate(Q, 1.0, 0.02, 32);
    const double ratio = a.max_deviation / b.max_deviation;
    EXPECT_GT(ratio, 12.0);
    EXPECT_LT(ratio, 20.0);
}

TEST(CrossValidation, AgreesWithExplicitFormula) {
    auto cv = cross_validate(q_v(0.5, 32), 1.0, 1e-3, 32);
    ASSERT_FALSE(cv.deviation.empty());
    EXPECT_EQ(cv.t.front(), 0.0);
    EXPECT_LT(cv.deviation.front(), 1e-15);
    EXPECT_LT(cv.max_deviation, 1e-6);
    EXPECT_LT(cv.integrator_energy_drift, 1e-7);
    EXPECT_LT(cv.explicit_energy_drift, 1e-12);
}

TEST(Rk4, RenormalizedRunsStayOnTheGrassmannian) {
    CounterRng rng(3);
    auto U0 = random_rational_loop(rng, 2, 1, 1, 48, 0.4);
    auto plain = integrate(U0, 0.2, 0.02, false);
    auto proj = integrate(U0, 0.2, 0.02, true);
    EXPECT_LT(proj.back().stats.constraint_drift, 1e-10);
    EXPECT_LT(proj.back().stats.constraint_drift, plain.back().stats.constraint_drift);
}

TEST(Rk4, BlowUpGuard) {
    auto U = make_loop(FourierSeries::constant(3.0 * sigma3(), 2), 1);
    EXPECT_THROW(integrate(U, 0.1, 0.01), BlowUp);
    EXPECT_THROW(integrate(q_v(0.0, 4), 0.1, 0.0), DomainError);
}
