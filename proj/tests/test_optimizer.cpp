#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "infodrift/error.hpp"
#include "infodrift/optimizer.hpp"
#include "oracles.hpp"

using namespace infodrift;

namespace {

FocProblem jump_example() {
    FocProblem p;
    p.b = 0.0;
    p.sigma = 1.0;
    p.gamma = {0.5};
    p.lambda = {1.0};
    p.psi = {1.0};
    p.phi = 0.0;
    return p;
}

}  // namespace

TEST(Foc, NoMarksClosedForm) {
    FocProblem p;
    p.b = 0.2;
    p.sigma = 0.5;
    p.phi = 0.3;
    EXPECT_NEAR(foc_residual(0.1, p), 0.2 - 0.1 * 0.25 + 0.5 * 0.3, 1e-15);
    EXPECT_NEAR(solve_optimal_control(p), (0.2 + 0.5 * 0.3) / 0.25, 1e-12);
}

TEST(Foc, NoInformationNoDrift) {
    FocProblem p = jump_example();
    p.psi = {0.0};
    EXPECT_EQ(foc_residual(0.0, p), 0.0);
    EXPECT_EQ(solve_optimal_control(p), 0.0);
}

TEST(Foc, JumpExampleAgainstBisection) {
    const FocProblem p = jump_example();
    auto hand = [](double u) { return -u - 0.25 * u / (1 + 0.5 * u) + 0.5 / (1 + 0.5 * u); };
    for (double u : {-1.5, -0.3, 0.0, 0.4, 3.0}) EXPECT_NEAR(foc_residual(u, p), hand(u), 1e-14);
    const double root = solve_optimal_control(p);
    EXPECT_LE(std::abs(foc_residual(root, p)), 1e-12);
    EXPECT_NEAR(root, oracle::bisection(hand, -1.9, 10.0), 1e-10);
}

TEST(Foc, InsiderAndHonestExamples) {
    FocProblem p;
    p.sigma = 1.0;
    p.phi = 1.5;
    EXPECT_NEAR(solve_optimal_control(p), 1.5, 1e-14);
    FocProblem h;
    h.b = 0.1;
    h.sigma = 1.0;
    EXPECT_NEAR(solve_optimal_control(h), 0.1, 1e-14);
}

TEST(Foc, AdmissibleIntervalAndInadmissiblePoint) {
    FocProblem p = jump_example();
    p.gamma = {0.5, -0.25};
    p.lambda = {1.0, 1.0};
    p.psi = {0.0, 0.0};
    const AdmissibleInterval iv = admissible_interval(p);
    EXPECT_NEAR(iv.lo, (p.eps_adm - 1.0) / 0.5, 1e-15);
    EXPECT_NEAR(iv.hi, (p.eps_adm - 1.0) / -0.25, 1e-15);
    try {
        foc_residual(-2.5, p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InadmissiblePoint);
    }
}

TEST(Foc, NoRootWhenCompensatorVanishesAndDiffusionIsWeak) {
    // Psi = -1: the residual is b - u sigma^2 - lambda gamma, root below the floor.
    FocProblem p = jump_example();
    p.b = 0.05;
    p.sigma = 0.3;
    p.psi = {-1.0};
    try {
        solve_optimal_control(p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoAdmissibleRoot);
    }
    p.sigma = 0.6;
    EXPECT_NEAR(solve_optimal_control(p), (0.05 - 0.5) / 0.36, 1e-12);
}

TEST(Foc, RandomProblemsPlugBackAndMonotone) {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int no_root = 0;
    for (int trial = 0; trial < 500; ++trial) {
        FocProblem p;
        p.b = unit(rng) * 2.0 - 1.0;
        p.sigma = unit(rng) < 0.2 ? 0.0 : unit(rng) * 1.5;
        p.phi = unit(rng) * 6.0 - 3.0;
        const int m = 1 + static_cast<int>(unit(rng) * 3);
        for (int j = 0; j < m; ++j) {
            p.gamma.push_back(unit(rng) * 2.0 - 1.0);
            p.lambda.push_back(0.1 + unit(rng) * 3.0);
            p.psi.push_back(-0.95 + unit(rng) * 5.0);  // compensators positive
        }
        const AdmissibleInterval iv = admissible_interval(p);
        double u = 0.0;
        try {
            u = solve_optimal_control(p);
        } catch (const Error& e) {
            // only legitimate when the residual keeps one sign across the interval
            ASSERT_EQ(e.code(), ErrorCode::NoAdmissibleRoot) << "trial " << trial;
            const double rl = std::isfinite(iv.lo) ? foc_residual(iv.lo, p) : foc_residual(-1e16, p);
            const double rh = std::isfinite(iv.hi) ? foc_residual(iv.hi, p) : foc_residual(1e16, p);
            EXPECT_GT(rl * rh, 0.0) << "trial " << trial;
            ++no_root;
            continue;
        }
        EXPECT_LE(std::abs(foc_residual(u, p)), 1e-12) << "trial " << trial;
        for (std::size_t j = 0; j < p.gamma.size(); ++j) EXPECT_GE(1.0 + u * p.gamma[j], p.eps_adm);

        const double lo = std::isfinite(iv.lo) ? iv.lo : u - 50.0;
        const double hi = std::isfinite(iv.hi) ? iv.hi : u + 50.0;
        double prev = foc_residual(lo, p);
        for (int k = 1; k <= 100; ++k) {
            const double r = foc_residual(std::min(hi, lo + (hi - lo) * k / 100.0), p);
            EXPECT_LT(r, prev) << "trial " << trial;
            prev = r;
        }
    }
    EXPECT_LT(no_root, 100);
}

TEST(Foc, NearBoundaryRootIsTheBestDouble) {
    // Psi close to -1 and a strongly negative drift push u* to within 1e-5 of
    // the boundary 1 + u gamma = 0, where adjacent doubles differ in residual by ~1e-11.
    FocProblem p;
    p.b = 0.05;
    p.sigma = 0.6;
    p.phi = -6.05157;
    p.gamma = {0.5};
    p.lambda = {1.0};
    p.psi = {-0.999891};
    const double u = solve_optimal_control(p);
    EXPECT_LT(1.0 + 0.5 * u, 1e-4);
    const double r = std::abs(foc_residual(u, p));
    EXPECT_LE(r, std::abs(foc_residual(std::nextafter(u, -HUGE_VAL), p)));
    EXPECT_LE(r, std::abs(foc_residual(std::nextafter(u, HUGE_VAL), p)));
    EXPECT_LT(r, 1e-10);
    const double bisected = oracle::bisection([&](double v) { return foc_residual(v, p); }, -2.0 + 1e-8, 0.0);
    EXPECT_NEAR(u, bisected, 1e-14);
}

TEST(HonestBenchmark, Examples) {
    const ValidatedModel zero_drift = fixture::make(1.0, 20, 1.0, {{1.0, 1.0}}, {}, 0.5, 0.0, 0.8, {0.5}).validate();
    const ControlPolicy none = honest_benchmark(zero_drift);
    for (double u : none.table_values().front()) EXPECT_EQ(u, 0.0);

    const ValidatedModel merton = fixture::make(1.0, 20, 1.0, {}, {}, 0.5, 0.1, 0.4).validate();
    const ControlPolicy ratio = honest_benchmark(merton);
    for (double u : ratio.table_values().front()) EXPECT_NEAR(u, 0.1 / 0.16, 1e-12);

    const ValidatedModel jumps = fixture::make(1.0, 20, 1.0, {{1.0, 2.0}}, {}, 0.5, 0.3, 0.5, {0.4}).validate();
    auto hand = [](double u) { return 0.3 - u * 0.25 - 2.0 * u * 0.16 / (1 + 0.4 * u); };
    const double expect = oracle::bisection(hand, -2.4, 10.0);
    const ControlPolicy root = honest_benchmark(jumps);
    for (double u : root.table_values().front()) EXPECT_NEAR(u, expect, 1e-10);
}

TEST(ExpectedLogWealth, ZeroPolicy) {
    const Ensemble e = simulate(fixture::mixed(0.8, 50).validate(), 200, 3);
    const DonskerKernel k(e.model());
    for (Estimator est : {Estimator::Pathwise, Estimator::DriftFormula}) {
        const ValueEstimate v = expected_log_wealth(ControlPolicy::zero(), e, &k, est);
        EXPECT_EQ(v.mean, 0.0);
        EXPECT_EQ(v.std_error, 0.0);
        EXPECT_EQ(v.n_paths, 200u);
    }
}

TEST(ExpectedLogWealth, BrownianInsiderValue) {
    const ValidatedModel m = fixture::make(1.0, 200, 1.0).validate();
    const Ensemble e = simulate(m, 20000, 17);
    const DonskerKernel k(m);
    const ValueEstimate a = expected_log_wealth(ControlPolicy::insider_optimal(), e, &k, Estimator::Pathwise, 2);
    const ValueEstimate b = expected_log_wealth(ControlPolicy::insider_optimal(), e, &k, Estimator::DriftFormula, 2);
    const double exact = 0.5 * std::numbers::ln2;
    EXPECT_LE(std::abs(a.mean - exact), 3.0 * a.std_error + 2e-3);
    EXPECT_LE(std::abs(b.mean - exact), 3.0 * b.std_error + 2e-3);  // left-point sum bias ~1e-3
    EXPECT_LE(std::abs(a.mean - b.mean), 3.0 * std::hypot(a.std_error, b.std_error));
    const ValueEstimate h = expected_log_wealth(ControlPolicy::honest_optimal(), e, &k, Estimator::Pathwise);
    EXPECT_EQ(h.mean, 0.0);
}

TEST(ExpectedLogWealth, InformationValueGrowsWithHorizon) {
    double previous = -1.0;
    for (double t : {0.25, 0.5, 0.75}) {
        const ValidatedModel m = fixture::make(1.0, 200, 1.0, {}, {}, t).validate();
        const Ensemble e = simulate(m, 8000, 5);
        const DonskerKernel k(m);
        const ValueEstimate v = expected_log_wealth(ControlPolicy::insider_optimal(), e, &k, Estimator::DriftFormula);
        EXPECT_LE(std::abs(v.mean - 0.5 * std::log(1.0 / (1.0 - t))), 3.0 * v.std_error + 3e-3) << "T = " << t;
        EXPECT_GT(v.mean, previous);
        previous = v.mean;
    }
}

TEST(ExpectedLogWealth, EstimatorsAgreeOnJumpModel) {
    const ValidatedModel m = fixture::mixed(0.8, 100).validate();
    const Ensemble e = simulate(m, 4000, 21);
    const DonskerKernel k(m);
    const ValueEstimate a = expected_log_wealth(ControlPolicy::insider_optimal(), e, &k, Estimator::Pathwise, 2);
    const ValueEstimate b = expected_log_wealth(ControlPolicy::insider_optimal(), e, &k, Estimator::DriftFormula, 2);
    EXPECT_LE(std::abs(a.mean - b.mean), 3.0 * std::hypot(a.std_error, b.std_error));
    const ValueEstimate h = expected_log_wealth(ControlPolicy::honest_optimal(), e, &k, Estimator::Pathwise, 2);
    EXPECT_GE(a.mean, h.mean - 3.0 * std::hypot(a.std_error, h.std_error));
}

TEST(ExpectedLogWealth, MissingKernel) {
    const Ensemble e = simulate(fixture::brownian(20).validate(), 10, 1);
    EXPECT_THROW(expected_log_wealth(ControlPolicy::insider_optimal(), e, nullptr, Estimator::Pathwise), Error);
}
