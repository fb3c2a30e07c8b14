#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "infodrift/error.hpp"
#include "infodrift/kernel.hpp"
#include "oracles.hpp"

using namespace infodrift;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no exception";
    return ErrorCode::InvalidConfig;
}

}  // namespace

TEST(Kernel, GaussianDensityAtOrigin) {
    const DonskerKernel k(fixture::brownian().validate());
    EXPECT_EQ(k.mode(), QuadratureMode::GaussianDecay);
    const FourierState st = k.state(0, 0.0);
    for (double y : {-3.0, -2.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0}) {
        const double exact = oracle::gaussian_density(y, 1.0);
        EXPECT_NEAR(k.cond_delta(st, y) / exact, 1.0, 1e-9) << "y = " << y;
    }
}

TEST(Kernel, GaussianConditionalDensityLaterNode) {
    const ValidatedModel m = fixture::make(2.0, 200, 0.6).validate();
    const DonskerKernel k(m);
    const int node = 130;
    const double v = 0.36 * (2.0 - m.grid().node(node));
    const FourierState st = k.state(node, 0.4);
    for (double y : {-1.0, 0.0, 0.4, 0.9, 1.5}) {
        const double exact = oracle::gaussian_density(y - 0.4, v);
        EXPECT_NEAR(k.cond_delta(st, y), exact, 1e-10 + 1e-9 * exact) << "y = " << y;
    }
}

TEST(Kernel, LatticeMassIsPoissonPmf) {
    const ValidatedModel m = fixture::make(1.0, 100, 0.0, {{1.0, 1.3}}, {1.0}).validate();
    const DonskerKernel k(m);
    EXPECT_EQ(k.mode(), QuadratureMode::Periodic);
    const int node = 40;
    const double tau = 1.0 - m.grid().node(node);
    const double y_t = 2.0 - 1.3 * m.grid().node(node);  // two jumps so far
    const FourierState st = k.state(node, 0.0, y_t);
    for (int rem = 0; rem < 8; ++rem) {
        // Y = Y(t) + rem - lambda tau
        const double y = y_t + rem - 1.3 * tau;
        EXPECT_NEAR(k.cond_delta(st, y), oracle::poisson_pmf(rem, 1.3 * tau), 1e-12) << "rem = " << rem;
    }
}

TEST(Kernel, OffLatticeValueThrows) {
    const DonskerKernel k(fixture::pure_poisson(100).validate());
    const FourierState st = k.state(0, 0.0);
    EXPECT_EQ(code_of([&] { k.cond_delta(st, 0.5); }), ErrorCode::OffLattice);
    EXPECT_TRUE(k.on_lattice(-1.0));
    EXPECT_FALSE(k.on_lattice(-0.5));
}

TEST(Kernel, MixtureDensityAtOrigin) {
    for (double theta : {0.3, 0.8, 1.5}) {
        const ValidatedModel m = fixture::make(1.0, 100, theta, {{1.0, 1.0}}, {1.0}).validate();
        const DonskerKernel k(m);
        const FourierState st = k.state(0, 0.0);
        for (double y = -3.0; y <= 4.0; y += 0.35) {
            const double exact = oracle::poisson_gaussian_density(y, 1.0, 1.0, theta, 1.0);
            EXPECT_NEAR(k.cond_delta(st, y), exact, 1e-10) << "theta " << theta << " y " << y;
        }
    }
}

TEST(Kernel, IntegrandAtZeroFrequencyIsOne) {
    const DonskerKernel k(fixture::mixed(0.8, 100).validate());
    const FourierState st = k.state(10, 0.3, -0.2);
    const auto f = k.integrand(st, 0.0, 1.7);
    EXPECT_DOUBLE_EQ(f.real(), 1.0);
    EXPECT_DOUBLE_EQ(f.imag(), 0.0);
}

// d/dy E[delta_Y(y) | F_t] = -E[D_t delta_Y(y) | F_t] / sigma_Y(t), and the
// same derivative with respect to Y(t) carries the opposite sign.
TEST(Kernel, BrownianDerivativeMatchesFiniteDifference) {
    const ValidatedModel m = fixture::mixed(0.8, 200).validate();
    const DonskerKernel k(m);
    const int node = 60;
    const double sigma = 0.8;
    const double h = 1e-4;
    for (double y : {-0.8, 0.1, 0.9, 2.2}) {
        const FourierState st = k.state(node, 0.25, -0.1);
        const double mb = k.cond_malliavin_b(st, y);
        const double dy = (k.cond_delta(st, y + h) - k.cond_delta(st, y - h)) / (2 * h);
        EXPECT_NEAR(dy, -mb / sigma, 1e-6) << "y = " << y;
        const double d_run = (k.cond_delta(k.state(node, 0.25 + h, -0.1), y) -
                              k.cond_delta(k.state(node, 0.25 - h, -0.1), y)) /
                             (2 * h);
        EXPECT_NEAR(d_run, mb / sigma, 1e-6) << "y = " << y;
    }
}

// e^{i x theta} F is F with Y(t) shifted by theta, so the jump derivative is a
// difference of two densities.
TEST(Kernel, JumpDerivativeIsShiftedDifference) {
    const ValidatedModel m = fixture::make(1.0, 200, 0.5, {{1.0, 1.0}, {-2.0, 0.4}}, {1.0, 0.6}).validate();
    const DonskerKernel k(m);
    const FourierState st = k.state(70, 0.1, 0.3);
    for (double y : {-1.0, 0.0, 0.7, 1.9}) {
        const KernelValues v = k.evaluate(st, y);
        EXPECT_NEAR(v.malliavin_n[0], k.cond_delta(st, y - 1.0) - v.delta, 1e-10);
        EXPECT_NEAR(v.malliavin_n[1], k.cond_delta(st, y - 0.6) - v.delta, 1e-10);
        EXPECT_NEAR(k.cond_malliavin_n(st, 1, y), v.malliavin_n[1], 1e-14);
        EXPECT_LT(v.im_residual, 1e-12);
        EXPECT_LE(v.error_estimate, 1e-10);
    }
}

TEST(Kernel, ToleranceControlsAgreement) {
    const ValidatedModel m = fixture::mixed(1.2, 100).validate();
    QuadratureSpec loose;
    loose.abs_tol = 1e-6;
    QuadratureSpec tight;
    tight.abs_tol = 1e-12;
    const DonskerKernel a(m, loose), b(m, tight);
    const FourierState sa = a.state(30, 0.2, 0.5), sb = b.state(30, 0.2, 0.5);
    for (double y : {-1.0, 0.5, 2.0}) EXPECT_NEAR(a.cond_delta(sa, y), b.cond_delta(sb, y), 1e-6);
}

TEST(Kernel, NodeBudgetExhaustion) {
    QuadratureSpec spec;
    spec.abs_tol = 1e-15;
    spec.max_nodes = 40;
    const DonskerKernel k(fixture::mixed(0.3, 100).validate(), spec);
    const FourierState st = k.state(50, 0.0, 0.0);
    EXPECT_EQ(code_of([&] { k.cond_delta(st, 0.0); }), ErrorCode::QuadratureDidNotConverge);
}

TEST(Kernel, ModeMismatchAndWrongModel) {
    QuadratureSpec periodic;
    periodic.mode = QuadratureMode::Periodic;
    EXPECT_THROW(DonskerKernel(fixture::brownian(10).validate(), periodic), Error);
    fixture::Spec s = fixture::brownian(10);
    s.signal.enlarge = false;
    EXPECT_EQ(code_of([&] { DonskerKernel k(s.validate()); }), ErrorCode::WrongModel);
}

TEST(Kernel, TerminalNodeRejected) {
    const DonskerKernel k(fixture::brownian(10).validate());
    EXPECT_THROW(k.state(10, 0.0), Error);
}

TEST(Kernel, StateFromPathUsesRunningIntegrals) {
    const ValidatedModel m = fixture::mixed(0.8, 50).validate();
    const DonskerKernel k(m);
    const SamplePath p = simulate_path(m, 3, 1);
    const FourierState st = k.state(p, 20);
    EXPECT_EQ(st.running_signal(), p.running_signal[20]);
    EXPECT_NEAR(st.tail_gaussian, 0.64 * (1.0 - m.grid().node(20)), 1e-14);
}
