#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "infodrift/drift.hpp"
#include "infodrift/error.hpp"
#include "oracles.hpp"

using namespace infodrift;

TEST(Drift, BrownianPhiMatchesBridgeFormula) {
    const ValidatedModel m = fixture::make(1.0, 200, 1.3).validate();
    const DonskerKernel k(m);
    for (std::uint64_t id = 0; id < 5; ++id) {
        const SamplePath p = simulate_path(m, 77, id);
        for (int node : {0, 37, 100, 150, 179}) {
            const double t = m.grid().node(node);
            const double exact = oracle::bridge_phi(p.signal, p.running_signal[static_cast<std::size_t>(node)], 1.3, 1.0, t);
            EXPECT_NEAR(phi(k, p, node), exact, 1e-6 * std::max(1.0, std::abs(exact)));
            EXPECT_NEAR(closed_form_phi_brownian(m, p, node), exact, 1e-10 * std::max(1.0, std::abs(exact)));
        }
    }
}

TEST(Drift, PurePoissonPsiMatchesCountingFormula) {
    const ValidatedModel m = fixture::pure_poisson(100, 2.0).validate();
    const DonskerKernel k(m);
    for (std::uint64_t id = 0; id < 10; ++id) {
        const SamplePath p = simulate_path(m, 5, id);
        for (int node : {0, 25, 50, 80, 99}) {
            const double tau = 1.0 - m.grid().node(node);
            int remaining = 0;
            for (int c = node; c < 100; ++c) remaining += p.jump_counts[0][static_cast<std::size_t>(c)];
            const double exact = remaining / (2.0 * tau) - 1.0;
            EXPECT_NEAR(psi(k, p, node, 0), exact, 1e-9);
        }
    }
}

TEST(Drift, AllJumpsRealizedGivesMinusOne) {
    const ValidatedModel m = fixture::pure_poisson(100).validate();
    const DonskerKernel k(m);
    const int node = 60;
    const double y_t = 3.0 - m.grid().node(node);
    const double y = 3.0 - 1.0;  // no further jumps
    const KernelValues v = k.evaluate(k.state(node, 0.0, y_t), y);
    EXPECT_NEAR(v.malliavin_n[0] / v.delta, -1.0, 1e-12);
}

TEST(Drift, MixedModelAgainstSeriesOracle) {
    for (double theta : {0.5, 0.8, 1.2}) {
        const ValidatedModel m = fixture::mixed(theta, 100).validate();
        const DonskerKernel k(m);
        for (std::uint64_t id = 0; id < 4; ++id) {
            const SamplePath p = simulate_path(m, 12, id);
            for (int node : {0, 40, 85}) {
                const double tau = 1.0 - m.grid().node(node);
                const double r = p.signal - p.running_signal[static_cast<std::size_t>(node)];
                const double ph = phi(k, p, node);
                const double ps = psi(k, p, node, 0);
                EXPECT_NEAR(ph, oracle::mixed_phi(r, theta, 1.0, tau), 1e-7 * std::max(1.0, std::abs(ph)));
                EXPECT_NEAR(ps, oracle::mixed_psi(r, theta, 1.0, tau), 1e-7 * std::max(1.0, std::abs(ps)));
                // Linear identity between the two drifts.
                const double identity = closed_form_psi_poisson(m, p, node, ph);
                EXPECT_NEAR(ps, identity, 1e-7 * std::max(1.0, std::abs(ps)));
            }
        }
    }
}

TEST(Drift, HandExampleOfLinearIdentity) {
    // (Y - Y(t)) / (lambda (T0 - t)) = 1.4, theta = 0.8, lambda = 1, Phi = 0.7
    EXPECT_NEAR(closed_form_psi_poisson(1.4, 0.0, 0.8, 1.0, 1.0, 0.7), 1.4 - 0.8 * 0.7, 1e-15);
    EXPECT_EQ(closed_form_psi_poisson(2.0, 1.0, 0.0, 2.0, 0.25, 123.0), 2.0);
}

TEST(Drift, PathDriftCoversHorizonAndMatchesPointwise) {
    const ValidatedModel m = fixture::mixed(0.8, 100).validate();
    const DonskerKernel k(m);
    const SamplePath p = simulate_path(m, 1, 9);
    const PathDrift d = compute_path_drift(&k, m, p);
    EXPECT_EQ(d.nodes(), m.horizon_cells() + 1);
    for (int node : {0, 17, 50}) {
        EXPECT_EQ(d.phi[static_cast<std::size_t>(node)], phi(k, p, node));
        EXPECT_EQ(d.psi[0][static_cast<std::size_t>(node)], psi(k, p, node, 0));
        EXPECT_DOUBLE_EQ(d.compensator(m.levy(), 0, node), 1.0 + d.psi[0][static_cast<std::size_t>(node)]);
        EXPECT_DOUBLE_EQ(d.alpha2_weight(m.levy(), 0, node), d.psi[0][static_cast<std::size_t>(node)]);
        EXPECT_GE(d.compensator(m.levy(), 0, node), 0.0);
        EXPECT_LT(d.im_residual[static_cast<std::size_t>(node)], 1e-12);
    }
}

TEST(Drift, NoEnlargementIsZero) {
    fixture::Spec s = fixture::mixed(0.8, 50);
    s.signal.enlarge = false;
    const ValidatedModel m = s.validate();
    const PathDrift d = compute_path_drift(nullptr, m, simulate_path(m, 1, 0));
    for (double v : d.phi) EXPECT_EQ(v, 0.0);
    for (double v : d.psi[0]) EXPECT_EQ(v, 0.0);
}

TEST(Drift, UnderflowIsReported) {
    const ValidatedModel m = fixture::brownian(50).validate();
    const DonskerKernel k(m);
    SamplePath p = simulate_path(m, 1, 0);
    p.signal = 60.0;  // far outside the support of the t = 0 law
    try {
        compute_path_drift(&k, m, p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DenominatorUnderflow);
    }
}

TEST(Drift, ClosedFormsRejectOtherModels) {
    const ValidatedModel mixed = fixture::mixed(0.8, 20).validate();
    const SamplePath p = simulate_path(mixed, 1, 0);
    EXPECT_THROW(closed_form_phi_brownian(mixed, p, 0), Error);
    const ValidatedModel two = fixture::make(1.0, 20, 0.5, {{1.0, 1.0}, {2.0, 1.0}}).validate();
    EXPECT_THROW(closed_form_psi_poisson(two, simulate_path(two, 1, 0), 0, 0.0), Error);
}

TEST(Psi, NoJumpsLeftGivesExactlyMinusOne) {
    const ValidatedModel model = fixture::pure_poisson(200, 2.5).validate();
    const DonskerKernel kernel(model);
    int checked = 0;
    for (std::uint64_t i = 0; i < 40; ++i) {
        const SamplePath p = simulate_path(model, 5, i);
        int after = 0;
        for (int c = 0; c < 200; ++c)
            if (p.jump_counts[0][static_cast<std::size_t>(c)] > 0) after = c + 1;
        if (after >= 200) continue;
        const double v = psi(kernel, p, after, 0);
        EXPECT_NEAR(v, -1.0, 1e-12) << "path " << i;
        EXPECT_GE(v, -1.0) << "path " << i;
        EXPECT_GE(2.5 * (1.0 + v), 0.0);
        ++checked;
    }
    EXPECT_GT(checked, 10);
}
