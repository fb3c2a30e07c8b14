#pragma once
// =============================================================================
// Conditional Donsker delta functional of a first-order-chaos signal and its
// conditional Hida-Malliavin derivatives, as Fourier integrals over x of
//
//   F(t, x, y) = exp[ i x Y(t) + sum_j lambda_j int_t^T0 (e^{i x theta_j} - 1 - i x theta_j) ds
//                     - x^2/2 int_t^T0 sigma_Y^2 ds - i x y ],
//
//   E[delta_Y(y) | F_t]        = (1/2pi) int F dx
//   E[D_t delta_Y(y) | F_t]    = (1/2pi) int F * i x sigma_Y(t) dx
//   E[D_{t,z_j} delta_Y(y)|F_t]= (1/2pi) int F * (e^{i x theta_j(t)} - 1) dx
//
// Gaussian-decay mode: x is truncated where exp(-x^2 v / 2) < envelope_floor
// (v = tail variance; |F| never exceeds that envelope) and integrated on a
// nested sequence of uniform grids. Periodic mode (pure-lattice signal): the
// integrand is 2pi-periodic and x runs over [-pi, pi); the result is the
// conditional probability mass of the lattice point y.
//
// Successive grids halve the step; each refinement only adds the new midpoints,
// and the difference between the last two levels is the error estimate. The
// starting level is chosen so that the sampling step resolves the support of
// the conditional law, which rules out aliased agreement of coarse levels.
// =============================================================================

#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include "infodrift/model.hpp"
#include "infodrift/paths.hpp"

namespace infodrift {

enum class QuadratureMode { Auto, GaussianDecay, Periodic };

const char* to_string(QuadratureMode mode);

struct QuadratureSpec {
    QuadratureMode mode = QuadratureMode::Auto;
    double abs_tol = 1e-10;
    int max_nodes = 1 << 16;
    double envelope_floor = 1e-16;

    bool operator==(const QuadratureSpec&) const = default;
};

// F_t-measurable inputs of the kernel at grid node t.
struct FourierState {
    int node = 0;
    double t = 0.0;
    double running_brownian = 0.0;  // int_0^t sigma_Y dB
    double running_jump = 0.0;      // sum_j int_0^t theta_j dNtilde_j
    double tail_gaussian = 0.0;     // int_t^T0 sigma_Y^2 ds

    double running_signal() const { return running_brownian + running_jump; }
};

struct KernelValues {
    double delta = 0.0;                // E[delta_Y(y) | F_t]
    double malliavin_b = 0.0;          // E[D_t delta_Y(y) | F_t]
    std::vector<double> malliavin_n;   // E[D_{t,zeta_j} delta_Y(y) | F_t], per mark
    double im_residual = 0.0;          // largest |imaginary part| among the above
    double error_estimate = 0.0;       // |I_l - I_{l-1}|, max over the above
    int nodes = 0;
};

class DonskerKernel {
public:
    explicit DonskerKernel(const ValidatedModel& model, QuadratureSpec spec = {});
    ~DonskerKernel();
    DonskerKernel(DonskerKernel&&) noexcept;
    DonskerKernel& operator=(DonskerKernel&&) noexcept;

    const ValidatedModel& model() const { return model_; }
    const QuadratureSpec& spec() const { return spec_; }
    // Resolved mode (never Auto).
    QuadratureMode mode() const { return spec_.mode; }

    FourierState state(const SamplePath& path, int node) const;
    FourierState state(int node, double running_brownian, double running_jump = 0.0) const;

    std::complex<double> integrand(const FourierState& state, double x, double y) const;

    // All conditional quantities at y on one shared set of x-nodes.
    // Throws QuadratureDidNotConverge or OffLattice.
    KernelValues evaluate(const FourierState& state, double y) const;

    double cond_delta(const FourierState& state, double y) const { return evaluate(state, y).delta; }
    double cond_malliavin_b(const FourierState& state, double y) const;
    double cond_malliavin_n(const FourierState& state, int mark, double y) const;

    // Pure-lattice mode: true when y is a possible value of Y.
    bool on_lattice(double y) const;
    // Half-width bound on the support of the law of Y - Y(t) given F_t.
    double support_bound(int node) const;

private:
    struct Slice;
    const Slice& slice(int node) const;
    std::unique_ptr<Slice> build_slice(int node) const;
    std::complex<double> envelope(const Slice& s, double x) const;

    ValidatedModel model_;
    QuadratureSpec spec_;
    mutable std::vector<std::unique_ptr<Slice>> slices_;
    mutable std::unique_ptr<std::once_flag[]> slice_once_;
};

}  // namespace infodrift
