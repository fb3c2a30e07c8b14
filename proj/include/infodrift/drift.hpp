#pragma once

#include <cstdint>
#include <vector>

#include "infodrift/kernel.hpp"
#include "infodrift/model.hpp"
#include "infodrift/paths.hpp"

namespace infodrift {

// A path is aborted when its own conditional density falls below this
// fraction of the t = 0 value.
inline constexpr double kRelativeDenominatorFloor = 1e-12;

// Psi values in [-1 - kPsiRoundoff, -1) are snapped to -1 so the conditional
// intensity stays nonnegative; anything further below is left as computed.
inline constexpr double kPsiRoundoff = 1e-10;

// Information drift Phi(t) and jump corrections Psi(t, zeta_j) of one path on
// the nodes t_0 .. t_{horizon_cells}. In the enlarged filtration
//   B(t)        = Bhat(t) + int_0^t Phi ds,
//   Ntilde_j(t) = M_j(t)  + int_0^t lambda_j Psi_j ds,
// and lambda_j (1 + Psi_j) is the conditional jump intensity of mark j.
struct PathDrift {
    std::uint64_t path_id = 0;
    std::vector<double> phi;                // [node]
    std::vector<std::vector<double>> psi;   // [mark][node]
    std::vector<double> im_residual;        // [node]
    std::vector<double> denom;              // [node]: E[delta_Y(y) | F_t] at y = Y
    double denom_reference = 1.0;           // the same at t = 0

    int nodes() const { return static_cast<int>(phi.size()); }
    double alpha1(int node) const { return phi[static_cast<std::size_t>(node)]; }
    double alpha2_weight(const DiscreteLevyMeasure& levy, int mark, int node) const;
    double compensator(const DiscreteLevyMeasure& levy, int mark, int node) const;
};

// Phi(t) = E[D_t delta_Y(y)|F_t] / E[delta_Y(y)|F_t] at y = Y.
// Throws DenominatorUnderflow (see kRelativeDenominatorFloor).
double phi(const DonskerKernel& kernel, const SamplePath& path, int node);
// Psi(t, zeta_j) = E[D_{t,zeta_j} delta_Y(y)|F_t] / E[delta_Y(y)|F_t] at y = Y.
double psi(const DonskerKernel& kernel, const SamplePath& path, int node, int mark);

// Drift on nodes 0..horizon_cells. `kernel` may be null only for a
// no-enlargement model, whose drift is identically zero.
PathDrift compute_path_drift(const DonskerKernel* kernel, const ValidatedModel& model, const SamplePath& path);

// Brownian-only signal: (Y - Y(t)) sigma_Y(t) / int_t^T0 sigma_Y^2 ds.
double closed_form_phi_brownian(const ValidatedModel& model, const SamplePath& path, int node);

// Signal Y(t) = theta B(t) + Ntilde(t) with a single unit mark of intensity
// lambda: Psi(t, 1) = (Y - Y(t)) / (lambda (T0 - t)) - (theta / lambda) Phi(t),
// where Phi is the information drift of B. With theta = 0, phi_value is unused.
double closed_form_psi_poisson(double signal, double running_signal, double theta, double lambda,
                               double time_left, double phi_value);
// Model-checked form; throws WrongModel unless the signal has that shape.
double closed_form_psi_poisson(const ValidatedModel& model, const SamplePath& path, int node, double phi_value);

}  // namespace infodrift
