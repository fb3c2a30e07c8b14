#include "infodrift/drift.hpp"

#include <string>

#include "infodrift/error.hpp"

namespace infodrift {

double PathDrift::alpha2_weight(const DiscreteLevyMeasure& levy, int mark, int node) const {
    return psi[static_cast<std::size_t>(mark)][static_cast<std::size_t>(node)] *
           levy.marks()[static_cast<std::size_t>(mark)].lambda;
}

double PathDrift::compensator(const DiscreteLevyMeasure& levy, int mark, int node) const {
    return levy.marks()[static_cast<std::size_t>(mark)].lambda *
           (1.0 + psi[static_cast<std::size_t>(mark)][static_cast<std::size_t>(node)]);
}

namespace {

void check_denominator(double denom, double reference, std::uint64_t path_id, int node) {
    if (!(reference > 0.0) || !(denom >= kRelativeDenominatorFloor * reference))
        throw Error(ErrorCode::DenominatorUnderflow,
                    "path " + std::to_string(path_id) + ", node " + std::to_string(node) +
                        ": conditional density at Y is " + std::to_string(denom) + " (t = 0 value " +
                        std::to_string(reference) + ")");
}

// lambda (1 + Psi) is an intensity; quadrature noise may push Psi a hair below -1.
double jump_correction(double malliavin_n, double delta) {
    const double r = malliavin_n / delta;
    return r < -1.0 && r >= -1.0 - kPsiRoundoff ? -1.0 : r;
}

}  // namespace

double phi(const DonskerKernel& kernel, const SamplePath& path, int node) {
    const double reference = kernel.cond_delta(kernel.state(path, 0), path.signal);
    const KernelValues v = kernel.evaluate(kernel.state(path, node), path.signal);
    check_denominator(v.delta, reference, path.path_id, node);
    return v.malliavin_b / v.delta;
}

double psi(const DonskerKernel& kernel, const SamplePath& path, int node, int mark) {
    if (mark < 0 || mark >= kernel.model().n_marks())
        throw Error(ErrorCode::InvalidConfig, "mark index out of range");
    const double reference = kernel.cond_delta(kernel.state(path, 0), path.signal);
    const KernelValues v = kernel.evaluate(kernel.state(path, node), path.signal);
    check_denominator(v.delta, reference, path.path_id, node);
    return jump_correction(v.malliavin_n[static_cast<std::size_t>(mark)], v.delta);
}

PathDrift compute_path_drift(const DonskerKernel* kernel, const ValidatedModel& model, const SamplePath& path) {
    const int nodes = model.horizon_cells() + 1;
    const auto m = static_cast<std::size_t>(model.n_marks());
    PathDrift d;
    d.path_id = path.path_id;
    d.phi.assign(static_cast<std::size_t>(nodes), 0.0);
    d.psi.assign(m, std::vector<double>(static_cast<std::size_t>(nodes), 0.0));
    d.im_residual.assign(static_cast<std::size_t>(nodes), 0.0);
    d.denom.assign(static_cast<std::size_t>(nodes), 1.0);
    if (model.mode() == SignalMode::NoEnlargement) return d;
    if (kernel == nullptr) throw Error(ErrorCode::WrongModel, "enlarged model needs a Donsker kernel");

    for (int node = 0; node < nodes; ++node) {
        const auto i = static_cast<std::size_t>(node);
        const KernelValues v = kernel->evaluate(kernel->state(path, node), path.signal);
        if (node == 0) d.denom_reference = v.delta;
        check_denominator(v.delta, d.denom_reference, path.path_id, node);
        d.phi[i] = v.malliavin_b / v.delta;
        for (std::size_t j = 0; j < m; ++j) d.psi[j][i] = jump_correction(v.malliavin_n[j], v.delta);
        d.im_residual[i] = v.im_residual;
        d.denom[i] = v.delta;
    }
    return d;
}

double closed_form_phi_brownian(const ValidatedModel& model, const SamplePath& path, int node) {
    if (model.n_marks() != 0 || model.mode() != SignalMode::GaussianDominant)
        throw Error(ErrorCode::WrongModel, "closed-form Phi needs a Brownian-only signal");
    const auto i = static_cast<std::size_t>(node);
    return (path.signal - path.running_signal[i]) * model.signal().sigma_y.at_cell(node) /
           model.tail_gaussian(node);
}

double closed_form_psi_poisson(double signal, double running_signal, double theta, double lambda,
                               double time_left, double phi_value) {
    const double bridge = (signal - running_signal) / (lambda * time_left);
    return theta == 0.0 ? bridge : bridge - theta / lambda * phi_value;
}

double closed_form_psi_poisson(const ValidatedModel& model, const SamplePath& path, int node, double phi_value) {
    const auto& marks = model.levy().marks();
    const SignalSpec& s = model.signal();
    const bool shape = model.mode() != SignalMode::NoEnlargement && marks.size() == 1 && marks[0].zeta == 1.0 &&
                       s.theta[0].is_constant() && s.theta[0].at_cell(0) == 1.0 && s.sigma_y.is_constant();
    if (!shape)
        throw Error(ErrorCode::WrongModel, "closed-form Psi needs Y = theta B + Ntilde with one unit mark");
    const double time_left = model.grid().t_end() - model.grid().node(node);
    return closed_form_psi_poisson(path.signal, path.running_signal[static_cast<std::size_t>(node)],
                                   s.sigma_y.at_cell(0), marks[0].lambda, time_left, phi_value);
}

}  // namespace infodrift
