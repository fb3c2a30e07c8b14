#include "infodrift/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "infodrift/error.hpp"

namespace infodrift {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kBaseIntervals = 16;
constexpr std::size_t kCachedNodes = 2049;
// Phase recurrence is reseeded from a direct evaluation this often.
constexpr int kReseed = 64;

// Smallest k > mean with P(Poisson(mean) = k) < floor.
double poisson_upper(double mean, double floor) {
    if (mean <= 0.0) return 0.0;
    const double log_floor = std::log(floor);
    for (double k = std::floor(mean) + 1.0;; k += 1.0) {
        const double log_pmf = -mean + k * std::log(mean) - std::lgamma(k + 1.0);
        if (log_pmf < log_floor) return k;
    }
}

// e^{iu} - 1 - iu without cancellation in the real part.
std::complex<double> levy_exponent(double u) {
    const double s = std::sin(0.5 * u);
    return {-2.0 * s * s, std::sin(u) - u};
}

std::complex<double> expm1_i(double u) {
    const double s = std::sin(0.5 * u);
    return {-2.0 * s * s, std::sin(u)};
}

}  // namespace

const char* to_string(QuadratureMode mode) {
    switch (mode) {
    case QuadratureMode::Auto: return "auto";
    case QuadratureMode::GaussianDecay: return "gaussian-decay";
    case QuadratureMode::Periodic: return "periodic";
    }
    return "unknown";
}

struct DonskerKernel::Slice {
    int node = 0;
    double t = 0.0;
    double sigma_t = 0.0;
    std::vector<double> theta_t;
    double tail_variance = 0.0;
    // per mark: (theta value, lambda * time spent at that value on [t, T0])
    std::vector<std::vector<std::pair<double, double>>> jump_groups;
    bool periodic = false;
    double x_lo = 0.0;
    double span = 0.0;
    double support = 0.0;
    int cached_levels = 0;
    std::vector<std::size_t> level_offset;
    std::vector<std::complex<double>> env;          // F without the e^{i x a} phase
    std::vector<std::complex<double>> jump_factor;  // [k * m + j] = e^{i x theta_j(t)} - 1

    double step(int level) const { return span / (kBaseIntervals * std::ldexp(1.0, level)); }
    std::size_t level_count(int level) const {
        if (level == 0) return periodic ? kBaseIntervals : kBaseIntervals + 1;
        return static_cast<std::size_t>(kBaseIntervals) << (level - 1);
    }
    std::size_t total_nodes(int level) const {
        const std::size_t n = static_cast<std::size_t>(kBaseIntervals) << level;
        return periodic ? n : n + 1;
    }
    double level_start(int level) const { return level == 0 ? x_lo : x_lo + step(level); }
    double level_stride(int level) const { return level == 0 ? step(0) : 2.0 * step(level); }
};

DonskerKernel::DonskerKernel(const ValidatedModel& model, QuadratureSpec spec)
    : model_(model), spec_(spec) {
    if (model_.mode() == SignalMode::NoEnlargement)
        throw Error(ErrorCode::WrongModel, "no Donsker kernel without an enlarging signal");
    const QuadratureMode natural = model_.mode() == SignalMode::PureLattice ? QuadratureMode::Periodic
                                                                             : QuadratureMode::GaussianDecay;
    if (spec_.mode == QuadratureMode::Auto) spec_.mode = natural;
    if (spec_.mode != natural)
        throw Error(ErrorCode::InvalidConfig, std::string("quadrature mode ") + to_string(spec_.mode) +
                                                  " does not match a " + to_string(model_.mode()) + " model");
    if (!(spec_.abs_tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "quadrature.abs_tol must be positive");
    if (!(spec_.envelope_floor > 0.0 && spec_.envelope_floor < 1.0))
        throw Error(ErrorCode::InvalidConfig, "quadrature.envelope_floor must lie in (0, 1)");
    if (spec_.max_nodes < 2 * kBaseIntervals + 1)
        throw Error(ErrorCode::InvalidConfig, "quadrature.max_nodes too small");
    const auto n = static_cast<std::size_t>(model_.grid().n_steps());
    slices_.resize(n);
    slice_once_ = std::make_unique<std::once_flag[]>(n);
}

DonskerKernel::~DonskerKernel() = default;
DonskerKernel::DonskerKernel(DonskerKernel&&) noexcept = default;
DonskerKernel& DonskerKernel::operator=(DonskerKernel&&) noexcept = default;

const DonskerKernel::Slice& DonskerKernel::slice(int node) const {
    if (node < 0 || node >= model_.grid().n_steps())
        throw Error(ErrorCode::InvalidConfig,
                    "kernel node " + std::to_string(node) + " outside [0, T0)");
    const auto i = static_cast<std::size_t>(node);
    std::call_once(slice_once_[i], [&] { slices_[i] = build_slice(node); });
    return *slices_[i];
}

std::unique_ptr<DonskerKernel::Slice> DonskerKernel::build_slice(int node) const {
    const TimeGrid& grid = model_.grid();
    const SignalSpec& signal = model_.signal();
    const auto& marks = model_.levy().marks();
    const int n = grid.n_steps();
    const std::size_t m = marks.size();

    auto s = std::make_unique<Slice>();
    s->node = node;
    s->t = grid.node(node);
    s->sigma_t = signal.sigma_y.at_cell(node);
    s->tail_variance = model_.tail_gaussian(node);
    s->periodic = spec_.mode == QuadratureMode::Periodic;
    s->jump_groups.resize(m);
    s->theta_t.resize(m);

    const double log_floor = -std::log(spec_.envelope_floor);
    double jump_support = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const auto& theta = signal.theta[j];
        s->theta_t[j] = theta.at_cell(node);
        auto& groups = s->jump_groups[j];
        double max_abs = 0.0;
        for (int c = node; c < n; ++c) {
            const double th = theta.at_cell(c);
            max_abs = std::max(max_abs, std::abs(th));
            if (th == 0.0) continue;
            auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == th; });
            if (it == groups.end())
                groups.emplace_back(th, marks[j].lambda * grid.dt());
            else
                it->second += marks[j].lambda * grid.dt();
        }
        const double mean = marks[j].lambda * (grid.t_end() - s->t);
        jump_support += max_abs * (poisson_upper(mean, spec_.envelope_floor) + mean);
    }

    if (s->periodic) {
        s->x_lo = -std::numbers::pi;
        s->span = kTwoPi;
        s->support = jump_support;
    } else {
        const double x_max = std::sqrt(2.0 * log_floor / s->tail_variance);
        s->x_lo = -x_max;
        s->span = 2.0 * x_max;
        s->support = std::sqrt(2.0 * log_floor * s->tail_variance) + jump_support;
    }

    int levels = 0;
    while (s->total_nodes(levels) <= kCachedNodes) ++levels;
    s->cached_levels = levels;
    s->level_offset.assign(static_cast<std::size_t>(levels) + 1, 0);
    for (int l = 0; l < levels; ++l)
        s->level_offset[static_cast<std::size_t>(l) + 1] = s->level_offset[static_cast<std::size_t>(l)] + s->level_count(l);
    const std::size_t total = s->level_offset.back();
    s->env.resize(total);
    s->jump_factor.resize(total * m);
    for (int l = 0; l < levels; ++l) {
        const double x0 = s->level_start(l);
        const double dx = s->level_stride(l);
        for (std::size_t k = 0; k < s->level_count(l); ++k) {
            const std::size_t idx = s->level_offset[static_cast<std::size_t>(l)] + k;
            const double x = x0 + static_cast<double>(k) * dx;
            s->env[idx] = envelope(*s, x);
            for (std::size_t j = 0; j < m; ++j) s->jump_factor[idx * m + j] = expm1_i(x * s->theta_t[j]);
        }
    }
    return s;
}

std::complex<double> DonskerKernel::envelope(const Slice& s, double x) const {
    std::complex<double> exponent(-0.5 * x * x * s.tail_variance, 0.0);
    for (const auto& groups : s.jump_groups)
        for (const auto& [theta, weight] : groups) exponent += weight * levy_exponent(x * theta);
    return std::exp(exponent);
}

FourierState DonskerKernel::state(const SamplePath& path, int node) const {
    const auto i = static_cast<std::size_t>(node);
    if (node < 0 || i >= path.running_signal.size())
        throw Error(ErrorCode::InvalidConfig, "state node outside the path");
    return state(node, path.running_brownian[i], path.running_jump[i]);
}

FourierState DonskerKernel::state(int node, double running_brownian, double running_jump) const {
    const Slice& s = slice(node);
    FourierState st;
    st.node = node;
    st.t = s.t;
    st.running_brownian = running_brownian;
    st.running_jump = running_jump;
    st.tail_gaussian = s.tail_variance;
    return st;
}

std::complex<double> DonskerKernel::integrand(const FourierState& state, double x, double y) const {
    const Slice& s = slice(state.node);
    return std::polar(1.0, x * (state.running_signal() - y)) * envelope(s, x);
}

bool DonskerKernel::on_lattice(double y) const {
    if (model_.mode() != SignalMode::PureLattice) return true;
    const double r = y + model_.lattice_offset();
    return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r));
}

double DonskerKernel::support_bound(int node) const { return slice(node).support; }

KernelValues DonskerKernel::evaluate(const FourierState& state, double y) const {
    const Slice& s = slice(state.node);
    if (s.periodic && !on_lattice(y))
        throw Error(ErrorCode::OffLattice, "y = " + std::to_string(y) + " is not a lattice value of Y");

    const std::size_t m = s.theta_t.size();
    const double a = state.running_signal() - y;
    const double required_step = kTwoPi / (std::abs(a) + s.support + 1.0);
    int start_level = 0;
    while (s.step(start_level) > required_step) ++start_level;

    // sums[0]: F, sums[1]: x F, sums[2 + j]: (e^{i x theta_j} - 1) F
    std::vector<std::complex<double>> sums(2 + m), current(2 + m), previous(2 + m);
    std::vector<std::complex<double>> factors(m);
    double error = 0.0;

    for (int level = 0;; ++level) {
        const std::size_t nodes = s.total_nodes(level);
        if (static_cast<long long>(nodes) > spec_.max_nodes)
            throw Error(ErrorCode::QuadratureDidNotConverge,
                        "error estimate " + std::to_string(error) + " > abs_tol at " +
                            std::to_string(s.total_nodes(level - 1)) + " nodes (t = " + std::to_string(s.t) + ")");

        const double x0 = s.level_start(level);
        const double dx = s.level_stride(level);
        const std::size_t count = s.level_count(level);
        const bool cached = level < s.cached_levels;
        const std::size_t offset = cached ? s.level_offset[static_cast<std::size_t>(level)] : 0;
        const std::complex<double> rotate = std::polar(1.0, dx * a);
        std::complex<double> phase;
        for (std::size_t k = 0; k < count; ++k) {
            const double x = x0 + static_cast<double>(k) * dx;
            if (k % kReseed == 0)
                phase = std::polar(1.0, x * a);
            else
                phase *= rotate;
            std::complex<double> env;
            if (cached) {
                env = s.env[offset + k];
                for (std::size_t j = 0; j < m; ++j) factors[j] = s.jump_factor[(offset + k) * m + j];
            } else {
                env = envelope(s, x);
                for (std::size_t j = 0; j < m; ++j) factors[j] = expm1_i(x * s.theta_t[j]);
            }
            std::complex<double> f = env * phase;
            if (!s.periodic && level == 0 && (k == 0 || k + 1 == count)) f *= 0.5;
            sums[0] += f;
            sums[1] += f * x;
            for (std::size_t j = 0; j < m; ++j) sums[2 + j] += f * factors[j];
        }
        if (level < start_level) continue;

        const double scale = s.step(level) / kTwoPi;
        for (std::size_t q = 0; q < sums.size(); ++q) current[q] = sums[q] * scale;
        current[1] *= std::complex<double>(0.0, s.sigma_t);
        if (level > start_level) {
            error = 0.0;
            for (std::size_t q = 0; q < sums.size(); ++q) error = std::max(error, std::abs(current[q] - previous[q]));
            if (error <= spec_.abs_tol) {
                KernelValues out;
                out.delta = current[0].real();
                out.malliavin_b = current[1].real();
                out.malliavin_n.resize(m);
                out.im_residual = std::max(std::abs(current[0].imag()), std::abs(current[1].imag()));
                for (std::size_t j = 0; j < m; ++j) {
                    out.malliavin_n[j] = current[2 + j].real();
                    out.im_residual = std::max(out.im_residual, std::abs(current[2 + j].imag()));
                }
                out.error_estimate = error;
                out.nodes = static_cast<int>(nodes);
                return out;
            }
        }
        previous.swap(current);
    }
}

double DonskerKernel::cond_malliavin_b(const FourierState& state, double y) const {
    return evaluate(state, y).malliavin_b;
}

double DonskerKernel::cond_malliavin_n(const FourierState& state, int mark, double y) const {
    if (mark < 0 || mark >= model_.n_marks())
        throw Error(ErrorCode::InvalidConfig, "mark index out of range");
    return evaluate(state, y).malliavin_n[static_cast<std::size_t>(mark)];
}

}  // namespace infodrift
