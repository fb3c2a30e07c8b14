#include "infodrift/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "infodrift/error.hpp"

namespace infodrift {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ZeroDiffusionTail: return "ZeroDiffusionTail";
    case ErrorCode::HorizonTooLate: return "HorizonTooLate";
    case ErrorCode::EmptyMeasure: return "EmptyMeasure";
    case ErrorCode::QuadratureDidNotConverge: return "QuadratureDidNotConverge";
    case ErrorCode::OffLattice: return "OffLattice";
    case ErrorCode::DenominatorUnderflow: return "DenominatorUnderflow";
    case ErrorCode::WrongModel: return "WrongModel";
    case ErrorCode::InadmissibleControl: return "InadmissibleControl";
    case ErrorCode::InadmissiblePoint: return "InadmissiblePoint";
    case ErrorCode::NoAdmissibleRoot: return "NoAdmissibleRoot";
    case ErrorCode::MissingDrift: return "MissingDrift";
    }
    return "Unknown";
}

const char* to_string(SignalMode mode) {
    switch (mode) {
    case SignalMode::GaussianDominant: return "gaussian-dominant";
    case SignalMode::PureLattice: return "pure-lattice";
    case SignalMode::NoEnlargement: return "no-enlargement";
    }
    return "unknown";
}

TimeGrid::TimeGrid(double t_end, int n_steps) : t_end_(t_end), n_steps_(n_steps) {
    if (!(t_end > 0.0) || !std::isfinite(t_end))
        throw Error(ErrorCode::InvalidConfig, "grid.T0 must be positive and finite");
    if (n_steps < 1)
        throw Error(ErrorCode::InvalidConfig, "grid.n_steps must be >= 1");
}

int TimeGrid::cell_of(double t) const {
    const int i = static_cast<int>(std::floor(t / dt()));
    return std::clamp(i, 0, n_steps_ - 1);
}

int TimeGrid::node_index(double t) const {
    const double pos = t / dt();
    const long i = std::lround(pos);
    if (i < 0 || i > n_steps_ || std::abs(pos - static_cast<double>(i)) > 1e-9) return -1;
    return static_cast<int>(i);
}

bool StepFunction::is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

bool StepFunction::is_constant() const {
    return std::all_of(values_.begin(), values_.end(),
                       [&](double v) { return v == values_.front(); });
}

double StepFunction::squared_integral(int first_cell, int last_cell, double dt) const {
    double sum = 0.0;
    for (int i = first_cell; i < last_cell; ++i) sum += at_cell(i) * at_cell(i);
    return sum * dt;
}

bool DiscreteLevyMeasure::integer_lattice() const {
    return std::all_of(marks_.begin(), marks_.end(),
                       [](const LevyMark& m) { return m.zeta == std::round(m.zeta); });
}

double DiscreteLevyMeasure::second_moment() const {
    double sum = 0.0;
    for (const auto& m : marks_) sum += m.lambda * m.zeta * m.zeta;
    return sum;
}

namespace {

void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

void check_step(const StepFunction& f, int n, const std::string& name) {
    require(f.size() == n, ErrorCode::InvalidConfig,
            name + " has " + std::to_string(f.size()) + " values, expected " + std::to_string(n));
    for (double v : f.values())
        require(std::isfinite(v), ErrorCode::InvalidConfig, name + " has a non-finite value");
}

bool is_integer(double v) { return v == std::round(v); }

}  // namespace

ValidatedModel validate_model(SignalSpec signal, DiscreteLevyMeasure levy, MarketSpec market) {
    const TimeGrid& grid = signal.grid;
    const int n = grid.n_steps();
    const int m = levy.size();

    for (int j = 0; j < m; ++j) {
        const auto& mark = levy.marks()[static_cast<std::size_t>(j)];
        const std::string tag = "levy mark " + std::to_string(j + 1);
        require(std::isfinite(mark.zeta) && mark.zeta != 0.0, ErrorCode::InvalidConfig,
                tag + ": jump size must be finite and nonzero");
        require(std::isfinite(mark.lambda) && mark.lambda > 0.0, ErrorCode::InvalidConfig,
                tag + ": intensity must be positive");
        require(mark.lambda * grid.dt() <= 500.0, ErrorCode::InvalidConfig,
                tag + ": lambda * dt too large for the per-cell Poisson sampler");
        for (int k = 0; k < j; ++k)
            require(levy.marks()[static_cast<std::size_t>(k)].zeta != mark.zeta,
                    ErrorCode::InvalidConfig, tag + ": duplicate jump size");
    }

    check_step(signal.sigma_y, n, "signal.sigma_Y");
    require(static_cast<int>(signal.theta.size()) == m, ErrorCode::InvalidConfig,
            "signal needs one theta per levy mark");
    for (int j = 0; j < m; ++j)
        check_step(signal.theta[static_cast<std::size_t>(j)], n, "signal.theta_" + std::to_string(j + 1));

    check_step(market.b, n, "market.b");
    check_step(market.sigma, n, "market.sigma");
    require(static_cast<int>(market.gamma.size()) == m, ErrorCode::InvalidConfig,
            "market needs one gamma per levy mark");
    for (int j = 0; j < m; ++j)
        check_step(market.gamma[static_cast<std::size_t>(j)], n, "market.gamma_" + std::to_string(j + 1));
    require(market.eps_adm > 0.0 && market.eps_adm < 1.0, ErrorCode::InvalidConfig,
            "market.eps_adm must lie in (0, 1)");

    require(market.horizon > 0.0, ErrorCode::InvalidConfig, "market.T must be positive");
    require(market.horizon <= grid.t_end() - grid.dt() + 1e-12 * grid.t_end(), ErrorCode::HorizonTooLate,
            "market.T must satisfy T <= T0 - dt");
    const int horizon_cells = grid.node_index(market.horizon);
    require(horizon_cells > 0, ErrorCode::InvalidConfig, "market.T must be a grid node");

    bool sigma_positive = true;
    bool sigma_zero = true;
    bool any_gamma = false;
    for (int i = 0; i < horizon_cells; ++i) {
        const double s = market.sigma.at_cell(i);
        require(s >= 0.0, ErrorCode::InvalidConfig, "market.sigma must be nonnegative");
        sigma_positive = sigma_positive && s > 0.0;
        sigma_zero = sigma_zero && s == 0.0;
        for (const auto& g : market.gamma) any_gamma = any_gamma || g.at_cell(i) != 0.0;
    }
    require(sigma_positive || (sigma_zero && any_gamma), ErrorCode::InvalidConfig,
            "market.sigma must be positive on [0, T], or zero with some nonzero gamma");

    ValidatedModel model;
    model.tail_gaussian_.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = n - 1; i >= 0; --i)
        model.tail_gaussian_[static_cast<std::size_t>(i)] =
            model.tail_gaussian_[static_cast<std::size_t>(i) + 1] +
            signal.sigma_y.at_cell(i) * signal.sigma_y.at_cell(i) * grid.dt();

    if (!signal.enlarge) {
        model.mode_ = SignalMode::NoEnlargement;
    } else if (signal.sigma_y.at_cell(n - 1) != 0.0) {
        // tail_gaussian(t) > 0 for every t < T0 iff the last cell carries diffusion.
        model.mode_ = SignalMode::GaussianDominant;
    } else {
        require(signal.sigma_y.is_zero(), ErrorCode::ZeroDiffusionTail,
                "sigma_Y vanishes near T0 but not identically");
        require(m > 0, ErrorCode::EmptyMeasure, "sigma_Y == 0 requires at least one levy mark");
        bool lattice = levy.integer_lattice();
        for (const auto& th : signal.theta)
            lattice = lattice && th.is_constant() && is_integer(th.at_cell(0));
        require(lattice, ErrorCode::ZeroDiffusionTail,
                "sigma_Y == 0 requires integer jump sizes and constant integer theta");
        model.mode_ = SignalMode::PureLattice;
        double offset = 0.0;
        for (int j = 0; j < m; ++j)
            offset += signal.theta[static_cast<std::size_t>(j)].at_cell(0) *
                      levy.marks()[static_cast<std::size_t>(j)].lambda * grid.t_end();
        model.lattice_offset_ = offset;
    }

    model.signal_ = std::move(signal);
    model.levy_ = std::move(levy);
    model.market_ = std::move(market);
    model.horizon_cells_ = horizon_cells;
    return model;
}

}  // namespace infodrift
