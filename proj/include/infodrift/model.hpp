#pragma once
// =============================================================================
// Model configuration: time grid, piecewise-constant coefficients, finite
// discrete Levy measure, the first-order-chaos signal
//
//   Y(t) = int_0^t sigma_Y(s) dB(s) + sum_j int_0^t theta_j(s) Ntilde_j(ds),
//   Y    = Y(T0),
//
// and the controlled wealth coefficients b, sigma, gamma_j on [0, T].
// =============================================================================

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace infodrift {

class TimeGrid {
public:
    TimeGrid() = default;
    TimeGrid(double t_end, int n_steps);

    double t_end() const { return t_end_; }
    int n_steps() const { return n_steps_; }
    double dt() const { return t_end_ / n_steps_; }
    double node(int i) const { return t_end_ * i / n_steps_; }
    // Cell containing t, right-open: [t_i, t_{i+1}). t == t_end maps to the last cell.
    int cell_of(double t) const;
    // Index of the node equal to t (within 1e-9 * dt); -1 when t is not a node.
    int node_index(double t) const;

    bool operator==(const TimeGrid&) const = default;

private:
    double t_end_ = 1.0;
    int n_steps_ = 1;
};

// Deterministic function of time, constant on each grid cell.
class StepFunction {
public:
    StepFunction() = default;
    explicit StepFunction(std::vector<double> values) : values_(std::move(values)) {}
    static StepFunction constant(double value, int n_cells) {
        return StepFunction(std::vector<double>(static_cast<std::size_t>(n_cells), value));
    }

    double at_cell(int i) const { return values_[static_cast<std::size_t>(i)]; }
    double operator()(double t, const TimeGrid& grid) const { return at_cell(grid.cell_of(t)); }
    int size() const { return static_cast<int>(values_.size()); }
    const std::vector<double>& values() const { return values_; }

    bool is_zero() const;
    bool is_constant() const;
    // int_{t_first}^{t_last} f(s)^2 ds as an exact cell sum.
    double squared_integral(int first_cell, int last_cell, double dt) const;

    bool operator==(const StepFunction&) const = default;

private:
    std::vector<double> values_;
};

struct LevyMark {
    double zeta = 1.0;    // jump size
    double lambda = 1.0;  // intensity nu({zeta})

    bool operator==(const LevyMark&) const = default;
};

class DiscreteLevyMeasure {
public:
    DiscreteLevyMeasure() = default;
    explicit DiscreteLevyMeasure(std::vector<LevyMark> marks) : marks_(std::move(marks)) {}

    const std::vector<LevyMark>& marks() const { return marks_; }
    int size() const { return static_cast<int>(marks_.size()); }
    bool empty() const { return marks_.empty(); }
    bool integer_lattice() const;
    // sum_j lambda_j zeta_j^2
    double second_moment() const;

    bool operator==(const DiscreteLevyMeasure&) const = default;

private:
    std::vector<LevyMark> marks_;
};

struct SignalSpec {
    TimeGrid grid;
    StepFunction sigma_y;
    std::vector<StepFunction> theta;  // one per mark
    // false: the insider receives no extra information (Phi = Psi = 0).
    bool enlarge = true;

    bool operator==(const SignalSpec&) const = default;
};

struct MarketSpec {
    StepFunction b;
    StepFunction sigma;
    std::vector<StepFunction> gamma;  // one per mark
    double horizon = 0.5;
    double eps_adm = 1e-9;            // admissibility floor on 1 + u gamma_j

    bool operator==(const MarketSpec&) const = default;
};

enum class SignalMode { GaussianDominant, PureLattice, NoEnlargement };

const char* to_string(SignalMode mode);

// Sealed, immutable model; safe to share across threads.
class ValidatedModel {
public:
    const TimeGrid& grid() const { return signal_.grid; }
    const SignalSpec& signal() const { return signal_; }
    const DiscreteLevyMeasure& levy() const { return levy_; }
    const MarketSpec& market() const { return market_; }
    SignalMode mode() const { return mode_; }
    int n_marks() const { return levy_.size(); }
    // Number of cells in [0, T].
    int horizon_cells() const { return horizon_cells_; }

    // int_{t_i}^{T0} sigma_Y(s)^2 ds for node i = 0..n_steps.
    double tail_gaussian(int node) const { return tail_gaussian_[static_cast<std::size_t>(node)]; }
    // Pure-lattice mode: Y + lattice_offset() takes integer values.
    double lattice_offset() const { return lattice_offset_; }

    bool operator==(const ValidatedModel&) const = default;

private:
    friend ValidatedModel validate_model(SignalSpec, DiscreteLevyMeasure, MarketSpec);

    SignalSpec signal_;
    DiscreteLevyMeasure levy_;
    MarketSpec market_;
    SignalMode mode_ = SignalMode::GaussianDominant;
    int horizon_cells_ = 0;
    std::vector<double> tail_gaussian_;
    double lattice_offset_ = 0.0;
};

// Throws infodrift::Error (InvalidConfig, ZeroDiffusionTail, HorizonTooLate,
// EmptyMeasure) when a standing assumption is violated.
ValidatedModel validate_model(SignalSpec signal, DiscreteLevyMeasure levy, MarketSpec market);

}  // namespace infodrift
