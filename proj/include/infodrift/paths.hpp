#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "infodrift/model.hpp"

namespace infodrift {

// One trajectory of (B, N_1..N_m) on the full grid [0, T0].
struct SamplePath {
    std::uint64_t path_id = 0;
    std::vector<double> gaussian_increments;        // dB per cell
    std::vector<double> brownian;                   // B(t_i), i = 0..n
    std::vector<std::vector<int>> jump_counts;      // [mark][cell]
    std::vector<std::vector<double>> compensated;   // [mark][node]: Ntilde_j(t_i)
    std::vector<double> running_brownian;           // int_0^{t_i} sigma_Y dB
    std::vector<double> running_jump;               // sum_j int_0^{t_i} theta_j dNtilde_j
    std::vector<double> running_signal;             // Y(t_i)
    double signal = 0.0;                            // Y = Y(T0)

    int n_cells() const { return static_cast<int>(gaussian_increments.size()); }
    // sum_j zeta_j Ntilde_j(t_i): the compensated jump process itself.
    double jump_process(const DiscreteLevyMeasure& levy, int node) const;
};

// Path `path_id` as a pure function of (seed, path_id). With `antithetic`
// every Gaussian draw is negated; Poisson counts are unchanged.
SamplePath simulate_path(const ValidatedModel& model, std::uint64_t seed, std::uint64_t path_id,
                         bool antithetic = false);

// Lazily generated ensemble: path(i) is regenerated on demand, so a 1e5-path
// ensemble never has to be held in memory.
class Ensemble {
public:
    Ensemble(ValidatedModel model, std::size_t n_paths, std::uint64_t seed)
        : model_(std::move(model)), n_paths_(n_paths), seed_(seed) {}

    const ValidatedModel& model() const { return model_; }
    std::size_t size() const { return n_paths_; }
    std::uint64_t seed() const { return seed_; }
    SamplePath path(std::size_t i) const { return simulate_path(model_, seed_, i); }
    std::vector<SamplePath> materialize(int threads = 1) const;

private:
    ValidatedModel model_;
    std::size_t n_paths_;
    std::uint64_t seed_;
};

Ensemble simulate(const ValidatedModel& model, std::size_t n_paths, std::uint64_t seed);

class ControlPolicy {
public:
    enum class Kind { Zero, Constant, HonestOptimal, InsiderOptimal, Table };

    static ControlPolicy zero() { return ControlPolicy(Kind::Zero); }
    static ControlPolicy constant(double u) {
        ControlPolicy p(Kind::Constant);
        p.value_ = u;
        return p;
    }
    static ControlPolicy honest_optimal() { return ControlPolicy(Kind::HonestOptimal); }
    static ControlPolicy insider_optimal() { return ControlPolicy(Kind::InsiderOptimal); }
    // table[path][cell]
    static ControlPolicy table(std::vector<std::vector<double>> table) {
        ControlPolicy p(Kind::Table);
        p.table_ = std::move(table);
        return p;
    }

    Kind kind() const { return kind_; }
    double constant_value() const { return value_; }
    const std::vector<std::vector<double>>& table_values() const { return table_; }
    const char* name() const;

private:
    explicit ControlPolicy(Kind kind) : kind_(kind) {}

    Kind kind_;
    double value_ = 0.0;
    std::vector<std::vector<double>> table_;
};

// ln X(T) for X(0) = 1 under the per-cell controls u[0..horizon_cells):
//   sum_cells [u b dt - u^2 sigma^2 dt / 2 + u sigma dB]
//   + sum_cells sum_j [count_j ln(1 + u gamma_j) - u gamma_j lambda_j dt].
// Throws InadmissibleControl if 1 + u gamma_j < eps_adm anywhere.
double log_wealth(const SamplePath& path, std::span<const double> u, const ValidatedModel& model);

// Zero, Constant and Table policies; the optimal policies need drift data and
// are resolved by the optimizer.
std::vector<double> path_controls(const ControlPolicy& policy, const ValidatedModel& model,
                                  std::size_t path_index);

}  // namespace infodrift
