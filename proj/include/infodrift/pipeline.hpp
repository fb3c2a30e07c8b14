#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "infodrift/drift.hpp"
#include "infodrift/kernel.hpp"
#include "infodrift/optimizer.hpp"
#include "infodrift/paths.hpp"
#include "infodrift/verifier.hpp"

namespace infodrift {

struct PipelineOptions {
    bool drift = true;
    bool values = true;
    bool decomposition = true;
    bool tower = true;
    std::size_t dump_paths = 16;
    int threads = 1;
};

// Snapshot nodes 0, T/2 and T (T/2 rounded down to a node).
inline constexpr std::size_t kSnapshots = 3;

// Per-path summary kept for every path of the run.
struct PathRecord {
    bool used = false;  // false: the path hit DenominatorUnderflow and is excluded
    double signal = 0.0;
    double insider_pathwise = 0.0;
    double insider_formula = 0.0;
    double honest_pathwise = 0.0;
    double honest_formula = 0.0;
    double max_foc_residual = 0.0;
    double qv_b_hat = 0.0;
    double qv_b = 0.0;
    std::array<double, kSnapshots> b{};
    std::array<double, kSnapshots> b_hat{};
    std::array<double, kSnapshots> jump{};    // sum_j zeta_j Ntilde_j
    std::vector<double> ntilde;               // [mark * kSnapshots + k]
    std::vector<double> m_jump;               // [mark * kSnapshots + k]
    std::array<double, 4> tower{};            // (T/2, y0), (T/2, y1), (T, y0), (T, y1)
};

// Full detail for the first dump_paths paths.
struct PathDump {
    SamplePath path;
    PathDrift drift;
    std::vector<double> insider_u;
    std::vector<double> foc_residual;
    DecomposedPath decomposed;
};

struct PipelineResult {
    std::size_t n_paths = 0;
    std::size_t n_used = 0;
    std::size_t n_underflow = 0;
    std::array<int, kSnapshots> snapshot_nodes{};
    std::array<double, 2> tower_y{};
    std::array<double, 2> tower_reference{};  // cond_delta(0, y)
    std::vector<double> honest_u;
    double max_foc_residual = 0.0;
    std::vector<PathRecord> records;
    std::vector<PathDump> dumps;
};

// One pass per path: simulate, drift, insider and honest controls, both value
// estimators, decomposition snapshots and tower values. `kernel` may be null
// for a no-enlargement model. Results do not depend on options.threads.
PipelineResult run_pipeline(const ValidatedModel& model, const DonskerKernel* kernel, std::size_t n_paths,
                            std::uint64_t seed, const PipelineOptions& options);

// Insider and honest estimates under both estimators, over used paths.
std::vector<ValueEstimate> value_estimates(const PipelineResult& result);

struct Dominance {
    double insider = 0.0;
    double honest = 0.0;
    double combined_std_error = 0.0;
    bool ok() const { return insider >= honest - 3.0 * combined_std_error; }
};

Dominance dominance(const PipelineResult& result);

// Martingale, negative-control, quadratic-variation, density and tower tests.
std::vector<TestReport> verification_reports(const ValidatedModel& model, const DonskerKernel* kernel,
                                             const PipelineResult& result);

}  // namespace infodrift
