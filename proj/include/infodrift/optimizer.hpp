#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "infodrift/drift.hpp"
#include "infodrift/kernel.hpp"
#include "infodrift/paths.hpp"

namespace infodrift {

// Pointwise first-order condition for the log-optimal insider control on one
// cell. Psi_j and Phi are frozen at the cell's left endpoint.
struct FocProblem {
    double b = 0.0;
    double sigma = 0.0;
    std::vector<double> gamma;
    std::vector<double> lambda;
    std::vector<double> psi;
    double phi = 0.0;
    double eps_adm = 1e-9;
};

struct AdmissibleInterval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double u) const { return u >= lo && u <= hi; }
};

// {u : 1 + u gamma_j >= eps_adm for all j}
AdmissibleInterval admissible_interval(const FocProblem& prob);

// b - u sigma^2 + sigma Phi - sum_j lambda_j u gamma_j^2 / (1 + u gamma_j)
//                            + sum_j lambda_j gamma_j Psi_j / (1 + u gamma_j)
// Throws InadmissiblePoint outside the admissible interval.
double foc_residual(double u, const FocProblem& prob);
// d residual / du = -sigma^2 - sum_j lambda_j (1 + Psi_j) gamma_j^2 / (1 + u gamma_j)^2
double foc_slope(double u, const FocProblem& prob);

// Root of the residual on the admissible interval: bracketing from u = 0,
// then Newton steps safeguarded by bisection. Throws NoAdmissibleRoot when
// the residual keeps one sign across the interval.
double solve_optimal_control(const FocProblem& prob);

// FOC data of a cell. drift == nullptr gives the honest problem (Phi = Psi = 0).
FocProblem foc_problem(const ValidatedModel& model, int cell, const PathDrift* drift);

// Per-cell honest control; a one-row table shared by every path.
ControlPolicy honest_benchmark(const ValidatedModel& model);

// Per-cell insider control for one path. max_residual, if given, receives the
// largest plug-back |residual|.
std::vector<double> insider_controls(const ValidatedModel& model, const PathDrift& drift,
                                     double* max_residual = nullptr);

// Controls of any policy on path `path_index`; optimal policies use `drift`.
std::vector<double> resolve_controls(const ControlPolicy& policy, const ValidatedModel& model,
                                     std::size_t path_index, const PathDrift* drift);

// int_0^T [u beta - u^2 sigma^2/2 + sum_j (ln(1 + u gamma_j) - u gamma_j) lambda_j (1 + Psi_j)] dt
// with beta = b + sigma Phi + sum_j gamma_j Psi_j lambda_j, as a left-point cell sum.
double drift_formula_value(const ValidatedModel& model, std::span<const double> u, const PathDrift& drift);

enum class Estimator { Pathwise, DriftFormula };

const char* to_string(Estimator e);

struct ValueEstimate {
    std::string policy;
    std::string estimator;
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
};

ValueEstimate make_estimate(std::string policy, Estimator estimator, std::span<const double> per_path);

// E[ln X(T)] over the ensemble. The kernel is needed by the insider policy
// and by the drift-formula estimator of an enlarged model.
ValueEstimate expected_log_wealth(const ControlPolicy& policy, const Ensemble& ensemble,
                                  const DonskerKernel* kernel, Estimator estimator, int threads = 1);

}  // namespace infodrift
