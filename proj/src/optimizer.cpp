#include "infodrift/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "infodrift/error.hpp"
#include "infodrift/parallel.hpp"

namespace infodrift {

AdmissibleInterval admissible_interval(const FocProblem& prob) {
    AdmissibleInterval iv;
    for (double g : prob.gamma) {
        if (g > 0.0) iv.lo = std::max(iv.lo, (prob.eps_adm - 1.0) / g);
        if (g < 0.0) iv.hi = std::min(iv.hi, (prob.eps_adm - 1.0) / g);
    }
    return iv;
}

double foc_residual(double u, const FocProblem& prob) {
    if (!admissible_interval(prob).contains(u))
        throw Error(ErrorCode::InadmissiblePoint, "u = " + std::to_string(u) + " violates 1 + u gamma >= eps_adm");
    double r = prob.b - u * prob.sigma * prob.sigma + prob.sigma * prob.phi;
    for (std::size_t j = 0; j < prob.gamma.size(); ++j) {
        const double g = prob.gamma[j];
        const double denom = 1.0 + u * g;
        r += prob.lambda[j] * g * (prob.psi[j] - u * g) / denom;
    }
    return r;
}

double foc_slope(double u, const FocProblem& prob) {
    double s = -prob.sigma * prob.sigma;
    for (std::size_t j = 0; j < prob.gamma.size(); ++j) {
        const double g = prob.gamma[j];
        const double denom = 1.0 + u * g;
        s -= prob.lambda[j] * (1.0 + prob.psi[j]) * g * g / (denom * denom);
    }
    return s;
}

namespace {

[[noreturn]] void no_root(const AdmissibleInterval& iv, double r_lo, double r_hi) {
    throw Error(ErrorCode::NoAdmissibleRoot,
                "residual keeps one sign on [" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) +
                    "]: residual(lo side) = " + std::to_string(r_lo) + ", residual(hi side) = " +
                    std::to_string(r_hi));
}

}  // namespace

double solve_optimal_control(const FocProblem& prob) {
    const AdmissibleInterval iv = admissible_interval(prob);
    auto residual = [&](double u) { return foc_residual(u, prob); };

    const double r0 = residual(0.0);
    if (r0 == 0.0) return 0.0;

    // Bracket [left, right] with residual(left) > 0 > residual(right).
    double left = 0.0;
    double right = 0.0;
    double r_left = r0;
    double r_right = r0;
    constexpr double kFar = 1e15;
    if (r0 > 0.0) {
        if (std::isfinite(iv.hi)) {
            right = iv.hi;
            r_right = residual(right);
            if (r_right == 0.0) return right;
            if (r_right > 0.0) no_root(iv, r0, r_right);
        } else {
            for (double u = 1.0;; u *= 2.0) {
                const double r = residual(u);
                if (r <= 0.0) {
                    right = u;
                    r_right = r;
                    break;
                }
                left = u;
                r_left = r;
                if (u > kFar) no_root(iv, r0, r);
            }
            if (r_right == 0.0) return right;
        }
    } else {
        right = 0.0;
        r_right = r0;
        if (std::isfinite(iv.lo)) {
            left = iv.lo;
            r_left = residual(left);
            if (r_left == 0.0) return left;
            if (r_left < 0.0) no_root(iv, r_left, r0);
        } else {
            for (double u = -1.0;; u *= 2.0) {
                const double r = residual(u);
                if (r >= 0.0) {
                    left = u;
                    r_left = r;
                    break;
                }
                right = u;
                r_right = r;
                if (u < -kFar) no_root(iv, r, r0);
            }
            if (r_left == 0.0) return left;
        }
    }

    double u = r_left < -r_right ? left : right;
    double best = u;
    double best_abs = std::min(r_left, -r_right);
    for (int iter = 0; iter < 300; ++iter) {
        const double r = residual(u);
        if (std::abs(r) < best_abs) {
            best = u;
            best_abs = std::abs(r);
        }
        if (r == 0.0) return u;
        if (r > 0.0)
            left = u;
        else
            right = u;
        if (right - left <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) break;
        double next = u - r / foc_slope(u, prob);
        if (!(next > left && next < right)) next = 0.5 * (left + right);
        if (next == u) break;
        u = next;
    }
    return best;
}

FocProblem foc_problem(const ValidatedModel& model, int cell, const PathDrift* drift) {
    const MarketSpec& market = model.market();
    const auto& marks = model.levy().marks();
    FocProblem p;
    p.b = market.b.at_cell(cell);
    p.sigma = market.sigma.at_cell(cell);
    p.eps_adm = market.eps_adm;
    p.phi = drift ? drift->phi[static_cast<std::size_t>(cell)] : 0.0;
    for (std::size_t j = 0; j < marks.size(); ++j) {
        p.gamma.push_back(market.gamma[j].at_cell(cell));
        p.lambda.push_back(marks[j].lambda);
        p.psi.push_back(drift ? drift->psi[j][static_cast<std::size_t>(cell)] : 0.0);
    }
    return p;
}

ControlPolicy honest_benchmark(const ValidatedModel& model) {
    std::vector<double> u(static_cast<std::size_t>(model.horizon_cells()));
    for (int i = 0; i < model.horizon_cells(); ++i)
        u[static_cast<std::size_t>(i)] = solve_optimal_control(foc_problem(model, i, nullptr));
    return ControlPolicy::table({std::move(u)});
}

std::vector<double> insider_controls(const ValidatedModel& model, const PathDrift& drift, double* max_residual) {
    const int cells = model.horizon_cells();
    if (drift.nodes() < cells) throw Error(ErrorCode::MissingDrift, "drift does not cover the horizon");
    std::vector<double> u(static_cast<std::size_t>(cells));
    double worst = 0.0;
    for (int i = 0; i < cells; ++i) {
        const FocProblem p = foc_problem(model, i, &drift);
        const double root = solve_optimal_control(p);
        u[static_cast<std::size_t>(i)] = root;
        worst = std::max(worst, std::abs(foc_residual(root, p)));
    }
    if (max_residual) *max_residual = worst;
    return u;
}

std::vector<double> resolve_controls(const ControlPolicy& policy, const ValidatedModel& model,
                                     std::size_t path_index, const PathDrift* drift) {
    switch (policy.kind()) {
    case ControlPolicy::Kind::HonestOptimal: return honest_benchmark(model).table_values().front();
    case ControlPolicy::Kind::InsiderOptimal:
        if (!drift) throw Error(ErrorCode::MissingDrift, "insider policy needs the path's drift");
        return insider_controls(model, *drift);
    case ControlPolicy::Kind::Table:
        if (policy.table_values().size() == 1) return policy.table_values().front();
        return path_controls(policy, model, path_index);
    default: return path_controls(policy, model, path_index);
    }
}

double drift_formula_value(const ValidatedModel& model, std::span<const double> u, const PathDrift& drift) {
    const MarketSpec& market = model.market();
    const auto& marks = model.levy().marks();
    const int cells = model.horizon_cells();
    if (drift.nodes() < cells) throw Error(ErrorCode::MissingDrift, "drift does not cover the horizon");
    double total = 0.0;
    for (int i = 0; i < cells; ++i) {
        const auto c = static_cast<std::size_t>(i);
        const double ui = u[c];
        const double s = market.sigma.at_cell(i);
        double beta = market.b.at_cell(i) + s * drift.phi[c];
        double jumps = 0.0;
        for (std::size_t j = 0; j < marks.size(); ++j) {
            const double g = market.gamma[j].at_cell(i);
            const double ug = ui * g;
            if (1.0 + ug < market.eps_adm)
                throw Error(ErrorCode::InadmissibleControl, "1 + u*gamma < eps_adm at cell " + std::to_string(i));
            beta += g * drift.psi[j][c] * marks[j].lambda;
            jumps += (std::log1p(ug) - ug) * marks[j].lambda * (1.0 + drift.psi[j][c]);
        }
        total += ui * beta - 0.5 * ui * ui * s * s + jumps;
    }
    return total * model.grid().dt();
}

const char* to_string(Estimator e) { return e == Estimator::Pathwise ? "pathwise" : "drift-formula"; }

ValueEstimate make_estimate(std::string policy, Estimator estimator, std::span<const double> per_path) {
    const SampleStats s = sample_stats(per_path);
    ValueEstimate v;
    v.policy = std::move(policy);
    v.estimator = to_string(estimator);
    v.mean = s.mean;
    v.std_error = s.std_error;
    v.n_paths = s.n;
    return v;
}

ValueEstimate expected_log_wealth(const ControlPolicy& policy, const Ensemble& ensemble,
                                  const DonskerKernel* kernel, Estimator estimator, int threads) {
    const ValidatedModel& model = ensemble.model();
    const bool enlarged = model.mode() != SignalMode::NoEnlargement;
    const bool need_drift = policy.kind() == ControlPolicy::Kind::InsiderOptimal || estimator == Estimator::DriftFormula;
    if (need_drift && enlarged && kernel == nullptr)
        throw Error(ErrorCode::MissingDrift, "drift needed but no kernel supplied");
    const ControlPolicy resolved =
        policy.kind() == ControlPolicy::Kind::HonestOptimal ? honest_benchmark(model) : policy;

    std::vector<double> values(ensemble.size());
    parallel_for(ensemble.size(), threads, [&](std::size_t i) {
        const SamplePath path = ensemble.path(i);
        PathDrift drift;
        if (need_drift) drift = compute_path_drift(kernel, model, path);
        const std::vector<double> u = resolve_controls(resolved, model, i, need_drift ? &drift : nullptr);
        values[i] = estimator == Estimator::Pathwise ? log_wealth(path, u, model) : drift_formula_value(model, u, drift);
    });
    return make_estimate(policy.name(), estimator, values);
}

}  // namespace infodrift
