#include "infodrift/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "infodrift/error.hpp"
#include "infodrift/parallel.hpp"

namespace infodrift {

PipelineResult run_pipeline(const ValidatedModel& model, const DonskerKernel* kernel, std::size_t n_paths,
                            std::uint64_t seed, const PipelineOptions& options) {
    if (n_paths < 1) throw Error(ErrorCode::InvalidConfig, "n_paths must be >= 1");
    const bool enlarged = model.mode() != SignalMode::NoEnlargement;
    const bool need_drift = options.drift || options.values || options.decomposition;
    if (enlarged && need_drift && kernel == nullptr)
        throw Error(ErrorCode::MissingDrift, "enlarged model needs a kernel");

    const int cells = model.horizon_cells();
    const auto m = static_cast<std::size_t>(model.n_marks());
    PipelineResult res;
    res.n_paths = n_paths;
    res.snapshot_nodes = {0, cells / 2, cells};
    res.tower_y = {snap_to_support(model, 0.0), snap_to_support(model, 1.0)};
    if (kernel && options.tower) {
        const FourierState origin = kernel->state(0, 0.0, 0.0);
        for (std::size_t k = 0; k < 2; ++k) res.tower_reference[k] = kernel->cond_delta(origin, res.tower_y[k]);
    }
    if (options.values) res.honest_u = honest_benchmark(model).table_values().front();

    res.records.resize(n_paths);
    res.dumps.resize(std::min(n_paths, options.dump_paths));

    parallel_for(n_paths, options.threads, [&](std::size_t i) {
        PathRecord& rec = res.records[i];
        SamplePath path = simulate_path(model, seed, i);
        rec.signal = path.signal;
        if (kernel && options.tower) {
            std::size_t slot = 0;
            for (std::size_t s = 1; s < kSnapshots; ++s) {
                const FourierState st = kernel->state(path, res.snapshot_nodes[s]);
                for (double y : res.tower_y) rec.tower[slot++] = kernel->cond_delta(st, y);
            }
        }
        const bool dump = i < res.dumps.size();
        if (!need_drift) {
            rec.used = true;
            if (dump) res.dumps[i].path = std::move(path);
            return;
        }

        PathDrift drift;
        try {
            drift = compute_path_drift(kernel, model, path);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DenominatorUnderflow) throw;
            if (dump) res.dumps[i].path = std::move(path);
            return;
        }
        rec.used = true;

        std::vector<double> insider_u;
        std::vector<double> residuals;
        if (options.values) {
            insider_u.resize(static_cast<std::size_t>(cells));
            residuals.resize(static_cast<std::size_t>(cells));
            for (int c = 0; c < cells; ++c) {
                const FocProblem p = foc_problem(model, c, &drift);
                const double u = solve_optimal_control(p);
                insider_u[static_cast<std::size_t>(c)] = u;
                residuals[static_cast<std::size_t>(c)] = foc_residual(u, p);
                rec.max_foc_residual = std::max(rec.max_foc_residual, std::abs(residuals[static_cast<std::size_t>(c)]));
            }
            rec.insider_pathwise = log_wealth(path, insider_u, model);
            rec.insider_formula = drift_formula_value(model, insider_u, drift);
            rec.honest_pathwise = log_wealth(path, res.honest_u, model);
            rec.honest_formula = drift_formula_value(model, res.honest_u, drift);
        }

        DecomposedPath dec;
        if (options.decomposition) {
            dec = decompose(path, drift, model);
            rec.ntilde.resize(m * kSnapshots);
            rec.m_jump.resize(m * kSnapshots);
            for (std::size_t k = 0; k < kSnapshots; ++k) {
                const int node = res.snapshot_nodes[k];
                const auto n = static_cast<std::size_t>(node);
                rec.b[k] = path.brownian[n];
                rec.b_hat[k] = dec.b_hat[n];
                rec.jump[k] = path.jump_process(model.levy(), node);
                for (std::size_t j = 0; j < m; ++j) {
                    rec.ntilde[j * kSnapshots + k] = path.compensated[j][n];
                    rec.m_jump[j * kSnapshots + k] = dec.m_jump[j][n];
                }
            }
            rec.qv_b_hat = quadratic_variation(dec);
            rec.qv_b = quadratic_variation(path, cells);
        }

        if (dump) {
            PathDump& d = res.dumps[i];
            d.path = std::move(path);
            d.drift = std::move(drift);
            d.insider_u = std::move(insider_u);
            d.foc_residual = std::move(residuals);
            d.decomposed = std::move(dec);
        }
    });

    for (const PathRecord& r : res.records) {
        if (r.used)
            ++res.n_used;
        else
            ++res.n_underflow;
        res.max_foc_residual = std::max(res.max_foc_residual, r.max_foc_residual);
    }
    return res;
}

namespace {

template <class Get>
std::vector<double> used_column(const PipelineResult& result, Get get) {
    std::vector<double> out;
    out.reserve(result.n_used);
    for (const PathRecord& r : result.records)
        if (r.used) out.push_back(get(r));
    return out;
}

bool signal_is_constant(const ValidatedModel& model) {
    if (!model.signal().sigma_y.is_zero()) return false;
    return std::all_of(model.signal().theta.begin(), model.signal().theta.end(),
                       [](const StepFunction& f) { return f.is_zero(); });
}

}  // namespace

std::vector<ValueEstimate> value_estimates(const PipelineResult& result) {
    std::vector<ValueEstimate> out;
    out.push_back(make_estimate("insider", Estimator::Pathwise,
                                used_column(result, [](const PathRecord& r) { return r.insider_pathwise; })));
    out.push_back(make_estimate("insider", Estimator::DriftFormula,
                                used_column(result, [](const PathRecord& r) { return r.insider_formula; })));
    out.push_back(make_estimate("honest", Estimator::Pathwise,
                                used_column(result, [](const PathRecord& r) { return r.honest_pathwise; })));
    out.push_back(make_estimate("honest", Estimator::DriftFormula,
                                used_column(result, [](const PathRecord& r) { return r.honest_formula; })));
    return out;
}

Dominance dominance(const PipelineResult& result) {
    const SampleStats ins = sample_stats(used_column(result, [](const PathRecord& r) { return r.insider_pathwise; }));
    const SampleStats hon = sample_stats(used_column(result, [](const PathRecord& r) { return r.honest_pathwise; }));
    Dominance d;
    d.insider = ins.mean;
    d.honest = hon.mean;
    d.combined_std_error = std::hypot(ins.std_error, hon.std_error);
    return d;
}

std::vector<TestReport> verification_reports(const ValidatedModel& model, const DonskerKernel* kernel,
                                             const PipelineResult& result) {
    std::vector<TestReport> reports;
    const std::size_t m = static_cast<std::size_t>(model.n_marks());
    const bool enlarged = model.mode() != SignalMode::NoEnlargement;
    const auto& nodes = result.snapshot_nodes;
    auto node_time = [&](std::size_t k) { return model.grid().node(nodes[k]); };

    const std::vector<double> y = used_column(result, [](const PathRecord& r) { return r.signal; });
    std::vector<std::vector<double>> b(kSnapshots), jump(kSnapshots), b_hat(kSnapshots);
    for (std::size_t k = 0; k < kSnapshots; ++k) {
        b[k] = used_column(result, [k](const PathRecord& r) { return r.b[k]; });
        jump[k] = used_column(result, [k](const PathRecord& r) { return r.jump[k]; });
        b_hat[k] = used_column(result, [k](const PathRecord& r) { return r.b_hat[k]; });
    }

    // Y is H_s-measurable only when the insider actually knows it.
    std::vector<Instrument> instruments;
    for (Instrument g : kInstruments) {
        const bool uses_y = g == Instrument::Signal || g == Instrument::SignalTimesBrownianAtS;
        if (!uses_y || enlarged || signal_is_constant(model)) instruments.push_back(g);
    }

    constexpr std::array<std::pair<std::size_t, std::size_t>, 3> intervals{{{0, 1}, {1, 2}, {0, 2}}};
    auto add = [&](const std::string& name, const std::vector<std::vector<double>>& x) {
        for (auto [s, u] : intervals) {
            if (nodes[s] == nodes[u]) continue;
            // B(s) and Ntilde(s) vanish at s = 0.
            std::vector<Instrument> live;
            for (Instrument g : instruments) {
                const bool needs_b = g == Instrument::BrownianAtS || g == Instrument::SignalTimesBrownianAtS;
                const bool needs_jump = g == Instrument::JumpAtS;
                if ((needs_b || needs_jump) && nodes[s] == 0) continue;
                if (needs_jump && m == 0) continue;
                live.push_back(g);
            }
            auto r = martingale_test(name, node_time(s), node_time(u), x[s], x[u], b[s], jump[s], y, live);
            reports.insert(reports.end(), r.begin(), r.end());
        }
    };
    add("B_hat", b_hat);
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<std::vector<double>> mj(kSnapshots);
        for (std::size_t k = 0; k < kSnapshots; ++k)
            mj[k] = used_column(result, [&](const PathRecord& r) { return r.m_jump[j * kSnapshots + k]; });
        add("M_" + std::to_string(j + 1), mj);
    }

    // Negative controls: processes that still carry the information drift.
    if (enlarged) {
        const int cells = model.horizon_cells();
        const double dt = model.grid().dt();
        const std::array<Instrument, 1> signal_only{Instrument::Signal};
        double cov_b = 0.0;
        for (int c = 0; c < cells; ++c) cov_b += model.signal().sigma_y.at_cell(c) * dt;
        if (cov_b != 0.0) {
            auto r = martingale_test("B", 0.0, node_time(2), b[0], b[2], b[0], jump[0], y, signal_only,
                                     Expectation::Fail);
            reports.insert(reports.end(), r.begin(), r.end());
        }
        for (std::size_t j = 0; j < m; ++j) {
            double cov = 0.0;
            for (int c = 0; c < cells; ++c) cov += model.signal().theta[j].at_cell(c) * dt;
            if (cov == 0.0) continue;
            std::vector<std::vector<double>> nj(kSnapshots);
            for (std::size_t k : {std::size_t{0}, std::size_t{2}})
                nj[k] = used_column(result, [&](const PathRecord& r) { return r.ntilde[j * kSnapshots + k]; });
            auto r = martingale_test("Ntilde_" + std::to_string(j + 1), 0.0, node_time(2), nj[0], nj[2], b[0],
                                     jump[0], y, signal_only, Expectation::Fail);
            reports.insert(reports.end(), r.begin(), r.end());
        }
    }

    reports.push_back(quadratic_variation_test(
        "B_hat", used_column(result, [](const PathRecord& r) { return r.qv_b_hat; }), node_time(2)));

    if (kernel) {
        std::vector<FourierState> states;
        const std::size_t probe = std::min<std::size_t>(4, result.dumps.size());
        for (std::size_t i = 0; i < probe; ++i)
            for (int node : nodes) states.push_back(kernel->state(result.dumps[i].path, node));
        reports.push_back(normalization_test(*kernel, states));

        std::vector<double> all_y;
        all_y.reserve(result.records.size());
        for (const PathRecord& r : result.records) all_y.push_back(r.signal);
        reports.push_back(chi_square_test(*kernel, all_y));

        auto series = series_oracle_test(*kernel);
        reports.insert(reports.end(), series.begin(), series.end());

        std::size_t slot = 0;
        for (std::size_t s = 1; s < kSnapshots; ++s) {
            for (std::size_t k = 0; k < 2; ++k, ++slot) {
                std::vector<double> vals;
                vals.reserve(result.records.size());
                for (const PathRecord& r : result.records) vals.push_back(r.tower[slot]);
                reports.push_back(tower_test(node_time(s), result.tower_y[k], vals, result.tower_reference[k]));
            }
        }
    }
    return reports;
}

}  // namespace infodrift
