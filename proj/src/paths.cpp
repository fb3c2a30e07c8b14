#include "infodrift/paths.hpp"

#include <cmath>
#include <string>

#include "infodrift/error.hpp"
#include "infodrift/parallel.hpp"
#include "infodrift/rng.hpp"

namespace infodrift {

double SamplePath::jump_process(const DiscreteLevyMeasure& levy, int node) const {
    double sum = 0.0;
    for (std::size_t j = 0; j < compensated.size(); ++j)
        sum += levy.marks()[j].zeta * compensated[j][static_cast<std::size_t>(node)];
    return sum;
}

SamplePath simulate_path(const ValidatedModel& model, std::uint64_t seed, std::uint64_t path_id,
                         bool antithetic) {
    const TimeGrid& grid = model.grid();
    const int n = grid.n_steps();
    const int m = model.n_marks();
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    const auto& marks = model.levy().marks();
    const SignalSpec& signal = model.signal();
    const PathRandom rng(seed, path_id);

    SamplePath p;
    p.path_id = path_id;
    const auto nodes = static_cast<std::size_t>(n) + 1;
    p.gaussian_increments.resize(static_cast<std::size_t>(n));
    p.brownian.assign(nodes, 0.0);
    p.running_brownian.assign(nodes, 0.0);
    p.running_jump.assign(nodes, 0.0);
    p.running_signal.assign(nodes, 0.0);
    p.jump_counts.assign(static_cast<std::size_t>(m), std::vector<int>(static_cast<std::size_t>(n), 0));
    p.compensated.assign(static_cast<std::size_t>(m), std::vector<double>(nodes, 0.0));

    for (int i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(i);
        const double z = rng.normal(static_cast<std::uint32_t>(i));
        const double db = (antithetic ? -z : z) * sqrt_dt;
        p.gaussian_increments[c] = db;
        p.brownian[c + 1] = p.brownian[c] + db;
        p.running_brownian[c + 1] = p.running_brownian[c] + signal.sigma_y.at_cell(i) * db;

        double jump_inc = 0.0;
        for (int j = 0; j < m; ++j) {
            const auto mj = static_cast<std::size_t>(j);
            const double mean = marks[mj].lambda * dt;
            const int count = rng.poisson(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j + 1), mean);
            p.jump_counts[mj][c] = count;
            const double dn = static_cast<double>(count) - mean;
            p.compensated[mj][c + 1] = p.compensated[mj][c] + dn;
            jump_inc += signal.theta[mj].at_cell(i) * dn;
        }
        p.running_jump[c + 1] = p.running_jump[c] + jump_inc;
        p.running_signal[c + 1] = p.running_brownian[c + 1] + p.running_jump[c + 1];
    }
    p.signal = p.running_signal.back();
    return p;
}

std::vector<SamplePath> Ensemble::materialize(int threads) const {
    std::vector<SamplePath> out(n_paths_);
    parallel_for(n_paths_, threads, [&](std::size_t i) { out[i] = path(i); });
    return out;
}

Ensemble simulate(const ValidatedModel& model, std::size_t n_paths, std::uint64_t seed) {
    if (n_paths < 1) throw Error(ErrorCode::InvalidConfig, "n_paths must be >= 1");
    return Ensemble(model, n_paths, seed);
}

const char* ControlPolicy::name() const {
    switch (kind_) {
    case Kind::Zero: return "zero";
    case Kind::Constant: return "constant";
    case Kind::HonestOptimal: return "honest";
    case Kind::InsiderOptimal: return "insider";
    case Kind::Table: return "table";
    }
    return "unknown";
}

double log_wealth(const SamplePath& path, std::span<const double> u, const ValidatedModel& model) {
    const MarketSpec& market = model.market();
    const int cells = model.horizon_cells();
    if (static_cast<int>(u.size()) < cells)
        throw Error(ErrorCode::InadmissibleControl, "control sequence shorter than the horizon");
    const double dt = model.grid().dt();
    const auto& marks = model.levy().marks();

    double diffusion = 0.0;
    double jumps = 0.0;
    for (int i = 0; i < cells; ++i) {
        const auto c = static_cast<std::size_t>(i);
        const double ui = u[c];
        const double s = market.sigma.at_cell(i);
        diffusion += ui * market.b.at_cell(i) * dt - 0.5 * ui * ui * s * s * dt +
                     ui * s * path.gaussian_increments[c];
        for (std::size_t j = 0; j < marks.size(); ++j) {
            const double ug = ui * market.gamma[j].at_cell(i);
            if (1.0 + ug < market.eps_adm)
                throw Error(ErrorCode::InadmissibleControl,
                            "1 + u*gamma < eps_adm at cell " + std::to_string(i));
            const int count = path.jump_counts[j][c];
            if (count != 0) jumps += count * std::log1p(ug);
            jumps -= ug * marks[j].lambda * dt;
        }
    }
    return diffusion + jumps;
}

std::vector<double> path_controls(const ControlPolicy& policy, const ValidatedModel& model,
                                  std::size_t path_index) {
    const auto cells = static_cast<std::size_t>(model.horizon_cells());
    switch (policy.kind()) {
    case ControlPolicy::Kind::Zero: return std::vector<double>(cells, 0.0);
    case ControlPolicy::Kind::Constant: return std::vector<double>(cells, policy.constant_value());
    case ControlPolicy::Kind::Table: {
        const auto& t = policy.table_values();
        if (path_index >= t.size() || t[path_index].size() < cells)
            throw Error(ErrorCode::InadmissibleControl, "control table does not cover the path");
        return t[path_index];
    }
    default:
        throw Error(ErrorCode::MissingDrift, std::string(policy.name()) + " policy needs drift data");
    }
}

}  // namespace infodrift
