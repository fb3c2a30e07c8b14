#include "infodrift/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "infodrift/error.hpp"
#include "infodrift/io.hpp"
#include "infodrift/parallel.hpp"

namespace infodrift {

double DecomposedPath::brownian(int node) const {
    const auto i = static_cast<std::size_t>(node);
    return b_hat[i] + drift_b[i];
}

double DecomposedPath::compensated(int mark, int node) const {
    const auto j = static_cast<std::size_t>(mark);
    const auto i = static_cast<std::size_t>(node);
    return m_jump[j][i] + drift_n[j][i];
}

DecomposedPath decompose(const SamplePath& path, const PathDrift& drift, const ValidatedModel& model) {
    const int cells = model.horizon_cells();
    if (drift.nodes() < cells)
        throw Error(ErrorCode::MissingDrift, "drift covers " + std::to_string(drift.nodes()) + " nodes, need " +
                                                 std::to_string(cells));
    const auto nodes = static_cast<std::size_t>(cells) + 1;
    const auto m = static_cast<std::size_t>(model.n_marks());
    const double dt = model.grid().dt();
    const auto& marks = model.levy().marks();

    DecomposedPath d;
    d.path_id = path.path_id;
    d.b_hat.assign(nodes, 0.0);
    d.drift_b.assign(nodes, 0.0);
    d.m_jump.assign(m, std::vector<double>(nodes, 0.0));
    d.drift_n.assign(m, std::vector<double>(nodes, 0.0));
    for (std::size_t i = 0; i + 1 < nodes; ++i) {
        d.drift_b[i + 1] = d.drift_b[i] + drift.phi[i] * dt;
        for (std::size_t j = 0; j < m; ++j)
            d.drift_n[j][i + 1] = d.drift_n[j][i] + marks[j].lambda * drift.psi[j][i] * dt;
    }
    for (std::size_t i = 0; i < nodes; ++i) {
        d.b_hat[i] = path.brownian[i] - d.drift_b[i];
        for (std::size_t j = 0; j < m; ++j) d.m_jump[j][i] = path.compensated[j][i] - d.drift_n[j][i];
    }
    return d;
}

double quadratic_variation(const DecomposedPath& d) {
    double qv = 0.0;
    for (std::size_t i = 0; i + 1 < d.b_hat.size(); ++i) {
        const double inc = d.b_hat[i + 1] - d.b_hat[i];
        qv += inc * inc;
    }
    return qv;
}

double quadratic_variation(const SamplePath& path, int cells) {
    double qv = 0.0;
    for (int i = 0; i < cells; ++i) {
        const double inc = path.gaussian_increments[static_cast<std::size_t>(i)];
        qv += inc * inc;
    }
    return qv;
}

const char* verdict(const TestReport& r) { return r.passed ? "pass" : "fail"; }

const char* to_string(Instrument g) {
    switch (g) {
    case Instrument::One: return "1";
    case Instrument::BrownianAtS: return "B(s)";
    case Instrument::JumpAtS: return "Ntilde(s)";
    case Instrument::Signal: return "Y";
    case Instrument::SignalTimesBrownianAtS: return "Y*B(s)";
    }
    return "?";
}

double instrument_value(Instrument g, double b_s, double jump_s, double y) {
    switch (g) {
    case Instrument::One: return 1.0;
    case Instrument::BrownianAtS: return b_s;
    case Instrument::JumpAtS: return jump_s;
    case Instrument::Signal: return y;
    case Instrument::SignalTimesBrownianAtS: return y * b_s;
    }
    return 0.0;
}

TestReport mean_zero_test(std::string name, std::string kind, std::span<const double> products,
                          Expectation expected) {
    const SampleStats s = sample_stats(products);
    TestReport r;
    r.name = std::move(name);
    r.kind = std::move(kind);
    r.statistic = s.mean;
    r.value = s.mean;
    r.std_error = s.std_error;
    r.expected = expected;
    r.statistical = true;
    r.n_paths = s.n;
    const double sigmas = expected == Expectation::Pass ? kPositiveSigmas : kNegativeSigmas;
    r.threshold = sigmas * s.std_error;
    r.passed = std::abs(r.statistic) <= r.threshold;
    r.notes = expected == Expectation::Pass ? "pass iff |mean| <= 3 stderr"
                                            : "negative control: ok iff |mean| > 10 stderr";
    return r;
}

std::vector<TestReport> martingale_test(const std::string& process, double s, double u,
                                        std::span<const double> x_s, std::span<const double> x_u,
                                        std::span<const double> b_s, std::span<const double> jump_s,
                                        std::span<const double> y, std::span<const Instrument> instruments,
                                        Expectation expected) {
    const std::size_t n = x_s.size();
    if (x_u.size() != n || b_s.size() != n || jump_s.size() != n || y.size() != n)
        throw Error(ErrorCode::InvalidConfig, "martingale_test: column lengths differ");
    std::vector<TestReport> out;
    std::vector<double> products(n);
    for (Instrument g : instruments) {
        for (std::size_t i = 0; i < n; ++i)
            products[i] = instrument_value(g, b_s[i], jump_s[i], y[i]) * (x_u[i] - x_s[i]);
        out.push_back(mean_zero_test("martingale " + process + " [" + format_double(s) + "," + format_double(u) +
                                         "] g=" + to_string(g),
                                     "martingale", products, expected));
    }
    return out;
}

TestReport quadratic_variation_test(const std::string& process, std::span<const double> qv, double horizon,
                                    double delta) {
    const SampleStats s = sample_stats(qv);
    TestReport r;
    r.name = "quadratic-variation " + process;
    r.kind = "quadratic-variation";
    r.value = s.mean;
    r.statistic = s.mean - horizon;
    r.std_error = s.std_error;
    r.threshold = delta * horizon;
    r.passed = std::abs(r.statistic) <= r.threshold;
    r.n_paths = s.n;
    r.notes = "statistic = mean QV - T; pass iff within " + format_double(delta) + " * T";
    return r;
}

double snap_to_support(const ValidatedModel& model, double y) {
    if (model.mode() != SignalMode::PureLattice) return y;
    return std::round(y + model.lattice_offset()) - model.lattice_offset();
}

namespace {

// Lattice points y = k - offset covering [center - w, center + w].
std::vector<double> lattice_points(const ValidatedModel& model, double center, double w) {
    const double off = model.lattice_offset();
    const double k_lo = std::ceil(center - w + off);
    const double k_hi = std::floor(center + w + off);
    std::vector<double> ys;
    for (double k = k_lo; k <= k_hi; k += 1.0) ys.push_back(k - off);
    return ys;
}

double signal_variance(const ValidatedModel& model) {
    const int n = model.grid().n_steps();
    const double dt = model.grid().dt();
    double v = model.tail_gaussian(0);
    for (int j = 0; j < model.n_marks(); ++j)
        v += model.levy().marks()[static_cast<std::size_t>(j)].lambda *
             model.signal().theta[static_cast<std::size_t>(j)].squared_integral(0, n, dt);
    return v;
}

struct Bin {
    double p = 0.0;
    double observed = 0.0;
};

// Folds bins whose expected count is below 5 into a neighbour.
std::vector<Bin> merge_small(std::vector<Bin> bins, double n) {
    auto small = [&](const Bin& b) { return b.p * n < 5.0; };
    while (bins.size() > 1 && small(bins.front())) {
        bins[1].p += bins[0].p;
        bins[1].observed += bins[0].observed;
        bins.erase(bins.begin());
    }
    while (bins.size() > 1 && small(bins.back())) {
        bins[bins.size() - 2].p += bins.back().p;
        bins[bins.size() - 2].observed += bins.back().observed;
        bins.pop_back();
    }
    for (std::size_t k = 0; k + 1 < bins.size();) {
        if (small(bins[k])) {
            bins[k + 1].p += bins[k].p;
            bins[k + 1].observed += bins[k].observed;
            bins.erase(bins.begin() + static_cast<std::ptrdiff_t>(k));
        } else {
            ++k;
        }
    }
    return bins;
}

}  // namespace

double normalization(const DonskerKernel& kernel, const FourierState& state) {
    const ValidatedModel& model = kernel.model();
    const double center = state.running_signal();
    const double w = kernel.support_bound(state.node);
    if (kernel.mode() == QuadratureMode::Periodic) {
        std::vector<double> masses;
        for (double y : lattice_points(model, center, w)) masses.push_back(kernel.cond_delta(state, y));
        return pairwise_sum(masses);
    }
    // Trapezoid in y; spectrally accurate for a density with a Gaussian
    // component of variance v once h is a fraction of sqrt(v).
    const double h = std::sqrt(state.tail_gaussian) / 4.0;
    const auto half = static_cast<long>(std::ceil(w / h));
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(2 * half + 1));
    for (long k = -half; k <= half; ++k) {
        const double wgt = (k == -half || k == half) ? 0.5 : 1.0;
        values.push_back(wgt * kernel.cond_delta(state, center + static_cast<double>(k) * h));
    }
    return pairwise_sum(values) * h;
}

TestReport normalization_test(const DonskerKernel& kernel, std::span<const FourierState> states) {
    TestReport r;
    r.name = "normalization";
    r.kind = "normalization";
    r.threshold = kNormalizationTolerance;
    double worst = 0.0;
    for (const FourierState& st : states) {
        const double mass = normalization(kernel, st);
        if (std::abs(mass - 1.0) >= worst) {
            worst = std::abs(mass - 1.0);
            r.value = mass;
        }
    }
    r.statistic = worst;
    r.passed = worst <= r.threshold;
    r.notes = "max |mass - 1| over " + std::to_string(states.size()) + " states";
    return r;
}

TestReport chi_square_test(const DonskerKernel& kernel, std::span<const double> signals) {
    const ValidatedModel& model = kernel.model();
    const FourierState st = kernel.state(0, 0.0, 0.0);
    const double w = kernel.support_bound(0);
    const double n = static_cast<double>(signals.size());
    std::vector<Bin> bins;

    if (kernel.mode() == QuadratureMode::Periodic) {
        const std::vector<double> ys = lattice_points(model, 0.0, w);
        bins.resize(ys.size());
        for (std::size_t k = 0; k < ys.size(); ++k) bins[k].p = kernel.cond_delta(st, ys[k]);
        const double first = ys.front();
        for (double y : signals) {
            const auto k = static_cast<long>(std::llround(y - first));
            bins[static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(ys.size()) - 1))].observed += 1.0;
        }
    } else {
        const double sd = std::sqrt(signal_variance(model));
        const int interior = kChiSquareBins - 2;
        const double lo = -3.5 * sd;
        const double width = 7.0 * sd / interior;
        std::vector<double> edges{-std::max(w, 3.5 * sd)};
        for (int k = 0; k <= interior; ++k) edges.push_back(lo + k * width);
        edges.push_back(std::max(w, 3.5 * sd));
        const double piece = std::min(width, std::sqrt(st.tail_gaussian) / 2.0);
        auto density = [&](double y) { return kernel.cond_delta(st, y); };
        bins.resize(edges.size() - 1);
        for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
            const auto pieces = static_cast<int>(std::ceil((edges[b + 1] - edges[b]) / piece));
            const double step = (edges[b + 1] - edges[b]) / pieces;
            double p = 0.0;
            for (int q = 0; q < pieces; ++q)
                p += boost::math::quadrature::gauss<double, 8>::integrate(density, edges[b] + q * step,
                                                                          edges[b] + (q + 1) * step);
            bins[b].p = p;
        }
        for (double y : signals) {
            const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, y);
            bins[static_cast<std::size_t>(it - edges.begin() - 1)].observed += 1.0;
        }
    }

    bins = merge_small(std::move(bins), n);
    double chi2 = 0.0;
    for (const Bin& b : bins) {
        const double e = b.p * n;
        chi2 += (b.observed - e) * (b.observed - e) / e;
    }
    TestReport r;
    r.name = "chi-square density t=0";
    r.kind = "chi-square";
    r.statistic = chi2;
    r.n_paths = signals.size();
    r.statistical = true;
    const int df = static_cast<int>(bins.size()) - 1;
    if (df < 1) {
        r.threshold = 0.0;
        r.passed = false;
        r.notes = "fewer than two bins with expected count >= 5";
        return r;
    }
    r.threshold = boost::math::quantile(boost::math::chi_squared(df), kChiSquareLevel);
    r.passed = chi2 <= r.threshold;
    r.notes = std::to_string(bins.size()) + " bins, critical value at 0.99";
    return r;
}

TestReport tower_test(double t, double y, std::span<const double> cond_values, double reference) {
    std::vector<double> diffs(cond_values.begin(), cond_values.end());
    for (double& d : diffs) d -= reference;
    TestReport r = mean_zero_test("tower t=" + format_double(t) + " y=" + format_double(y), "tower", diffs);
    r.value = r.statistic + reference;
    r.notes = "mean cond_delta(t,y) - cond_delta(0,y); pass iff within 3 stderr";
    return r;
}

double poisson_gaussian_mixture_density(double y, double lambda, double theta, double sigma_y, double t0) {
    const double mu = lambda * t0;
    const double var = sigma_y * sigma_y * t0;
    double sum = 0.0;
    for (int k = 0;; ++k) {
        const double log_pmf = -mu + k * std::log(mu) - std::lgamma(k + 1.0);
        const double z = y - theta * (k - mu);
        sum += std::exp(log_pmf - 0.5 * z * z / var);
        if (k > mu && log_pmf < -60.0) break;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * var);
}

std::vector<TestReport> series_oracle_test(const DonskerKernel& kernel) {
    const ValidatedModel& model = kernel.model();
    const SignalSpec& s = model.signal();
    if (model.mode() != SignalMode::GaussianDominant || model.n_marks() != 1 || !s.sigma_y.is_constant() ||
        !s.theta[0].is_constant())
        return {};
    const double lambda = model.levy().marks()[0].lambda;
    const double theta = s.theta[0].at_cell(0);
    const double sigma_y = s.sigma_y.at_cell(0);
    const double t0 = model.grid().t_end();
    const FourierState st = kernel.state(0, 0.0, 0.0);
    const double sd = std::sqrt(signal_variance(model));

    double worst = 0.0;
    double peak = 0.0;
    for (int k = -40; k <= 40; ++k) {
        const double y = 4.0 * sd * k / 40.0;
        const double series = poisson_gaussian_mixture_density(y, lambda, theta, sigma_y, t0);
        peak = std::max(peak, series);
        worst = std::max(worst, std::abs(kernel.cond_delta(st, y) - series));
    }
    TestReport r;
    r.name = "mixture series t=0";
    r.kind = "series-oracle";
    r.statistic = worst / peak;
    r.threshold = 1e-8;
    r.passed = r.statistic <= r.threshold;
    r.notes = "max |density - series| / peak over 81 points in [-4 sd, 4 sd]";
    return {r};
}

SuiteVerdict summarize(std::span<const TestReport> reports) {
    SuiteVerdict v;
    for (const TestReport& r : reports) {
        if (r.ok()) continue;
        if (r.negative_control())
            ++v.negative_failures;
        else if (r.statistical)
            ++v.statistical_failures;
        else
            ++v.deterministic_failures;
    }
    return v;
}

}  // namespace infodrift
