#pragma once

#include <vector>

#include "infodrift/model.hpp"

namespace fixture {

using infodrift::DiscreteLevyMeasure;
using infodrift::LevyMark;
using infodrift::MarketSpec;
using infodrift::SignalSpec;
using infodrift::StepFunction;
using infodrift::TimeGrid;

struct Spec {
    SignalSpec signal;
    DiscreteLevyMeasure levy;
    MarketSpec market;

    infodrift::ValidatedModel validate() const { return infodrift::validate_model(signal, levy, market); }
};

// Constant coefficients on a uniform grid. marks: (zeta, lambda); theta and
// gamma are per mark.
inline Spec make(double t0, int n, double sigma_y, std::vector<LevyMark> marks = {}, std::vector<double> theta = {},
                 double horizon = 0.5, double b = 0.0, double sigma = 1.0, std::vector<double> gamma = {}) {
    Spec s;
    s.signal.grid = TimeGrid(t0, n);
    s.signal.sigma_y = StepFunction::constant(sigma_y, n);
    for (std::size_t j = 0; j < marks.size(); ++j)
        s.signal.theta.push_back(StepFunction::constant(j < theta.size() ? theta[j] : marks[j].zeta, n));
    s.levy = DiscreteLevyMeasure(marks);
    s.market.horizon = horizon;
    s.market.b = StepFunction::constant(b, n);
    s.market.sigma = StepFunction::constant(sigma, n);
    for (std::size_t j = 0; j < marks.size(); ++j)
        s.market.gamma.push_back(StepFunction::constant(j < gamma.size() ? gamma[j] : 0.0, n));
    return s;
}

inline Spec brownian(int n = 500) { return make(1.0, n, 1.0); }
inline Spec pure_poisson(int n = 500, double lambda = 1.0) {
    return make(1.0, n, 0.0, {{1.0, lambda}}, {1.0}, 0.5, 0.05, 0.6, {0.5});
}
inline Spec mixed(double theta, int n = 500, double lambda = 1.0) {
    return make(1.0, n, theta, {{1.0, lambda}}, {1.0}, 0.5, 0.05, 0.6, {0.5});
}

}  // namespace fixture
