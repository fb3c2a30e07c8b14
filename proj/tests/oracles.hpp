#pragma once
// Reference values computed independently of the library: direct series,
// closed forms and plain bisection.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline double gaussian_density(double y, double variance) {
    return std::exp(-0.5 * y * y / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

// P(Poisson(mu) = k) by the product recursion p_k = p_{k-1} mu / k.
inline double poisson_pmf(int k, double mu) {
    if (k < 0) return 0.0;
    double p = std::exp(-mu);
    for (int i = 1; i <= k; ++i) p *= mu / i;
    return p;
}

// Density of sigma_y B(T0) + theta (N(T0) - lambda T0) at y.
inline double poisson_gaussian_density(double y, double lambda, double theta, double sigma_y, double t0) {
    const double mu = lambda * t0;
    double sum = 0.0;
    for (int k = 0; k < 200; ++k) sum += poisson_pmf(k, mu) * gaussian_density(y - theta * (k - mu), sigma_y * sigma_y * t0);
    return sum;
}

// Root of a decreasing-or-increasing continuous f on [lo, hi] with a sign change.
inline double bisection(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Brownian bridge drift for Y = sigma B(T0) with constant sigma.
inline double bridge_phi(double y, double y_t, double sigma, double t0, double t) {
    return (y - y_t) / (sigma * (t0 - t));
}

// Signal increment r = theta G + J over the remaining time tau, where G is a
// Brownian increment and J = N - lambda tau a compensated unit Poisson
// increment. Conditioning on the number k of remaining jumps:
//   E[G | r] = sum_k w_k (r - (k - lambda tau)) / theta,
//   E[J | r] = sum_k w_k (k - lambda tau),
// with w_k proportional to pmf(k) * gaussian(r - (k - lambda tau), theta^2 tau).
struct MixedMoments {
    double g = 0.0;
    double j = 0.0;
};

inline MixedMoments mixed_conditional_moments(double r, double theta, double lambda, double tau) {
    const double mu = lambda * tau;
    double wsum = 0.0, gsum = 0.0, jsum = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double jv = k - mu;
        const double w = poisson_pmf(k, mu) * gaussian_density(r - jv, theta * theta * tau);
        wsum += w;
        gsum += w * (r - jv) / theta;
        jsum += w * jv;
    }
    return {gsum / wsum, jsum / wsum};
}

// Information drift of B and jump correction for Y = theta B(T0) + Ntilde(T0).
inline double mixed_phi(double r, double theta, double lambda, double tau) {
    return mixed_conditional_moments(r, theta, lambda, tau).g / tau;
}
inline double mixed_psi(double r, double theta, double lambda, double tau) {
    return mixed_conditional_moments(r, theta, lambda, tau).j / (lambda * tau);
}

}  // namespace oracle
