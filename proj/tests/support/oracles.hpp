#pragma once

// Test-side oracles, kept independent of the library code paths they check:
// quadrature for the normal CDF, rejection sampling for truncated moments,
// isotonic regression, a grid-search power-law fit, and frozen critical
// values for the statistical tests.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "curvecorrect/records.hpp"
#include "curvecorrect/rng.hpp"

namespace oracles {

inline double normal_density(double t) {
    return std::exp(-0.5 * t * t) * 0.3989422804014326779;
}

namespace detail {

template <typename F>
double simpson(const F& f, double a, double b) {
    const double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
}

template <typename F>
double adaptive(const F& f, double a, double b, double eps, double whole, int depth) {
    const double m = 0.5 * (a + b);
    const double left = simpson(f, a, m);
    const double right = simpson(f, m, b);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive(f, a, m, eps / 2.0, left, depth - 1) +
           adaptive(f, m, b, eps / 2.0, right, depth - 1);
}

}  // namespace detail

/// Normal CDF by adaptive Simpson quadrature from 0 (abs error ~1e-14).
inline double phi_quadrature(double z) {
    if (z == 0.0) return 0.5;
    const double a = std::min(0.0, z);
    const double b = std::max(0.0, z);
    const double integral =
        detail::adaptive(normal_density, a, b, 1e-15, detail::simpson(normal_density, a, b), 48);
    return z > 0.0 ? 0.5 + integral : 0.5 - integral;
}

/// One draw from Normal(mu, sigma^2) conditioned on exceeding gamma.
/// Naive rejection for mild truncation; Robert's translated-exponential
/// accept-reject for deep truncation. Never touches the closed forms.
inline double draw_truncated(curvecorrect::Rng& rng, double mu, double sigma, double gamma) {
    const double z = (gamma - mu) / sigma;
    if (z <= 0.5) {
        for (;;) {
            const double s = rng.normal();
            if (s >= z) return mu + sigma * s;
        }
    }
    const double lambda = 0.5 * (z + std::sqrt(z * z + 4.0));
    for (;;) {
        const double e = -std::log(1.0 - rng.uniform()) / lambda;
        const double x = z + e;
        const double d = x - lambda;
        if (rng.uniform() <= std::exp(-0.5 * d * d)) return mu + sigma * x;
    }
}

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double se_mean = 0.0;
    double se_variance = 0.0;
    std::size_t count = 0;
};

/// Sample mean/variance of `count` truncated-normal draws with standard
/// errors (the variance SE uses the empirical fourth central moment).
inline SampleMoments truncated_mc(curvecorrect::Rng& rng, double mu, double sigma, double gamma,
                                  std::size_t count) {
    std::vector<double> xs(count);
    for (auto& x : xs) x = draw_truncated(rng, mu, sigma, gamma);
    SampleMoments m;
    m.count = count;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(count);
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - m.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(count);
    m4 /= static_cast<double>(count);
    m.variance = m2 * static_cast<double>(count) / static_cast<double>(count - 1);
    m.se_mean = std::sqrt(m2 / static_cast<double>(count));
    m.se_variance = std::sqrt(std::max(0.0, m4 - m2 * m2) / static_cast<double>(count));
    return m;
}

/// Pool-adjacent-violators isotonic (nondecreasing) regression, unit weights.
inline std::vector<double> isotonic_increasing(const std::vector<double>& y) {
    std::vector<double> level;
    std::vector<double> weight;
    for (double v : y) {
        level.push_back(v);
        weight.push_back(1.0);
        while (level.size() > 1 && level[level.size() - 2] > level.back()) {
            const double w = weight[weight.size() - 2] + weight.back();
            const double v2 =
                (level[level.size() - 2] * weight[weight.size() - 2] + level.back() * weight.back()) / w;
            level.pop_back();
            weight.pop_back();
            level.back() = v2;
            weight.back() = w;
        }
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < level.size(); ++i) {
        for (double c = 0; c < weight[i]; ++c) out.push_back(level[i]);
    }
    return out;
}

struct PowerOracle {
    double limit = 0.0;
    double coeff = 0.0;
    double exponent = -0.5;
};

/// Least-squares power-law fit by a dense exponent grid with the closed-form
/// linear solve per exponent. No iterative refinement.
inline PowerOracle ols_power_oracle(std::span<const curvecorrect::AccuracyRecord> records) {
    PowerOracle best;
    double best_sse = 1e300;
    for (int i = 0; i <= 4000; ++i) {
        const double b = -2.0 + (2.0 - 1e-3) * i / 4000.0;
        double s1 = 0, su = 0, suu = 0, sy = 0, suy = 0;
        for (const auto& r : records) {
            const double u = std::pow(static_cast<double>(r.n), b);
            s1 += 1;
            su += u;
            suu += u * u;
            sy += r.accuracy;
            suy += u * r.accuracy;
        }
        const double det = s1 * suu - su * su;
        if (std::abs(det) < 1e-14) continue;
        const double limit = (sy * suu - su * suy) / det;
        const double coeff = (s1 * suy - su * sy) / det;
        double sse = 0;
        for (const auto& r : records) {
            const double e = r.accuracy - (limit + coeff * std::pow(static_cast<double>(r.n), b));
            sse += e * e;
        }
        if (sse < best_sse) {
            best_sse = sse;
            best = PowerOracle{limit, coeff, b};
        }
    }
    return best;
}

inline double power_oracle_eval(const PowerOracle& f, double n) {
    return f.limit + f.coeff * std::pow(n, f.exponent);
}

/// Upper 1% critical values of the chi-squared distribution (standard table).
inline double chi2_critical_01(int df) {
    static const double table[] = {6.6349,  9.2103,  11.3449, 13.2767, 15.0863,
                                   16.8119, 18.4753, 20.0902, 21.6660, 23.2093,
                                   24.7250, 26.2170, 27.6882, 29.1412, 30.5779,
                                   31.9999, 33.4087, 34.8053, 36.1909, 37.5662};
    if (df < 1 || df > 20) throw std::invalid_argument("chi2 table covers df 1..20");
    return table[df - 1];
}

}  // namespace oracles
