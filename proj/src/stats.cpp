#include "curvecorrect/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace curvecorrect {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;  // 1 / sqrt(2*pi)
constexpr double kInvSqrt2 = 0.7071067811865475244;    // 1 / sqrt(2)

// Above this argument the naive pdf/sf ratio loses digits and eventually
// overflows the tail; switch to the continued fraction.
constexpr double kMillsAsymptoticCut = 8.0;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be finite");
    }
}

// Remainder of the inverse Mills ratio for large z:
//   inv_mills(z) = z + 1/(z + 2/(z + 3/(z + ...)))
// evaluated by backward recurrence. Depth 128 is converged to double
// precision for every z >= 8.
double mills_cf_tail(double z) {
    double f = 0.0;
    for (int k = 128; k >= 2; --k) f = static_cast<double>(k) / (z + f);
    return 1.0 / (z + f);
}

double require_sample_size(double n) {
    require_finite(n, "n");
    if (n < 1.0) throw std::invalid_argument("sample size n must be >= 1");
    return n;
}

}  // namespace

bool ParamBounds::contains(const CurveParams& p) const noexcept {
    const auto x = to_array(p);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
    }
    return true;
}

std::array<double, 5> to_array(const CurveParams& p) noexcept {
    return {p.limit, p.coeff, p.exponent, p.overfit, p.noise};
}

CurveParams params_from_array(const std::array<double, 5>& x) noexcept {
    return CurveParams{x[0], x[1], x[2], x[3], x[4]};
}

void validate_params(const CurveParams& p) {
    const auto x = to_array(p);
    for (double v : x) require_finite(v, "curve parameter");
    if (p.limit < 0.5 || p.limit > 1.0)
        throw std::invalid_argument("limit must lie in [0.5, 1]");
    if (p.coeff < -2.0 || p.coeff > -0.5)
        throw std::invalid_argument("coeff must lie in [-2, -0.5]");
    if (p.exponent < -1.0 || p.exponent >= 0.0)
        throw std::invalid_argument("exponent must lie in [-1, 0)");
    if (p.overfit < 0.0 || p.overfit > 1.0)
        throw std::invalid_argument("overfit must lie in [0, 1]");
    if (p.noise <= 0.0 || p.noise > 0.5)
        throw std::invalid_argument("noise must lie in (0, 0.5]");
}

double normal_pdf(double z) {
    require_finite(z, "z");
    return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double normal_cdf(double z) {
    require_finite(z, "z");
    return 0.5 * std::erfc(-z * kInvSqrt2);
}

double normal_sf(double z) {
    require_finite(z, "z");
    return 0.5 * std::erfc(z * kInvSqrt2);
}

double inv_mills(double z) {
    require_finite(z, "z");
    if (z > kMillsAsymptoticCut) return z + mills_cf_tail(z);
    const double ratio = normal_pdf(z) / normal_sf(z);
    // pdf underflows near z = -38.6; keep the result strictly positive.
    return ratio > 0.0 ? ratio : std::numeric_limits<double>::min();
}

TruncatedMoments truncated_moments(double mu, double sigma, double gamma) {
    require_finite(mu, "mu");
    require_finite(gamma, "gamma");
    if (!std::isfinite(sigma) || sigma <= 0.0) {
        throw std::invalid_argument("sigma must be positive and finite");
    }
    const double z = (gamma - mu) / sigma;

    double psi;
    double var_ratio;  // Var / sigma^2 = 1 + z*psi - psi^2
    if (z > kMillsAsymptoticCut) {
        // psi = z + tail with tail computed directly, so the variance ratio
        //   1 + z*psi - psi^2 = (1 - z*tail) - tail^2
        // avoids the z^2-scale cancellation of the textbook form.
        const double tail = mills_cf_tail(z);
        psi = z + tail;
        var_ratio = (1.0 - z * tail) - tail * tail;
    } else {
        psi = inv_mills(z);
        var_ratio = 1.0 + z * psi - psi * psi;
    }

    return TruncatedMoments{mu + sigma * psi, sigma * sigma * var_ratio};
}

double truncated_mean(double mu, double sigma, double gamma) {
    return truncated_moments(mu, sigma, gamma).mean;
}

double truncated_var(double mu, double sigma, double gamma) {
    return truncated_moments(mu, sigma, gamma).variance;
}

double true_curve(const CurveParams& p, double n) {
    require_sample_size(n);
    return p.limit + p.coeff * std::pow(n, p.exponent);
}

double biased_mean(const CurveParams& p, double n) {
    return true_curve(p, n) + p.overfit / std::sqrt(n);
}

double sigma_n(double noise, double n) {
    require_sample_size(n);
    if (!std::isfinite(noise) || noise <= 0.0) {
        throw std::invalid_argument("noise scale must be positive and finite");
    }
    return noise / std::sqrt(n);
}

double observed_mean(const CurveParams& p, double gamma_n, double n) {
    return truncated_mean(biased_mean(p, n), sigma_n(p.noise, n), gamma_n);
}

double observed_var(const CurveParams& p, double gamma_n, double n) {
    return truncated_var(biased_mean(p, n), sigma_n(p.noise, n), gamma_n);
}

}  // namespace curvecorrect
