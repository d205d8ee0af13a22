#pragma once

#include <array>

namespace curvecorrect {

/// Parameters of the published-accuracy observation model.
///
/// The noise-free learning curve is  curve(n) = limit + coeff * n^exponent,
/// strictly increasing in n and bounded above by limit. Reported accuracies
/// add an overfitting inflation  overfit * n^-1/2  to the mean and carry a
/// standard deviation  noise * n^-1/2.
struct CurveParams {
    double limit = 0.75;     ///< limiting accuracy A, in [0.5, 1]
    double coeff = -1.0;     ///< power-law coefficient, in [-2, -0.5]
    double exponent = -0.6;  ///< learning-rate exponent, in [-1, 0)
    double overfit = 0.0;    ///< overfitting index, in [0, 1]
    double noise = 0.25;     ///< noise scale, in (0, 0.5]

    bool operator==(const CurveParams&) const = default;
};

/// Box constraints for the five curve parameters, in the order
/// (limit, coeff, exponent, overfit, noise).
struct ParamBounds {
    std::array<double, 5> lo{0.5, -2.0, -1.0, 0.0, 1e-4};
    std::array<double, 5> hi{1.0, -0.5, -1e-6, 1.0, 0.5};

    /// The feasible box of the moment-matching program. The exponent's upper
    /// edge and the noise scale's lower edge are pulled marginally inside the
    /// open boundaries so boundary-clipped search points stay valid.
    static ParamBounds standard_box() { return ParamBounds{}; }

    bool contains(const CurveParams& p) const noexcept;
};

std::array<double, 5> to_array(const CurveParams& p) noexcept;
CurveParams params_from_array(const std::array<double, 5>& x) noexcept;

/// Throws std::invalid_argument if p violates the standard box or the sign
/// invariants. Errors are reported, never clamped.
void validate_params(const CurveParams& p);

// ---------------------------------------------------------------------------
// Normal-distribution primitives. All functions are pure; non-finite inputs
// are contract violations reported as std::invalid_argument.
// ---------------------------------------------------------------------------

/// Standard normal density. Underflows to 0 for |z| beyond ~38.6.
double normal_pdf(double z);

/// Standard normal CDF via the complementary error function; absolute error
/// below 1e-12 on |z| <= 8.
double normal_cdf(double z);

/// Upper tail 1 - CDF, computed without cancellation for large z.
double normal_sf(double z);

/// Inverse Mills ratio  pdf(z) / (1 - cdf(z)).
///
/// Strictly positive and increasing, always above max(z, 0). For z > 8 the
/// naive ratio is replaced by the Laplace continued fraction so the value
/// stays finite up to z = 1e6; for z below about -38 the exact value
/// underflows and the smallest positive double is returned.
double inv_mills(double z);

struct TruncatedMoments {
    double mean;      ///< E[x | x > gamma]
    double variance;  ///< Var[x | x > gamma]
};

/// Mean and variance of a Normal(mu, sigma^2) conditioned on exceeding gamma.
/// Requires sigma > 0 and finite gamma. Shares one Mills-ratio evaluation
/// between the two moments.
TruncatedMoments truncated_moments(double mu, double sigma, double gamma);

double truncated_mean(double mu, double sigma, double gamma);
double truncated_var(double mu, double sigma, double gamma);

// ---------------------------------------------------------------------------
// Learning-curve evaluation. n may be fractional (window representatives);
// n < 1 is an error.
// ---------------------------------------------------------------------------

/// Noise-free accuracy  limit + coeff * n^exponent.
double true_curve(const CurveParams& p, double n);

/// Mean reported accuracy before selection: true_curve + overfit * n^-1/2.
double biased_mean(const CurveParams& p, double n);

/// Standard deviation of one reported accuracy: noise / sqrt(n).
double sigma_n(double noise, double n);

/// Mean of published accuracies under a lower selection threshold gamma_n;
/// equals truncated_mean(biased_mean, sigma_n, gamma_n).
double observed_mean(const CurveParams& p, double gamma_n, double n);

/// Variance of published accuracies; strictly below sigma_n^2.
double observed_var(const CurveParams& p, double gamma_n, double n);

}  // namespace curvecorrect
