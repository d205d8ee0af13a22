#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curvecorrect/nsga2.hpp"
#include "curvecorrect/preprocess.hpp"
#include "curvecorrect/records.hpp"
#include "curvecorrect/stats.hpp"
#include "curvecorrect/thresholds.hpp"

namespace curvecorrect {

/// Which threshold estimate feeds the moment objectives.
enum class GammaSource {
    kProfile,    ///< the smoothed nonincreasing step profile (default)
    kWindowMin,  ///< each window's own raw minimum accuracy
};

/// Which upper band flags overoptimistic records.
enum class FlagBand {
    kPointEstimate,  ///< selected-solution curve + 1.96 * noise / sqrt(n)
    kBootstrap,      ///< 97.5th percentile of the bootstrap replicate bands
};

struct FitConfig {
    int population = 40;
    int offspring = 10;
    double eta_crossover = 15.0;
    double eta_mutation = 20.0;
    int generations = 300;
    int bootstrap_reps = 10000;  ///< 0 disables confidence intervals
    std::uint64_t seed = 0;
    ParamBounds bounds = ParamBounds::standard_box();
    WindowingConfig window;
    double quantile_tau = 0.1;
    bool filter_outliers = true;
    bool filter_before_thresholds = true;  ///< false: estimate thresholds on raw records
    GammaSource gamma_source = GammaSource::kProfile;
    FlagBand flag_band = FlagBand::kPointEstimate;
    int jobs = 1;
};

struct ParamInterval {
    double lower = 0.0;
    double upper = 0.0;
};

struct ParamCi {
    ParamInterval limit, coeff, exponent, overfit, noise;
};

struct ParetoMember {
    CurveParams params;
    double f1 = 0.0;
    double f2 = 0.0;
};

struct FlaggedRecord {
    std::size_t index = 0;  ///< position in the input record list
    std::string study_id;
    std::int64_t n = 0;
    double accuracy = 0.0;
    double band = 0.0;
    double exceedance = 0.0;  ///< accuracy - band, positive
};

struct FitDiagnostics {
    double f1 = 0.0;
    double f2 = 0.0;
    int generations = 0;
    std::uint64_t seed = 0;
    std::size_t records_used = 0;
    std::size_t outliers_removed = 0;
    std::vector<std::string> warnings;
};

struct FitResult {
    CurveParams params;
    std::vector<ParetoMember> pareto;
    std::optional<ParamCi> ci;
    ThresholdProfile thresholds = ThresholdProfile::unbounded();
    std::vector<FlaggedRecord> flags;
    FitDiagnostics diagnostics;
};

/// Squared-error mismatch between window means and the model's published
/// mean (learning curve + overfitting + selection inflation). Zero iff every
/// window mean matches exactly.
double objective_f1(const CurveParams& p, std::span<const GroupedMoments> moments,
                    const ThresholdProfile& thresholds,
                    GammaSource gamma_source = GammaSource::kProfile);

/// Same for window variances; windows without a defined sample variance are
/// skipped, and an empty sum is 0 by convention.
double objective_f2(const CurveParams& p, std::span<const GroupedMoments> moments,
                    const ThresholdProfile& thresholds,
                    GammaSource gamma_source = GammaSource::kProfile);

/// Picks the front member minimizing f1 + rho * f2 (ties: smaller f2).
CurveParams select_asf(std::span<const ParetoMember> pareto, double rho = 1e-4);

/// End-to-end estimator: outlier filter, threshold estimation, grouped
/// moments, NSGA-II search, ASF selection, flags, and (when
/// bootstrap_reps > 0) percentile confidence intervals. Requires at least 3
/// distinct sample sizes after filtering. Deterministic per seed and
/// invariant to the input record order.
FitResult fit(const std::vector<AccuracyRecord>& records, const FitConfig& config);

/// Percentile bootstrap over record resamples (fits each replicate afresh).
ParamCi bootstrap_ci(const std::vector<AccuracyRecord>& records, const FitConfig& config);

/// Predictive upper band at sample size n: curve + 1.96 * noise / sqrt(n).
double upper_band(const CurveParams& p, double n);

/// Records strictly above the upper band, sorted by exceedance (desc).
std::vector<FlaggedRecord> flag_overoptimistic(std::span<const AccuracyRecord> records,
                                               const CurveParams& p);

/// Ordinary least-squares power-law fit y ~ limit + coeff * n^exponent with
/// the coefficient's sign unconstrained. This is the naive fit that inherits
/// the publication-bias distortion; the estimator is compared against it.
struct PowerFit {
    double limit = 0.0;
    double coeff = 0.0;
    double exponent = -0.5;
};

PowerFit naive_power_fit(std::span<const AccuracyRecord> records);
double power_eval(const PowerFit& fit, double n);

}  // namespace curvecorrect
