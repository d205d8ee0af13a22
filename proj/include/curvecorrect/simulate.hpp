#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "curvecorrect/records.hpp"
#include "curvecorrect/rng.hpp"
#include "curvecorrect/stats.hpp"
#include "curvecorrect/thresholds.hpp"

namespace curvecorrect {

struct ProblemPreset {
    std::string name;
    CurveParams params;
};

/// The seven synthetic-benchmark parameter sets.
const std::array<ProblemPreset, 7>& problem_presets();

/// 1-based lookup; throws std::invalid_argument for numbers outside 1..7.
const ProblemPreset& problem_preset(int number);

/// One reported accuracy drawn from the observation model:
/// biased_mean(n) plus Gaussian noise with sd sigma_n. The draw is not
/// clipped; values above 1 are possible and handled at record emission.
double sample_accuracy(const CurveParams& p, double n, Rng& rng);

struct SelectionResult {
    std::vector<double> published;  ///< values >= gamma, input order preserved
    std::size_t suppressed = 0;
};

/// Applies the publication threshold: values below gamma are suppressed.
SelectionResult apply_selection(const std::vector<double>& values, double gamma);

struct Experiment1Config {
    std::vector<std::int64_t> n_grid;  ///< sample sizes, each >= 2
    int teams = 100;                   ///< independent teams per sample size
    ThresholdProfile thresholds = ThresholdProfile::unbounded();
    std::uint64_t seed = 0;
    int jobs = 1;  ///< worker threads; 1 = serial reference path
};

/// Simulates `teams` accuracy draws per sample size, suppresses values below
/// the threshold profile, and emits published records (draws above 1.0 are
/// clipped to 1.0 and flagged). The grid is deduplicated and sorted; output
/// is bit-identical for any jobs value given the same seed.
std::vector<AccuracyRecord> run_experiment1(const CurveParams& p, const Experiment1Config& cfg);

/// Default simulation threshold profile: (limit - 0.15) + 0.5 / sqrt(n).
ThresholdProfile default_sim_thresholds(const CurveParams& p);

}  // namespace curvecorrect
