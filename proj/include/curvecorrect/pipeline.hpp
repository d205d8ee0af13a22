#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "curvecorrect/records.hpp"
#include "curvecorrect/rng.hpp"
#include "curvecorrect/thresholds.hpp"

namespace curvecorrect {

/// Row-major feature matrix with binary labels. Generators always produce
/// kGeneratedFeatures columns; column subsets may be narrower.
struct LabeledDataset {
    static constexpr int kGeneratedFeatures = 10;

    std::vector<double> features;  ///< rows * cols, row-major
    std::vector<int> labels;       ///< 0/1, one per row
    std::size_t cols = kGeneratedFeatures;

    std::size_t rows() const noexcept { return cols == 0 ? 0 : features.size() / cols; }
    double at(std::size_t r, std::size_t c) const { return features[r * cols + c]; }
};

// Label rules for the two generators, exposed so tests can drive them with
// explicit latent values.
int problem1_label(double x1, double x2, double eps);
double problem2_latent(std::span<const double> x, double eps);
std::vector<int> problem2_labels(std::span<const double> latents);

/// Gaussian features; label 1 iff sigmoid(0.8*x1 - 0.3*x2 + 0.7*eps) > 0.5.
/// Regenerates (up to 100 attempts) until the label balance lies in
/// [0.2, 0.8]; throws DegenerateDataError if that never happens.
LabeledDataset gen_problem1_data(std::size_t n, std::uint64_t seed);

/// Gaussian features; latent y = 5*(2 sin(pi x1 x2) + 4 (x3-0.5)^2 + 2 x4 + x5) + eps,
/// label 1 iff 1/(1+exp(y - mean(y))) > 0.5. Same balance guard as problem 1.
LabeledDataset gen_problem2_data(std::size_t n, std::uint64_t seed);

/// Indices of the k features most correlated (|Pearson|) with the labels,
/// computed over the given rows; ties break toward the lower index and
/// constant features count as correlation 0.
std::vector<int> select_features_on_rows(const LabeledDataset& data,
                                         std::span<const std::size_t> rows, int k);

/// The leakage being modeled: feature selection over ALL rows, before any
/// train/test split.
std::vector<int> leaky_feature_select(const LabeledDataset& data, int k);

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;

    /// Decision function; predicts label 1 iff positive.
    double score(std::span<const double> x) const;
};

/// Logistic regression by deterministic full-batch gradient descent
/// (500 iterations, unit step, L2 penalty 1e-4 on the weights). Throws
/// DegenerateDataError when only one class is present.
LinearModel train_linear_classifier(const LabeledDataset& train);

/// floor(0.3*n) test rows, remainder to train.
std::pair<std::size_t, std::size_t> split_counts(std::size_t n);

/// Disjoint (train, test) row indices from a uniform permutation.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_rows(std::size_t n, Rng& rng);

struct TrialConfig {
    int problem = 1;  ///< 1 or 2
    std::size_t n = 100;
    bool leak = false;  ///< select features on all rows before splitting
    int k = -1;         ///< features kept; -1 = problem default
    std::uint64_t seed = 0;
};

/// Problem defaults for k: 3 for problem 1, 5 for problem 2.
int default_feature_k(int problem);

/// One team's model-development run: generate data, select features (on all
/// rows when leaking, on train rows otherwise), 70/30 split, train, and
/// return held-out accuracy. Resamples on single-class training sets.
double run_team_trial(const TrialConfig& cfg);

/// Leak-free mean accuracy per sample size; the empirical true learning
/// curve. Trial (grid index i, repeat r) uses derive_seed(seed, {i, r}).
std::vector<std::pair<std::int64_t, double>> estimate_true_curve(
    int problem, std::span<const std::int64_t> n_grid, int repeats, std::uint64_t seed,
    int k = -1, int jobs = 1);

/// K leaky trials per sample size, published only above the threshold.
std::vector<AccuracyRecord> run_experiment2(int problem, std::span<const std::int64_t> n_grid,
                                            int teams, const ThresholdProfile& thresholds,
                                            int k, std::uint64_t seed, int jobs = 1);

}  // namespace curvecorrect
