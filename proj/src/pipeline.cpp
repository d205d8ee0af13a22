#include "curvecorrect/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "curvecorrect/errors.hpp"
#include "curvecorrect/parallel.hpp"

namespace curvecorrect {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kGenTag = 0x67656e;    // dataset generation streams
constexpr std::uint64_t kTrialTag = 0x747269;  // per-trial attempt streams
constexpr std::uint64_t kSplitTag = 0x73706c;  // split permutation streams
constexpr std::uint64_t kExp2Tag = 0x657870'32;
constexpr int kBalanceAttempts = 100;
constexpr int kTrainIterations = 500;
constexpr double kTrainStep = 1.0;
constexpr double kL2Penalty = 1e-4;

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

bool balanced(const std::vector<int>& labels) {
    const double ones = static_cast<double>(std::accumulate(labels.begin(), labels.end(), 0));
    const double frac = ones / static_cast<double>(labels.size());
    return frac >= 0.2 && frac <= 0.8;
}

template <typename LabelPass>
LabeledDataset generate(std::size_t n, std::uint64_t seed, std::uint64_t problem_tag,
                        LabelPass&& label_pass) {
    if (n < 4) throw std::invalid_argument("dataset needs at least 4 rows");
    for (int attempt = 0; attempt < kBalanceAttempts; ++attempt) {
        Rng rng(derive_seed(seed, {kGenTag, problem_tag, static_cast<std::uint64_t>(attempt)}));
        LabeledDataset data;
        data.cols = LabeledDataset::kGeneratedFeatures;
        data.features.resize(n * data.cols);
        for (double& v : data.features) v = rng.normal();
        data.labels = label_pass(data, rng);
        if (balanced(data.labels)) return data;
    }
    throw DegenerateDataError("could not generate a label-balanced dataset in 100 attempts");
}

}  // namespace

int problem1_label(double x1, double x2, double eps) {
    return sigmoid(0.8 * x1 - 0.3 * x2 + 0.7 * eps) > 0.5 ? 1 : 0;
}

double problem2_latent(std::span<const double> x, double eps) {
    return 5.0 * (2.0 * std::sin(kPi * x[0] * x[1]) + 4.0 * (x[2] - 0.5) * (x[2] - 0.5) +
                  2.0 * x[3] + x[4]) +
           eps;
}

std::vector<int> problem2_labels(std::span<const double> latents) {
    // Compensated summation: rows with identical latents must land exactly on
    // the mean so the strict comparison gives them label 0.
    double sum = 0.0, comp = 0.0;
    for (double v : latents) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    const double mean = sum / static_cast<double>(latents.size());
    std::vector<int> labels(latents.size());
    for (std::size_t i = 0; i < latents.size(); ++i) {
        labels[i] = 1.0 / (1.0 + std::exp(latents[i] - mean)) > 0.5 ? 1 : 0;
    }
    return labels;
}

LabeledDataset gen_problem1_data(std::size_t n, std::uint64_t seed) {
    return generate(n, seed, 1, [](const LabeledDataset& data, Rng& rng) {
        std::vector<int> labels(data.rows());
        for (std::size_t r = 0; r < data.rows(); ++r) {
            labels[r] = problem1_label(data.at(r, 0), data.at(r, 1), rng.normal());
        }
        return labels;
    });
}

LabeledDataset gen_problem2_data(std::size_t n, std::uint64_t seed) {
    return generate(n, seed, 2, [](const LabeledDataset& data, Rng& rng) {
        std::vector<double> latents(data.rows());
        for (std::size_t r = 0; r < data.rows(); ++r) {
            const std::span<const double> row{data.features.data() + r * data.cols, data.cols};
            latents[r] = problem2_latent(row, rng.normal());
        }
        return problem2_labels(latents);
    });
}

std::vector<int> select_features_on_rows(const LabeledDataset& data,
                                         std::span<const std::size_t> rows, int k) {
    const int ncols = static_cast<int>(data.cols);
    if (k < 1 || k > ncols) throw std::invalid_argument("k must lie in [1, feature count]");
    if (rows.empty()) throw std::invalid_argument("feature selection needs at least one row");

    const double m = static_cast<double>(rows.size());
    double label_mean = 0.0;
    for (std::size_t r : rows) label_mean += data.labels[r];
    label_mean /= m;

    std::vector<std::pair<double, int>> ranking;  // (-|corr|, index)
    ranking.reserve(static_cast<std::size_t>(ncols));
    for (int c = 0; c < ncols; ++c) {
        double sx = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t r : rows) {
            const double x = data.at(r, static_cast<std::size_t>(c));
            sx += x;
            sxx += x * x;
            sxy += x * (data.labels[r] - label_mean);
        }
        const double var_x = sxx / m - (sx / m) * (sx / m);
        double var_y = 0.0;
        for (std::size_t r : rows) {
            var_y += (data.labels[r] - label_mean) * (data.labels[r] - label_mean);
        }
        var_y /= m;
        double corr = 0.0;  // constant columns (or labels) carry no signal
        if (var_x > 0.0 && var_y > 0.0) {
            corr = (sxy / m) / std::sqrt(var_x * var_y);
        }
        ranking.emplace_back(-std::abs(corr), c);
    }
    std::sort(ranking.begin(), ranking.end());

    std::vector<int> selected;
    selected.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) selected.push_back(ranking[static_cast<std::size_t>(i)].second);
    std::sort(selected.begin(), selected.end());
    return selected;
}

std::vector<int> leaky_feature_select(const LabeledDataset& data, int k) {
    std::vector<std::size_t> all(data.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return select_features_on_rows(data, all, k);
}

double LinearModel::score(std::span<const double> x) const {
    double s = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * x[i];
    return s;
}

LinearModel train_linear_classifier(const LabeledDataset& train) {
    const std::size_t m = train.rows();
    if (m < 2) throw std::invalid_argument("training set needs at least 2 rows");
    const int ones = std::accumulate(train.labels.begin(), train.labels.end(), 0);
    if (ones == 0 || ones == static_cast<int>(m)) {
        throw DegenerateDataError("training set contains a single class");
    }

    LinearModel model;
    model.weights.assign(train.cols, 0.0);
    std::vector<double> grad(train.cols);
    for (int it = 0; it < kTrainIterations; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            const std::span<const double> row{train.features.data() + r * train.cols, train.cols};
            const double err = sigmoid(model.score(row)) - train.labels[r];
            for (std::size_t c = 0; c < train.cols; ++c) grad[c] += err * row[c];
            grad_bias += err;
        }
        const double inv_m = 1.0 / static_cast<double>(m);
        for (std::size_t c = 0; c < train.cols; ++c) {
            model.weights[c] -= kTrainStep * (grad[c] * inv_m + kL2Penalty * model.weights[c]);
        }
        model.bias -= kTrainStep * grad_bias * inv_m;
    }
    return model;
}

std::pair<std::size_t, std::size_t> split_counts(std::size_t n) {
    const std::size_t test = static_cast<std::size_t>(std::floor(0.3 * static_cast<double>(n)));
    return {n - test, test};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_rows(std::size_t n, Rng& rng) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {  // Fisher-Yates
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    const auto [train_count, test_count] = split_counts(n);
    std::vector<std::size_t> test(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(test_count));
    std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(test_count), perm.end());
    (void)train_count;
    return {std::move(train), std::move(test)};
}

int default_feature_k(int problem) {
    if (problem == 1) return 3;
    if (problem == 2) return 5;
    throw std::invalid_argument("pipeline problem must be 1 or 2");
}

namespace {

LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> rows,
                      std::span<const int> cols) {
    LabeledDataset out;
    out.cols = cols.size();
    out.features.reserve(rows.size() * cols.size());
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) {
        for (int c : cols) out.features.push_back(data.at(r, static_cast<std::size_t>(c)));
        out.labels.push_back(data.labels[r]);
    }
    return out;
}

}  // namespace

double run_team_trial(const TrialConfig& cfg) {
    if (cfg.problem != 1 && cfg.problem != 2) {
        throw std::invalid_argument("pipeline problem must be 1 or 2");
    }
    if (cfg.n < 10) throw std::invalid_argument("trial needs n >= 10");
    const int k = cfg.k > 0 ? cfg.k : default_feature_k(cfg.problem);

    for (int attempt = 0; attempt < kBalanceAttempts; ++attempt) {
        const std::uint64_t attempt_seed =
            derive_seed(cfg.seed, {kTrialTag, static_cast<std::uint64_t>(attempt)});
        const LabeledDataset data = cfg.problem == 1 ? gen_problem1_data(cfg.n, attempt_seed)
                                                     : gen_problem2_data(cfg.n, attempt_seed);

        Rng split_rng(derive_seed(cfg.seed, {kSplitTag, static_cast<std::uint64_t>(attempt)}));
        const auto [train_rows, test_rows] = split_rows(cfg.n, split_rng);

        const std::vector<int> features =
            cfg.leak ? leaky_feature_select(data, k) : select_features_on_rows(data, train_rows, k);

        LinearModel model;
        try {
            model = train_linear_classifier(subset(data, train_rows, features));
        } catch (const DegenerateDataError&) {
            continue;  // the split isolated one class; resample
        }

        const LabeledDataset test = subset(data, test_rows, features);
        std::size_t correct = 0;
        for (std::size_t r = 0; r < test.rows(); ++r) {
            const std::span<const double> row{test.features.data() + r * test.cols, test.cols};
            const int pred = model.score(row) > 0.0 ? 1 : 0;
            correct += pred == test.labels[r];
        }
        return static_cast<double>(correct) / static_cast<double>(test.rows());
    }
    throw DegenerateDataError("could not form a two-class training split in 100 attempts");
}

std::vector<std::pair<std::int64_t, double>> estimate_true_curve(
    int problem, std::span<const std::int64_t> n_grid, int repeats, std::uint64_t seed, int k,
    int jobs) {
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    if (n_grid.empty()) throw std::invalid_argument("n_grid must be nonempty");

    const std::size_t cells = n_grid.size() * static_cast<std::size_t>(repeats);
    std::vector<double> acc(cells);
    parallel_for(cells, jobs, [&](std::size_t idx) {
        const std::size_t i = idx / static_cast<std::size_t>(repeats);
        const std::size_t r = idx % static_cast<std::size_t>(repeats);
        TrialConfig trial;
        trial.problem = problem;
        trial.n = static_cast<std::size_t>(n_grid[i]);
        trial.leak = false;
        trial.k = k;
        trial.seed = derive_seed(seed, {i, r});
        acc[idx] = run_team_trial(trial);
    });

    std::vector<std::pair<std::int64_t, double>> curve;
    curve.reserve(n_grid.size());
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        double sum = 0.0;
        for (int r = 0; r < repeats; ++r) {
            sum += acc[i * static_cast<std::size_t>(repeats) + static_cast<std::size_t>(r)];
        }
        curve.emplace_back(n_grid[i], sum / repeats);
    }
    return curve;
}

std::vector<AccuracyRecord> run_experiment2(int problem, std::span<const std::int64_t> n_grid,
                                            int teams, const ThresholdProfile& thresholds,
                                            int k, std::uint64_t seed, int jobs) {
    if (n_grid.empty()) throw std::invalid_argument("n_grid must be nonempty");
    if (teams < 1) throw std::invalid_argument("teams must be >= 1");

    const std::size_t cells = n_grid.size() * static_cast<std::size_t>(teams);
    std::vector<double> acc(cells);
    parallel_for(cells, jobs, [&](std::size_t idx) {
        const std::size_t i = idx / static_cast<std::size_t>(teams);
        const std::size_t team = idx % static_cast<std::size_t>(teams);
        TrialConfig trial;
        trial.problem = problem;
        trial.n = static_cast<std::size_t>(n_grid[i]);
        trial.leak = true;
        trial.k = k;
        trial.seed = derive_seed(seed, {kExp2Tag, i, team});
        acc[idx] = run_team_trial(trial);
    });

    std::vector<AccuracyRecord> records;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        const std::int64_t n = n_grid[i];
        const double gamma = thresholds.gamma(static_cast<double>(n));
        for (int team = 0; team < teams; ++team) {
            const double a = acc[i * static_cast<std::size_t>(teams) + static_cast<std::size_t>(team)];
            if (a < gamma) continue;
            AccuracyRecord rec;
            rec.n = n;
            rec.accuracy = a;
            rec.study_id = "n" + std::to_string(n) + "_t" + std::to_string(team);
            records.push_back(std::move(rec));
        }
    }
    return records;
}

}  // namespace curvecorrect
