#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "curvecorrect/simulate.hpp"
#include "curvecorrect/stats.hpp"
#include "support/approx.hpp"
#include "support/oracles.hpp"

using namespace curvecorrect;

namespace {

std::vector<std::int64_t> log_grid(std::int64_t lo, std::int64_t hi, int points) {
    std::vector<std::int64_t> grid;
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        const double v = std::exp(std::log(static_cast<double>(lo)) +
                                  t * (std::log(static_cast<double>(hi)) -
                                       std::log(static_cast<double>(lo))));
        grid.push_back(static_cast<std::int64_t>(std::llround(v)));
    }
    return grid;
}

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("the seven presets carry the published parameter sets") {
    REQUIRE(problem_presets().size() == 7);
    const CurveParams& p1 = problem_preset(1).params;
    CHECK(p1.limit == 0.78);
    CHECK(p1.coeff == -1.24);
    CHECK(p1.exponent == -0.76);
    CHECK(p1.overfit == 0.45);
    CHECK(p1.noise == 0.50);
    const CurveParams& p2 = problem_preset(2).params;
    CHECK(p2.limit == 0.75);
    CHECK(p2.coeff == -0.75);
    CHECK(p2.exponent == -0.57);
    CHECK(p2.overfit == 0.85);
    CHECK(p2.noise == 0.40);
    const CurveParams& p6 = problem_preset(6).params;
    CHECK(p6.coeff == -1.90);
    CHECK(p6.exponent == -0.95);
    for (const auto& preset : problem_presets()) {
        CHECK(ParamBounds::standard_box().contains(preset.params));
    }
    CHECK_THROWS_AS(problem_preset(0), std::invalid_argument);
    CHECK_THROWS_AS(problem_preset(8), std::invalid_argument);
}

TEST_CASE("sample_accuracy reduces to the curve in the noise-free limit") {
    CurveParams p = problem_preset(1).params;
    p.overfit = 0.0;
    p.noise = 1e-12;
    Rng rng(3);
    for (int i = 0; i < 32; ++i) {
        CHECK(within_abs(sample_accuracy(p, 80.0, rng), true_curve(p, 80.0), 1e-10));
    }
}

TEST_CASE("sample_accuracy matches the model moments at scale") {
    const CurveParams p = problem_preset(1).params;
    Rng rng(17);
    const int draws = 1'000'000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double a = sample_accuracy(p, 20.0, rng);
        s += a;
        s2 += a * a;
    }
    const double mean = s / draws;
    const double sd = std::sqrt(s2 / draws - mean * mean);
    CHECK(within_abs(mean, 0.7534, 3.0 * (0.5 / std::sqrt(20.0)) / 1000.0));
    CHECK(within_abs(sd, 0.5 / std::sqrt(20.0), 0.01 * 0.1118));
}

TEST_CASE("apply_selection filters by the cut") {
    const auto r = apply_selection({0.6, 0.8}, 0.7);
    CHECK(r.published == std::vector<double>{0.8});
    CHECK(r.suppressed == 1);

    const auto all = apply_selection({0.6, 0.8, 0.1},
                                     -std::numeric_limits<double>::infinity());
    CHECK(all.published == std::vector<double>{0.6, 0.8, 0.1});
    CHECK(all.suppressed == 0);

    const auto none = apply_selection({0.6, 0.8}, 0.9);
    CHECK(none.published.empty());
    CHECK(none.suppressed == 2);
}

TEST_CASE("run_experiment1 honors the selection mechanism") {
    const CurveParams p = problem_preset(1).params;
    Experiment1Config cfg;
    cfg.n_grid = log_grid(20, 1000, 12);
    cfg.teams = 100;
    cfg.thresholds = default_sim_thresholds(p);
    cfg.seed = 99;

    const auto records = run_experiment1(p, cfg);
    REQUIRE(!records.empty());
    for (const auto& rec : records) {
        CHECK(rec.published);
        CHECK(rec.accuracy >= cfg.thresholds.gamma(static_cast<double>(rec.n)) - 1e-12);
        CHECK(rec.accuracy <= 1.0);
    }

    SUBCASE("no threshold keeps every draw") {
        Experiment1Config open = cfg;
        open.thresholds = ThresholdProfile::unbounded();
        const auto all = run_experiment1(p, open);
        CHECK(all.size() == cfg.n_grid.size() * 100);
    }
    SUBCASE("published mean at n=20 exceeds the biased mean") {
        double sum = 0.0;
        int count = 0;
        for (const auto& rec : records) {
            if (rec.n == 20) {
                sum += rec.accuracy;
                ++count;
            }
        }
        REQUIRE(count > 10);
        CHECK(sum / count > biased_mean(p, 20.0));
    }
    SUBCASE("equal seeds give bit-identical record lists") {
        const auto again = run_experiment1(p, cfg);
        CHECK(records == again);
    }
    SUBCASE("parallel cells match the serial reference") {
        Experiment1Config par = cfg;
        par.jobs = 0;
        CHECK(run_experiment1(p, par) == records);
    }
    SUBCASE("input validation") {
        Experiment1Config bad = cfg;
        bad.n_grid.clear();
        CHECK_THROWS_AS(run_experiment1(p, bad), std::invalid_argument);
        bad = cfg;
        bad.n_grid = {1};
        CHECK_THROWS_AS(run_experiment1(p, bad), std::invalid_argument);
        bad = cfg;
        bad.teams = 0;
        CHECK_THROWS_AS(run_experiment1(p, bad), std::invalid_argument);
    }
}

TEST_CASE("draws above one are clipped and flagged") {
    // High limit plus heavy noise at tiny n makes >1 draws common.
    CurveParams p = problem_preset(3).params;  // limit 0.90
    Experiment1Config cfg;
    cfg.n_grid = {20};
    cfg.teams = 2000;
    cfg.thresholds = ThresholdProfile::unbounded();
    cfg.seed = 5;
    const auto records = run_experiment1(p, cfg);
    int clipped = 0;
    for (const auto& rec : records) {
        if (rec.clipped) {
            ++clipped;
            CHECK(rec.accuracy == 1.0);
        } else {
            CHECK(rec.accuracy < 1.0);
        }
    }
    CHECK(clipped > 0);
}

TEST_CASE("published counts are binomial" * doctest::test_suite("slow")) {
    // Chi-squared goodness of fit of the published count at n=20 against
    // Binomial(K, 1 - cdf(z)) over 200 independent runs.
    const CurveParams p = problem_preset(1).params;
    const int teams = 100;
    const int reps = 200;
    const ThresholdProfile thresholds = default_sim_thresholds(p);
    const double gamma = thresholds.gamma(20.0);
    const double z = (gamma - biased_mean(p, 20.0)) / sigma_n(p.noise, 20.0);
    const double prob = 1.0 - normal_cdf(z);

    std::vector<int> counts;
    for (int r = 0; r < reps; ++r) {
        Experiment1Config cfg;
        cfg.n_grid = {20};
        cfg.teams = teams;
        cfg.thresholds = thresholds;
        cfg.seed = 1000 + static_cast<std::uint64_t>(r);
        counts.push_back(static_cast<int>(run_experiment1(p, cfg).size()));
    }

    // Bin by count value; merge bins until every expected count is >= 5.
    auto log_binom = [&](int k) {
        return std::lgamma(teams + 1.0) - std::lgamma(k + 1.0) - std::lgamma(teams - k + 1.0) +
               k * std::log(prob) + (teams - k) * std::log1p(-prob);
    };
    std::vector<double> expected(static_cast<std::size_t>(teams) + 1);
    for (int k = 0; k <= teams; ++k) expected[static_cast<std::size_t>(k)] = reps * std::exp(log_binom(k));
    std::vector<int> observed(static_cast<std::size_t>(teams) + 1, 0);
    for (int c : counts) ++observed[static_cast<std::size_t>(c)];

    double chi2 = 0.0;
    int bins = 0;
    double e_acc = 0.0;
    double o_acc = 0.0;
    for (int k = 0; k <= teams; ++k) {
        e_acc += expected[static_cast<std::size_t>(k)];
        o_acc += observed[static_cast<std::size_t>(k)];
        if (e_acc >= 5.0 || k == teams) {
            chi2 += (o_acc - e_acc) * (o_acc - e_acc) / std::max(e_acc, 1e-12);
            ++bins;
            e_acc = 0.0;
            o_acc = 0.0;
        }
    }
    REQUIRE(bins >= 3);
    CHECK(chi2 < oracles::chi2_critical_01(bins - 1));
}

TEST_CASE("published window means match the observed-model mean" *
          doctest::test_suite("slow")) {
    const CurveParams p = problem_preset(1).params;
    Experiment1Config cfg;
    cfg.n_grid = log_grid(20, 1000, 12);
    cfg.teams = 100;
    cfg.thresholds = default_sim_thresholds(p);
    cfg.seed = 31;
    const auto records = run_experiment1(p, cfg);

    std::map<std::int64_t, std::pair<double, int>> by_n;
    for (const auto& rec : records) {
        by_n[rec.n].first += rec.accuracy;
        by_n[rec.n].second += 1;
    }
    for (const auto& [n, agg] : by_n) {
        const double nn = static_cast<double>(n);
        const double mean = agg.first / agg.second;
        const double gamma = cfg.thresholds.gamma(nn);
        const double model_mean = observed_mean(p, gamma, nn);
        const double se = std::sqrt(observed_var(p, gamma, nn) / agg.second);
        CHECK(std::abs(mean - model_mean) <= 4.0 * se + 1e-3);  // 1e-3 covers >1 clipping
    }
}

TEST_CASE("default simulation thresholds decrease in n") {
    const auto prof = default_sim_thresholds(problem_preset(1).params);
    CHECK(prof.gamma(20.0) == doctest::Approx(0.78 - 0.15 + 0.5 / std::sqrt(20.0)));
    CHECK(prof.gamma(20.0) > prof.gamma(100.0));
    CHECK(prof.gamma(100.0) > prof.gamma(1000.0));
}

}  // TEST_SUITE
