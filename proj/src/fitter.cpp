#include "curvecorrect/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "curvecorrect/errors.hpp"
#include "curvecorrect/parallel.hpp"
#include "curvecorrect/rng.hpp"

namespace curvecorrect {

namespace {

constexpr std::uint64_t kBootstrapDrawTag = 0x626f'6f74;
constexpr std::uint64_t kBootstrapFitTag = 0x626f'6669;
constexpr std::uint64_t kRestartTag = 0x7273'7274;

struct MomentCtx {
    double n_repr;
    double log_n;
    double inv_sqrt_n;
    double gamma;
    double mean;
    double variance;  // NaN when absent
    bool has_variance;
};

std::vector<MomentCtx> build_ctx(std::span<const GroupedMoments> moments,
                                 const ThresholdProfile& thresholds, GammaSource source) {
    std::vector<MomentCtx> ctx;
    ctx.reserve(moments.size());
    for (const GroupedMoments& m : moments) {
        MomentCtx c;
        c.n_repr = m.n_repr;
        c.log_n = std::log(m.n_repr);
        c.inv_sqrt_n = 1.0 / std::sqrt(m.n_repr);
        c.gamma = source == GammaSource::kProfile ? thresholds.gamma(m.n_repr) : m.window_min;
        c.mean = m.mean;
        c.has_variance = m.variance.has_value();
        c.variance = m.variance.value_or(0.0);
        ctx.push_back(c);
    }
    return ctx;
}

void accumulate_objectives(const CurveParams& p, std::span<const MomentCtx> ctx, double& f1,
                           double& f2) {
    f1 = 0.0;
    f2 = 0.0;
    for (const MomentCtx& c : ctx) {
        const double mu =
            p.limit + p.coeff * std::exp(p.exponent * c.log_n) + p.overfit * c.inv_sqrt_n;
        const double sigma = p.noise * c.inv_sqrt_n;
        const TruncatedMoments tm = truncated_moments(mu, sigma, c.gamma);
        const double dm = c.mean - tm.mean;
        f1 += dm * dm;
        if (c.has_variance) {
            const double dv = c.variance - tm.variance;
            f2 += dv * dv;
        }
    }
}

CurveParams canonical_params(const std::vector<double>& x) {
    return CurveParams{x[0], x[1], x[2], x[3], x[4]};
}

std::vector<AccuracyRecord> canonical_sort(std::vector<AccuracyRecord> records) {
    std::sort(records.begin(), records.end(),
              [](const AccuracyRecord& a, const AccuracyRecord& b) {
                  if (a.n != b.n) return a.n < b.n;
                  if (a.accuracy != b.accuracy) return a.accuracy < b.accuracy;
                  return a.study_id < b.study_id;
              });
    return records;
}

std::size_t distinct_sample_sizes(const std::vector<AccuracyRecord>& records) {
    std::set<std::int64_t> ns;
    for (const auto& r : records) ns.insert(r.n);
    return ns.size();
}

struct PointFit {
    CurveParams params;
    std::vector<ParetoMember> pareto;
    ThresholdProfile thresholds = ThresholdProfile::unbounded();
    FitDiagnostics diagnostics;
    std::vector<AccuracyRecord> kept;  // canonical order, outliers removed
};

std::vector<ParetoMember> run_search(std::span<const MomentCtx> ctx, const FitConfig& cfg,
                                     std::uint64_t seed) {
    const ObjectiveFn objectives = [&ctx](std::span<const double> x, std::span<double> f) {
        double f1, f2;
        accumulate_objectives(CurveParams{x[0], x[1], x[2], x[3], x[4]}, ctx, f1, f2);
        f[0] = f1;
        f[1] = f2;
    };

    Nsga2Config ncfg;
    ncfg.population = cfg.population;
    ncfg.offspring = cfg.offspring;
    ncfg.generations = cfg.generations;
    ncfg.eta_crossover = cfg.eta_crossover;
    ncfg.eta_mutation = cfg.eta_mutation;
    ncfg.jobs = 1;  // objective evaluations are far too small to fan out

    const auto front = nsga2_search(objectives, 2, cfg.bounds.lo, cfg.bounds.hi, ncfg, seed);
    std::vector<ParetoMember> pareto;
    pareto.reserve(front.size());
    for (const auto& m : front) {
        pareto.push_back(ParetoMember{canonical_params(m.x), m.f[0], m.f[1]});
    }
    return pareto;
}

bool front_collapsed(std::span<const ParetoMember> pareto) {
    for (std::size_t i = 1; i < pareto.size(); ++i) {
        if (!(pareto[i].params == pareto[0].params)) return false;
    }
    return pareto.size() > 1;
}

constexpr double kAsfRho = 1e-4;
constexpr int kPolishEvalBudget = 4000;

// Deterministic compass search on the ASF scalarization inside the box.
// The genetic search locates the basin; this removes its residual noise,
// which otherwise dwarfs the statistical error of the selected solution.
CurveParams polish_asf(const CurveParams& start, std::span<const MomentCtx> ctx,
                       const ParamBounds& bounds) {
    auto asf = [&ctx](const std::array<double, 5>& x) {
        double f1, f2;
        accumulate_objectives(CurveParams{x[0], x[1], x[2], x[3], x[4]}, ctx, f1, f2);
        return f1 + kAsfRho * f2;
    };
    std::array<double, 5> x = to_array(start);
    double best = asf(x);
    double step = 0.05;
    int evals = 0;
    while (step > 1e-7 && evals < kPolishEvalBudget) {
        bool improved = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (double dir : {1.0, -1.0}) {
                auto cand = x;
                cand[i] = std::clamp(cand[i] + dir * step * (bounds.hi[i] - bounds.lo[i]),
                                     bounds.lo[i], bounds.hi[i]);
                if (cand[i] == x[i]) continue;
                const double v = asf(cand);
                ++evals;
                if (v < best) {
                    best = v;
                    x = cand;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return params_from_array(x);
}

bool member_dominates(const ParetoMember& a, const ParetoMember& b) {
    return (a.f1 <= b.f1 && a.f2 <= b.f2) && (a.f1 < b.f1 || a.f2 < b.f2);
}

// Adds a candidate to the front and removes anything it dominates, keeping
// the set mutually nondominated.
void insert_front_member(std::vector<ParetoMember>& pareto, ParetoMember candidate) {
    std::erase_if(pareto, [&](const ParetoMember& m) { return member_dominates(candidate, m); });
    for (const ParetoMember& m : pareto) {
        if (member_dominates(m, candidate) ||
            (m.f1 == candidate.f1 && m.f2 == candidate.f2)) {
            return;
        }
    }
    pareto.push_back(std::move(candidate));
}

PointFit fit_point(const std::vector<AccuracyRecord>& records, const FitConfig& cfg) {
    if (records.empty()) throw InsufficientDataError("fit requires a nonempty record list");

    PointFit out;
    std::vector<AccuracyRecord> sorted = canonical_sort(records);

    std::vector<AccuracyRecord> kept = sorted;
    std::size_t removed = 0;
    bool filter_disabled = false;
    auto apply_filter = [&](const std::vector<AccuracyRecord>& input) {
        FilterResult fr = quantile_filter(input, cfg.quantile_tau);
        removed = fr.outliers.size();
        filter_disabled = fr.disabled;
        return std::move(fr.kept);
    };

    if (cfg.filter_outliers && cfg.filter_before_thresholds) {
        kept = apply_filter(sorted);
        out.thresholds = estimate_thresholds(kept, cfg.window);
    } else if (cfg.filter_outliers) {
        out.thresholds = estimate_thresholds(sorted, cfg.window);
        kept = apply_filter(sorted);
    } else {
        out.thresholds = estimate_thresholds(sorted, cfg.window);
    }
    if (filter_disabled) {
        out.diagnostics.warnings.push_back(
            "outlier filter disabled: fewer than 10 records");
    }

    if (distinct_sample_sizes(kept) < 3) {
        throw InsufficientDataError(
            "fit requires at least 3 distinct sample sizes after filtering");
    }

    const std::vector<GroupedMoments> moments = group_moments(kept, cfg.window);
    bool any_variance = false;
    for (const auto& m : moments) any_variance |= m.variance.has_value();
    if (!any_variance) {
        out.diagnostics.warnings.push_back(
            "degenerate variance: no window holds 2+ records, f2 is identically 0");
    }

    const std::vector<MomentCtx> ctx = build_ctx(moments, out.thresholds, cfg.gamma_source);

    out.pareto = run_search(ctx, cfg, cfg.seed);
    if (front_collapsed(out.pareto)) {
        out.diagnostics.warnings.push_back("search collapsed to one point; restarted once");
        out.pareto = run_search(ctx, cfg, derive_seed(cfg.seed, {kRestartTag}));
    }

    const CurveParams refined = polish_asf(select_asf(out.pareto), ctx, cfg.bounds);
    ParetoMember refined_member{refined, 0.0, 0.0};
    accumulate_objectives(refined, ctx, refined_member.f1, refined_member.f2);
    insert_front_member(out.pareto, refined_member);
    out.params = select_asf(out.pareto);

    accumulate_objectives(out.params, ctx, out.diagnostics.f1, out.diagnostics.f2);
    out.diagnostics.generations = cfg.generations;
    out.diagnostics.seed = cfg.seed;
    out.diagnostics.records_used = kept.size();
    out.diagnostics.outliers_removed = removed;
    out.kept = std::move(kept);
    return out;
}

double percentile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(i);
    return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

std::uint64_t content_hash(const std::vector<AccuracyRecord>& records) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over (n, accuracy bits)
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& r : records) {
        mix(static_cast<std::uint64_t>(r.n));
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(r.accuracy));
        __builtin_memcpy(&bits, &r.accuracy, sizeof(bits));
        mix(bits);
    }
    return h;
}

struct BootstrapOutcome {
    ParamCi ci;
    std::vector<CurveParams> replicates;
    std::size_t failed = 0;
};

BootstrapOutcome bootstrap_replicates(const std::vector<AccuracyRecord>& records,
                                      const FitConfig& cfg, const CurveParams& point) {
    const std::size_t reps = static_cast<std::size_t>(cfg.bootstrap_reps);
    std::vector<CurveParams> params(reps);
    std::vector<char> ok(reps, 0);

    FitConfig sub = cfg;
    sub.bootstrap_reps = 0;
    sub.jobs = 1;  // parallelism lives at the replicate level

    parallel_for(reps, cfg.jobs, [&](std::size_t r) {
        Rng draw(derive_seed(cfg.seed, {kBootstrapDrawTag, r}));
        std::vector<AccuracyRecord> sample;
        sample.reserve(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            sample.push_back(records[static_cast<std::size_t>(draw.below(records.size()))]);
        }
        // The refit seed depends on the resample content, so identical
        // resamples always refit identically.
        FitConfig rep_cfg = sub;
        rep_cfg.seed = derive_seed(cfg.seed, {kBootstrapFitTag, content_hash(sample)});
        try {
            params[r] = fit_point(sample, rep_cfg).params;
            ok[r] = 1;
        } catch (const std::exception&) {
            ok[r] = 0;  // degenerate resample (e.g. too few distinct n)
        }
    });

    BootstrapOutcome out;
    for (std::size_t r = 0; r < reps; ++r) {
        if (ok[r]) {
            out.replicates.push_back(params[r]);
        } else {
            ++out.failed;
        }
    }
    if (out.replicates.empty()) {
        throw InsufficientDataError("every bootstrap replicate failed to fit");
    }

    auto interval = [&](auto field) {
        std::vector<double> v;
        v.reserve(out.replicates.size());
        for (const auto& p : out.replicates) v.push_back(p.*field);
        ParamInterval iv{percentile(v, 0.025), percentile(v, 0.975)};
        iv.lower = std::min(iv.lower, point.*field);  // the interval always covers the point
        iv.upper = std::max(iv.upper, point.*field);
        return iv;
    };
    out.ci.limit = interval(&CurveParams::limit);
    out.ci.coeff = interval(&CurveParams::coeff);
    out.ci.exponent = interval(&CurveParams::exponent);
    out.ci.overfit = interval(&CurveParams::overfit);
    out.ci.noise = interval(&CurveParams::noise);
    return out;
}

}  // namespace

double objective_f1(const CurveParams& p, std::span<const GroupedMoments> moments,
                    const ThresholdProfile& thresholds, GammaSource gamma_source) {
    if (moments.empty()) throw std::invalid_argument("moments must be nonempty");
    double f1, f2;
    accumulate_objectives(p, build_ctx(moments, thresholds, gamma_source), f1, f2);
    return f1;
}

double objective_f2(const CurveParams& p, std::span<const GroupedMoments> moments,
                    const ThresholdProfile& thresholds, GammaSource gamma_source) {
    if (moments.empty()) throw std::invalid_argument("moments must be nonempty");
    double f1, f2;
    accumulate_objectives(p, build_ctx(moments, thresholds, gamma_source), f1, f2);
    return f2;
}

CurveParams select_asf(std::span<const ParetoMember> pareto, double rho) {
    if (pareto.empty()) throw std::invalid_argument("pareto set must be nonempty");
    std::size_t best = 0;
    double best_asf = pareto[0].f1 + rho * pareto[0].f2;
    for (std::size_t i = 1; i < pareto.size(); ++i) {
        const double asf = pareto[i].f1 + rho * pareto[i].f2;
        if (asf < best_asf || (asf == best_asf && pareto[i].f2 < pareto[best].f2)) {
            best = i;
            best_asf = asf;
        }
    }
    return pareto[best].params;
}

double upper_band(const CurveParams& p, double n) {
    return true_curve(p, n) + 1.96 * sigma_n(p.noise, n);
}

std::vector<FlaggedRecord> flag_overoptimistic(std::span<const AccuracyRecord> records,
                                               const CurveParams& p) {
    std::vector<FlaggedRecord> flags;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double band = upper_band(p, static_cast<double>(records[i].n));
        if (records[i].accuracy > band) {
            flags.push_back(FlaggedRecord{i, records[i].study_id, records[i].n,
                                          records[i].accuracy, band,
                                          records[i].accuracy - band});
        }
    }
    std::sort(flags.begin(), flags.end(), [](const FlaggedRecord& a, const FlaggedRecord& b) {
        if (a.exceedance != b.exceedance) return a.exceedance > b.exceedance;
        return a.index < b.index;
    });
    return flags;
}

FitResult fit(const std::vector<AccuracyRecord>& records, const FitConfig& cfg) {
    PointFit point = fit_point(records, cfg);

    FitResult result;
    result.params = point.params;
    result.pareto = std::move(point.pareto);
    result.thresholds = std::move(point.thresholds);
    result.diagnostics = std::move(point.diagnostics);

    std::optional<BootstrapOutcome> boot;
    if (cfg.bootstrap_reps > 0) {
        boot = bootstrap_replicates(point.kept, cfg, result.params);
        result.ci = boot->ci;
        if (boot->failed > 0) {
            result.diagnostics.warnings.push_back(
                std::to_string(boot->failed) + " bootstrap replicates failed and were dropped");
        }
    }

    if (cfg.flag_band == FlagBand::kBootstrap && boot) {
        // Pointwise 97.5th percentile of the replicate bands at each record's n.
        std::vector<FlaggedRecord> flags;
        for (std::size_t i = 0; i < records.size(); ++i) {
            std::vector<double> bands;
            bands.reserve(boot->replicates.size());
            for (const auto& rp : boot->replicates) {
                bands.push_back(upper_band(rp, static_cast<double>(records[i].n)));
            }
            const double band = percentile(std::move(bands), 0.975);
            if (records[i].accuracy > band) {
                flags.push_back(FlaggedRecord{i, records[i].study_id, records[i].n,
                                              records[i].accuracy, band,
                                              records[i].accuracy - band});
            }
        }
        std::sort(flags.begin(), flags.end(),
                  [](const FlaggedRecord& a, const FlaggedRecord& b) {
                      if (a.exceedance != b.exceedance) return a.exceedance > b.exceedance;
                      return a.index < b.index;
                  });
        result.flags = std::move(flags);
    } else {
        result.flags = flag_overoptimistic(records, result.params);
    }
    return result;
}

ParamCi bootstrap_ci(const std::vector<AccuracyRecord>& records, const FitConfig& cfg) {
    if (cfg.bootstrap_reps < 1) throw std::invalid_argument("bootstrap_reps must be >= 1");
    const PointFit point = fit_point(records, cfg);
    return bootstrap_replicates(point.kept, cfg, point.params).ci;
}

PowerFit naive_power_fit(std::span<const AccuracyRecord> records) {
    if (records.size() < 3) throw InsufficientDataError("naive fit needs at least 3 records");

    // For a fixed exponent the model is linear in (limit, coeff); scan the
    // exponent and polish the best bracket by golden-section search.
    auto sse_at = [&](double b, PowerFit* out) {
        double s1 = 0.0, su = 0.0, suu = 0.0, sy = 0.0, suy = 0.0;
        for (const auto& r : records) {
            const double u = std::pow(static_cast<double>(r.n), b);
            s1 += 1.0;
            su += u;
            suu += u * u;
            sy += r.accuracy;
            suy += u * r.accuracy;
        }
        const double det = s1 * suu - su * su;
        if (std::abs(det) < 1e-14) return std::numeric_limits<double>::infinity();
        const double limit = (sy * suu - su * suy) / det;
        const double coeff = (s1 * suy - su * sy) / det;
        double sse = 0.0;
        for (const auto& r : records) {
            const double e =
                r.accuracy - (limit + coeff * std::pow(static_cast<double>(r.n), b));
            sse += e * e;
        }
        if (out) {
            out->limit = limit;
            out->coeff = coeff;
            out->exponent = b;
        }
        return sse;
    };

    constexpr int kGridPoints = 400;
    constexpr double kLo = -2.0, kHi = -1e-3;
    double best_b = kLo;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kGridPoints; ++i) {
        const double b = kLo + (kHi - kLo) * i / kGridPoints;
        const double sse = sse_at(b, nullptr);
        if (sse < best_sse) {
            best_sse = sse;
            best_b = b;
        }
    }

    const double step = (kHi - kLo) / kGridPoints;
    double a = std::max(kLo, best_b - step);
    double c = std::min(kHi, best_b + step);
    constexpr double kGolden = 0.6180339887498949;
    double x1 = c - kGolden * (c - a);
    double x2 = a + kGolden * (c - a);
    double f1 = sse_at(x1, nullptr), f2 = sse_at(x2, nullptr);
    for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - kGolden * (c - a);
            f1 = sse_at(x1, nullptr);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (c - a);
            f2 = sse_at(x2, nullptr);
        }
    }

    PowerFit fit;
    sse_at(0.5 * (a + c), &fit);
    return fit;
}

double power_eval(const PowerFit& fit, double n) {
    return fit.limit + fit.coeff * std::pow(n, fit.exponent);
}

}  // namespace curvecorrect
