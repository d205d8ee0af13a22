#include "curvecorrect/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace curvecorrect {

namespace {

constexpr int kPinballIterations = 10000;

struct SortedView {
    std::vector<AccuracyRecord> records;          // stable-sorted by n
    std::vector<std::int64_t> distinct;           // sorted distinct n values
    std::vector<std::pair<std::size_t, std::size_t>> runs;  // [begin, end) per distinct n
};

SortedView sort_by_n(const std::vector<AccuracyRecord>& records) {
    if (records.empty()) throw std::invalid_argument("records must be nonempty");
    SortedView v;
    v.records = records;
    std::stable_sort(v.records.begin(), v.records.end(),
                     [](const AccuracyRecord& a, const AccuracyRecord& b) { return a.n < b.n; });
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= v.records.size(); ++i) {
        if (i == v.records.size() || v.records[i].n != v.records[begin].n) {
            v.distinct.push_back(v.records[begin].n);
            v.runs.emplace_back(begin, i);
            begin = i;
        }
    }
    return v;
}

// Window start offsets into the distinct-n list. The final window is pulled
// back to cover the tail when the stride overshoots.
std::vector<std::size_t> window_starts(std::size_t distinct_count, const WindowingConfig& cfg) {
    if (cfg.window_len < 1) throw std::invalid_argument("window_len must be >= 1");
    if (cfg.stride < 1) throw std::invalid_argument("stride must be >= 1");
    const std::size_t len = static_cast<std::size_t>(cfg.window_len);
    if (distinct_count <= len) return {0};

    std::vector<std::size_t> starts;
    const std::size_t last = distinct_count - len;
    for (std::size_t s = 0; s <= last; s += static_cast<std::size_t>(cfg.stride)) {
        starts.push_back(s);
    }
    if (starts.back() != last) starts.push_back(last);
    return starts;
}

// Pinball (check) loss for the linear quantile model q(t) = a + b*t.
double pinball_loss(const std::vector<double>& t, const std::vector<double>& y, double tau,
                    double a, double b) {
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - (a + b * t[i]);
        loss += r >= 0.0 ? tau * r : (tau - 1.0) * r;
    }
    return loss;
}

// Lower tau-quantile: smallest value whose cumulative count reaches tau*m.
double lower_quantile(std::vector<double> v, double tau) {
    std::sort(v.begin(), v.end());
    const double target = tau * static_cast<double>(v.size());
    std::size_t idx = static_cast<std::size_t>(std::ceil(target));
    if (idx > 0) --idx;
    if (idx >= v.size()) idx = v.size() - 1;
    return v[idx];
}

// Weighted lower tau-quantile of breakpoints u with positive weights w.
double weighted_lower_quantile(std::vector<std::pair<double, double>> uw, double tau) {
    std::sort(uw.begin(), uw.end());
    double total = 0.0;
    for (const auto& [u, w] : uw) total += w;
    const double target = tau * total;
    double cum = 0.0;
    for (const auto& [u, w] : uw) {
        cum += w;
        if (cum >= target) return u;
    }
    return uw.back().first;
}

// Alternating exact coordinate minimization of the pinball loss. Each step
// solves one coordinate exactly (a plain or weighted quantile), so the loss
// never increases and the fixpoint interpolates data points; an all-equal
// sample therefore ends at exactly zero residuals.
std::pair<double, double> coordinate_polish(const std::vector<double>& t,
                                            const std::vector<double>& y, double tau, double a,
                                            double b) {
    const std::size_t m = y.size();
    for (int pass = 0; pass < 40; ++pass) {
        std::vector<double> resid(m);
        for (std::size_t i = 0; i < m; ++i) resid[i] = y[i] - b * t[i];
        const double a_new = lower_quantile(std::move(resid), tau);

        std::vector<std::pair<double, double>> breakpoints;
        breakpoints.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            if (t[i] > 0.0) breakpoints.emplace_back((y[i] - a_new) / t[i], t[i]);
        }
        const double b_new =
            breakpoints.empty() ? 0.0 : weighted_lower_quantile(std::move(breakpoints), tau);
        if (a_new == a && b_new == b) break;
        a = a_new;
        b = b_new;
    }
    return {a, b};
}

// Quantile line fit: subgradient descent (10^4 iterations, step 1/sqrt(t),
// Polyak-averaged tail), then coordinate polish from both the descent result
// and a slope-zero start; the lower-loss fixpoint wins.
std::pair<double, double> fit_quantile_line(const std::vector<double>& t,
                                            const std::vector<double>& y, double tau) {
    const std::size_t m = y.size();
    double a = lower_quantile(y, tau);
    double b = 0.0;

    double a_avg = 0.0, b_avg = 0.0;
    std::size_t averaged = 0;
    for (int it = 1; it <= kPinballIterations; ++it) {
        double ga = 0.0, gb = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double r = y[i] - (a + b * t[i]);
            const double d = r > 0.0 ? -tau : (1.0 - tau);  // d loss / d q
            ga += d;
            gb += d * t[i];
        }
        const double step = 1.0 / std::sqrt(static_cast<double>(it));
        a -= step * ga / static_cast<double>(m);
        b -= step * gb / static_cast<double>(m);
        if (it > kPinballIterations / 2) {
            a_avg += a;
            b_avg += b;
            ++averaged;
        }
    }
    a = a_avg / static_cast<double>(averaged);
    b = b_avg / static_cast<double>(averaged);

    const auto from_descent = coordinate_polish(t, y, tau, a, b);
    const auto from_flat = coordinate_polish(t, y, tau, lower_quantile(y, tau), 0.0);
    const double loss_descent = pinball_loss(t, y, tau, from_descent.first, from_descent.second);
    const double loss_flat = pinball_loss(t, y, tau, from_flat.first, from_flat.second);
    return loss_flat < loss_descent ? from_flat : from_descent;
}

}  // namespace

ThresholdProfile estimate_thresholds(const std::vector<AccuracyRecord>& records,
                                     const WindowingConfig& window) {
    const SortedView v = sort_by_n(records);
    const auto starts = window_starts(v.distinct.size(), window);
    const std::size_t len = static_cast<std::size_t>(window.window_len);

    // gamma of the first window containing each distinct n.
    std::vector<double> gamma(v.distinct.size(), 0.0);
    std::vector<bool> assigned(v.distinct.size(), false);
    for (std::size_t s : starts) {
        const std::size_t end = std::min(s + len, v.distinct.size());
        double min_acc = v.records[v.runs[s].first].accuracy;
        for (std::size_t d = s; d < end; ++d) {
            for (std::size_t i = v.runs[d].first; i < v.runs[d].second; ++i) {
                min_acc = std::min(min_acc, v.records[i].accuracy);
            }
        }
        for (std::size_t d = s; d < end; ++d) {
            if (!assigned[d]) {
                gamma[d] = min_acc;
                assigned[d] = true;
            }
        }
    }

    // Running minimum toward larger n makes the profile nonincreasing.
    for (std::size_t d = 1; d < gamma.size(); ++d) gamma[d] = std::min(gamma[d], gamma[d - 1]);

    std::vector<std::pair<double, double>> knots;
    knots.reserve(gamma.size());
    for (std::size_t d = 0; d < gamma.size(); ++d) {
        knots.emplace_back(static_cast<double>(v.distinct[d]), gamma[d]);
    }
    return ThresholdProfile::from_knots(std::move(knots));
}

FilterResult quantile_filter(const std::vector<AccuracyRecord>& records, double tau) {
    if (tau < 0.0 || tau >= 1.0) throw std::invalid_argument("tau must lie in [0, 1)");
    FilterResult out;
    if (records.size() < 10) {
        out.kept = records;
        out.disabled = true;
        return out;
    }
    if (tau == 0.0) {
        out.kept = records;
        return out;
    }

    std::vector<double> t(records.size()), y(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        t[i] = std::log(static_cast<double>(records[i].n));
        y[i] = records[i].accuracy;
    }
    const auto [a, b] = fit_quantile_line(t, y, tau);
    out.intercept = a;
    out.slope = b;

    std::vector<std::pair<double, std::size_t>> below;  // (residual, index), residual < 0
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double r = y[i] - (a + b * t[i]);
        if (r < 0.0) below.emplace_back(r, i);
    }

    // Cap the removed fraction at tau + 0.05, keeping the worst exceedances.
    const std::size_t cap = static_cast<std::size_t>(
        std::floor((tau + 0.05) * static_cast<double>(records.size())));
    if (below.size() > cap) {
        std::sort(below.begin(), below.end());
        below.resize(cap);
    }

    std::vector<bool> is_outlier(records.size(), false);
    for (const auto& [r, i] : below) is_outlier[i] = true;
    for (std::size_t i = 0; i < records.size(); ++i) {
        (is_outlier[i] ? out.outliers : out.kept).push_back(records[i]);
    }
    return out;
}

std::vector<GroupedMoments> group_moments(const std::vector<AccuracyRecord>& records,
                                          const WindowingConfig& window) {
    const SortedView v = sort_by_n(records);
    const auto starts = window_starts(v.distinct.size(), window);
    const std::size_t len = static_cast<std::size_t>(window.window_len);

    std::vector<GroupedMoments> moments;
    moments.reserve(starts.size());
    for (std::size_t s : starts) {
        const std::size_t end = std::min(s + len, v.distinct.size());
        GroupedMoments gm;
        double sum = 0.0, log_sum = 0.0;
        double min_acc = v.records[v.runs[s].first].accuracy;
        for (std::size_t d = s; d < end; ++d) {
            for (std::size_t i = v.runs[d].first; i < v.runs[d].second; ++i) {
                const AccuracyRecord& rec = v.records[i];
                sum += rec.accuracy;
                log_sum += std::log(static_cast<double>(rec.n));
                min_acc = std::min(min_acc, rec.accuracy);
                ++gm.count;
            }
        }
        const double mcount = static_cast<double>(gm.count);
        gm.mean = sum / mcount;
        gm.n_repr = std::exp(log_sum / mcount);
        gm.window_min = min_acc;
        if (gm.count >= 2) {
            double ss = 0.0;
            for (std::size_t d = s; d < end; ++d) {
                for (std::size_t i = v.runs[d].first; i < v.runs[d].second; ++i) {
                    const double dev = v.records[i].accuracy - gm.mean;
                    ss += dev * dev;
                }
            }
            gm.variance = ss / (mcount - 1.0);
        }
        moments.push_back(std::move(gm));
    }
    return moments;
}

}  // namespace curvecorrect
