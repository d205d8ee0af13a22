#pragma once

#include <optional>
#include <vector>

#include "curvecorrect/records.hpp"
#include "curvecorrect/thresholds.hpp"

namespace curvecorrect {

/// Sliding-window parameters over the sorted distinct sample sizes.
struct WindowingConfig {
    int window_len = 2;
    int stride = 1;
};

/// Per-window sample moments feeding the moment-matching objectives.
struct GroupedMoments {
    double n_repr = 0.0;  ///< geometric mean of the window's record n values
    double mean = 0.0;
    std::optional<double> variance;  ///< unbiased; absent for singleton windows
    std::size_t count = 0;
    double window_min = 0.0;  ///< smallest accuracy in the window (raw threshold)
};

/// Publication-threshold estimate: the minimum reported accuracy within each
/// sliding window of distinct sample sizes (the minimum order statistic),
/// smoothed into a nonincreasing step profile by a running minimum from small
/// to large n. Throws std::invalid_argument on empty input.
ThresholdProfile estimate_thresholds(const std::vector<AccuracyRecord>& records,
                                     const WindowingConfig& window = {});

struct FilterResult {
    std::vector<AccuracyRecord> kept;
    std::vector<AccuracyRecord> outliers;
    bool disabled = false;  ///< fewer than 10 records; everything kept
    double intercept = 0.0; ///< fitted quantile line q(n) = intercept + slope*log(n)
    double slope = 0.0;
};

/// Removes records below the fitted tau-level quantile line in log(n).
/// The removed fraction is capped at tau + 0.05 (worst exceedances kept as
/// outliers). With fewer than 10 records the filter is disabled.
FilterResult quantile_filter(const std::vector<AccuracyRecord>& records, double tau = 0.1);

/// Same windowing as estimate_thresholds; one GroupedMoments per window.
std::vector<GroupedMoments> group_moments(const std::vector<AccuracyRecord>& records,
                                          const WindowingConfig& window = {});

}  // namespace curvecorrect
