#include "curvecorrect/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace curvecorrect {

ThresholdProfile ThresholdProfile::from_knots(std::vector<std::pair<double, double>> knots) {
    if (knots.empty()) throw std::invalid_argument("threshold profile needs at least one knot");
    std::sort(knots.begin(), knots.end());
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        if (knots[i].first == knots[i + 1].first) {
            throw std::invalid_argument("duplicate n in threshold profile");
        }
        if (knots[i + 1].second > knots[i].second) {
            throw std::invalid_argument("threshold profile must be nonincreasing in n");
        }
    }
    ThresholdProfile p;
    p.kind_ = Kind::Step;
    p.knots_ = std::move(knots);
    return p;
}

ThresholdProfile ThresholdProfile::decreasing_power(double g0, double g1) {
    if (!(g1 >= 0.0)) throw std::invalid_argument("g1 must be nonnegative");
    ThresholdProfile p;
    p.kind_ = Kind::Parametric;
    p.g0_ = g0;
    p.g1_ = g1;
    return p;
}

ThresholdProfile ThresholdProfile::unbounded() { return ThresholdProfile{}; }

double ThresholdProfile::gamma(double n) const {
    switch (kind_) {
        case Kind::Parametric:
            return g0_ + g1_ / std::sqrt(n);
        case Kind::Unbounded:
            return -std::numeric_limits<double>::infinity();
        case Kind::Step:
            break;
    }
    // Step interpolation: last knot with knot n <= query n.
    auto it = std::upper_bound(knots_.begin(), knots_.end(), n,
                               [](double v, const auto& k) { return v < k.first; });
    if (it == knots_.begin()) return knots_.front().second;
    return std::prev(it)->second;
}

}  // namespace curvecorrect
