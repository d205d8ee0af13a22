#pragma once

#include <utility>
#include <vector>

namespace curvecorrect {

/// Lower publication threshold gamma(n), nonincreasing in n.
///
/// Two shapes are supported: a step function over (n, gamma) knots (the
/// estimated profile) and the parametric family  g0 + g1 / sqrt(n)  used by
/// the simulators. Evaluation at an arbitrary n picks the largest knot
/// n-value not exceeding n; queries below the first knot use the first knot.
class ThresholdProfile {
public:
    /// Builds a step profile. Knots are sorted by n; gamma values must be
    /// nonincreasing in n (throws std::invalid_argument otherwise).
    static ThresholdProfile from_knots(std::vector<std::pair<double, double>> knots);

    /// gamma(n) = g0 + g1 / sqrt(n); requires g1 >= 0.
    static ThresholdProfile decreasing_power(double g0, double g1);

    /// gamma(n) = -infinity everywhere (selection disabled).
    static ThresholdProfile unbounded();

    double gamma(double n) const;

    /// Knots of a step profile; empty for parametric and unbounded profiles.
    const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }

    bool is_parametric() const noexcept { return kind_ == Kind::Parametric; }
    bool is_unbounded() const noexcept { return kind_ == Kind::Unbounded; }
    double g0() const noexcept { return g0_; }
    double g1() const noexcept { return g1_; }

private:
    enum class Kind { Step, Parametric, Unbounded };

    Kind kind_ = Kind::Unbounded;
    std::vector<std::pair<double, double>> knots_;
    double g0_ = 0.0;
    double g1_ = 0.0;
};

}  // namespace curvecorrect
