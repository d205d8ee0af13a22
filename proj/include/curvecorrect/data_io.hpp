#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curvecorrect/fitter.hpp"
#include "curvecorrect/records.hpp"

namespace curvecorrect {

/// Parses the record CSV schema `n,accuracy[,study_id[,year]]`.
/// Numeric fields are validated strictly (n >= 2, accuracy in (0, 1]);
/// failures throw ParseError with a 1-based line and column. The optional
/// year column is validated but not retained.
Dataset parse_csv(std::string_view text, std::string name = "");

/// Inverse of parse_csv on valid datasets (study_id column emitted only when
/// some record carries one). Doubles are written in shortest round-trip form.
std::string serialize_csv(const Dataset& dataset);

/// Names of the bundled meta-analysis tables: ni_ad, ni_sz, ni_asd, ni_adhd.
std::vector<std::string> bundled_names();

/// Returns a bundled table; throws std::invalid_argument for unknown names.
const Dataset& bundled(std::string_view name);

/// Fit artifact as a JSON document (schema_version 1): parameters, pareto
/// front, confidence intervals, thresholds, flags, diagnostics.
std::string export_fit_json(const FitResult& result);

/// Curve table sampled on n_grid with columns
/// n,true_curve,biased_mean,observed_mean,upper_band.
std::string export_curve_csv(const FitResult& result, std::span<const double> n_grid);

struct SvgOptions {
    int width = 860;
    int height = 520;
    std::string title;
};

/// Static log-x plot: record scatter (flagged records get a distinct marker
/// class), fitted curve, naive power-law fit, and the upper band. Bytes are
/// deterministic for identical inputs; an empty dataset yields axes only.
std::string export_svg(const Dataset& dataset, const FitResult& result,
                       const SvgOptions& options = {});

/// Shortest round-trip decimal form of a double (used by every exporter).
std::string format_double(double v);

}  // namespace curvecorrect
