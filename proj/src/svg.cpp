#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "curvecorrect/data_io.hpp"

namespace curvecorrect {

namespace {

constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 16;
constexpr int kMarginTop = 28;
constexpr int kMarginBottom = 48;
constexpr int kCurveSamples = 100;

struct Frame {
    double x_lo, x_hi;  // log10(n)
    double y_lo, y_hi;
    int width, height;

    double px(double n) const {
        const double t = (std::log10(n) - x_lo) / (x_hi - x_lo);
        return kMarginLeft + t * (width - kMarginLeft - kMarginRight);
    }
    double py(double y) const {
        const double t = (y - y_lo) / (y_hi - y_lo);
        return height - kMarginBottom - t * (height - kMarginTop - kMarginBottom);
    }
};

std::string coord(double v) {
    // Two decimals keep the byte stream stable and small.
    const double r = std::round(v * 100.0) / 100.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", r);
    return buf;
}

void append_path(std::string& svg, const Frame& fr, const std::string& cls,
                 double n_lo, double n_hi, const auto& eval) {
    std::string d;
    for (int i = 0; i <= kCurveSamples; ++i) {
        const double t = static_cast<double>(i) / kCurveSamples;
        const double n = std::exp(std::log(n_lo) + t * (std::log(n_hi) - std::log(n_lo)));
        const double y = eval(n);
        d += (i == 0 ? "M" : " L");
        d += coord(fr.px(n)) + "," + coord(fr.py(y));
    }
    svg += "<path class=\"" + cls + "\" d=\"" + d + "\"/>\n";
}

}  // namespace

std::string export_svg(const Dataset& dataset, const FitResult& result,
                       const SvgOptions& options) {
    Frame fr;
    fr.width = options.width;
    fr.height = options.height;

    double n_lo = 10.0, n_hi = 1000.0;
    double y_lo = 0.4, y_hi = 1.0;
    if (!dataset.records.empty()) {
        double n_min = 1e300, n_max = 0.0, a_min = 1e300, a_max = -1e300;
        for (const auto& r : dataset.records) {
            n_min = std::min(n_min, static_cast<double>(r.n));
            n_max = std::max(n_max, static_cast<double>(r.n));
            a_min = std::min(a_min, r.accuracy);
            a_max = std::max(a_max, r.accuracy);
        }
        n_lo = std::max(2.0, n_min * 0.8);
        n_hi = n_max * 1.2;
        y_lo = std::min(0.5, a_min - 0.05);
        y_hi = std::max(1.0, a_max + 0.02);
    }
    fr.x_lo = std::log10(n_lo);
    fr.x_hi = std::log10(n_hi);
    fr.y_lo = y_lo;
    fr.y_hi = y_hi;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(fr.width) +
           "\" height=\"" + std::to_string(fr.height) + "\" viewBox=\"0 0 " +
           std::to_string(fr.width) + " " + std::to_string(fr.height) + "\">\n";
    svg += "<style>\n"
           ".axis{stroke:#333;stroke-width:1;fill:none}\n"
           ".grid{stroke:#ddd;stroke-width:0.5}\n"
           ".lbl{font:12px sans-serif;fill:#333}\n"
           ".title{font:14px sans-serif;fill:#111}\n"
           ".pt{fill:#3465a4;fill-opacity:0.75;stroke:none}\n"
           ".pt.flagged{fill:#cc0000;fill-opacity:0.9}\n"
           ".curve-fit{stroke:#cc0000;stroke-width:2;fill:none}\n"
           ".curve-naive{stroke:#3465a4;stroke-width:1.5;fill:none}\n"
           ".curve-band{stroke:#cc0000;stroke-width:1;stroke-dasharray:5 4;fill:none}\n"
           "</style>\n";
    if (!options.title.empty()) {
        svg += "<text class=\"title\" x=\"" + std::to_string(kMarginLeft) + "\" y=\"18\">" +
               options.title + "</text>\n";
    }

    // Axes box.
    svg += "<rect class=\"axis\" x=\"" + coord(kMarginLeft) + "\" y=\"" + coord(kMarginTop) +
           "\" width=\"" + coord(fr.width - kMarginLeft - kMarginRight) + "\" height=\"" +
           coord(fr.height - kMarginTop - kMarginBottom) + "\"/>\n";

    // Decade ticks on the log x axis.
    for (int d = 0; d <= 7; ++d) {
        const double n = std::pow(10.0, d);
        if (n < n_lo || n > n_hi) continue;
        const double x = fr.px(n);
        svg += "<line class=\"grid\" x1=\"" + coord(x) + "\" y1=\"" + coord(kMarginTop) +
               "\" x2=\"" + coord(x) + "\" y2=\"" + coord(fr.height - kMarginBottom) + "\"/>\n";
        svg += "<text class=\"lbl\" x=\"" + coord(x - 8) + "\" y=\"" +
               coord(fr.height - kMarginBottom + 16) + "\">" + format_double(n) + "</text>\n";
    }
    // Horizontal ticks every 0.1 accuracy.
    for (int i = -10; i <= 20; ++i) {
        const double y = i * 0.1;
        if (y < y_lo - 1e-9 || y > y_hi + 1e-9) continue;
        const double py = fr.py(y);
        svg += "<line class=\"grid\" x1=\"" + coord(kMarginLeft) + "\" y1=\"" + coord(py) +
               "\" x2=\"" + coord(fr.width - kMarginRight) + "\" y2=\"" + coord(py) + "\"/>\n";
        char lbl[16];
        std::snprintf(lbl, sizeof(lbl), "%.1f", y);
        svg += "<text class=\"lbl\" x=\"" + coord(kMarginLeft - 34) + "\" y=\"" + coord(py + 4) +
               "\">" + lbl + "</text>\n";
    }
    svg += "<text class=\"lbl\" x=\"" + coord((kMarginLeft + fr.width - kMarginRight) / 2.0 - 40) +
           "\" y=\"" + coord(fr.height - 12) + "\">sample size n (log)</text>\n";

    if (!dataset.records.empty()) {
        append_path(svg, fr, "curve-fit", n_lo, n_hi,
                    [&](double n) { return true_curve(result.params, n); });
        append_path(svg, fr, "curve-band", n_lo, n_hi,
                    [&](double n) { return upper_band(result.params, n); });
        if (dataset.records.size() >= 3) {
            const PowerFit naive = naive_power_fit(dataset.records);
            append_path(svg, fr, "curve-naive", n_lo, n_hi,
                        [&](double n) { return power_eval(naive, n); });
        }

        std::set<std::size_t> flagged;
        for (const auto& f : result.flags) flagged.insert(f.index);
        for (std::size_t i = 0; i < dataset.records.size(); ++i) {
            const auto& r = dataset.records[i];
            const bool is_flagged = flagged.count(i) > 0;
            svg += "<circle class=\"pt";
            if (is_flagged) svg += " flagged";
            svg += "\" cx=\"" + coord(fr.px(static_cast<double>(r.n))) + "\" cy=\"" +
                   coord(fr.py(r.accuracy)) + "\" r=\"3.5\"/>\n";
        }
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace curvecorrect
