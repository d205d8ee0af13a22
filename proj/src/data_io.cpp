#include "curvecorrect/data_io.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "curvecorrect/errors.hpp"

namespace curvecorrect {

namespace {

using nlohmann::json;

struct Field {
    std::string_view text;
    std::size_t column;  // 1-based byte offset of the field start
};

std::vector<Field> split_fields(std::string_view line) {
    std::vector<Field> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        const std::size_t end = comma == std::string_view::npos ? line.size() : comma;
        fields.push_back(Field{line.substr(start, end - start), start + 1});
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::int64_t parse_int(const Field& f, std::size_t line_no, const char* what) {
    std::int64_t value = 0;
    const char* begin = f.text.data();
    const char* end = begin + f.text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || f.text.empty()) {
        throw ParseError(std::string("malformed ") + what + " '" + std::string(f.text) + "'",
                         line_no, f.column);
    }
    return value;
}

double parse_number(const Field& f, std::size_t line_no, const char* what) {
    double value = 0.0;
    const char* begin = f.text.data();
    const char* end = begin + f.text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || f.text.empty() || !std::isfinite(value)) {
        throw ParseError(std::string("malformed ") + what + " '" + std::string(f.text) + "'",
                         line_no, f.column);
    }
    return value;
}

json params_to_json(const CurveParams& p) {
    return json{{"limit", p.limit},
                {"coeff", p.coeff},
                {"exponent", p.exponent},
                {"overfit", p.overfit},
                {"noise", p.noise}};
}

json interval_to_json(const ParamInterval& iv) { return json::array({iv.lower, iv.upper}); }

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

Dataset parse_csv(std::string_view text, std::string name) {
    Dataset ds;
    ds.name = std::move(name);

    std::size_t line_no = 0;
    std::size_t pos = 0;
    int columns = 0;
    std::set<std::string> seen_ids;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line =
            nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        if (line.empty()) {
            if (nl == std::string_view::npos) break;
            continue;
        }

        const auto fields = split_fields(line);
        if (line_no == 1) {
            static const std::vector<std::vector<std::string_view>> kHeaders = {
                {"n", "accuracy"},
                {"n", "accuracy", "study_id"},
                {"n", "accuracy", "study_id", "year"},
            };
            bool ok = false;
            for (const auto& h : kHeaders) {
                if (fields.size() != h.size()) continue;
                bool match = true;
                for (std::size_t i = 0; i < h.size(); ++i) match &= fields[i].text == h[i];
                if (match) {
                    ok = true;
                    columns = static_cast<int>(h.size());
                }
            }
            if (!ok) {
                throw ParseError("header must be n,accuracy[,study_id[,year]]", 1, 1);
            }
            continue;
        }

        if (fields.size() != static_cast<std::size_t>(columns)) {
            throw ParseError("expected " + std::to_string(columns) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no, 1);
        }

        AccuracyRecord rec;
        rec.n = parse_int(fields[0], line_no, "sample size");
        if (rec.n < 2) {
            throw ParseError("sample size must be >= 2", line_no, fields[0].column);
        }
        rec.accuracy = parse_number(fields[1], line_no, "accuracy");
        if (!(rec.accuracy > 0.0 && rec.accuracy <= 1.0)) {
            throw ParseError("accuracy out of range (0, 1]", line_no, fields[1].column);
        }
        if (columns >= 3) {
            rec.study_id = std::string(fields[2].text);
            if (!rec.study_id.empty() && !seen_ids.insert(rec.study_id).second) {
                throw ParseError("duplicate study_id '" + rec.study_id + "'", line_no,
                                 fields[2].column);
            }
        }
        if (columns >= 4 && !fields[3].text.empty()) {
            parse_int(fields[3], line_no, "year");  // validated, not retained
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

std::string serialize_csv(const Dataset& dataset) {
    bool any_id = false;
    for (const auto& r : dataset.records) any_id |= !r.study_id.empty();

    std::string out = any_id ? "n,accuracy,study_id\n" : "n,accuracy\n";
    for (const auto& r : dataset.records) {
        out += std::to_string(r.n);
        out += ',';
        out += format_double(r.accuracy);
        if (any_id) {
            out += ',';
            out += r.study_id;
        }
        out += '\n';
    }
    return out;
}

std::string export_fit_json(const FitResult& result) {
    json doc;
    doc["schema_version"] = 1;
    doc["params"] = params_to_json(result.params);
    doc["objectives"] = json{{"f1", result.diagnostics.f1}, {"f2", result.diagnostics.f2}};

    json pareto = json::array();
    for (const auto& m : result.pareto) {
        pareto.push_back(json{{"params", params_to_json(m.params)}, {"f1", m.f1}, {"f2", m.f2}});
    }
    doc["pareto"] = std::move(pareto);

    if (result.ci) {
        doc["ci"] = json{{"limit", interval_to_json(result.ci->limit)},
                         {"coeff", interval_to_json(result.ci->coeff)},
                         {"exponent", interval_to_json(result.ci->exponent)},
                         {"overfit", interval_to_json(result.ci->overfit)},
                         {"noise", interval_to_json(result.ci->noise)}};
    } else {
        doc["ci"] = nullptr;
    }

    json knots = json::array();
    for (const auto& [n, g] : result.thresholds.knots()) knots.push_back(json::array({n, g}));
    doc["thresholds"] = json{{"knots", std::move(knots)}};

    json flags = json::array();
    for (const auto& f : result.flags) {
        flags.push_back(json{{"index", f.index},
                             {"study_id", f.study_id},
                             {"n", f.n},
                             {"accuracy", f.accuracy},
                             {"band", f.band},
                             {"exceedance", f.exceedance}});
    }
    doc["flags"] = std::move(flags);

    doc["diagnostics"] = json{{"generations", result.diagnostics.generations},
                              {"seed", result.diagnostics.seed},
                              {"records_used", result.diagnostics.records_used},
                              {"outliers_removed", result.diagnostics.outliers_removed},
                              {"warnings", result.diagnostics.warnings}};
    return doc.dump(2) + "\n";
}

std::string export_curve_csv(const FitResult& result, std::span<const double> n_grid) {
    std::string out = "n,true_curve,biased_mean,observed_mean,upper_band\n";
    for (double n : n_grid) {
        const double gamma = result.thresholds.gamma(n);
        out += format_double(n);
        out += ',';
        out += format_double(true_curve(result.params, n));
        out += ',';
        out += format_double(biased_mean(result.params, n));
        out += ',';
        out += format_double(observed_mean(result.params, gamma, n));
        out += ',';
        out += format_double(upper_band(result.params, n));
        out += '\n';
    }
    return out;
}

}  // namespace curvecorrect
