// Command-line front door: simulation, fitting, flagging, and export wired
// into reproducible batch runs. Every command writes a manifest that pins the
// resolved configuration and seed; `rerun` replays a manifest bit-exactly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "curvecorrect/data_io.hpp"
#include "curvecorrect/errors.hpp"
#include "curvecorrect/fitter.hpp"
#include "curvecorrect/pipeline.hpp"
#include "curvecorrect/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace curvecorrect;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::vector<double> split_numbers(const std::string& spec, const char* what) {
    std::vector<double> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError(std::string("malformed ") + what + " component '" + tok + "'");
        }
    }
    return out;
}

// Grid spec min,max,points with log spacing; a trailing ",linear" switches
// to linear spacing. Values are rounded to integers and deduplicated.
std::vector<std::int64_t> parse_n_grid(const std::string& spec) {
    std::string body = spec;
    bool linear = false;
    const std::string suffix = ",linear";
    if (body.size() > suffix.size() &&
        body.compare(body.size() - suffix.size(), suffix.size(), suffix) == 0) {
        linear = true;
        body = body.substr(0, body.size() - suffix.size());
    }
    const auto v = split_numbers(body, "n-grid");
    if (v.size() != 3 || v[0] < 2 || v[1] < v[0] || v[2] < 1) {
        throw UsageError("--n-grid expects min,max,points[,linear] with 2 <= min <= max");
    }
    const int points = static_cast<int>(v[2]);
    std::vector<std::int64_t> grid;
    for (int i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        const double value = linear
                                 ? v[0] + t * (v[1] - v[0])
                                 : std::exp(std::log(v[0]) + t * (std::log(v[1]) - std::log(v[0])));
        grid.push_back(static_cast<std::int64_t>(std::llround(value)));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

CurveParams parse_params_spec(const std::string& spec) {
    const auto v = split_numbers(spec, "params");
    if (v.size() != 5) throw UsageError("--params expects A,alpha,beta,zeta,c1");
    const CurveParams p{v[0], v[1], v[2], v[3], v[4]};
    try {
        validate_params(p);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--params: ") + e.what());
    }
    return p;
}

ThresholdProfile parse_threshold_spec(const std::string& spec) {
    const auto v = split_numbers(spec, "threshold");
    if (v.size() != 2) throw UsageError("--threshold expects g0,g1");
    return ThresholdProfile::decreasing_power(v[0], v[1]);
}

ThresholdProfile parse_threshold_file(const fs::path& path) {
    const std::string text = read_file(path);
    std::vector<std::pair<double, double>> knots;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line == "n,gamma") continue;
        const auto v = split_numbers(line, "threshold file row");
        if (v.size() != 2) throw UsageError("threshold file rows must be n,gamma");
        knots.emplace_back(v[0], v[1]);
    }
    if (knots.empty()) throw UsageError("threshold file holds no knots");
    return ThresholdProfile::from_knots(std::move(knots));
}

struct SeedChoice {
    std::uint64_t value = 0;
    std::string source;  // "flag", "env", "random"
};

SeedChoice resolve_seed(const std::optional<std::uint64_t>& flag_seed) {
    if (flag_seed) return {*flag_seed, "flag"};
    if (const char* env = std::getenv("CURVECORRECT_SEED")) {
        try {
            return {std::stoull(env), "env"};
        } catch (const std::exception&) {
            throw UsageError("CURVECORRECT_SEED is not an unsigned integer");
        }
    }
    std::random_device rd;
    const std::uint64_t value =
        (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
    return {value, "random"};
}

struct ManifestInput {
    std::string path;
    std::uint64_t hash;
};

// Pins a finished run: the replayable argument vector (seed made explicit),
// input hashes, outputs, and timings. Timings are informational; the payload
// files are bit-reproducible from the resolved arguments alone.
void write_manifest(const fs::path& out_dir, const std::string& command,
                    std::vector<std::string> resolved_args, const SeedChoice& seed,
                    const std::vector<ManifestInput>& inputs,
                    const std::vector<std::string>& outputs, double elapsed_ms) {
    json doc;
    doc["schema_version"] = 1;
    doc["tool"] = "curvecorrect";
    doc["version"] = kToolVersion;
    doc["command"] = command;
    doc["resolved_args"] = std::move(resolved_args);
    doc["seed"] = seed.value;
    doc["seed_source"] = seed.source;
    json ins = json::array();
    for (const auto& in : inputs) {
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(in.hash));
        ins.push_back(json{{"path", in.path}, {"fnv1a64", hex}});
    }
    doc["inputs"] = std::move(ins);
    doc["outputs"] = outputs;
    doc["timings_ms"] = json{{"total", elapsed_ms}};
    write_file(out_dir / "manifest.json", doc.dump(2) + "\n");
}

// The replayable argument list: original arguments with the seed pinned.
std::vector<std::string> resolved_argv(const std::vector<std::string>& raw,
                                       const SeedChoice& seed) {
    std::vector<std::string> args = raw;
    bool has_seed = false;
    for (const auto& a : args) has_seed |= a == "--seed";
    if (!has_seed) {
        args.push_back("--seed");
        args.push_back(std::to_string(seed.value));
    }
    return args;
}

class Timer {
public:
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(clock::now() - start_).count();
    }

private:
    using clock = std::chrono::steady_clock;
    clock::time_point start_ = clock::now();
};

int dispatch(const std::vector<std::string>& args);

// ---------------------------------------------------------------------------

void setup_simulate_model(CLI::App& cmd, const std::vector<std::string>& raw_args) {
    struct Opts {
        int problem = 0;
        std::string params_spec, n_grid_spec = "20,1000,12", threshold_spec, threshold_file;
        int teams = 100, jobs = 1;
        std::optional<std::uint64_t> seed_flag;
        std::string out_dir;
    };
    auto o = std::make_shared<Opts>();

    auto* popt = cmd.add_option("--problem", o->problem, "synthetic benchmark preset (1..7)");
    auto* xopt = cmd.add_option("--params", o->params_spec, "explicit A,alpha,beta,zeta,c1");
    cmd.add_option("--n-grid", o->n_grid_spec, "sample-size grid min,max,points[,linear]");
    cmd.add_option("--teams", o->teams, "independent teams per sample size")
        ->check(CLI::PositiveNumber);
    auto* topt = cmd.add_option("--threshold", o->threshold_spec, "publication threshold g0,g1");
    auto* fopt =
        cmd.add_option("--threshold-file", o->threshold_file, "step-profile CSV n,gamma");
    cmd.add_option("--seed", o->seed_flag, "PRNG seed (default: CURVECORRECT_SEED or random)");
    cmd.add_option("--jobs", o->jobs, "worker threads (0 = all)");
    cmd.add_option("--out", o->out_dir, "output directory")->required();
    popt->excludes(xopt);
    topt->excludes(fopt);

    cmd.callback([o, raw_args]() {
        Timer timer;
        CurveParams params;
        if (o->problem != 0) {
            params = problem_preset(o->problem).params;  // validates 1..7
        } else if (!o->params_spec.empty()) {
            params = parse_params_spec(o->params_spec);
        } else {
            throw UsageError("one of --problem or --params is required");
        }
        const SeedChoice seed = resolve_seed(o->seed_flag);

        Experiment1Config cfg;
        cfg.n_grid = parse_n_grid(o->n_grid_spec);
        cfg.teams = o->teams;
        cfg.seed = seed.value;
        cfg.jobs = o->jobs;
        if (!o->threshold_spec.empty()) {
            cfg.thresholds = parse_threshold_spec(o->threshold_spec);
        } else if (!o->threshold_file.empty()) {
            cfg.thresholds = parse_threshold_file(o->threshold_file);
        } else {
            cfg.thresholds = default_sim_thresholds(params);
        }

        Dataset ds;
        ds.name = "simulate-model";
        ds.records = run_experiment1(params, cfg);

        fs::create_directories(o->out_dir);
        write_file(fs::path(o->out_dir) / "records.csv", serialize_csv(ds));
        write_manifest(o->out_dir, "simulate-model", resolved_argv(raw_args, seed), seed, {},
                       {"records.csv"}, timer.elapsed_ms());
        std::cout << "wrote " << ds.records.size() << " records to " << o->out_dir
                  << "/records.csv\n";
    });
}

void setup_simulate_pipeline(CLI::App& cmd, const std::vector<std::string>& raw_args) {
    struct Opts {
        int problem = 0, teams = 20, features_k = -1, repeats = 100, jobs = 1;
        std::string n_grid_spec = "20,1000,12", threshold_spec = "0.6,0.5";
        bool true_curve = false;
        std::optional<std::uint64_t> seed_flag;
        std::string out_dir;
    };
    auto o = std::make_shared<Opts>();

    cmd.add_option("--problem", o->problem, "classification problem (1 or 2)")->required();
    cmd.add_option("--n-grid", o->n_grid_spec, "sample-size grid min,max,points[,linear]");
    cmd.add_option("--teams", o->teams, "teams per sample size")->check(CLI::PositiveNumber);
    cmd.add_option("--features-k", o->features_k,
                   "features kept by selection (default: per problem)");
    cmd.add_option("--threshold", o->threshold_spec, "publication threshold g0,g1");
    cmd.add_flag("--true-curve", o->true_curve, "also emit the leak-free baseline curve");
    cmd.add_option("--repeats", o->repeats, "leak-free repeats per n for the baseline")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--seed", o->seed_flag, "PRNG seed (default: CURVECORRECT_SEED or random)");
    cmd.add_option("--jobs", o->jobs, "worker threads (0 = all)");
    cmd.add_option("--out", o->out_dir, "output directory")->required();

    cmd.callback([o, raw_args]() {
        Timer timer;
        if (o->problem != 1 && o->problem != 2) throw UsageError("--problem must be 1 or 2");
        const SeedChoice seed = resolve_seed(o->seed_flag);
        const auto grid = parse_n_grid(o->n_grid_spec);
        const auto thresholds = parse_threshold_spec(o->threshold_spec);

        Dataset ds;
        ds.name = "simulate-pipeline";
        ds.records = run_experiment2(o->problem, grid, o->teams, thresholds, o->features_k,
                                     seed.value, o->jobs);

        fs::create_directories(o->out_dir);
        write_file(fs::path(o->out_dir) / "records.csv", serialize_csv(ds));
        std::vector<std::string> outputs{"records.csv"};

        if (o->true_curve) {
            const auto curve = estimate_true_curve(o->problem, grid, o->repeats, seed.value,
                                                   o->features_k, o->jobs);
            std::string csv = "n,mean_accuracy\n";
            for (const auto& [n, mean] : curve) {
                csv += std::to_string(n) + "," + format_double(mean) + "\n";
            }
            write_file(fs::path(o->out_dir) / "true_curve.csv", csv);
            outputs.push_back("true_curve.csv");
        }
        write_manifest(o->out_dir, "simulate-pipeline", resolved_argv(raw_args, seed), seed, {},
                       outputs, timer.elapsed_ms());
        std::cout << "wrote " << ds.records.size() << " records to " << o->out_dir
                  << "/records.csv\n";
    });
}

struct FitCliOptions {
    std::string input_path, bundled_name;
    int generations = 300, population = 40, offspring = 10, bootstrap = 500;
    int window = 2, jobs = 1;
    bool no_filter = false;
    std::string gamma_source = "profile", filter_order = "before", band = "point";
    std::optional<std::uint64_t> seed_flag;
};

void add_fit_options(CLI::App& cmd, FitCliOptions& o) {
    auto* in = cmd.add_option("--input", o.input_path, "records CSV path");
    auto* bu = cmd.add_option("--bundled", o.bundled_name,
                              "bundled dataset (ni_ad, ni_sz, ni_asd, ni_adhd)");
    in->excludes(bu);
    cmd.add_option("--generations", o.generations, "search generations")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--pop", o.population, "population size")->check(CLI::PositiveNumber);
    cmd.add_option("--offspring", o.offspring, "offspring per generation")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--bootstrap", o.bootstrap,
                   "bootstrap replicates (0 = point estimate only; 10000 = full scale)");
    cmd.add_flag("--no-filter", o.no_filter, "skip the quantile outlier filter");
    cmd.add_option("--window", o.window, "moment/threshold window length")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--gamma-source", o.gamma_source, "objective threshold source")
        ->check(CLI::IsMember({"profile", "window"}));
    cmd.add_option("--filter-order", o.filter_order, "outlier filter placement")
        ->check(CLI::IsMember({"before", "after"}));
    cmd.add_option("--band", o.band, "flagging band")
        ->check(CLI::IsMember({"point", "bootstrap"}));
    cmd.add_option("--seed", o.seed_flag, "PRNG seed (default: CURVECORRECT_SEED or random)");
    cmd.add_option("--jobs", o.jobs, "worker threads (0 = all)");
}

Dataset load_fit_dataset(const FitCliOptions& o, std::vector<ManifestInput>* inputs) {
    if (!o.bundled_name.empty()) return bundled(o.bundled_name);
    if (o.input_path.empty()) throw UsageError("one of --input or --bundled is required");
    const std::string bytes = read_file(o.input_path);
    if (inputs) inputs->push_back({o.input_path, fnv1a64(bytes)});
    return parse_csv(bytes, fs::path(o.input_path).stem().string());
}

FitConfig make_fit_config(const FitCliOptions& o, std::uint64_t seed) {
    FitConfig cfg;
    cfg.generations = o.generations;
    cfg.population = o.population;
    cfg.offspring = o.offspring;
    cfg.bootstrap_reps = o.bootstrap;
    cfg.window.window_len = o.window;
    cfg.filter_outliers = !o.no_filter;
    cfg.filter_before_thresholds = o.filter_order == "before";
    cfg.gamma_source =
        o.gamma_source == "profile" ? GammaSource::kProfile : GammaSource::kWindowMin;
    cfg.flag_band = o.band == "point" ? FlagBand::kPointEstimate : FlagBand::kBootstrap;
    cfg.seed = seed;
    cfg.jobs = o.jobs;
    return cfg;
}

std::vector<double> curve_grid(const Dataset& ds) {
    std::int64_t lo = ds.records.front().n, hi = lo;
    for (const auto& r : ds.records) {
        lo = std::min(lo, r.n);
        hi = std::max(hi, r.n);
    }
    std::vector<double> grid;
    const int points = 60;
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        grid.push_back(std::exp(std::log(static_cast<double>(lo)) +
                                t * (std::log(static_cast<double>(hi)) -
                                     std::log(static_cast<double>(lo)))));
    }
    return grid;
}

void setup_fit(CLI::App& cmd, const std::vector<std::string>& raw_args) {
    auto o = std::make_shared<FitCliOptions>();
    auto out_dir = std::make_shared<std::string>();
    add_fit_options(cmd, *o);
    cmd.add_option("--out", *out_dir, "output directory")->required();

    cmd.callback([o, out_dir, raw_args]() {
        Timer timer;
        const SeedChoice seed = resolve_seed(o->seed_flag);
        std::vector<ManifestInput> inputs;
        const Dataset ds = load_fit_dataset(*o, &inputs);
        const FitConfig cfg = make_fit_config(*o, seed.value);

        const FitResult result = fit(ds.records, cfg);

        fs::create_directories(*out_dir);
        write_file(fs::path(*out_dir) / "fit.json", export_fit_json(result));
        write_file(fs::path(*out_dir) / "curve.csv", export_curve_csv(result, curve_grid(ds)));
        SvgOptions svg_opt;
        svg_opt.title = ds.name;
        write_file(fs::path(*out_dir) / "fit.svg", export_svg(ds, result, svg_opt));
        write_manifest(*out_dir, "fit", resolved_argv(raw_args, seed), seed, inputs,
                       {"fit.json", "curve.csv", "fit.svg"}, timer.elapsed_ms());

        std::cout << "limit=" << format_double(result.params.limit)
                  << " coeff=" << format_double(result.params.coeff)
                  << " exponent=" << format_double(result.params.exponent)
                  << " overfit=" << format_double(result.params.overfit)
                  << " noise=" << format_double(result.params.noise) << "\n";
        for (const auto& w : result.diagnostics.warnings) std::cerr << "warning: " << w << "\n";
    });
}

void setup_flag(CLI::App& cmd) {
    auto o = std::make_shared<FitCliOptions>();
    auto fit_json_path = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    add_fit_options(cmd, *o);
    cmd.add_option("--fit", *fit_json_path, "reuse parameters from an existing fit.json");
    cmd.add_flag("--json", *as_json, "emit JSON lines instead of the table");

    cmd.callback([o, fit_json_path, as_json]() {
        const Dataset ds = load_fit_dataset(*o, nullptr);

        std::vector<FlaggedRecord> flags;
        if (!fit_json_path->empty()) {
            const auto doc = json::parse(read_file(*fit_json_path));
            const CurveParams params{doc["params"]["limit"].get<double>(),
                                     doc["params"]["coeff"].get<double>(),
                                     doc["params"]["exponent"].get<double>(),
                                     doc["params"]["overfit"].get<double>(),
                                     doc["params"]["noise"].get<double>()};
            flags = flag_overoptimistic(ds.records, params);
        } else {
            const SeedChoice seed = resolve_seed(o->seed_flag);
            FitConfig cfg = make_fit_config(*o, seed.value);
            if (cfg.flag_band == FlagBand::kPointEstimate) cfg.bootstrap_reps = 0;
            flags = fit(ds.records, cfg).flags;
        }

        if (*as_json) {
            for (const auto& f : flags) {
                json line{{"study_id", f.study_id}, {"n", f.n},
                          {"accuracy", f.accuracy},  {"band", f.band},
                          {"index", f.index},        {"exceedance", f.exceedance}};
                std::cout << line.dump() << "\n";
            }
        } else {
            std::printf("%-36s %8s %10s %10s %12s\n", "study_id", "n", "accuracy", "band",
                        "exceedance");
            for (const auto& f : flags) {
                const std::string id =
                    f.study_id.empty() ? "#" + std::to_string(f.index) : f.study_id;
                std::printf("%-36s %8lld %10.4f %10.4f %12.4f\n", id.c_str(),
                            static_cast<long long>(f.n), f.accuracy, f.band, f.exceedance);
            }
        }
    });
}

void setup_rerun(CLI::App& cmd) {
    auto manifest_path = std::make_shared<std::string>();
    auto out_override = std::make_shared<std::string>();
    cmd.add_option("manifest", *manifest_path, "manifest.json from a previous run")->required();
    cmd.add_option("--out", *out_override, "redirect outputs to a different directory");

    cmd.callback([manifest_path, out_override]() {
        const auto doc = json::parse(read_file(*manifest_path));
        std::vector<std::string> args = doc["resolved_args"].get<std::vector<std::string>>();
        if (!out_override->empty()) {
            for (std::size_t i = 0; i + 1 < args.size(); ++i) {
                if (args[i] == "--out") args[i + 1] = *out_override;
            }
        }
        const int rc = dispatch(args);
        if (rc != 0) throw std::runtime_error("rerun failed");
    });
}

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"Learning-curve recovery from overoptimistic published accuracies"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    setup_simulate_model(
        *app.add_subcommand("simulate-model",
                            "sample published accuracies from the observation model"),
        args);
    setup_simulate_pipeline(
        *app.add_subcommand("simulate-pipeline",
                            "run leaky classification teams and publish above a threshold"),
        args);
    setup_fit(*app.add_subcommand("fit", "bias-corrected learning-curve fit"), args);
    setup_flag(*app.add_subcommand("flag", "list records above the fitted upper band"));
    setup_rerun(*app.add_subcommand("rerun", "replay a manifest bit-exactly"));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);  // CLI11's vector overload consumes back to front
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const InsufficientDataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dispatch(args);
}
