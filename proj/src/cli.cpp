#include "selfstart/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

namespace selfstart::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string exact(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json prior_json(const NigParams& p)
{
    return json::array({p.mu, p.lambda, p.a, p.b});
}

std::string prior_arg(const NigParams& p)
{
    return exact(p.mu) + "," + exact(p.lambda) + "," + exact(p.a) + "," + exact(p.b);
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json manifest(const std::string& command, const std::vector<std::string>& args, json config,
              std::uint64_t seed)
{
    json m;
    m["command"] = command;
    m["args"] = args;
    m["config"] = std::move(config);
    m["master_seed"] = seed;
    m["version"] = kVersion;
    m["timestamp"] = utc_timestamp();
    return m;
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << content;
    if (!f.flush()) throw std::runtime_error("failed writing " + path.string());
}

std::string read_file(const fs::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json arl_json(const ArlEstimate& a)
{
    json j;
    j["arl"] = a.mean;
    j["std_error"] = a.std_error;
    j["reps"] = a.reps;
    j["censored"] = a.censored;
    j["cap"] = a.cap;
    return j;
}

json calibration_json(const CalibrationResult& r)
{
    json j;
    j["h"] = r.h;
    j["achieved_arl"] = arl_json(r.achieved_arl);
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    return j;
}

// Options shared by every chart-driven command.
struct ChartOptions {
    std::string chart = "ssc";
    double k = 0.0;
    std::string prior = "reference";
    std::string side = "two_sided";

    void add(CLI::App& app)
    {
        app.add_option("--chart", chart, "Chart variant: ssc or prc")->required();
        app.add_option("--k", k, "Reference value (k_SSC for ssc, k_PRC for prc)")->required();
        app.add_option("--prior", prior, "PRC prior: reference, informative, or mu,lambda,a,b")
            ->capture_default_str();
        app.add_option("--side", side, "upper, lower or two_sided")->capture_default_str();
    }

    ChartConfig resolve() const
    {
        ChartConfig c;
        try {
            c.variant = parse_variant(chart);
            c.side = parse_side(side);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        c.k = k;
        c.prior = parse_prior(prior);
        c.h = 0.0;
        return c;
    }

    static void append_args(std::vector<std::string>& args, const ChartConfig& c)
    {
        args.insert(args.end(), {"--chart", to_string(c.variant), "--k", exact(c.k), "--prior",
                                 prior_arg(c.prior), "--side", to_string(c.side)});
    }
};

struct CalibrationOptions {
    double target_arl = 370.0;
    std::int64_t reps = 10'000;
    double tol = 2.0;
    double h_lo = 0.1;
    double h_hi = 20.0;
    double h_max = 200.0;
    int max_iters = 100;

    void add(CLI::App& app, const std::string& reps_flag)
    {
        app.add_option("--target-arl", target_arl, "In-control ARL to calibrate to")->capture_default_str();
        app.add_option(reps_flag, reps, "Replications used for calibration")->capture_default_str();
        app.add_option("--tol", tol, "Accepted |ARL - target|")->capture_default_str();
        app.add_option("--h-lo", h_lo, "Lower end of the initial bracket")->capture_default_str();
        app.add_option("--h-hi", h_hi, "Upper end of the initial bracket")->capture_default_str();
        app.add_option("--h-max", h_max, "Largest upper end tried when expanding")->capture_default_str();
        app.add_option("--max-iters", max_iters, "ARL evaluations allowed")->capture_default_str();
    }

    CalibrationSpec resolve(const ChartConfig& chart, std::uint64_t seed, std::int64_t cap, unsigned threads) const
    {
        CalibrationSpec s;
        s.chart = chart;
        s.target_arl = target_arl;
        s.reps = reps;
        s.master_seed = seed;
        s.stream_id = stable_hash("calibrate");
        s.h_lo = h_lo;
        s.h_hi = h_hi;
        s.h_max = h_max;
        s.tol_arl = tol;
        s.max_iters = max_iters;
        s.cap = cap;
        s.threads = threads;
        return s;
    }

    void append_args(std::vector<std::string>& args, const std::string& reps_flag) const
    {
        args.insert(args.end(), {"--target-arl", exact(target_arl), reps_flag, std::to_string(reps), "--tol",
                                 exact(tol), "--h-lo", exact(h_lo), "--h-hi", exact(h_hi), "--h-max",
                                 exact(h_max), "--max-iters", std::to_string(max_iters)});
    }
};

json calibration_spec_json(const CalibrationSpec& s)
{
    json j;
    j["target_arl"] = s.target_arl;
    j["reps"] = s.reps;
    j["tol_arl"] = s.tol_arl;
    j["bracket"] = json::array({s.h_lo, s.h_hi});
    j["h_max"] = s.h_max;
    j["max_iters"] = s.max_iters;
    j["cap"] = s.cap;
    return j;
}

json chart_json(const ChartConfig& c)
{
    json j;
    j["chart"] = to_string(c.variant);
    j["k"] = c.k;
    j["prior"] = prior_json(c.prior);
    j["side"] = to_string(c.side);
    return j;
}

void validate_or_usage(const auto& spec)
{
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

// ---------------------------------------------------------------------------
// calibrate

int cmd_calibrate(const ChartOptions& chart_opts, const CalibrationOptions& cal_opts, std::uint64_t seed,
                  std::int64_t cap, unsigned threads, const std::string& manifest_path, std::ostream& out)
{
    const ChartConfig chart = chart_opts.resolve();
    const CalibrationSpec spec = cal_opts.resolve(chart, seed, cap, threads);
    validate_or_usage(spec);

    std::vector<std::string> args;
    ChartOptions::append_args(args, chart);
    cal_opts.append_args(args, "--reps");
    args.insert(args.end(), {"--seed", std::to_string(seed), "--cap", std::to_string(cap)});

    const CalibrationResult r = calibrate_h(spec);
    json j;
    j["command"] = "calibrate";
    j.update(calibration_json(r));
    out << j.dump() << '\n';

    if (!manifest_path.empty()) {
        json config = chart_json(chart);
        config.update(calibration_spec_json(spec));
        write_file(manifest_path, manifest("calibrate", args, config, seed).dump(2) + "\n");
    }
    return r.converged ? kExitOk : kExitRuntime;
}

// ---------------------------------------------------------------------------
// ced

struct CedOptions {
    std::optional<double> h;
    bool auto_calibrate = false;
    double delta = 0.0;
    std::int64_t tau = 0;
    std::int64_t reps = 10'000;
};

int cmd_ced(const ChartOptions& chart_opts, const CalibrationOptions& cal_opts, const CedOptions& opts,
            std::uint64_t seed, std::int64_t cap, unsigned threads, const std::string& manifest_path,
            std::ostream& out)
{
    ChartConfig chart = chart_opts.resolve();
    if (opts.h.has_value() == opts.auto_calibrate) {
        throw UsageError("give exactly one of --h or --auto-calibrate");
    }
    ScenarioSpec spec;
    spec.chart = chart;
    spec.delta = opts.delta;
    spec.tau = opts.tau;
    spec.reps = opts.reps;
    spec.master_seed = seed;
    spec.stream_id = stable_hash("ced");
    spec.cap = cap;
    spec.threads = threads;
    spec.chart.h = opts.h.value_or(0.0);
    validate_or_usage(spec);

    std::vector<std::string> args;
    ChartOptions::append_args(args, chart);
    args.insert(args.end(), {"--delta", exact(opts.delta), "--tau", std::to_string(opts.tau), "--reps",
                             std::to_string(opts.reps), "--seed", std::to_string(seed), "--cap",
                             std::to_string(cap)});

    json j;
    j["command"] = "ced";
    json config = chart_json(chart);
    std::optional<CalibrationResult> cal;
    if (opts.auto_calibrate) {
        const CalibrationSpec cs = cal_opts.resolve(chart, seed, cap, threads);
        validate_or_usage(cs);
        cal = calibrate_h(cs);
        spec.chart.h = cal->h;
        args.push_back("--auto-calibrate");
        cal_opts.append_args(args, "--calibration-reps");
        config["calibration"] = calibration_spec_json(cs);
    } else {
        args.insert(args.end(), {"--h", exact(*opts.h)});
    }
    config["h"] = spec.chart.h;
    config["delta"] = spec.delta;
    config["tau"] = spec.tau;
    config["reps"] = spec.reps;
    config["cap"] = spec.cap;

    const CedEstimate e = estimate_ced(spec, spec.chart.h);
    j["ced"] = e.ced;
    j["std_error"] = e.std_error;
    j["reps"] = e.reps;
    j["early_alarms"] = e.early_alarms;
    j["censored"] = e.censored;
    j["h"] = spec.chart.h;
    j["cap"] = e.cap;
    if (cal) j["calibration"] = calibration_json(*cal);
    out << j.dump() << '\n';

    if (!manifest_path.empty()) write_file(manifest_path, manifest("ced", args, config, seed).dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// grid

int cmd_grid(const std::string& config_path, const std::string& out_dir, unsigned threads, bool quiet,
             std::ostream& err)
{
    GridSpec spec;
    if (!config_path.empty()) spec = parse_grid_config(read_file(config_path));
    spec.threads = threads;
    validate_or_usage(spec);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw std::runtime_error("cannot create output directory " + out_dir);

    const ProgressFn progress = quiet ? ProgressFn{} : ProgressFn{[&](const std::string& s) { err << s << '\n'; }};
    const GridResult result = run_grid(spec, progress);

    const fs::path dir(out_dir);
    write_file(dir / "table.csv", emit_table(result, TableFormat::Csv));
    write_file(dir / "table.txt", emit_table(result, TableFormat::Pretty));
    write_file(dir / "figure.csv", emit_figure_data(result));

    json m = manifest("grid", {"--out-dir", out_dir}, json::parse(grid_config_json(spec)), spec.master_seed);
    json cals = json::array();
    for (const auto& c : result.calibrations) {
        json cj;
        cj["method"] = c.method;
        cj["k_prc"] = c.k.k_prc;
        cj["k_ssc"] = c.k.k_ssc;
        if (c.result) cj.update(calibration_json(*c.result));
        if (!c.error.empty()) cj["error"] = c.error;
        cals.push_back(cj);
    }
    m["calibrations"] = cals;
    json errors = json::array();
    for (const auto& r : result.rows) {
        if (r.error.empty()) continue;
        errors.push_back({{"method", r.method}, {"k_prc", r.k.k_prc}, {"delta", r.delta}, {"tau", r.tau},
                          {"error", r.error}});
    }
    m["errors"] = errors;
    write_file(dir / "manifest.json", m.dump(2) + "\n");
    return errors.empty() ? kExitOk : kExitRuntime;
}

// ---------------------------------------------------------------------------
// monitor

std::optional<double> parse_number(std::string_view line)
{
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return std::nullopt;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (!line.empty() && line.front() == '+') line.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size() || !std::isfinite(v)) {
        throw std::invalid_argument("not a finite decimal number");
    }
    return v;
}

int cmd_monitor(const ChartOptions& chart_opts, double h, const std::string& input, bool no_stop,
                const std::string& manifest_path, std::istream& in, std::ostream& out)
{
    ChartConfig config = chart_opts.resolve();
    config.h = h;
    validate_or_usage(config);
    Chart chart(config);

    std::ifstream file;
    if (!input.empty()) {
        file.open(input);
        if (!file) throw UsageError("cannot read " + input);
    }
    std::istream& src = input.empty() ? in : file;

    bool data_errors = false;
    std::int64_t line_no = 0;
    std::int64_t index = 0;
    std::string line;
    while (std::getline(src, line)) {
        ++line_no;
        std::optional<double> x;
        try {
            x = parse_number(line);
        } catch (const std::invalid_argument& e) {
            data_errors = true;
            json rec;
            rec["line"] = line_no;
            rec["error"] = std::string("non-numeric input: ") + e.what();
            out << rec.dump() << '\n';
            continue;
        }
        if (!x) continue;
        ++index;
        json rec;
        rec["index"] = index;
        rec["observation"] = *x;
        try {
            const StepResult r = chart.step(*x);
            rec["increment"] = r.increment;
            rec["upper"] = r.cusum.upper;
            rec["lower"] = r.cusum.lower;
            rec["two_sided"] = r.cusum.two_sided();
            rec["statistic"] = r.statistic;
            rec["warmup"] = r.warmup;
            rec["alarm"] = r.alarm;
            out << rec.dump() << '\n';
            if (r.alarm && !no_stop) break;
        } catch (const DegenerateHistory& e) {
            data_errors = true;
            chart.absorb(*x);
            rec["error"] = std::string("degenerate history: ") + e.what();
            out << rec.dump() << '\n';
        }
    }
    out.flush();

    if (!manifest_path.empty()) {
        std::vector<std::string> args;
        ChartOptions::append_args(args, config);
        args.insert(args.end(), {"--h", exact(h)});
        if (!input.empty()) args.insert(args.end(), {"--input", input});
        if (no_stop) args.push_back("--no-stop");
        json cfg = chart_json(config);
        cfg["h"] = h;
        cfg["input"] = input.empty() ? "stdin" : input;
        cfg["stop_on_alarm"] = !no_stop;
        write_file(manifest_path, manifest("monitor", args, cfg, 0).dump(2) + "\n");
    }
    return data_errors ? kExitData : kExitOk;
}

// ---------------------------------------------------------------------------
// grid config (de)serialization

template <typename T>
T get_as(const json& j, const std::string& key)
{
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw UsageError("config key '" + key + "': " + e.what());
    }
}

Method method_from_json(const json& j)
{
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "SSC") return Method::ssc();
        if (name == "PRC_n") return Method::prc_reference();
        if (name == "PRC_i") return Method::prc_informative();
        throw UsageError("unknown method '" + name + "' (expected SSC, PRC_n, PRC_i or an object)");
    }
    if (!j.is_object()) throw UsageError("config key 'methods': entries must be names or objects");
    Method m;
    for (const auto& [key, value] : j.items()) {
        if (key == "name") {
            m.name = get_as<std::string>(value, "methods.name");
        } else if (key == "variant") {
            try {
                m.variant = parse_variant(get_as<std::string>(value, "methods.variant"));
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
        } else if (key == "prior") {
            if (value.is_string()) {
                m.prior = parse_prior(value.get<std::string>());
            } else {
                const auto v = get_as<std::vector<double>>(value, "methods.prior");
                if (v.size() != 4) throw UsageError("config key 'methods.prior' needs four numbers");
                m.prior = {v[0], v[1], v[2], v[3]};
                if (!m.prior.valid()) throw UsageError("invalid prior: lambda and b must be non-negative");
            }
        } else {
            throw UsageError("unknown key 'methods." + key + "'");
        }
    }
    if (m.name.empty()) throw UsageError("every method needs a name");
    return m;
}

}  // namespace

NigParams parse_prior(const std::string& text)
{
    if (text == "reference") return NigParams::reference();
    if (text == "informative" || text == "weakly_informative") return NigParams::weakly_informative();
    std::vector<double> v;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            const auto x = parse_number(part);
            if (!x) throw std::invalid_argument("empty");
            v.push_back(*x);
        } catch (const std::invalid_argument&) {
            throw UsageError("invalid prior '" + text + "' (expected reference, informative or mu,lambda,a,b)");
        }
    }
    if (v.size() != 4) throw UsageError("invalid prior '" + text + "' (expected four comma-separated numbers)");
    NigParams p{v[0], v[1], v[2], v[3]};
    if (!p.valid()) throw UsageError("invalid prior '" + text + "': lambda and b must be non-negative");
    return p;
}

GridSpec parse_grid_config(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("malformed config: ") + e.what());
    }
    if (root.is_object() && root.contains("command") && root.contains("config")) {
        if (root["command"] != "grid") throw UsageError("manifest is not from a grid run");
        root = root["config"];
    }
    if (!root.is_object()) throw UsageError("config must be a JSON object");

    GridSpec spec;
    for (const auto& [key, value] : root.items()) {
        if (key == "methods") {
            spec.methods.clear();
            if (!value.is_array()) throw UsageError("config key 'methods' must be an array");
            for (const auto& m : value) spec.methods.push_back(method_from_json(m));
        } else if (key == "k_pairs") {
            spec.k_pairs.clear();
            if (!value.is_array()) throw UsageError("config key 'k_pairs' must be an array");
            for (const auto& kp : value) {
                if (kp.is_object()) {
                    spec.k_pairs.push_back({get_as<double>(kp.at("k_prc"), "k_pairs.k_prc"),
                                            get_as<double>(kp.at("k_ssc"), "k_pairs.k_ssc")});
                } else {
                    const auto v = get_as<std::vector<double>>(kp, key);
                    if (v.size() != 2) throw UsageError("config key 'k_pairs' entries need [k_prc, k_ssc]");
                    spec.k_pairs.push_back({v[0], v[1]});
                }
            }
        } else if (key == "deltas") {
            spec.deltas = get_as<std::vector<double>>(value, key);
        } else if (key == "taus") {
            spec.taus = get_as<std::vector<std::int64_t>>(value, key);
        } else if (key == "reps") {
            spec.reps = get_as<std::int64_t>(value, key);
        } else if (key == "calibration_reps") {
            spec.calibration_reps = get_as<std::int64_t>(value, key);
        } else if (key == "target_arl") {
            spec.target_arl = get_as<double>(value, key);
        } else if (key == "tol_arl") {
            spec.tol_arl = get_as<double>(value, key);
        } else if (key == "bracket") {
            const auto v = get_as<std::vector<double>>(value, key);
            if (v.size() != 2) throw UsageError("config key 'bracket' needs [h_lo, h_hi]");
            spec.h_lo = v[0];
            spec.h_hi = v[1];
        } else if (key == "h_max") {
            spec.h_max = get_as<double>(value, key);
        } else if (key == "max_iters") {
            spec.max_iters = get_as<int>(value, key);
        } else if (key == "cap") {
            spec.cap = get_as<std::int64_t>(value, key);
        } else if (key == "master_seed" || key == "seed") {
            spec.master_seed = get_as<std::uint64_t>(value, key);
        } else if (key == "side") {
            try {
                spec.side = parse_side(get_as<std::string>(value, key));
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
        } else if (key == "common_random_numbers") {
            spec.common_random_numbers = get_as<bool>(value, key);
        } else {
            throw UsageError("unknown config key '" + key + "'");
        }
    }
    CalibrationSpec probe;
    probe.target_arl = spec.target_arl;
    probe.tol_arl = spec.tol_arl;
    probe.h_lo = spec.h_lo;
    probe.h_hi = spec.h_hi;
    probe.h_max = spec.h_max;
    probe.max_iters = spec.max_iters;
    probe.cap = spec.cap;
    validate_or_usage(probe);
    validate_or_usage(spec);
    return spec;
}

std::string grid_config_json(const GridSpec& spec)
{
    json j;
    json methods = json::array();
    for (const auto& m : spec.methods) {
        methods.push_back({{"name", m.name}, {"variant", to_string(m.variant)}, {"prior", prior_json(m.prior)}});
    }
    j["methods"] = methods;
    json ks = json::array();
    for (const auto& k : spec.k_pairs) ks.push_back(json::array({k.k_prc, k.k_ssc}));
    j["k_pairs"] = ks;
    j["deltas"] = spec.deltas;
    j["taus"] = spec.taus;
    j["reps"] = spec.reps;
    j["calibration_reps"] = spec.calibration_reps;
    j["target_arl"] = spec.target_arl;
    j["tol_arl"] = spec.tol_arl;
    j["bracket"] = json::array({spec.h_lo, spec.h_hi});
    j["h_max"] = spec.h_max;
    j["max_iters"] = spec.max_iters;
    j["cap"] = spec.cap;
    j["master_seed"] = spec.master_seed;
    j["side"] = to_string(spec.side);
    j["common_random_numbers"] = spec.common_random_numbers;
    return j.dump(2);
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Self-starting CUSUM charts (SSC and PRC): calibration, CED simulation and monitoring", "selfstart"};
    // "--h" is the decision limit, so help is long-form only.
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    std::int64_t cap = kDefaultCap;
    unsigned threads = 0;
    std::string manifest_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Master seed")->capture_default_str();
        sub->add_option("--cap", cap, "Run length at which a run is censored")->capture_default_str();
        sub->add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it");
        sub->add_option("--manifest", manifest_path, "Write a run manifest to this path");
    };

    ChartOptions chart_opts;
    CalibrationOptions cal_opts;

    auto* calibrate = app.add_subcommand("calibrate", "Calibrate the decision limit h to a target ARL0");
    chart_opts.add(*calibrate);
    cal_opts.add(*calibrate, "--reps");
    add_common(calibrate);

    ChartOptions ced_chart;
    CalibrationOptions ced_cal;
    CedOptions ced_opts;
    auto* ced = app.add_subcommand("ced", "Estimate CED(tau) for a shift delta");
    ced_chart.add(*ced);
    ced->add_option("--h", ced_opts.h, "Decision limit");
    ced->add_flag("--auto-calibrate", ced_opts.auto_calibrate, "Calibrate h first");
    ced->add_option("--delta", ced_opts.delta, "Mean shift in IC standard deviations")->required();
    ced->add_option("--tau", ced_opts.tau, "First out-of-control index")->required();
    ced->add_option("--reps", ced_opts.reps, "Replications")->capture_default_str();
    ced_cal.add(*ced, "--calibration-reps");
    add_common(ced);

    std::string config_path;
    std::string out_dir;
    bool quiet = false;
    auto* grid = app.add_subcommand("grid", "Run the full CED study grid");
    grid->add_option("--config", config_path, "JSON grid configuration or a previous grid manifest");
    grid->add_option("--out-dir", out_dir, "Directory for table.csv, table.txt, figure.csv, manifest.json")
        ->required();
    grid->add_option("--threads", threads, "Worker threads (0 = all cores)");
    grid->add_flag("--quiet", quiet, "No progress on stderr");

    ChartOptions mon_chart;
    double mon_h = 0.0;
    std::string input;
    bool no_stop = false;
    auto* monitor = app.add_subcommand("monitor", "Monitor a stream of observations, one per line");
    mon_chart.add(*monitor);
    monitor->add_option("--h", mon_h, "Decision limit")->required();
    monitor->add_option("--input", input, "Read observations from this file instead of stdin");
    monitor->add_flag("--no-stop", no_stop, "Keep going after the first alarm");
    monitor->add_option("--manifest", manifest_path, "Write a run manifest to this path");

    std::string replay_path;
    std::string replay_out_dir;
    auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("manifest", replay_path, "Manifest file")->required();
    replay->add_option("--out-dir", replay_out_dir, "Override the output directory of a grid run");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*calibrate) return cmd_calibrate(chart_opts, cal_opts, seed, cap, threads, manifest_path, out);
        if (*ced) return cmd_ced(ced_chart, ced_cal, ced_opts, seed, cap, threads, manifest_path, out);
        if (*grid) return cmd_grid(config_path, out_dir, threads, quiet, err);
        if (*monitor) return cmd_monitor(mon_chart, mon_h, input, no_stop, manifest_path, in, out);
        if (*replay) {
            json m;
            try {
                m = json::parse(read_file(replay_path));
            } catch (const json::parse_error& e) {
                throw UsageError(std::string("malformed manifest: ") + e.what());
            }
            const std::string command = m.at("command").get<std::string>();
            if (command == "grid") {
                const std::string dir =
                    replay_out_dir.empty() ? m.at("args").at(1).get<std::string>() : replay_out_dir;
                return run({"grid", "--config", replay_path, "--out-dir", dir, "--quiet"}, in, out, err);
            }
            std::vector<std::string> replay_args{command};
            for (const auto& a : m.at("args")) replay_args.push_back(a.get<std::string>());
            return run(replay_args, in, out, err);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

int run(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace selfstart::cli
