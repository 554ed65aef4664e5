#include "cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "cli/config_document.hpp"
#include "georeg/georeg.hpp"

namespace georeg::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Globals {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::size_t> trials;
    unsigned threads = 0;
    bool json = false;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ordered key/value report rendered either as `key = value` lines or JSON.
class Report {
public:
    using Value = std::variant<double, long long, std::string, bool, std::vector<double>, std::vector<std::string>>;

    void add(std::string key, Value v) { items_.emplace_back(std::move(key), std::move(v)); }

    std::string text() const {
        std::string s;
        for (const auto& [k, v] : items_) s += fmt::format("{} = {}\n", k, render(v));
        return s;
    }

    std::string json() const {
        nlohmann::ordered_json j = nlohmann::ordered_json::object();
        for (const auto& [k, v] : items_) {
            std::visit([&](const auto& x) { j[k] = x; }, v);
        }
        return j.dump(2) + "\n";
    }

    std::string render(bool as_json) const { return as_json ? json() : text(); }

private:
    static std::string render(const Value& v) {
        return std::visit(
            [](const auto& x) -> std::string {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<std::string>>) {
                    return fmt::format("{}", fmt::join(x, ","));
                } else {
                    return fmt::format("{}", x);
                }
            },
            v);
    }

    std::vector<std::pair<std::string, Value>> items_;
};

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write '" + path + "'");
        f << content;
        f.close();
        if (!f) {
            std::error_code ignore;
            fs::remove(tmp, ignore);
            throw IoError("cannot write '" + path + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignore;
        fs::remove(tmp, ignore);
        throw IoError("cannot write '" + path + "': " + ec.message());
    }
}

RunConfig load_config(const Globals& g) {
    if (g.config.empty()) throw ConfigError(0, "--config is required");
    RunConfig cfg = load_run_config(g.config);
    if (g.seed) cfg.sim.seed = *g.seed;
    if (g.trials) {
        if (*g.trials < 1) throw ConfigError(0, "--trials must be at least 1");
        cfg.sim.trials = *g.trials;
    }
    if (g.mode) cfg.sim.mode = *parse_coupling_mode(*g.mode);
    return cfg;
}

template <typename F>
double or_nan(F&& f) {
    try {
        return f();
    } catch (const Error&) {
        return kNaN;
    }
}

std::string joined(const std::vector<std::string>& v) { return v.empty() ? "none" : fmt::format("{}", fmt::join(v, ";")); }

double par_start(const SimConfig& sim, const ParallelCoeffs& c) { return sim.t_exe_first.value_or(c.gamma); }
double comb_start(const SimConfig& sim) { return sim.t_exe_first.value_or(sim.params.K1); }

void add_parallel(Report& r, const ParallelCoeffs& c, double t_first) {
    const auto fp = par_fixed_points(c);
    const ModeVerdict verdict = par_verdict(c, t_first);
    r.add("alpha", c.alpha);
    r.add("beta", c.beta);
    r.add("gamma", c.gamma);
    r.add("t1", fp ? fp->t1 : kNaN);
    r.add("t2", fp ? fp->t2 : kNaN);
    r.add("parallel_t_first", t_first);
    r.add("parallel_verdict", to_string(verdict.status));
    r.add("parallel_violated", joined(verdict.violated_conditions));
    r.add("parallel_within_conditions", verdict.within_stated_conditions);
    r.add("parallel_limit", verdict.status == VerdictStatus::Converges ? verdict.limit : kNaN);
}

void add_combined(Report& r, const CombinedCoeffs& c, double t_first) {
    const auto s1 = comb_fixed_point(c);
    const ModeVerdict verdict = comb_verdict(c, t_first);
    r.add("sigma", c.sigma);
    r.add("sigma_prime", c.sigma_prime);
    r.add("s1", s1 ? *s1 : kNaN);
    r.add("combined_t_first", t_first);
    r.add("combined_verdict", to_string(verdict.status));
    r.add("combined_violated", joined(verdict.violated_conditions));
}

// ---------------------------------------------------------------------------

int cmd_plan(const Globals& g, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load_config(g);
    const SimConfig& sim = cfg.sim;
    const ModeParams& p = sim.params;

    Report r;
    std::optional<std::string> infeasible;
    r.add("v_max", seq_v_max(p));
    double n_max = kNaN;
    try {
        n_max = seq_n_max(p);
    } catch (const Error& e) {
        infeasible = e.what();
    }
    r.add("n_max", n_max);

    const double n_star_real = p.D_U > 0.0 ? std::sqrt((p.a + p.I) * (p.b + p.I)) / (2.0 * p.D_U) : kNaN;
    std::optional<OptimalN> opt;
    if (!infeasible) {
        try {
            opt = seq_optimal_n(p);
        } catch (const Error& e) {
            infeasible = e.what();
        }
    }
    r.add("n_star", opt ? opt->real : n_star_real);
    r.add("n_star_int", opt ? opt->integer : -1LL);
    r.add("expected_failures_at_n_star", opt ? or_nan([&] { return seq_expected_failures(p, double(opt->integer)); }) : kNaN);
    r.add("t_0_max", or_nan([&] { return seq_T0_max(p); }));
    r.add("min_expected_failures", or_nan([&] { return seq_min_expected_failures(p); }));
    r.add("sequential_feasible", !infeasible.has_value());

    const ParallelCoeffs pc = par_coeffs(p);
    add_parallel(r, pc, par_start(sim, pc));
    add_combined(r, comb_coeffs(p), comb_start(sim));

    out << r.render(g.json);
    if (infeasible) {
        err << "infeasible sequential regime: " << *infeasible << "\n";
        return kExitInfeasible;
    }
    return kExitOk;
}

int cmd_simulate(const Globals& g, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load_config(g);
    const SimConfig& sim = cfg.sim;
    const ModeParams& p = sim.params;

    std::vector<SimTrace> traces;
    try {
        traces = run_trials(sim, g.threads);
    } catch (const Error& e) {
        err << e.what() << "\n";
        return e.kind() == ErrorKind::SpeedTooHigh ? kExitInfeasible : kExitError;
    }
    const SimSummary s = summarize(traces);

    Report r;
    r.add("mode", to_string(sim.mode));
    r.add("trials", static_cast<long long>(s.trials));
    r.add("seed", std::to_string(sim.seed));
    r.add("mission_failure_rate", s.mission_failure_rate);
    r.add("mean_absolute_failures", s.mean_absolute_failures);
    r.add("absolute_failures_stderr", s.absolute_failures_stderr);
    r.add("mean_position_error", s.mean_position_error);
    r.add("p95_position_error", s.p95_position_error);
    r.add("mean_d_t_at_absolute_start", s.mean_d_t_at_absolute_start);
    r.add("mean_t_exe_by_absolute", s.mean_t_exe_by_absolute);
    switch (sim.mode) {
        case CouplingMode::Sequential: {
            const long long n = sim.n_relatives ? *sim.n_relatives : seq_optimal_n(p).integer;
            r.add("n", n);
            r.add("expected_failures_analytic", n >= 1 ? or_nan([&] { return seq_expected_failures(p, double(n)); }) : kNaN);
            break;
        }
        case CouplingMode::Parallel: {
            const ParallelCoeffs pc = par_coeffs(p);
            r.add("parallel_verdict", to_string(par_verdict(pc, par_start(sim, pc)).status));
            break;
        }
        case CouplingMode::Combined:
            r.add("combined_verdict", to_string(comb_verdict(comb_coeffs(p), comb_start(sim)).status));
            break;
    }

    if (!g.out.empty()) {
        std::ostringstream trace;
        write_trace_csv(trace, traces.front());
        write_atomic(g.out, trace.str());
        write_atomic(g.out + ".summary.txt", r.text());
        write_atomic(g.out + ".summary.json", r.json());
    }
    out << r.render(g.json);
    return kExitOk;
}

struct SweepOptions {
    std::string param;
    double from = 0.0;
    double to = 0.0;
    std::size_t steps = 101;
};

const std::vector<std::string> kSweepable = {"n", "v", "d_u", "t0", "k1", "i", "t_exe_first"};

std::vector<std::string> sweep_row(const SimConfig& base, const std::string& param, double value) {
    SimConfig sim = base;
    ModeParams& p = sim.params;
    std::optional<double> n_fixed;
    if (param == "n") n_fixed = value;
    else if (param == "v") p.v = value;
    else if (param == "d_u") p.D_U = value;
    else if (param == "t0") p.t0 = value;
    else if (param == "k1") p.K1 = value;
    else if (param == "i") p.I = value;
    else if (param == "t_exe_first") sim.t_exe_first = value;

    auto num = [](double x) { return fmt::format("{}", x); };
    std::vector<std::string> row{param, num(value)};
    try {
        p.validate();
    } catch (const Error&) {
        row.resize(row.size() + 20, "nan");
        return row;
    }
    const std::optional<OptimalN> opt = [&]() -> std::optional<OptimalN> {
        try {
            return seq_optimal_n(p);
        } catch (const Error&) {
            return std::nullopt;
        }
    }();
    const double n = n_fixed ? *n_fixed : (opt ? double(opt->integer) : kNaN);
    const bool n_ok = std::isfinite(n) && n >= 1.0;

    row.push_back(num(seq_v_max(p)));
    row.push_back(num(seq_n_max_unchecked(p)));
    row.push_back(num(opt ? opt->real : kNaN));
    row.push_back(opt ? std::to_string(opt->integer) : "nan");
    row.push_back(num(or_nan([&] { return seq_T0_max(p); })));
    row.push_back(num(n));
    row.push_back(num(n_ok ? or_nan([&] { return seq_expected_failures(p, n); }) : kNaN));
    row.push_back(num(n_ok ? seq_abs_exec_time(p, n) : kNaN));
    row.push_back(num(n_ok ? seq_failure_prob(seq_abs_exec_time(p, n), p) : kNaN));
    row.push_back(num(n_ok ? seq_cycle_time(p, n) : kNaN));

    const ParallelCoeffs pc = par_coeffs(p);
    const auto fp = par_fixed_points(pc);
    row.push_back(num(pc.alpha));
    row.push_back(num(pc.beta));
    row.push_back(num(pc.gamma));
    row.push_back(num(fp ? fp->t1 : kNaN));
    row.push_back(num(fp ? fp->t2 : kNaN));
    row.push_back(to_string(par_verdict(pc, par_start(sim, pc)).status));

    const CombinedCoeffs cc = comb_coeffs(p);
    const auto s1 = comb_fixed_point(cc);
    row.push_back(num(cc.sigma));
    row.push_back(num(cc.sigma_prime));
    row.push_back(num(s1 ? *s1 : kNaN));
    row.push_back(to_string(comb_verdict(cc, comb_start(sim)).status));
    return row;
}

int cmd_sweep(const Globals& g, const SweepOptions& o, std::ostream& out, std::ostream& err) {
    if (std::find(kSweepable.begin(), kSweepable.end(), o.param) == kSweepable.end()) {
        err << fmt::format("unknown sweep parameter '{}'; valid names: {}\n", o.param, fmt::join(kSweepable, ", "));
        return kExitError;
    }
    if (o.steps < 1 || !std::isfinite(o.from) || !std::isfinite(o.to)) {
        err << "sweep needs finite --from/--to and --steps >= 1\n";
        return kExitError;
    }
    const RunConfig cfg = load_config(g);

    std::string csv =
        "param,value,v_max,n_max,n_star,n_star_int,t_0_max,n,expected_failures,t_exe,p_fail,cycle_time,"
        "alpha,beta,gamma,t1,t2,parallel_verdict,sigma,sigma_prime,s1,combined_verdict\n";
    for (std::size_t k = 0; k < o.steps; ++k) {
        const double value =
            o.steps == 1 ? o.from : o.from + (o.to - o.from) * static_cast<double>(k) / static_cast<double>(o.steps - 1);
        csv += fmt::format("{}\n", fmt::join(sweep_row(cfg.sim, o.param, value), ","));
    }
    if (g.out.empty()) out << csv;
    else write_atomic(g.out, csv);
    return kExitOk;
}

int cmd_fit_timing(const Globals& g, const std::string& path, std::ostream& out, std::ostream& err) {
    std::ifstream in(path);
    if (!in) {
        err << "cannot open '" << path << "'\n";
        return kExitError;
    }
    TimingFit fit;
    std::size_t rows = 0;
    try {
        const std::vector<TimingSample> samples = read_timings_csv(in);
        rows = samples.size();
        fit = fit_timing(samples);
    } catch (const Error& e) {
        err << e.what() << "\n";
        return kExitError;
    }
    Report r;
    r.add("samples", static_cast<long long>(rows));
    r.add("a_c", fit.params.A_c);
    r.add("l", fit.params.L);
    r.add("t0_pair", fit.params.t0_pair);
    r.add("b_thr", fit.params.B);
    r.add("r2_load", fit.r2_load);
    r.add("r2_match", fit.r2_match);
    r.add("r2_threshold", fit.r2_threshold);
    if (!g.out.empty()) write_atomic(g.out, r.render(g.json));
    out << r.render(g.json);
    return kExitOk;
}

int cmd_transform(const Globals& g, const std::string& path, std::ostream& out, std::ostream& err) {
    std::ifstream in(path);
    if (!in) {
        err << "cannot open '" << path << "'\n";
        return kExitError;
    }
    try {
        const std::vector<DescriptorMatch> matches = read_matches_csv(in);
        AveragingPolicy policy;
        policy.seed = g.seed.value_or(0);
        const TransformEstimate est = estimate_transform(matches, policy);
        Report r;
        r.add("theta_deg", est.transform.angle() * 180.0 / std::numbers::pi);
        r.add("t_x", est.transform.t_x);
        r.add("t_y", est.transform.t_y);
        r.add("residual_rms", est.residual_rms);
        r.add("n_matches", static_cast<long long>(matches.size()));
        r.add("n_pairs_used", static_cast<long long>(est.n_pairs_used));
        if (!g.out.empty()) write_atomic(g.out, r.render(g.json));
        out << r.render(g.json);
        return kExitOk;
    } catch (const Error& e) {
        err << e.what() << "\n";
        const bool degenerate =
            e.kind() == ErrorKind::DegenerateMatchPair || e.kind() == ErrorKind::AllPairsDegenerate;
        return degenerate ? kExitInfeasible : kExitError;
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Geolocation by image registration: planning, simulation, sweeps and fitting", "georeg"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config, "Run configuration (JSON)");
    app.add_option("--seed", g.seed, "Random seed (unsigned 64-bit)");
    app.add_option("--out", g.out, "Output path");
    app.add_flag("--json", g.json, "Machine-readable output");
    app.add_option("--mode", g.mode, "Coupling mode")->check(CLI::IsMember({"sequential", "parallel", "combined"}));
    app.add_option("--trials", g.trials, "Monte-Carlo trials")->check(CLI::PositiveNumber);
    app.add_option("--threads", g.threads, "Worker threads for simulate (0 = all cores)");

    auto* plan = app.add_subcommand("plan", "Closed-form planning report for every coupling mode");
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo flights; trace CSV for trial 0 plus summary");
    auto* sweep = app.add_subcommand("sweep", "Analytic outputs over a one-parameter grid (CSV)");
    SweepOptions so;
    sweep->add_option("--param", so.param, "One of n, v, d_u, t0, k1, i, t_exe_first")->required();
    sweep->add_option("--from", so.from, "First grid value")->required();
    sweep->add_option("--to", so.to, "Last grid value")->required();
    sweep->add_option("--steps", so.steps, "Number of grid points")->capture_default_str();
    std::string csv_path;
    auto* fit = app.add_subcommand("fit-timing", "Fit the registration timing model to measured phases");
    fit->add_option("csv", csv_path, "Timings CSV")->required();
    auto* transform = app.add_subcommand("transform", "Rigid transform from descriptor matches");
    transform->add_option("csv", csv_path, "Matches CSV")->required();

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*plan) return cmd_plan(g, out, err);
        if (*simulate) return cmd_simulate(g, out, err);
        if (*sweep) return cmd_sweep(g, so, out, err);
        if (*fit) return cmd_fit_timing(g, csv_path, out, err);
        if (*transform) return cmd_transform(g, csv_path, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitError;
    } catch (const IoError& e) {
        err << e.what() << "\n";
        return kExitError;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return e.kind() == ErrorKind::SpeedTooHigh ? kExitInfeasible : kExitError;
    }
    return kExitError;
}

}  // namespace georeg::cli
