#include "georeg/flight_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "georeg/errors.hpp"

namespace georeg {

// --- terrain ----------------------------------------------------------------

TerrainModel TerrainModel::uniform(double density) {
    if (!(density >= 0.0) || !std::isfinite(density)) {
        throw Error(ErrorKind::InvalidArgument, "terrain density must be non-negative");
    }
    TerrainModel t;
    t.density_ = {density};
    return t;
}

TerrainModel::TerrainModel(double origin_x, double origin_y, double cell_size, std::size_t nx,
                           std::size_t ny, std::vector<double> densities)
    : origin_x_(origin_x), origin_y_(origin_y), cell_(cell_size), nx_(nx), ny_(ny),
      density_(std::move(densities)), unbounded_(false) {
    if (!(cell_size > 0.0) || nx == 0 || ny == 0 || density_.size() != nx * ny) {
        throw Error(ErrorKind::InvalidArgument, "terrain grid shape is inconsistent");
    }
    for (double d : density_) {
        if (!(d >= 0.0) || !std::isfinite(d)) {
            throw Error(ErrorKind::InvalidArgument, "terrain density must be non-negative");
        }
    }
}

bool TerrainModel::covers(double x, double y) const noexcept {
    if (unbounded_) return true;
    return x >= origin_x_ && y >= origin_y_ && x <= origin_x_ + cell_ * static_cast<double>(nx_) &&
           y <= origin_y_ + cell_ * static_cast<double>(ny_);
}

double TerrainModel::density_at(double x, double y) const {
    if (unbounded_) return density_.front();
    if (!covers(x, y)) throw Error(ErrorKind::InvalidArgument, "position outside terrain extent");
    const auto ix = std::min(nx_ - 1, static_cast<std::size_t>((x - origin_x_) / cell_));
    const auto iy = std::min(ny_ - 1, static_cast<std::size_t>((y - origin_y_) / cell_));
    return density_[iy * nx_ + ix];
}

// --- config -------------------------------------------------------------------

std::string to_string(CouplingMode m) {
    switch (m) {
        case CouplingMode::Sequential: return "sequential";
        case CouplingMode::Parallel: return "parallel";
        case CouplingMode::Combined: return "combined";
    }
    return "unknown";
}

std::optional<CouplingMode> parse_coupling_mode(std::string_view s) {
    if (s == "sequential") return CouplingMode::Sequential;
    if (s == "parallel") return CouplingMode::Parallel;
    if (s == "combined") return CouplingMode::Combined;
    return std::nullopt;
}

void SimConfig::validate() const {
    params.validate();
    timing.validate();
    auto fail = [](const char* what) { throw Error(ErrorKind::InvalidArgument, what); };
    if (trials < 1) fail("trials must be at least 1");
    if (!(shot_interval > 0.0) || !std::isfinite(shot_interval)) fail("shot interval must be positive");
    if (!(sigma_match >= 0.0) || !std::isfinite(sigma_match)) fail("sigma_match must be non-negative");
    if (n_relatives && *n_relatives < 0) fail("n_relatives must be non-negative");
    if (t_exe_first && !(*t_exe_first > 0.0 && std::isfinite(*t_exe_first))) fail("t_exe_first must be positive");
    if (database.capacity == 0) fail("tile database capacity must be positive");
    if (!database.origin.valid()) fail("database origin pose out of range");
    if (!terrain.covers(0.0, 0.0) || !terrain.covers(0.0, params.v * params.T0)) {
        fail("terrain extent does not cover the flight path");
    }
}

std::string_view to_string(EventKind k) noexcept {
    switch (k) {
        case EventKind::RelativeReg: return "relative_reg";
        case EventKind::RelativeFailed: return "relative_failed";
        case EventKind::AbsoluteStart: return "absolute_start";
        case EventKind::AbsoluteDone: return "absolute_done";
        case EventKind::AbsoluteFailed: return "absolute_failed";
    }
    return "unknown";
}

// --- stepping -----------------------------------------------------------------

RelativeStep relative_step(double density, double overlap, double sigma_match, const TimingParams& timing,
                           CounterRng& rng) {
    if (!(density >= 0.0) || !std::isfinite(density)) {
        throw Error(ErrorKind::InvalidArgument, "density must be non-negative");
    }
    RelativeStep step;
    step.n_matches = static_cast<std::size_t>(std::floor(std::clamp(overlap, 0.0, 1.0) * density));
    step.zero_matches = step.n_matches == 0;
    const double per_axis = displacement_std(sigma_match, std::max<std::size_t>(step.n_matches, 1)) /
                            std::numbers::sqrt2;
    std::normal_distribution<double> gauss(0.0, 1.0);
    step.drift = {per_axis * gauss(rng), per_axis * gauss(rng)};
    step.t_exe = total_exec_time(timing, density);
    return step;
}

double shot_overlap(const SimConfig& cfg) noexcept {
    return std::clamp(1.0 - cfg.params.v * cfg.shot_interval / cfg.params.b, 0.0, 1.0);
}

namespace {

std::uint64_t image_count(double count) {
    return static_cast<std::uint64_t>(std::max(1.0, std::ceil(count - 1e-9)));
}

// Per-trial state shared by the three mode loops.
struct Flight {
    Flight(const SimConfig& cfg, std::uint64_t trial)
        : cfg_(cfg), p_(cfg.params), rng_(cfg.seed, trial), eps_(1e-9 * cfg.params.T0) {}

    bool fits(double t_end) const { return t_end <= p_.T0 + eps_; }
    bool before_end(double t) const { return t < p_.T0 - eps_; }

    Point2 residual() {
        if (!cfg_.stochastic || p_.I == 0.0) return {0.0, 0.0};
        std::uniform_real_distribution<double> u(-p_.I / 2.0, p_.I / 2.0);
        const double x = u(rng_);
        return {x, u(rng_)};
    }

    /// Applies one relative registration ending at time t; returns its event.
    SimEvent relative(double t, double d_t) {
        const double density = cfg_.terrain.density_at(0.0, p_.v * t);
        SimEvent e{t, EventKind::RelativeReg, 0, 0, d_t, 0, 0};
        if (cfg_.drift_model == DriftModel::Matches) {
            RelativeStep step = relative_step(density, shot_overlap(cfg_), cfg_.sigma_match, cfg_.timing, rng_);
            if (!cfg_.stochastic) {
                const double rms = displacement_std(cfg_.sigma_match, std::max<std::size_t>(step.n_matches, 1));
                step.drift = {0.0, rms};
            }
            err_.x += step.drift.x;
            err_.y += step.drift.y;
            e.t_exe = step.t_exe;
            if (step.zero_matches) {
                e.kind = EventKind::RelativeFailed;
                ++trace_.relative_failures;
            }
        } else {
            if (cfg_.stochastic) {
                std::normal_distribution<double> gauss(0.0, p_.D_U / std::numbers::sqrt2);
                const double dx = gauss(rng_);
                err_.x += dx;
                err_.y += gauss(rng_);
            } else {
                err_.y += p_.D_U;
            }
            e.t_exe = total_exec_time(cfg_.timing, density);
        }
        e.err_x = err_.x;
        e.err_y = err_.y;
        return e;
    }

    void log(SimEvent e) { trace_.events.push_back(e); }

    SimEvent event(double t, EventKind kind, double d_t, double t_exe, std::uint64_t images) const {
        return {t, kind, err_.x, err_.y, d_t, t_exe, images};
    }

    const SimConfig& cfg_;
    const ModeParams& p_;
    CounterRng rng_;
    double eps_;
    Point2 err_{};
    SimTrace trace_;
};

}  // namespace

SimTrace run_sequential(const SimConfig& cfg, std::uint64_t trial) {
    Flight f(cfg, trial);
    const ModeParams& p = cfg.params;
    const long long n = cfg.n_relatives ? *cfg.n_relatives : seq_optimal_n(p).integer;

    f.err_ = f.residual();
    double t = 0.0;
    while (f.before_end(t)) {
        long long since_fix = 0;
        bool truncated = false;
        for (long long j = 0; j < n; ++j) {
            if (!f.fits(t + p.t0)) {
                truncated = true;
                break;
            }
            t += p.t0;
            ++since_fix;
            f.log(f.relative(t, static_cast<double>(since_fix) * p.D_U));
        }
        if (truncated || !f.before_end(t)) break;

        const double d_t = static_cast<double>(since_fix) * p.D_U;
        const double scans = seq_db_scan_count(p, d_t);
        const double t_exe = p.K1 * scans;
        const std::uint64_t images = image_count(scans);
        f.log(f.event(t, EventKind::AbsoluteStart, d_t, t_exe, images));
        const double prob = std::clamp(seq_failure_prob(t_exe, p), 0.0, 1.0);
        const double u = f.rng_.uniform01();
        if (!f.fits(t + t_exe)) break;
        t += t_exe;

        if (u < prob || images > cfg.database.capacity) {
            ++f.trace_.absolute_failures;
            f.log(f.event(t, EventKind::AbsoluteFailed, d_t, t_exe, images));
            if (!cfg.continue_after_failure) {
                f.trace_.mission_failed = true;
                break;
            }
            continue;
        }
        f.err_ = f.residual();
        f.log(f.event(t, EventKind::AbsoluteDone, 0.0, t_exe, images));
    }
    return std::move(f.trace_);
}

SimTrace run_parallel(const SimConfig& cfg, std::uint64_t trial) {
    Flight f(cfg, trial);
    const ModeParams& p = cfg.params;

    f.err_ = f.residual();
    double t = 0.0;
    double d = cfg.t_exe_first ? *cfg.t_exe_first : par_coeffs(p).gamma;
    double scans = d / p.K1;
    double d_t_carried = 0.0;  // drift from relatives since the previous absolute's start

    while (f.before_end(t)) {
        const std::uint64_t images = image_count(scans);
        f.log(f.event(t, EventKind::AbsoluteStart, d_t_carried, d, images));
        if (d > p.T0 || images > cfg.database.capacity) {
            ++f.trace_.absolute_failures;
            f.trace_.mission_failed = true;
            f.log(f.event(t, EventKind::AbsoluteFailed, d_t_carried, d, images));
            break;
        }
        const Point2 err_at_start = f.err_;
        const auto elapsed = static_cast<long long>(std::ceil(d / p.t0 - 1e-12));
        const double start = t;
        const double end = start + d;
        bool truncated = false;
        for (long long j = 1; j <= elapsed; ++j) {
            const double tj = std::min(start + static_cast<double>(j) * p.t0, end);
            if (!f.fits(tj)) {
                truncated = true;
                break;
            }
            f.log(f.relative(tj, d_t_carried + static_cast<double>(j) * p.D_U));
        }
        if (truncated || !f.fits(end)) break;

        // Fix lands on the position at the absolute's start; later drift survives.
        const Point2 fix = f.residual();
        f.err_ = {fix.x + f.err_.x - err_at_start.x, fix.y + f.err_.y - err_at_start.y};
        d_t_carried = static_cast<double>(elapsed) * p.D_U;
        f.log(f.event(end, EventKind::AbsoluteDone, d_t_carried, d, images));

        scans = seq_db_scan_count(p, d_t_carried);
        d = p.K1 * scans;
        t = end;
    }
    return std::move(f.trace_);
}

SimTrace run_combined(const SimConfig& cfg, std::uint64_t trial) {
    Flight f(cfg, trial);
    const ModeParams& p = cfg.params;

    f.err_ = f.residual();
    double t = 0.0;
    double d = cfg.t_exe_first ? *cfg.t_exe_first : p.K1;
    double scans = d / p.K1;
    double uncertainty = 0.0;  // distance flown during the previous absolute

    while (f.before_end(t)) {
        const std::uint64_t images = image_count(scans);
        f.log(f.event(t, EventKind::AbsoluteStart, uncertainty, d, images));
        if (d > p.T0 || images > cfg.database.capacity) {
            ++f.trace_.absolute_failures;
            f.trace_.mission_failed = true;
            f.log(f.event(t, EventKind::AbsoluteFailed, uncertainty, d, images));
            break;
        }
        const double end = t + d;
        if (!f.fits(end)) break;
        f.err_ = f.residual();
        f.log(f.event(end, EventKind::AbsoluteDone, 0.0, d, images));

        uncertainty = p.v * d;
        scans = std::max(1.0, comb_db_scan_count(p, d));
        d = p.K1 * scans;
        t = end;
    }
    return std::move(f.trace_);
}

SimTrace run_trial(const SimConfig& cfg, std::uint64_t trial) {
    switch (cfg.mode) {
        case CouplingMode::Sequential: return run_sequential(cfg, trial);
        case CouplingMode::Parallel: return run_parallel(cfg, trial);
        case CouplingMode::Combined: return run_combined(cfg, trial);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown coupling mode");
}

std::vector<SimTrace> run_trials(const SimConfig& cfg, unsigned threads) {
    cfg.validate();
    std::vector<SimTrace> traces(cfg.trials);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.trials));

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) traces[i] = run_trial(cfg, i);
    };
    if (threads <= 1) {
        work(0, cfg.trials);
        return traces;
    }
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        const std::size_t chunk = (cfg.trials + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const std::size_t begin = std::min(cfg.trials, w * chunk);
            const std::size_t end = std::min(cfg.trials, begin + chunk);
            pool.emplace_back(work, begin, end);
        }
    }
    return traces;
}

// --- summary ------------------------------------------------------------------

SimSummary summarize(std::span<const SimTrace> traces) {
    if (traces.empty()) throw Error(ErrorKind::InvalidArgument, "summary needs at least one trace");
    SimSummary s;
    s.trials = traces.size();
    const double n = static_cast<double>(traces.size());

    double failed = 0.0, fail_sum = 0.0, fail_sq = 0.0;
    std::vector<double> errors;
    double dt_sum = 0.0;
    std::size_t dt_count = 0;
    std::vector<double> texe_sum;
    std::vector<std::size_t> texe_count;

    for (const auto& tr : traces) {
        failed += tr.mission_failed ? 1.0 : 0.0;
        const auto k = static_cast<double>(tr.absolute_failures);
        fail_sum += k;
        fail_sq += k * k;
        std::size_t abs_index = 0;
        for (const auto& e : tr.events) {
            switch (e.kind) {
                case EventKind::RelativeReg:
                case EventKind::RelativeFailed:
                case EventKind::AbsoluteDone:
                    errors.push_back(std::hypot(e.err_x, e.err_y));
                    break;
                case EventKind::AbsoluteStart:
                    dt_sum += e.d_t;
                    ++dt_count;
                    if (texe_sum.size() <= abs_index) {
                        texe_sum.push_back(0.0);
                        texe_count.push_back(0);
                    }
                    texe_sum[abs_index] += e.t_exe;
                    ++texe_count[abs_index];
                    ++abs_index;
                    break;
                case EventKind::AbsoluteFailed:
                    break;
            }
        }
    }
    s.mission_failure_rate = failed / n;
    s.mean_absolute_failures = fail_sum / n;
    if (traces.size() > 1) {
        const double var = std::max(0.0, (fail_sq - fail_sum * fail_sum / n) / (n - 1.0));
        s.absolute_failures_stderr = std::sqrt(var / n);
    }
    if (!errors.empty()) {
        double sum = 0.0;
        for (double e : errors) sum += e;
        s.mean_position_error = sum / static_cast<double>(errors.size());
        std::sort(errors.begin(), errors.end());
        const auto idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(errors.size()))) - 1;
        s.p95_position_error = errors[std::min(idx, errors.size() - 1)];
    }
    if (dt_count > 0) s.mean_d_t_at_absolute_start = dt_sum / static_cast<double>(dt_count);
    s.mean_t_exe_by_absolute.resize(texe_sum.size());
    for (std::size_t i = 0; i < texe_sum.size(); ++i) {
        s.mean_t_exe_by_absolute[i] = texe_sum[i] / static_cast<double>(texe_count[i]);
    }
    return s;
}

GeoPose nominal_track_end(const SimConfig& cfg) {
    const ModeParams& p = cfg.params;
    const auto steps = static_cast<long long>(std::min(1e6, std::floor(p.T0 / p.t0 + 1e-9)));
    const RigidTransform2D step{1.0, 0.0, 0.0, p.v * p.t0};
    GeoPose pose = cfg.database.origin;
    for (long long i = 0; i < steps; ++i) pose = propagate_pose(pose, step, cfg.geodesy_mode);
    return pose;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
    out << kTraceCsvHeader << '\n';
    for (const auto& e : trace.events) {
        out << fmt::format("{},{},{},{},{},{},{}\n", e.t, to_string(e.kind), e.err_x, e.err_y, e.d_t, e.t_exe,
                           e.db_images);
    }
}

}  // namespace georeg
