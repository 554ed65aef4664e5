/**
 * @file flight_sim.hpp
 * @brief Monte-Carlo straight-line flights executing one coupling mode.
 *
 * The aircraft flies along +y of the image frame at constant v and altitude.
 * Each trial owns a CounterRng keyed by (seed, trial), so a trace depends
 * only on (config, seed, trial) and never on scheduling.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "georeg/coupling.hpp"
#include "georeg/geodesy.hpp"
#include "georeg/registration.hpp"
#include "georeg/rng.hpp"
#include "georeg/timing.hpp"

namespace georeg {

/// Grid of descriptor densities (descriptors per image footprint).
class TerrainModel {
public:
    /// Same density everywhere, unbounded extent.
    static TerrainModel uniform(double density);

    TerrainModel(double origin_x, double origin_y, double cell_size, std::size_t nx, std::size_t ny,
                 std::vector<double> densities);

    /// Throws InvalidArgument outside the grid.
    double density_at(double x, double y) const;
    bool covers(double x, double y) const noexcept;
    bool unbounded() const noexcept { return unbounded_; }

private:
    TerrainModel() = default;

    double origin_x_ = 0.0;
    double origin_y_ = 0.0;
    double cell_ = 1.0;
    std::size_t nx_ = 1;
    std::size_t ny_ = 1;
    std::vector<double> density_{0.0};
    bool unbounded_ = true;
};

struct TileDatabase {
    double tile_a = 0.0;
    double tile_b = 0.0;
    std::uint64_t capacity = 1'000'000;
    GeoPose origin;
};

enum class CouplingMode { Sequential, Parallel, Combined };
std::string to_string(CouplingMode m);
std::optional<CouplingMode> parse_coupling_mode(std::string_view s);

enum class DriftModel {
    UnitDrift,  // radial RMS D_U per relative
    Matches,    // radial RMS sigma_match / sqrt(n_matches) via relative_step
};

struct SimConfig {
    ModeParams params;
    TimingParams timing;
    TerrainModel terrain = TerrainModel::uniform(1000.0);
    TileDatabase database;
    CouplingMode mode = CouplingMode::Sequential;
    double sigma_match = 24.49;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    GeodesyMode geodesy_mode = GeodesyMode::Strict;
    double shot_interval = 1.0;              // s between the two shots of a relative
    std::optional<long long> n_relatives;    // sequential: overrides the optimal n
    std::optional<double> t_exe_first;       // parallel/combined: first absolute duration
    DriftModel drift_model = DriftModel::UnitDrift;
    bool stochastic = true;                  // false: deterministic along-track drift, no residual
    bool continue_after_failure = false;     // sequential: count failures and start a fresh cycle

    void validate() const;
};

enum class EventKind { RelativeReg, RelativeFailed, AbsoluteStart, AbsoluteDone, AbsoluteFailed };
std::string_view to_string(EventKind k) noexcept;

struct SimEvent {
    double t = 0.0;
    EventKind kind = EventKind::RelativeReg;
    double err_x = 0.0;
    double err_y = 0.0;
    double d_t = 0.0;
    double t_exe = 0.0;
    std::uint64_t db_images = 0;
};

struct SimTrace {
    std::vector<SimEvent> events;
    bool mission_failed = false;
    std::size_t absolute_failures = 0;
    std::size_t relative_failures = 0;
};

struct RelativeStep {
    Point2 drift;
    std::size_t n_matches = 0;
    double t_exe = 0.0;
    bool zero_matches = false;
};

/// One relative registration over terrain of the given density.
/// n_matches = floor(overlap * density); the drift increment is isotropic
/// Gaussian with radial RMS displacement_std(sigma_match, max(n_matches, 1)).
RelativeStep relative_step(double density, double overlap, double sigma_match, const TimingParams& timing,
                           CounterRng& rng);

/// Fraction of the footprint shared by two shots shot_interval apart.
double shot_overlap(const SimConfig& cfg) noexcept;

SimTrace run_sequential(const SimConfig& cfg, std::uint64_t trial);
SimTrace run_parallel(const SimConfig& cfg, std::uint64_t trial);
SimTrace run_combined(const SimConfig& cfg, std::uint64_t trial);
SimTrace run_trial(const SimConfig& cfg, std::uint64_t trial);

/// Runs cfg.trials trials over `threads` workers (0 = hardware concurrency).
std::vector<SimTrace> run_trials(const SimConfig& cfg, unsigned threads = 0);

struct SimSummary {
    std::size_t trials = 0;
    double mission_failure_rate = 0.0;
    double mean_absolute_failures = 0.0;
    double absolute_failures_stderr = 0.0;
    double mean_position_error = 0.0;
    double p95_position_error = 0.0;
    double mean_d_t_at_absolute_start = 0.0;
    std::vector<double> mean_t_exe_by_absolute;
};

SimSummary summarize(std::span<const SimTrace> traces);

/// Nominal straight-line track end, propagated one relative step (t0) at a time.
GeoPose nominal_track_end(const SimConfig& cfg);

inline constexpr std::string_view kTraceCsvHeader = "t_s,event,pos_err_x_m,pos_err_y_m,d_t_m,t_exe_s,db_images";

void write_trace_csv(std::ostream& out, const SimTrace& trace);

}  // namespace georeg
