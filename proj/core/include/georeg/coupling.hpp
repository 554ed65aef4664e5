/**
 * @file coupling.hpp
 * @brief Closed-form models of the sequential, parallel and combined
 *        relative/absolute registration coupling modes.
 *
 * Everything here is deterministic and unclamped: failure probabilities may
 * exceed 1 and are only clamped where they are sampled (flight_sim).
 */
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "georeg/registration.hpp"

namespace georeg {

/// Physical parameter set shared by the three coupling modes.
struct ModeParams {
    double a = 0.0;      // footprint across track [m]
    double b = 0.0;      // footprint along track [m]
    double I = 0.0;      // absolute-registration inaccuracy [m]
    double D_U = 0.0;    // drift of one relative registration [m]
    double t0 = 0.0;     // relative registration time [s]
    double K1 = 0.0;     // DB scan time per candidate image [s]
    double v = 0.0;      // ground speed [m/s]
    double T0 = 0.0;     // mission duration [s]
    double R_min = 0.0;  // minimum turn radius [m]

    /// Throws InvalidArgument naming the first offending field.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Sequential mode: n relatives, then one absolute.
// ---------------------------------------------------------------------------

double seq_db_scan_count(const ModeParams& p, double drift_total);
double seq_abs_exec_time(const ModeParams& p, double n);
double seq_failure_prob(double t_exe, const ModeParams& p);
double seq_v_max(const ModeParams& p);
/// Throws SpeedTooHigh when v >= v_max.
double seq_n_max(const ModeParams& p);
/// The same closed form without the feasibility gate (negative past v_max).
double seq_n_max_unchecked(const ModeParams& p);
double seq_cycle_time(const ModeParams& p, double n);
/// Expected absolute failures over T0 with n relatives per cycle.
double seq_expected_failures(const ModeParams& p, double n);

struct OptimalN {
    double real = 0.0;
    long long integer = 0;
};
/// Stationary point of seq_expected_failures and its best feasible integer
/// neighbour; ties go to the smaller n.
OptimalN seq_optimal_n(const ModeParams& p);

/// Approximate minimum of the expected failures (requires sqrt(ab)/(2 D_U) <= n_max).
double seq_min_expected_failures(const ModeParams& p);
/// Longest mission keeping the approximate minimum below one failure.
double seq_T0_max(const ModeParams& p);

// ---------------------------------------------------------------------------
// Convergence verdicts
// ---------------------------------------------------------------------------

enum class VerdictStatus { Converges, Diverges, NotApplicable };
std::string to_string(VerdictStatus s);

struct IterationLimits {
    std::size_t max_steps = 1'000'000;
    double divergence_threshold = 1e300;
    double abs_tol = 0.0;
    double rel_tol = 1e-12;
};

enum class IterationOutcome { Converged, Diverged, Inconclusive };
std::string to_string(IterationOutcome o);

struct IterationResult {
    IterationOutcome outcome = IterationOutcome::Inconclusive;
    std::size_t steps = 0;
    double last = 0.0;
};

/// Iterates t <- step(t) until successive iterates agree within
/// abs_tol + rel_tol * |t|, exceed the divergence threshold, or run out of steps.
IterationResult iterate_map(const std::function<double(double)>& step, double start,
                            const IterationLimits& limits);

struct ModeVerdict {
    VerdictStatus status = VerdictStatus::NotApplicable;
    std::vector<double> fixed_points;
    std::vector<std::string> violated_conditions;
    /// False when the verdict holds only outside the stated conditions
    /// (parallel start below t1).
    bool within_stated_conditions = true;
    double limit = 0.0;  // meaningful when status == Converges
    IterationResult iteration;
    bool iteration_agrees = true;
};

// ---------------------------------------------------------------------------
// Parallel mode: t(n+1) = alpha t^2 + beta t + gamma
// ---------------------------------------------------------------------------

struct ParallelCoeffs {
    double alpha = 0.0;  // 1/s
    double beta = 0.0;
    double gamma = 0.0;  // s
};

struct FixedPointPair {
    double t1 = 0.0;
    double t2 = 0.0;
};

ParallelCoeffs par_coeffs(const ModeParams& p);
double par_step(const ParallelCoeffs& c, double t);
/// Both fixed points when beta < 1 and the discriminant is strictly positive.
std::optional<FixedPointPair> par_fixed_points(const ParallelCoeffs& c);
ModeVerdict par_verdict(const ParallelCoeffs& c, double t_first);

// ---------------------------------------------------------------------------
// Combined mode: t(n+1) = sigma t^3 + sigma' t
// ---------------------------------------------------------------------------

struct CombinedCoeffs {
    double sigma = 0.0;        // 1/s^2
    double sigma_prime = 0.0;
};

/// Where the footprint corner lands after t_exe on a turn of radius R
/// (R = infinity gives straight flight).
Point2 comb_reach_point(double radius, double v, double t_exe);

/// Quadrature of the swept area under the reach curve for R in [R_min, inf).
double comb_area_exact(double v, double t_exe, double r_min);
/// Leading-order closed form of comb_area_exact, v^3 t^3 / (2 R_min).
double comb_area_leading(double v, double t_exe, double r_min);
/// Likely zone of presence, 2 v^3 t^3 / (3 R_min) + a v t.
double comb_area_approx(const ModeParams& p, double t_exe);
/// Same zone built from the quadrature instead of the leading term.
double comb_area_from_quadrature(const ModeParams& p, double t_exe);
/// True when v t_exe / R_min stays under 0.3, where the closed form is trusted.
bool comb_small_angle_ok(const ModeParams& p, double t_exe);
double comb_db_scan_count(const ModeParams& p, double t_exe);
CombinedCoeffs comb_coeffs(const ModeParams& p);
double comb_step(const CombinedCoeffs& c, double t);
/// Non-trivial root sqrt((1 - sigma') / sigma); nullopt unless sigma' < 1.
/// Infinite when sigma == 0 (every start converges).
std::optional<double> comb_fixed_point(const CombinedCoeffs& c);
ModeVerdict comb_verdict(const CombinedCoeffs& c, double t_first);

}  // namespace georeg
