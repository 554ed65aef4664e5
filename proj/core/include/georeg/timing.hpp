/**
 * @file timing.hpp
 * @brief Per-phase execution time of one relative registration and its fit.
 *
 * N is the average number of descriptors per image (N = rho * area).
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace georeg {

struct TimingParams {
    double A_c = 0.0;      // s per descriptor computed
    double L = 0.0;        // s, fixed image load
    double t0_pair = 0.0;  // s per descriptor-pair comparison
    double B = 0.0;        // s per match threshold check
    double t_c = 0.0;      // s, transform computation
    double rho = 0.0;      // descriptors per pixel^2

    void validate() const;
};

struct TimingSample {
    double n_descriptors = 0.0;
    double t_load = 0.0;
    double t_match = 0.0;
    double t_threshold = 0.0;
};

double load_time(const TimingParams& tp, double area_px);
double match_time(const TimingParams& tp, double n);
double threshold_time(const TimingParams& tp, double n);
double total_exec_time(const TimingParams& tp, double n);

struct TimingFit {
    TimingParams params;  // t_c and rho are not identifiable and stay 0
    double r2_load = 0.0;
    double r2_match = 0.0;
    double r2_threshold = 0.0;
};

/// Affine load fit (weighted by 1/t^2 so both slope and the small fixed
/// load are recovered under multiplicative noise), quadratic-through-origin
/// match fit, linear-through-origin threshold fit.
TimingFit fit_timing(std::span<const TimingSample> samples);

/// Drift of one relative registration with n matches (sigma / sqrt(n)).
double drift_of_matches(std::size_t n, double sigma_match = 24.49);

}  // namespace georeg
