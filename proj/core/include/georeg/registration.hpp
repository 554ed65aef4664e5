/**
 * @file registration.hpp
 * @brief Rigid 2D motion between consecutive frames from matched descriptors.
 *
 * Frame R is the image-1 frame, R' the image-2 frame, both centred on the
 * image centre, coordinates in meters on the ground. A point p in R maps to
 * R' through Rot(theta) * (p - t), with Rot = [[c, s], [-s, c]].
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace georeg {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct DescriptorMatch {
    double x1 = 0.0;  // frame R
    double y1 = 0.0;
    double x2 = 0.0;  // frame R'
    double y2 = 0.0;

    Point2 first() const noexcept { return {x1, y1}; }
    Point2 second() const noexcept { return {x2, y2}; }
    bool finite() const noexcept;
};

/// Rotation of R' relative to R plus translation t expressed in R.
struct RigidTransform2D {
    double cos_theta = 1.0;
    double sin_theta = 0.0;
    double t_x = 0.0;
    double t_y = 0.0;

    static RigidTransform2D identity() noexcept { return {}; }
    static RigidTransform2D from_angle(double theta_rad, double t_x, double t_y) noexcept;

    double angle() const noexcept;
    /// Rescales (cos, sin) to unit norm. Throws DegenerateMatchPair if both are zero.
    RigidTransform2D normalized() const;
};

struct TransformEstimate {
    RigidTransform2D transform;
    std::size_t n_pairs_used = 0;
    double residual_rms = 0.0;
};

/// How pairwise contributions are enumerated when combining n > 2 matches.
struct AveragingPolicy {
    std::size_t all_pairs_max_matches = 256;
    std::size_t sampled_pairs = 32640;  // C(256, 2)
    std::uint64_t seed = 0;
};

Point2 apply_transform(const RigidTransform2D& t, Point2 p) noexcept;

/// Closed-form two-match solution; throws DegenerateMatchPair when the two
/// matches coincide in R' (or in R, which leaves no rotation information).
RigidTransform2D estimate_pairwise(const DescriptorMatch& m1, const DescriptorMatch& m2);

/// Averages pairwise rotations as summed unit (cos, sin), renormalizes,
/// then averages per-match translations under the fitted rotation.
TransformEstimate estimate_transform(std::span<const DescriptorMatch> matches,
                                     const AveragingPolicy& policy = {});

double displacement_std(double sigma_match, std::size_t n);

double quantization_error_bound(double resolution_m_per_px);

}  // namespace georeg
