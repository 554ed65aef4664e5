/**
 * @file geodesy.hpp
 * @brief Spherical-Earth propagation of an image centre from local rigid motion.
 *
 * Geocentric frame (C, X, Y, Z): X points to lat 0 / lon 90 deg, Y to the
 * north pole, Z to lat 0 / lon 0. Angles are radians throughout.
 */
#pragma once

#include <Eigen/Core>

#include "georeg/registration.hpp"

namespace georeg {

inline constexpr double kEarthRadius = 6'370'000.0;  // meters, sphere
inline constexpr double kPoleCosCutoff = 1e-6;

struct GeoPose {
    double lat = 0.0;      // [-pi/2, pi/2]
    double lon = 0.0;      // (-pi, pi]
    double alt = 0.0;      // meters above sea level
    double heading = 0.0;  // (-pi, pi], image x-axis vs. the circle of latitude

    bool valid() const noexcept;
};

using GeocentricVec = Eigen::Vector3d;
using LocalToGeocentric = Eigen::Matrix<double, 3, 2>;

enum class GeodesyMode {
    Strict,    // latitude increment divided by cos(lat)
    Physical,  // latitude increment divided by (R + h) only
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double rad) noexcept;

GeocentricVec geocentric_of(const GeoPose& pose);

/// 3x2 matrix taking (t_x, t_y) in the image frame to geocentric (T_x, T_y, T_z).
LocalToGeocentric local_frame_matrix(double heading, double lat, double lon) noexcept;

GeocentricVec local_to_geocentric(const GeoPose& pose, Point2 t_local);

GeoPose propagate_pose(const GeoPose& pose, const RigidTransform2D& motion,
                       GeodesyMode mode = GeodesyMode::Strict);

/// Along-track footprint b = 2 h tan(theta_l / 2).
double footprint(double altitude_m, double fov_rad);

/// Time to overfly one footprint, b / v.
double scan_time_limit(double footprint_m, double speed_mps);

}  // namespace georeg
