#include "georeg/geodesy.hpp"

#include <cmath>
#include <numbers>

#include "georeg/errors.hpp"

namespace georeg {

using std::numbers::pi;

bool GeoPose::valid() const noexcept {
    return std::isfinite(lat) && std::isfinite(lon) && std::isfinite(alt) &&
           std::isfinite(heading) && lat >= -pi / 2 && lat <= pi / 2 && lon > -pi && lon <= pi &&
           alt >= 0.0 && heading > -pi && heading <= pi;
}

double wrap_angle(double rad) noexcept {
    double r = std::remainder(rad, 2.0 * pi);  // [-pi, pi]
    if (r <= -pi) r += 2.0 * pi;
    return r;
}

GeocentricVec geocentric_of(const GeoPose& pose) {
    if (!pose.valid()) throw Error(ErrorKind::InvalidArgument, "pose out of range");
    const double r = kEarthRadius + pose.alt;
    const double cl = std::cos(pose.lat);
    return {r * cl * std::sin(pose.lon), r * std::sin(pose.lat), r * cl * std::cos(pose.lon)};
}

LocalToGeocentric local_frame_matrix(double heading, double lat, double lon) noexcept {
    const double ca = std::cos(heading), sa = std::sin(heading);
    const double cl = std::cos(lat), sl = std::sin(lat);
    const double cp = std::cos(lon), sp = std::sin(lon);
    LocalToGeocentric m;
    m << ca * cp - sa * sl * sp, -sa * cp - ca * sl * sp,
         sa * cl,                ca * cl,
         -ca * sp - sa * sl * cp, sa * sp - ca * sl * cp;
    return m;
}

GeocentricVec local_to_geocentric(const GeoPose& pose, Point2 t_local) {
    if (!pose.valid()) throw Error(ErrorKind::InvalidArgument, "pose out of range");
    return local_frame_matrix(pose.heading, pose.lat, pose.lon) * Eigen::Vector2d(t_local.x, t_local.y);
}

GeoPose propagate_pose(const GeoPose& pose, const RigidTransform2D& motion, GeodesyMode mode) {
    if (!pose.valid()) throw Error(ErrorKind::InvalidArgument, "pose out of range");
    const double cos_lat = std::cos(pose.lat);
    if (cos_lat < kPoleCosCutoff) {
        throw Error(ErrorKind::PoleSingularity, "latitude too close to a pole");
    }
    const RigidTransform2D unit = motion.normalized();
    const GeocentricVec big_t = local_to_geocentric(pose, {unit.t_x, unit.t_y});

    const double r = kEarthRadius + pose.alt;
    const double d_lon = (std::cos(pose.lon) * big_t.x() - std::sin(pose.lon) * big_t.z()) / (r * cos_lat);
    const double d_lat = mode == GeodesyMode::Strict ? big_t.y() / (r * cos_lat) : big_t.y() / r;

    const double turned = unit.angle() + pose.heading;
    const double corr = std::sin(pose.lat) * d_lon;
    const double cos_h = std::cos(turned) + std::sin(turned) * corr;
    const double sin_h = std::sin(turned) - std::cos(turned) * corr;

    GeoPose out = pose;
    out.lat = pose.lat + d_lat;
    out.lon = pose.lon + d_lon;
    out.heading = std::atan2(sin_h, cos_h);
    // Crossing a pole: reflect latitude, jump half a turn in longitude and heading.
    if (out.lat > pi / 2) {
        out.lat = pi - out.lat;
        out.lon += pi;
        out.heading += pi;
    } else if (out.lat < -pi / 2) {
        out.lat = -pi - out.lat;
        out.lon += pi;
        out.heading += pi;
    }
    out.lon = wrap_angle(out.lon);
    out.heading = wrap_angle(out.heading);
    return out;
}

double footprint(double altitude_m, double fov_rad) {
    if (!(altitude_m > 0.0)) throw Error(ErrorKind::InvalidArgument, "altitude must be positive");
    if (!(fov_rad > 0.0 && fov_rad < pi)) {
        throw Error(ErrorKind::InvalidArgument, "field of view must lie in (0, pi)");
    }
    return 2.0 * altitude_m * std::tan(fov_rad / 2.0);
}

double scan_time_limit(double footprint_m, double speed_mps) {
    if (!(speed_mps > 0.0)) throw Error(ErrorKind::InvalidSpeed, "speed must be positive");
    if (!(footprint_m >= 0.0)) throw Error(ErrorKind::InvalidArgument, "footprint must be non-negative");
    return footprint_m / speed_mps;
}

}  // namespace georeg
