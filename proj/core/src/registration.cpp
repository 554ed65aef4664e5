#include "georeg/registration.hpp"

#include <cmath>
#include <random>
#include <string>

#include "georeg/errors.hpp"
#include "georeg/rng.hpp"

namespace georeg {

bool DescriptorMatch::finite() const noexcept {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2);
}

RigidTransform2D RigidTransform2D::from_angle(double theta_rad, double t_x, double t_y) noexcept {
    return {std::cos(theta_rad), std::sin(theta_rad), t_x, t_y};
}

double RigidTransform2D::angle() const noexcept { return std::atan2(sin_theta, cos_theta); }

RigidTransform2D RigidTransform2D::normalized() const {
    const double norm = std::hypot(cos_theta, sin_theta);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error(ErrorKind::DegenerateMatchPair, "rotation pair has zero norm");
    }
    return {cos_theta / norm, sin_theta / norm, t_x, t_y};
}

Point2 apply_transform(const RigidTransform2D& t, Point2 p) noexcept {
    const double dx = p.x - t.t_x;
    const double dy = p.y - t.t_y;
    return {t.cos_theta * dx + t.sin_theta * dy, -t.sin_theta * dx + t.cos_theta * dy};
}

namespace {

struct Rotation {
    double c;
    double s;
};

// Unit rotation from two matches; false when the pair is degenerate.
bool pair_rotation(const DescriptorMatch& m1, const DescriptorMatch& m2, Rotation& out) noexcept {
    const double dx = m2.x1 - m1.x1;
    const double dy = m2.y1 - m1.y1;
    const double dxp = m2.x2 - m1.x2;
    const double dyp = m2.y2 - m1.y2;
    const double denom = dxp * dxp + dyp * dyp;
    if (denom == 0.0) return false;
    const double c = (dxp * dx + dyp * dy) / denom;
    const double s = (dxp * dy - dyp * dx) / denom;
    const double norm = std::hypot(c, s);
    if (!(norm > 0.0) || !std::isfinite(norm)) return false;
    out = {c / norm, s / norm};
    return true;
}

Point2 match_translation(const DescriptorMatch& m, double c, double s) noexcept {
    return {-m.x2 * c + m.y2 * s + m.x1, -m.x2 * s - m.y2 * c + m.y1};
}

}  // namespace

RigidTransform2D estimate_pairwise(const DescriptorMatch& m1, const DescriptorMatch& m2) {
    if (!m1.finite() || !m2.finite()) {
        throw Error(ErrorKind::InvalidArgument, "match coordinates must be finite");
    }
    Rotation r{};
    if (!pair_rotation(m1, m2, r)) {
        throw Error(ErrorKind::DegenerateMatchPair, "matches coincide, rotation undetermined");
    }
    const Point2 t = match_translation(m1, r.c, r.s);
    return {r.c, r.s, t.x, t.y};
}

TransformEstimate estimate_transform(std::span<const DescriptorMatch> matches,
                                     const AveragingPolicy& policy) {
    const std::size_t n = matches.size();
    if (n < 2) {
        throw Error(ErrorKind::InsufficientMatches,
                    "need at least 2 matches, got " + std::to_string(n));
    }
    for (const auto& m : matches) {
        if (!m.finite()) throw Error(ErrorKind::InvalidArgument, "match coordinates must be finite");
    }

    double sum_c = 0.0;
    double sum_s = 0.0;
    std::size_t used = 0;
    auto accumulate = [&](std::size_t i, std::size_t j) {
        Rotation r{};
        if (pair_rotation(matches[i], matches[j], r)) {
            sum_c += r.c;
            sum_s += r.s;
            ++used;
        }
    };

    if (n <= policy.all_pairs_max_matches) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) accumulate(i, j);
        }
    } else {
        CounterRng rng(policy.seed, 0);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (std::size_t k = 0; k < policy.sampled_pairs; ++k) {
            const std::size_t i = pick(rng);
            std::size_t j = pick(rng);
            while (j == i) j = pick(rng);
            accumulate(i, j);
        }
    }
    if (used == 0) {
        throw Error(ErrorKind::AllPairsDegenerate, "every match pair is degenerate");
    }

    const double norm = std::hypot(sum_c, sum_s);
    if (!(norm > 0.0)) {
        throw Error(ErrorKind::AllPairsDegenerate, "pairwise rotations cancel out");
    }
    const double c = sum_c / norm;
    const double s = sum_s / norm;

    double tx = 0.0;
    double ty = 0.0;
    for (const auto& m : matches) {
        const Point2 t = match_translation(m, c, s);
        tx += t.x;
        ty += t.y;
    }
    TransformEstimate est;
    est.transform = {c, s, tx / static_cast<double>(n), ty / static_cast<double>(n)};
    est.n_pairs_used = used;

    double sq = 0.0;
    for (const auto& m : matches) {
        const Point2 q = apply_transform(est.transform, m.first());
        sq += (q.x - m.x2) * (q.x - m.x2) + (q.y - m.y2) * (q.y - m.y2);
    }
    est.residual_rms = std::sqrt(sq / static_cast<double>(n));
    return est;
}

double displacement_std(double sigma_match, std::size_t n) {
    if (n == 0) throw Error(ErrorKind::InvalidCount, "match count must be at least 1");
    if (!(sigma_match >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "sigma_match must be non-negative");
    }
    return sigma_match / std::sqrt(static_cast<double>(n));
}

double quantization_error_bound(double resolution_m_per_px) {
    if (!(resolution_m_per_px > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "resolution must be positive");
    }
    return resolution_m_per_px / 2.0;
}

}  // namespace georeg
