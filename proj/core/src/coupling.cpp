#include "georeg/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "georeg/errors.hpp"

namespace georeg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, ErrorKind kind, const char* what) {
    if (!ok) throw Error(kind, what);
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }
bool non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void ModeParams::validate() const {
    auto check = [](bool ok, const char* field) {
        if (!ok) throw Error(ErrorKind::InvalidArgument, std::string("invalid ModeParams.") + field);
    };
    check(positive(a), "a");
    check(positive(b), "b");
    check(non_negative(I), "I");
    check(positive(D_U), "D_U");
    check(positive(t0), "t0");
    check(positive(K1), "K1");
    check(non_negative(v), "v");
    check(positive(T0), "T0");
    check(positive(R_min), "R_min");
}

// --- sequential -------------------------------------------------------------

double seq_db_scan_count(const ModeParams& p, double drift_total) {
    require(non_negative(drift_total), ErrorKind::InvalidArgument, "drift must be non-negative");
    return (p.a + p.I + 2.0 * drift_total) * (p.b + p.I + 2.0 * drift_total) / (p.a * p.b);
}

double seq_abs_exec_time(const ModeParams& p, double n) {
    require(non_negative(n), ErrorKind::InvalidCount, "n must be non-negative");
    return p.K1 * seq_db_scan_count(p, n * p.D_U);
}

double seq_failure_prob(double t_exe, const ModeParams& p) {
    require(non_negative(t_exe), ErrorKind::InvalidArgument, "t_exe must be non-negative");
    return p.v / p.b * t_exe;
}

double seq_v_max(const ModeParams& p) {
    return p.a * p.b * p.b / (p.K1 * (p.a + p.I) * (p.b + p.I));
}

double seq_n_max(const ModeParams& p) {
    if (p.v >= seq_v_max(p)) {
        throw Error(ErrorKind::SpeedTooHigh, "v must stay below v_max for any relative budget");
    }
    return seq_n_max_unchecked(p);
}

double seq_n_max_unchecked(const ModeParams& p) {
    if (p.v == 0.0) return kInf;
    const double diff = p.a - p.b;
    const double radical = std::sqrt(diff * diff + 4.0 * p.a * p.b * p.b / (p.K1 * p.v));
    return (-p.a - p.b - 2.0 * p.I + radical) / (4.0 * p.D_U);
}

double seq_cycle_time(const ModeParams& p, double n) {
    require(non_negative(n), ErrorKind::InvalidCount, "n must be non-negative");
    return n * p.t0 + seq_abs_exec_time(p, n);
}

double seq_expected_failures(const ModeParams& p, double n) {
    require(std::isfinite(n) && n >= 1.0, ErrorKind::InvalidCount, "n must be at least 1");
    const double A = 4.0 * p.D_U * p.D_U;
    const double B = 2.0 * p.D_U * (p.a + p.b + 2.0 * p.I);
    const double C = (p.a + p.I) * (p.b + p.I);
    const double B_prime = B + p.t0 * p.a * p.b / p.K1;
    return p.T0 * p.v / p.b * (A * n * n + B * n + C) / (A * n * n + B_prime * n + C);
}

OptimalN seq_optimal_n(const ModeParams& p) {
    OptimalN out;
    out.real = std::sqrt((p.a + p.I) * (p.b + p.I)) / (2.0 * p.D_U);

    const double n_max = seq_n_max(p);
    const double upper = std::isinf(n_max) ? kInf : std::floor(n_max);
    if (upper < 1.0) {
        throw Error(ErrorKind::SpeedTooHigh, "no integer relative count below n_max");
    }
    auto clamp_n = [&](double n) { return std::clamp(n, 1.0, upper); };
    const double lo = clamp_n(std::floor(out.real));
    const double hi = clamp_n(std::ceil(out.real));
    const double f_lo = seq_expected_failures(p, lo);
    const double f_hi = seq_expected_failures(p, hi);
    out.integer = static_cast<long long>(f_hi < f_lo ? hi : lo);
    return out;
}

namespace {

double failure_bracket(const ModeParams& p) {
    const double root_ab = std::sqrt(p.a * p.b);
    const bool within = [&] {
        try {
            const double n_max = seq_n_max(p);
            const double n_approx = root_ab / (2.0 * p.D_U);
            return n_approx <= n_max * (1.0 + 1e-12) + 1e-12;
        } catch (const Error&) {
            return false;
        }
    }();
    if (!within) {
        throw Error(ErrorKind::ProvisoViolated, "sqrt(ab)/(2 D_U) exceeds n_max");
    }
    return 1.0 + p.t0 * p.a * p.b / (4.0 * p.K1 * p.D_U * (root_ab + (p.a + p.b) / 2.0));
}

}  // namespace

double seq_min_expected_failures(const ModeParams& p) {
    return p.T0 * p.v / p.b / failure_bracket(p);
}

double seq_T0_max(const ModeParams& p) {
    require(positive(p.v), ErrorKind::InvalidSpeed, "T0_max needs v > 0");
    return p.b / p.v * failure_bracket(p);
}

// --- verdict plumbing ---------------------------------------------------------

std::string to_string(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::Converges: return "converges";
        case VerdictStatus::Diverges: return "diverges";
        case VerdictStatus::NotApplicable: return "not_applicable";
    }
    return "unknown";
}

std::string to_string(IterationOutcome o) {
    switch (o) {
        case IterationOutcome::Converged: return "converged";
        case IterationOutcome::Diverged: return "diverged";
        case IterationOutcome::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

IterationResult iterate_map(const std::function<double(double)>& step, double start,
                            const IterationLimits& limits) {
    IterationResult r;
    double t = start;
    for (std::size_t k = 0; k < limits.max_steps; ++k) {
        const double next = step(t);
        r.steps = k + 1;
        r.last = next;
        if (!std::isfinite(next) || std::abs(next) > limits.divergence_threshold) {
            r.outcome = IterationOutcome::Diverged;
            return r;
        }
        if (std::abs(next - t) <= limits.abs_tol + limits.rel_tol * std::abs(next)) {
            r.outcome = IterationOutcome::Converged;
            return r;
        }
        t = next;
    }
    r.outcome = IterationOutcome::Inconclusive;
    return r;
}

namespace {

void cross_check(ModeVerdict& v, const std::function<double(double)>& step, double t_first,
                 const IterationLimits& limits) {
    v.iteration = iterate_map(step, t_first, limits);
    const IterationOutcome expected = v.status == VerdictStatus::Converges
                                          ? IterationOutcome::Converged
                                          : IterationOutcome::Diverged;
    v.iteration_agrees = v.iteration.outcome == expected;
}

}  // namespace

// --- parallel ---------------------------------------------------------------

ParallelCoeffs par_coeffs(const ModeParams& p) {
    const double ab = p.a * p.b;
    return {4.0 * p.D_U * p.D_U * p.K1 / (ab * p.t0 * p.t0),
            2.0 * p.D_U * (p.a + p.b + 2.0 * p.I) * p.K1 / (ab * p.t0),
            p.K1 * (p.a + p.I) * (p.b + p.I) / ab};
}

double par_step(const ParallelCoeffs& c, double t) {
    return (c.alpha * t + c.beta) * t + c.gamma;
}

std::optional<FixedPointPair> par_fixed_points(const ParallelCoeffs& c) {
    require(positive(c.alpha) && positive(c.beta) && positive(c.gamma), ErrorKind::InvalidArgument,
            "parallel coefficients must be positive");
    const double bm1 = c.beta - 1.0;
    const double disc = bm1 * bm1 - 4.0 * c.alpha * c.gamma;
    if (!(c.beta < 1.0) || !(disc > 0.0)) return std::nullopt;
    const double root = std::sqrt(disc);
    // t1 = 2 gamma / ((1 - beta) + root) avoids cancellation in the small root.
    const double t2 = ((1.0 - c.beta) + root) / (2.0 * c.alpha);
    const double t1 = 2.0 * c.gamma / ((1.0 - c.beta) + root);
    return FixedPointPair{t1, t2};
}

ModeVerdict par_verdict(const ParallelCoeffs& c, double t_first) {
    require(positive(t_first), ErrorKind::InvalidArgument, "t_first must be positive");
    ModeVerdict v;
    const double bm1 = c.beta - 1.0;
    const bool cond1 = c.beta < 1.0;
    const bool cond2 = bm1 * bm1 - 4.0 * c.alpha * c.gamma > 0.0;
    const auto fp = par_fixed_points(c);
    if (!cond1) v.violated_conditions.emplace_back("condition1");
    if (!cond2) v.violated_conditions.emplace_back("condition2");

    if (!fp) {
        v.status = VerdictStatus::NotApplicable;
        v.within_stated_conditions = false;
    } else {
        v.fixed_points = {fp->t1, fp->t2};
        if (t_first > fp->t2 * (1.0 + 1e-15)) {
            v.status = VerdictStatus::Diverges;
            v.violated_conditions.emplace_back("condition3");
        } else {
            v.status = VerdictStatus::Converges;
            const bool at_t2 = std::abs(t_first - fp->t2) <= 1e-15 * fp->t2;
            v.limit = at_t2 ? fp->t2 : fp->t1;
            if (t_first < fp->t1) {
                // Converges to t1 from below as well, outside the stated bracket [t1, t2].
                v.within_stated_conditions = false;
                v.violated_conditions.emplace_back("condition3");
            }
        }
    }

    IterationLimits limits;
    limits.divergence_threshold = 1e6 * std::max(c.gamma, t_first);
    cross_check(v, [c](double t) { return par_step(c, t); }, t_first, limits);
    return v;
}

// --- combined ---------------------------------------------------------------

Point2 comb_reach_point(double radius, double v, double t_exe) {
    require(radius > 0.0, ErrorKind::InvalidArgument, "radius must be positive");
    const double arc = v * t_exe;
    if (std::isinf(radius)) return {0.0, arc};
    const double w = arc / radius;
    const double half = std::sin(w / 2.0);
    return {2.0 * radius * half * half, radius * std::sin(w)};
}

double comb_area_leading(double v, double t_exe, double r_min) {
    require(positive(r_min), ErrorKind::InvalidArgument, "R_min must be positive");
    const double s = v * t_exe;
    return s * s * s / (2.0 * r_min);
}

double comb_area_exact(double v, double t_exe, double r_min) {
    require(positive(r_min), ErrorKind::InvalidArgument, "R_min must be positive");
    require(non_negative(v) && non_negative(t_exe), ErrorKind::InvalidArgument,
            "v and t_exe must be non-negative");
    const double s = v * t_exe;
    if (s == 0.0) return 0.0;

    // With u = 1/R and w = s u: x = 2 sin^2(w/2)/u, y = sin(w)/u, so
    // A = s^2 * integral_0^{s/R_min} sinc(w) * g(w) dw with
    // g(w) = sinc(w) - (1 - cos w)/w^2.
    auto integrand = [](double w) {
        if (std::abs(w) < 1e-4) {
            const double w2 = w * w;
            const double sinc = 1.0 - w2 / 6.0 + w2 * w2 / 120.0;
            return sinc * (0.5 - w2 / 8.0 + w2 * w2 / 144.0);
        }
        const double sinc = std::sin(w) / w;
        const double half = std::sin(w / 2.0);
        return sinc * (sinc - 2.0 * half * half / (w * w));
    };
    double error = 0.0;
    double l1 = 0.0;
    const double upper = s / r_min;
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, upper, 20, 1e-10, &error, &l1);
    if (!std::isfinite(integral) || error > 1e-9 * std::max(l1, std::numeric_limits<double>::min())) {
        throw Error(ErrorKind::NumericalFailure, "area quadrature did not converge");
    }
    return s * s * integral;
}

double comb_area_approx(const ModeParams& p, double t_exe) {
    require(non_negative(t_exe), ErrorKind::InvalidArgument, "t_exe must be non-negative");
    const double s = p.v * t_exe;
    return 2.0 * s * s * s / (3.0 * p.R_min) + p.a * s;
}

double comb_area_from_quadrature(const ModeParams& p, double t_exe) {
    return 4.0 / 3.0 * comb_area_exact(p.v, t_exe, p.R_min) + p.a * p.v * t_exe;
}

bool comb_small_angle_ok(const ModeParams& p, double t_exe) {
    return p.v * t_exe / p.R_min <= 0.3;
}

double comb_db_scan_count(const ModeParams& p, double t_exe) {
    return comb_area_approx(p, t_exe) / (p.a * p.b);
}

CombinedCoeffs comb_coeffs(const ModeParams& p) {
    return {2.0 * p.K1 * p.v * p.v * p.v / (3.0 * p.R_min * p.a * p.b), p.K1 * p.v / p.b};
}

double comb_step(const CombinedCoeffs& c, double t) { return (c.sigma * t * t + c.sigma_prime) * t; }

std::optional<double> comb_fixed_point(const CombinedCoeffs& c) {
    require(non_negative(c.sigma) && non_negative(c.sigma_prime), ErrorKind::InvalidArgument,
            "combined coefficients must be non-negative");
    if (!(c.sigma_prime < 1.0)) return std::nullopt;
    if (c.sigma == 0.0) return kInf;
    return std::sqrt((1.0 - c.sigma_prime) / c.sigma);
}

ModeVerdict comb_verdict(const CombinedCoeffs& c, double t_first) {
    require(positive(t_first), ErrorKind::InvalidArgument, "t_first must be positive");
    ModeVerdict v;
    const auto s1 = comb_fixed_point(c);
    if (!s1) {
        v.status = VerdictStatus::NotApplicable;
        v.within_stated_conditions = false;
        v.violated_conditions.emplace_back("condition1");
    } else {
        v.fixed_points = {0.0, *s1};
        if (t_first < *s1) {
            v.status = VerdictStatus::Converges;
            v.limit = 0.0;
        } else {
            v.status = VerdictStatus::Diverges;
            v.violated_conditions.emplace_back("condition2");
        }
    }

    IterationLimits limits;
    const double scale = s1 && std::isfinite(*s1) ? std::max(*s1, t_first) : std::max(1.0, t_first);
    limits.divergence_threshold = 1e6 * scale;
    limits.abs_tol = 1e-15 * std::max(1.0, t_first);
    cross_check(v, [c](double t) { return comb_step(c, t); }, t_first, limits);
    return v;
}

}  // namespace georeg
