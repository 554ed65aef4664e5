#include "georeg/timing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "georeg/errors.hpp"
#include "georeg/registration.hpp"

namespace georeg {

namespace {

bool non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

void require_count(double n) {
    if (!non_negative(n)) throw Error(ErrorKind::InvalidCount, "descriptor count must be non-negative");
}

double r_squared(std::span<const double> y, std::span<const double> fitted) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - fitted[i]) * (y[i] - fitted[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
    return 1.0 - ss_res / ss_tot;
}

struct Line {
    double slope;
    double intercept;
};

Line weighted_affine(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double mx = sx / sw;
    const double my = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

// y = k * x^power through the origin, ordinary least squares.
double origin_fit(std::span<const double> x, std::span<const double> y, int power) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = std::pow(x[i], power);
        num += f * y[i];
        den += f * f;
    }
    return num / den;
}

}  // namespace

void TimingParams::validate() const {
    auto check = [](double v, const char* field) {
        if (!non_negative(v)) throw Error(ErrorKind::InvalidArgument, std::string("invalid TimingParams.") + field);
    };
    check(A_c, "A_c");
    check(L, "L");
    check(t0_pair, "t0_pair");
    check(B, "B");
    check(t_c, "t_c");
    check(rho, "rho");
}

double load_time(const TimingParams& tp, double area_px) {
    if (!(area_px > 0.0) || !std::isfinite(area_px)) {
        throw Error(ErrorKind::InvalidArgument, "image area must be positive");
    }
    return tp.A_c * tp.rho * area_px + tp.L;
}

double match_time(const TimingParams& tp, double n) {
    require_count(n);
    return tp.t0_pair * n * n;
}

double threshold_time(const TimingParams& tp, double n) {
    require_count(n);
    return tp.B * n;
}

double total_exec_time(const TimingParams& tp, double n) {
    require_count(n);
    return tp.t0_pair * n * n + (tp.A_c + tp.B) * n + tp.L + tp.t_c;
}

TimingFit fit_timing(std::span<const TimingSample> samples) {
    if (!samples.empty()) {
        const bool all_equal = std::all_of(samples.begin(), samples.end(), [&](const TimingSample& s) {
            return s.n_descriptors == samples.front().n_descriptors;
        });
        if (samples.size() >= 2 && all_equal) {
            throw Error(ErrorKind::DegenerateDesign, "all samples share the same descriptor count");
        }
    }
    if (samples.size() < 3) {
        throw Error(ErrorKind::InsufficientSamples,
                    "need at least 3 samples, got " + std::to_string(samples.size()));
    }

    const std::size_t m = samples.size();
    std::vector<double> n(m), load(m), match(m), thr(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& s = samples[i];
        if (!non_negative(s.n_descriptors) || !std::isfinite(s.t_load) || !std::isfinite(s.t_match) ||
            !std::isfinite(s.t_threshold)) {
            throw Error(ErrorKind::MalformedInput, "sample " + std::to_string(i) + " is not finite/non-negative");
        }
        n[i] = s.n_descriptors;
        load[i] = s.t_load;
        match[i] = s.t_match;
        thr[i] = s.t_threshold;
    }

    // Relative weights need strictly positive load times; fall back to OLS otherwise.
    std::vector<double> w(m, 1.0);
    if (std::all_of(load.begin(), load.end(), [](double t) { return t > 0.0; })) {
        for (std::size_t i = 0; i < m; ++i) w[i] = 1.0 / (load[i] * load[i]);
    }
    Line line = weighted_affine(n, load, w);
    // One refinement with weights from the fitted curve instead of the noisy observations.
    std::vector<double> w_fit(m);
    bool refit = true;
    for (std::size_t i = 0; i < m && refit; ++i) {
        const double f = line.slope * n[i] + line.intercept;
        refit = f > 0.0;
        if (refit) w_fit[i] = 1.0 / (f * f);
    }
    if (refit) line = weighted_affine(n, load, w_fit);

    TimingFit fit;
    fit.params.A_c = line.slope;
    fit.params.L = line.intercept;
    fit.params.t0_pair = origin_fit(n, match, 2);
    fit.params.B = origin_fit(n, thr, 1);

    std::vector<double> fl(m), fm(m), ft(m);
    for (std::size_t i = 0; i < m; ++i) {
        fl[i] = line.slope * n[i] + line.intercept;
        fm[i] = fit.params.t0_pair * n[i] * n[i];
        ft[i] = fit.params.B * n[i];
    }
    fit.r2_load = r_squared(load, fl);
    fit.r2_match = r_squared(match, fm);
    fit.r2_threshold = r_squared(thr, ft);
    return fit;
}

double drift_of_matches(std::size_t n, double sigma_match) { return displacement_std(sigma_match, n); }

}  // namespace georeg
