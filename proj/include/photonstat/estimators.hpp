// estimators.hpp - the analysis pipeline: anti-bunching fits, lifetime
// extrapolation, saturation fit, collection efficiency, and the two- vs
// three-level call.
//
// Exponential models are evaluated as exact bin averages, not point samples,
// so fitted rates carry no binning bias even when 1/k_T spans only a few
// bins.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "photonstat/correlate.hpp"
#include "photonstat/emitter.hpp"
#include "photonstat/fit.hpp"

namespace photonstat {

namespace detail {

// Mean of exp(-k |tau|) over [lo, hi] (seconds). Handles bins on either side
// of zero and the straddling bin.
inline double exp_bin_average(double lo_s, double hi_s, double k) {
    if (!(hi_s > lo_s)) return std::exp(-k * std::fabs(lo_s));
    if (k * std::max(std::fabs(lo_s), std::fabs(hi_s)) < 1e-12) return 1.0;
    const double len = hi_s - lo_s;
    if (lo_s >= 0.0)
        return (std::exp(-k * lo_s) - std::exp(-k * hi_s)) / (k * len);
    if (hi_s <= 0.0)
        return (std::exp(k * hi_s) - std::exp(k * lo_s)) / (k * len);
    return (2.0 - std::exp(k * lo_s) - std::exp(-k * hi_s)) / (k * len);
}

struct BinGrid {
    std::vector<double> lo_s, hi_s, center_s;
};

inline BinGrid bin_grid_seconds(const G2Curve& curve) {
    BinGrid g;
    const double half = 0.5 * static_cast<double>(curve.bin_width_ps) / PS_PER_S;
    g.lo_s.reserve(curve.tau_ps.size());
    for (double tau_ps : curve.tau_ps) {
        const double c = tau_ps / PS_PER_S;
        g.center_s.push_back(c);
        g.lo_s.push_back(c - half);
        g.hi_s.push_back(c + half);
    }
    return g;
}

// |tau| where the curve first recovers to 1 - depth/e; seeds k_T. When the
// window is too short to reach the threshold, fall back to the fractional
// rise at the window edge, so slow decays seed near the right scale instead
// of orders of magnitude high.
inline double dip_crossing_tau_s(const BinGrid& grid, std::span<const double> g2,
                                 double threshold) {
    std::vector<size_t> order(g2.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
        return std::fabs(grid.center_s[i]) < std::fabs(grid.center_s[j]);
    });
    for (size_t i : order)
        if (g2[i] >= threshold) return std::max(std::fabs(grid.center_s[i]), grid.hi_s[1] - grid.lo_s[1]);

    const double span = std::fabs(grid.center_s[order.back()]);
    const double depth = std::clamp((1.0 - threshold) * std::numbers::e, 0.02, 2.0);
    double far = 0.0;
    size_t n_far = 0;
    for (size_t i = 0; i < g2.size(); ++i)
        if (std::fabs(grid.center_s[i]) > 0.75 * span) {
            far += g2[i];
            ++n_far;
        }
    far /= static_cast<double>(std::max<size_t>(n_far, 1));
    const double frac = std::clamp((far - (1.0 - depth)) / depth, 1e-3, 0.6321);
    return -span / std::log1p(-frac);
}

}  // namespace detail

// Weighted fit of g2(tau) = 1 - rho^2 exp(-k_T |tau|) to a measured curve.
// Pass fix_rho to reproduce the fixed-background variant (e.g. fix_rho = 1
// fits the bare two-level form). Parameters: k_T_per_s [, rho].
inline FitResult fit_antibunching(const G2Curve& curve, std::optional<double> fix_rho = {}) {
    if (curve.tau_ps.size() < 10)
        throw std::invalid_argument("fit_antibunching: need at least 10 bins");
    if (curve.bin_width_ps <= 0)
        throw std::invalid_argument("fit_antibunching: curve carries no bin width");
    if (fix_rho && !(*fix_rho >= 0.0 && *fix_rho <= 1.0))
        throw std::domain_error("fit_antibunching: fix_rho must be in [0,1]");

    const detail::BinGrid grid = detail::bin_grid_seconds(curve);
    const double g2_min = *std::min_element(curve.g2.begin(), curve.g2.end());
    const double depth = std::clamp(1.0 - g2_min, 0.02, 1.0);
    const double tau_star = detail::dip_crossing_tau_s(grid, curve.g2, 1.0 - depth / std::numbers::e);
    const double kT0 = 1.0 / tau_star;
    const double rho0 = std::sqrt(depth);

    FitResult res;
    if (fix_rho) {
        const double rho2 = (*fix_rho) * (*fix_rho);
        ModelFn model = [&grid, rho2](std::span<const double> p, std::span<double> out) {
            for (size_t i = 0; i < out.size(); ++i)
                out[i] = 1.0 - rho2 * detail::exp_bin_average(grid.lo_s[i], grid.hi_s[i], std::fabs(p[0]));
        };
        res = levmar_fit(model, curve.g2, curve.sigma, {kT0}, {"k_T_per_s"});
    } else {
        ModelFn model = [&grid](std::span<const double> p, std::span<double> out) {
            const double rho2 = p[1] * p[1];
            for (size_t i = 0; i < out.size(); ++i)
                out[i] = 1.0 - rho2 * detail::exp_bin_average(grid.lo_s[i], grid.hi_s[i], std::fabs(p[0]));
        };
        res = levmar_fit(model, curve.g2, curve.sigma, {kT0, rho0}, {"k_T_per_s", "rho"});
        res.params[1] = std::fabs(res.params[1]);
    }
    res.params[0] = std::fabs(res.params[0]);

    if (g2_min > 0.8)
        res.flag = res.flag.empty() ? "no antibunching" : res.flag + "; no antibunching";
    const double span = std::max(std::fabs(grid.center_s.front()), std::fabs(grid.center_s.back()));
    const double kT_hat = res.param("k_T_per_s");
    if (kT_hat > 0.0 && span < 3.0 / kT_hat)
        res.flag = res.flag.empty() ? "curve spans less than 3/k_T" : res.flag + "; curve spans less than 3/k_T";
    return res;
}

struct KtPoint {
    double p_uW;
    double kT_per_s;
    double sigma_per_s;
};

struct LifetimeFit {
    FitResult line;              // k21_per_s (intercept), kappa_per_s_per_uW (slope)
    double tau2_s = std::numeric_limits<double>::quiet_NaN();
    double tau2_sigma_s = std::numeric_limits<double>::quiet_NaN();
    std::string flag;
};

// Linear k_T(P) fit; the zero-pump intercept is k21 and tau2 = 1/k21 with the
// first-order error propagation.
inline LifetimeFit fit_kT_vs_power(std::span<const KtPoint> points) {
    if (points.size() < 2)
        throw std::invalid_argument("fit_kT_vs_power: need at least 2 powers");
    for (size_t i = 1; i < points.size(); ++i)
        if (!(points[i].p_uW > points[i - 1].p_uW))
            throw std::invalid_argument("fit_kT_vs_power: powers must be strictly increasing");

    std::vector<double> x, y, s;
    for (const KtPoint& p : points) {
        x.push_back(p.p_uW);
        y.push_back(p.kT_per_s);
        s.push_back(p.sigma_per_s);
    }
    LifetimeFit fit;
    fit.line = weighted_line_fit(x, y, s, "k21_per_s", "kappa_per_s_per_uW");
    fit.flag = fit.line.flag;
    const double k21 = fit.line.param("k21_per_s");
    if (k21 > 0.0) {
        fit.tau2_s = 1.0 / k21;
        fit.tau2_sigma_s = fit.line.sigma("k21_per_s") / (k21 * k21);
    } else {
        fit.flag = fit.flag.empty() ? "unphysical lifetime: non-positive intercept"
                                    : fit.flag + "; unphysical lifetime: non-positive intercept";
    }
    return fit;
}

struct SaturationPoint {
    double p_uW;
    double rate_cps;
    double sigma_cps;
};

// Weighted fit of I(P) = I_sat P / (P_sat + P). Parameters: I_sat_cps, P_sat_uW.
inline FitResult fit_saturation(std::span<const SaturationPoint> points) {
    if (points.size() < 3)
        throw std::invalid_argument("fit_saturation: need at least 3 points");

    std::vector<double> x, y, s;
    double rate_max = 0.0;
    for (const SaturationPoint& p : points) {
        x.push_back(p.p_uW);
        y.push_back(p.rate_cps);
        s.push_back(p.sigma_cps);
        rate_max = std::max(rate_max, p.rate_cps);
    }
    // seed: assume the data reaches about half saturation at the half-max power
    double p_half = x[x.size() / 2];
    for (size_t i = 0; i < points.size(); ++i) {
        if (y[i] >= 0.5 * rate_max) {
            if (i == 0 || y[i] == y[i - 1]) {
                p_half = x[i];
            } else {
                const double f = (0.5 * rate_max - y[i - 1]) / (y[i] - y[i - 1]);
                p_half = x[i - 1] + f * (x[i] - x[i - 1]);
            }
            break;
        }
    }
    ModelFn model = [&x](std::span<const double> p, std::span<double> out) {
        for (size_t i = 0; i < out.size(); ++i) out[i] = p[0] * x[i] / (p[1] + x[i]);
    };
    return levmar_fit(model, y, s, {2.0 * rate_max, std::max(p_half, x.front())},
                      {"I_sat_cps", "P_sat_uW"});
}

// A fully saturated two-level emitter radiates at k21, so
// eta = detected / k21.
inline double collection_efficiency(double detected_cps, double k21_per_s) {
    if (!(detected_cps > 0.0) || !(k21_per_s > 0.0))
        throw std::domain_error("collection_efficiency: rates must be > 0");
    if (detected_cps > k21_per_s)
        throw std::domain_error("collection_efficiency: detected rate exceeds emission rate k21");
    return detected_cps / k21_per_s;
}

enum class LevelClassification { two_level, three_level, inconclusive };

inline const char* to_string(LevelClassification c) {
    switch (c) {
        case LevelClassification::two_level: return "two-level";
        case LevelClassification::three_level: return "three-level";
        default: return "inconclusive";
    }
}

struct ClassificationResult {
    LevelClassification classification = LevelClassification::inconclusive;
    double amplitude = 0.0;        // fitted slow-component (bunching) amplitude
    double amplitude_sigma = 0.0;
    double max_model_g2 = 0.0;     // max of the fitted two-exponential model
    FitResult two_level_fit;
    FitResult three_level_fit;
    std::string note;
};

// Decide two-level vs three-level from the highest-power curve: fit both the
// single-exponential dip and the dip + bunching-shoulder model; call it
// three-level only when the shoulder amplitude is significant (> 3 sigma) and
// the modeled curve actually exceeds 1.05.
inline ClassificationResult classify_levels(
    const std::vector<std::pair<double, G2Curve>>& sweep, double p_sat_uW) {
    ClassificationResult out;
    if (sweep.size() < 2) {
        out.note = "insufficient data: need at least 2 powers";
        return out;
    }
    size_t top = 0;
    for (size_t i = 1; i < sweep.size(); ++i)
        if (sweep[i].first > sweep[top].first) top = i;
    if (!(sweep[top].first >= 2.0 * p_sat_uW)) {
        out.note = "insufficient high-power data: need a curve at P >= 2 P_sat";
        return out;
    }

    const G2Curve& curve = sweep[top].second;
    const detail::BinGrid grid = detail::bin_grid_seconds(curve);

    // single-exponential dip: g2 = 1 - A1 exp(-|tau|/tau1)
    const double g2_min = *std::min_element(curve.g2.begin(), curve.g2.end());
    const double g2_max = *std::max_element(curve.g2.begin(), curve.g2.end());
    const double depth = std::clamp(1.0 - g2_min, 0.02, 2.0);
    const double tau1_0 =
        detail::dip_crossing_tau_s(grid, curve.g2, 1.0 - depth / std::numbers::e);
    ModelFn dip = [&grid](std::span<const double> p, std::span<double> out) {
        for (size_t i = 0; i < out.size(); ++i)
            out[i] = 1.0 - p[0] * detail::exp_bin_average(grid.lo_s[i], grid.hi_s[i], 1.0 / std::fabs(p[1]));
    };
    out.two_level_fit =
        levmar_fit(dip, curve.g2, curve.sigma, {depth, tau1_0}, {"amp_dip", "tau1_s"});
    out.two_level_fit.params[1] = std::fabs(out.two_level_fit.params[1]);

    // dip + shoulder: g2 = 1 - A1 exp(-|tau|/tau1) + A2 exp(-|tau|/tau2)
    const double amp2_0 = std::max(g2_max - 1.0, 0.02);
    double tau2_0 = 10.0 * tau1_0;
    if (g2_max > 1.2) {
        // seed the shoulder decay from where the curve falls back toward 1
        size_t peak = 0;
        for (size_t i = 0; i < curve.g2.size(); ++i)
            if (curve.g2[i] == g2_max) peak = i;
        const double tau_peak = std::fabs(grid.center_s[peak]);
        const double level = 1.0 + (g2_max - 1.0) / std::numbers::e;
        for (size_t i = peak; i < curve.g2.size(); ++i) {
            if (grid.center_s[i] > 0 && curve.g2[i] <= level) {
                tau2_0 = std::max(grid.center_s[i] - tau_peak, 2.0 * tau1_0);
                break;
            }
        }
    }
    // with a visible shoulder, seed from the curve shape: g2(0) ~ 0 forces
    // amp1 ~ 1 + amp2, and the fast tau is where the rise crosses unity
    double amp1_0 = out.two_level_fit.param("amp_dip") + amp2_0;
    double tau1_s0 = out.two_level_fit.param("tau1_s");
    if (g2_max > 1.2) {
        amp1_0 = 1.0 + amp2_0;
        const double binw = grid.hi_s[0] - grid.lo_s[0];
        tau1_s0 = binw;
        for (size_t i = curve.g2.size() / 2; i < curve.g2.size(); ++i)
            if (curve.g2[i] >= 1.0) {
                tau1_s0 = std::max(grid.center_s[i], binw);
                break;
            }
        tau1_s0 = std::min(tau1_s0, 0.25 * tau2_0);
    }
    ModelFn shoulder = [&grid](std::span<const double> p, std::span<double> out) {
        for (size_t i = 0; i < out.size(); ++i)
            out[i] = 1.0 - p[0] * detail::exp_bin_average(grid.lo_s[i], grid.hi_s[i], 1.0 / std::fabs(p[1])) +
                     p[2] * detail::exp_bin_average(grid.lo_s[i], grid.hi_s[i], 1.0 / std::fabs(p[3]));
    };
    out.three_level_fit = levmar_fit(shoulder, curve.g2, curve.sigma,
                                     {amp1_0, tau1_s0, amp2_0, tau2_0},
                                     {"amp_dip", "tau1_s", "amp_bunch", "tau2_s"});
    out.three_level_fit.params[1] = std::fabs(out.three_level_fit.params[1]);
    out.three_level_fit.params[3] = std::fabs(out.three_level_fit.params[3]);

    out.amplitude = out.three_level_fit.param("amp_bunch");
    out.amplitude_sigma = out.three_level_fit.sigma("amp_bunch");

    // max of the fitted model over a dense |tau| grid
    {
        const double a1 = out.three_level_fit.param("amp_dip");
        const double t1 = out.three_level_fit.param("tau1_s");
        const double a2 = out.three_level_fit.param("amp_bunch");
        const double t2 = out.three_level_fit.param("tau2_s");
        const double tau_max = std::fabs(grid.center_s.back());
        double peak = 0.0;
        for (int i = 0; i <= 2000; ++i) {
            const double tau = tau_max * i / 2000.0;
            peak = std::max(peak, 1.0 - a1 * std::exp(-tau / t1) + a2 * std::exp(-tau / t2));
        }
        out.max_model_g2 = peak;
    }

    const bool significant = std::isfinite(out.amplitude_sigma) && out.amplitude_sigma > 0.0 &&
                             out.amplitude > 3.0 * out.amplitude_sigma;
    out.classification = (significant && out.max_model_g2 > 1.05)
                             ? LevelClassification::three_level
                             : LevelClassification::two_level;
    return out;
}

struct EmitterEstimate {
    double tau2_s = std::numeric_limits<double>::quiet_NaN();
    double tau2_sigma_s = std::numeric_limits<double>::quiet_NaN();
    double k21_per_s = std::numeric_limits<double>::quiet_NaN();
    double k21_sigma_per_s = std::numeric_limits<double>::quiet_NaN();
    double kappa_per_s_per_uW = std::numeric_limits<double>::quiet_NaN();
    double kappa_sigma = std::numeric_limits<double>::quiet_NaN();
    double I_sat_cps = std::numeric_limits<double>::quiet_NaN();
    double I_sat_sigma_cps = std::numeric_limits<double>::quiet_NaN();
    double P_sat_uW = std::numeric_limits<double>::quiet_NaN();
    double P_sat_sigma_uW = std::numeric_limits<double>::quiet_NaN();
    double max_rate_cps = std::numeric_limits<double>::quiet_NaN();
    double eta_detected = std::numeric_limits<double>::quiet_NaN();  // max measured rate / k21
    double eta_sat = std::numeric_limits<double>::quiet_NaN();       // I_sat / k21
    double g2_0 = std::numeric_limits<double>::quiet_NaN();
    double g2_0_sigma = std::numeric_limits<double>::quiet_NaN();
    LevelClassification classification = LevelClassification::inconclusive;
    double bunching_amplitude = std::numeric_limits<double>::quiet_NaN();
    double bunching_amplitude_sigma = std::numeric_limits<double>::quiet_NaN();
    std::string flags;

    void add_flag(const std::string& f) {
        if (f.empty()) return;
        flags = flags.empty() ? f : flags + "; " + f;
    }
};

}  // namespace photonstat
