// spectrum.hpp - synthetic PL spectra and ZPL analysis.
//
// The ZPL is fit as a line shape plus linear baseline in a window around the
// tallest peak. "huang_rhys" here follows the operational usage: the fraction
// of total emission contained in the ZPL. The ZplFit value uses the fitted
// line area (tails included) over the trapezoidal total; the standalone
// windowed estimator huang_rhys_factor() integrates only inside its window,
// which clips Lorentzian tails.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "photonstat/fit.hpp"

namespace photonstat {

enum class LineShape { lorentzian, gaussian };

struct Spectrum {
    std::vector<double> wavelength_nm;  // strictly increasing
    std::vector<double> intensity;      // arbitrary units, >= 0

    void validate() const {
        if (wavelength_nm.size() != intensity.size())
            throw std::invalid_argument("Spectrum: wavelength/intensity length mismatch");
        if (wavelength_nm.size() < 16)
            throw std::invalid_argument("Spectrum: need at least 16 samples");
        for (size_t i = 0; i < wavelength_nm.size(); ++i) {
            if (!std::isfinite(wavelength_nm[i]) || !std::isfinite(intensity[i]))
                throw std::invalid_argument("Spectrum: non-finite sample");
            if (intensity[i] < 0.0)
                throw std::invalid_argument("Spectrum: negative intensity");
            if (i > 0 && !(wavelength_nm[i] > wavelength_nm[i - 1]))
                throw std::invalid_argument("Spectrum: wavelengths must be strictly increasing");
        }
    }
};

struct SpectralLine {
    double center_nm = 0.0;
    double fwhm_nm = 0.0;  // Gaussian lines interpret this as FWHM too
    double area = 0.0;
};

struct WavelengthGrid {
    double lo_nm = 0.0;
    double hi_nm = 0.0;
    int n = 0;
};

namespace detail {

inline double lorentzian_density(double x, double center, double fwhm, double area) {
    const double hw = 0.5 * fwhm;
    const double d = x - center;
    return area / std::numbers::pi * hw / (d * d + hw * hw);
}

inline double gaussian_density(double x, double center, double fwhm, double area) {
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    const double d = (x - center) / sigma;
    return area / (sigma * std::sqrt(2.0 * std::numbers::pi)) * std::exp(-0.5 * d * d);
}

inline double line_density(LineShape shape, double x, double center, double fwhm, double area) {
    return shape == LineShape::lorentzian ? lorentzian_density(x, center, fwhm, area)
                                          : gaussian_density(x, center, fwhm, area);
}

// analytic integral of the line over [lo, hi]
inline double line_integral(LineShape shape, double lo, double hi, double center, double fwhm,
                            double area) {
    if (shape == LineShape::lorentzian) {
        const double hw = 0.5 * fwhm;
        return area / std::numbers::pi *
               (std::atan((hi - center) / hw) - std::atan((lo - center) / hw));
    }
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    const double s2 = sigma * std::numbers::sqrt2;
    return 0.5 * area * (std::erf((hi - center) / s2) - std::erf((lo - center) / s2));
}

inline double trapz(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (size_t i = 1; i < x.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return s;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + m, v.end());
    double hi = v[m];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + m - 1, v.end());
    return 0.5 * (hi + v[m - 1]);
}

// robust noise scale from successive differences (Gaussian: sigma = MAD_diff / (0.6745 sqrt 2))
inline double noise_estimate(std::span<const double> y) {
    std::vector<double> d;
    d.reserve(y.size());
    for (size_t i = 1; i < y.size(); ++i) d.push_back(std::fabs(y[i] - y[i - 1]));
    return median(std::move(d)) / (0.6745 * std::numbers::sqrt2);
}

}  // namespace detail

// Lorentzian (or Gaussian) ZPL + broad Gaussian phonon sideband + constant
// baseline on a uniform grid. The grid must cover the ZPL out to +-5 FWHM.
inline Spectrum synthesize_spectrum(const SpectralLine& zpl, const SpectralLine& sideband,
                                    double baseline, const WavelengthGrid& grid,
                                    LineShape zpl_shape = LineShape::lorentzian) {
    if (!(zpl.fwhm_nm > 0.0) || !(zpl.area > 0.0))
        throw std::domain_error("synthesize_spectrum: ZPL needs positive fwhm and area");
    if (!(sideband.fwhm_nm > 0.0) || sideband.area < 0.0)
        throw std::domain_error("synthesize_spectrum: sideband needs positive width and area >= 0");
    if (baseline < 0.0) throw std::domain_error("synthesize_spectrum: negative baseline");
    if (grid.n < 16 || !(grid.hi_nm > grid.lo_nm))
        throw std::domain_error("synthesize_spectrum: grid needs hi > lo and >= 16 points");
    if (grid.lo_nm > zpl.center_nm - 5.0 * zpl.fwhm_nm ||
        grid.hi_nm < zpl.center_nm + 5.0 * zpl.fwhm_nm)
        throw std::domain_error("synthesize_spectrum: grid does not cover ZPL +-5 FWHM");

    Spectrum s;
    s.wavelength_nm.resize(static_cast<size_t>(grid.n));
    s.intensity.resize(static_cast<size_t>(grid.n));
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.lo_nm + (grid.hi_nm - grid.lo_nm) * i / (grid.n - 1);
        s.wavelength_nm[static_cast<size_t>(i)] = x;
        s.intensity[static_cast<size_t>(i)] =
            detail::line_density(zpl_shape, x, zpl.center_nm, zpl.fwhm_nm, zpl.area) +
            detail::gaussian_density(x, sideband.center_nm, sideband.fwhm_nm, sideband.area) +
            baseline;
    }
    s.validate();
    return s;
}

struct ZplFit {
    double center_nm = 0.0;
    double center_sigma_nm = 0.0;
    double fwhm_nm = 0.0;
    double fwhm_sigma_nm = 0.0;
    double zpl_area = 0.0;    // fitted line integrated over the grid span
    double total_area = 0.0;  // trapezoid of the spectrum minus its global floor
    double huang_rhys = 0.0;  // zpl_area / total_area in [0,1]
    double base0 = 0.0;       // fitted window-local baseline at base_ref_nm
    double base1 = 0.0;       // fitted window-local baseline slope per nm
    double base_ref_nm = 0.0;
    FitResult fit;            // center_nm, fwhm_nm, area, base0, base1
};

// Line + linear baseline least squares in a +-4 FWHM-estimate window around
// the tallest peak. Unweighted; parameter sigmas are scaled by sqrt(reduced
// chi2) as usual for unit-weight fits.
inline ZplFit fit_zpl(const Spectrum& s, LineShape shape = LineShape::lorentzian) {
    s.validate();
    const auto& x = s.wavelength_nm;
    const auto& y = s.intensity;
    const size_t n = x.size();

    size_t peak = 0;
    for (size_t i = 1; i < n; ++i)
        if (y[i] > y[peak]) peak = i;
    const double base0 = detail::median(y);
    const double prominence = y[peak] - base0;
    const double noise = detail::noise_estimate(y);
    if (!(prominence > 0.0) || !(prominence > 3.0 * noise))
        throw std::domain_error("fit_zpl: no ZPL found");

    // half-maximum crossings around the peak seed the FWHM
    const double half = base0 + 0.5 * prominence;
    double left = x.front(), right = x.back();
    for (size_t i = peak; i-- > 0;) {
        if (y[i] <= half) {
            const double f = (half - y[i]) / (y[i + 1] - y[i]);
            left = x[i] + f * (x[i + 1] - x[i]);
            break;
        }
    }
    for (size_t i = peak + 1; i < n; ++i) {
        if (y[i] <= half) {
            const double f = (y[i - 1] - half) / (y[i - 1] - y[i]);
            right = x[i - 1] + f * (x[i] - x[i - 1]);
            break;
        }
    }
    const double center0 = x[peak];
    const double fwhm0 = std::max(right - left, x[1] - x[0]);

    std::vector<double> wx, wy;
    for (size_t i = 0; i < n; ++i)
        if (std::fabs(x[i] - center0) <= 4.0 * fwhm0) {
            wx.push_back(x[i]);
            wy.push_back(y[i]);
        }
    if (wx.size() < 6) throw std::domain_error("fit_zpl: window holds fewer than 6 samples");

    const double area0 = shape == LineShape::lorentzian
                             ? prominence * std::numbers::pi * 0.5 * fwhm0
                             : prominence * fwhm0 / (2.0 * std::sqrt(2.0 * std::numbers::ln2)) *
                                   std::sqrt(2.0 * std::numbers::pi);
    ModelFn model = [&wx, shape, center0](std::span<const double> p, std::span<double> out) {
        for (size_t i = 0; i < out.size(); ++i)
            out[i] = detail::line_density(shape, wx[i], p[0], p[1], p[2]) + p[3] +
                     p[4] * (wx[i] - center0);
    };
    std::vector<double> unit(wx.size(), 1.0);
    FitResult fr = levmar_fit(model, wy, unit, {center0, fwhm0, area0, base0, 0.0},
                              {"center_nm", "fwhm_nm", "area", "base0", "base1"});
    // unit weights: rescale the covariance to the observed residual scatter
    const double scale = fr.reduced_chi2 > 0.0 ? fr.reduced_chi2 : 0.0;
    for (double& c : fr.covariance.a) c *= scale;
    for (size_t i = 0; i < fr.sigmas.size(); ++i) fr.sigmas[i] *= std::sqrt(scale);

    ZplFit out;
    out.fit = fr;
    out.center_nm = fr.param("center_nm");
    out.center_sigma_nm = fr.sigma("center_nm");
    out.fwhm_nm = std::fabs(fr.param("fwhm_nm"));
    out.fwhm_sigma_nm = fr.sigma("fwhm_nm");
    out.base0 = fr.param("base0");
    out.base1 = fr.param("base1");
    out.base_ref_nm = center0;

    // The window-local linear baseline absorbs the sideband flank, so it must
    // not be extrapolated across the grid. Total emission instead subtracts
    // the global floor (the constant instrument baseline for a spectrum whose
    // edges reach the background level), and the ZPL share is the fitted line
    // integrated over the same grid span.
    const double floor = *std::min_element(y.begin(), y.end());
    std::vector<double> corrected(n);
    for (size_t i = 0; i < n; ++i) corrected[i] = y[i] - floor;
    out.total_area = detail::trapz(x, corrected);
    if (!(out.total_area > 0.0)) throw std::domain_error("fit_zpl: zero total area");
    out.zpl_area = std::clamp(detail::line_integral(shape, x.front(), x.back(), out.center_nm,
                                                    out.fwhm_nm, fr.param("area")),
                              0.0, out.total_area);
    out.huang_rhys = out.zpl_area / out.total_area;
    return out;
}

// constant-background estimate: the spectrum floor
inline double global_baseline_estimate(const Spectrum& s) {
    s.validate();
    return *std::min_element(s.intensity.begin(), s.intensity.end());
}

// Windowed trapezoid ratio: integral of intensity over [window_lo, window_hi]
// divided by the integral over the whole grid, clamped to [0,1]. Expects a
// baseline-corrected spectrum.
inline double huang_rhys_factor(const Spectrum& s, double window_lo_nm, double window_hi_nm) {
    s.validate();
    const auto& x = s.wavelength_nm;
    const auto& y = s.intensity;
    if (!(window_lo_nm < window_hi_nm))
        throw std::invalid_argument("huang_rhys_factor: window_lo must be < window_hi");
    if (window_lo_nm < x.front() || window_hi_nm > x.back())
        throw std::invalid_argument("huang_rhys_factor: window outside grid");

    const double total = detail::trapz(x, y);
    if (!(total > 0.0)) throw std::domain_error("huang_rhys_factor: zero total area");

    auto value_at = [&](double q) {
        const auto it = std::upper_bound(x.begin(), x.end(), q);
        const size_t j = static_cast<size_t>(std::clamp<ptrdiff_t>(it - x.begin(), 1,
                                                                   static_cast<ptrdiff_t>(x.size() - 1)));
        const double f = (q - x[j - 1]) / (x[j] - x[j - 1]);
        return y[j - 1] + f * (y[j] - y[j - 1]);
    };
    // clipped trapezoid with interpolated window endpoints
    double win = 0.0;
    for (size_t i = 1; i < x.size(); ++i) {
        const double lo = std::max(x[i - 1], window_lo_nm);
        const double hi = std::min(x[i], window_hi_nm);
        if (hi <= lo) continue;
        win += 0.5 * (value_at(lo) + value_at(hi)) * (hi - lo);
    }
    return std::clamp(win / total, 0.0, 1.0);
}

// Baseline-corrected copy, clamped at zero so the result is a valid Spectrum.
inline Spectrum subtract_baseline(const Spectrum& s, double base0, double base1 = 0.0,
                                  double ref_nm = 0.0) {
    s.validate();
    Spectrum out = s;
    for (size_t i = 0; i < out.intensity.size(); ++i)
        out.intensity[i] =
            std::max(s.intensity[i] - (base0 + base1 * (s.wavelength_nm[i] - ref_nm)), 0.0);
    return out;
}

}  // namespace photonstat
