// config.hpp - pipeline configuration: a flat key=value text file with units
// spelled out in the key names. Unknown keys are rejected so typos cannot
// silently fall back to defaults.

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "photonstat/emitter.hpp"
#include "photonstat/simulate.hpp"
#include "photonstat/spectrum.hpp"

namespace photonstat {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Defaults are the values of the 734 nm centre workup: k21 and kappa from the
// lifetime extrapolation, eta chosen so eta*k21 matches the fitted I_sat.
struct PipelineConfig {
    // emitter
    int levels = 2;
    double k21_per_s = 7.3529e7;
    double k23_per_s = 0.0;
    double k31_per_s = 0.0;
    double kappa_per_s_per_uW = 3.2825e5;

    // detection chain
    double eta = 0.0245;
    double split_ratio = 0.5;
    double dead_time_ps = 50000.0;
    double dark_cps = 100.0;
    double background_cps = 0.0;
    double jitter_sigma_ps = 350.0;

    // correlator geometry
    int64_t bin_width_ps = 1000;
    int64_t window_ps = 100000;

    // fit options
    std::optional<double> fix_rho;

    // spectrum synthesis
    double zpl_center_nm = 734.0;
    double zpl_fwhm_nm = 4.1;
    double zpl_area = 0.81;
    std::string zpl_shape = "lorentzian";
    double sideband_center_nm = 770.0;
    double sideband_fwhm_nm = 50.0;
    double sideband_area = 0.19;
    double spectrum_baseline = 0.0;
    double grid_lo_nm = 650.0;
    double grid_hi_nm = 900.0;
    int grid_n = 1024;

    // run list
    std::vector<double> powers_uW = {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
    double duration_s = 1.0;
    uint64_t seed = 42;
    std::string output_dir = "out";

    EmitterModel emitter_model() const {
        return levels == 2 ? EmitterModel::two_level(k21_per_s, kappa_per_s_per_uW)
                           : EmitterModel::three_level(k21_per_s, k23_per_s, k31_per_s,
                                                       kappa_per_s_per_uW);
    }

    DetectionChain detection_chain() const {
        DetectionChain c;
        c.eta = eta;
        c.split_ratio = split_ratio;
        c.dead_time_ps = static_cast<uint64_t>(dead_time_ps);
        c.dark_cps = dark_cps;
        c.background_cps = background_cps;
        c.jitter_sigma_ps = jitter_sigma_ps;
        return c;
    }

    LineShape zpl_line_shape() const {
        if (zpl_shape == "lorentzian") return LineShape::lorentzian;
        if (zpl_shape == "gaussian") return LineShape::gaussian;
        throw ConfigError("zpl_shape: expected 'lorentzian' or 'gaussian', got '" + zpl_shape + "'");
    }

    void validate() const {
        auto fail = [](const std::string& msg) { throw ConfigError(msg); };
        if (levels != 2 && levels != 3) fail("levels: must be 2 or 3");
        if (!(k21_per_s > 0.0)) fail("k21_per_s: must be > 0");
        if (!(kappa_per_s_per_uW > 0.0)) fail("kappa_per_s_per_uW: must be > 0");
        if (levels == 2 && (k23_per_s != 0.0 || k31_per_s != 0.0))
            fail("k23_per_s/k31_per_s: must be 0 for a two-level model");
        if (levels == 3 && (!(k23_per_s > 0.0) || !(k31_per_s > 0.0)))
            fail("k23_per_s/k31_per_s: must be > 0 for a three-level model");
        if (!(eta > 0.0) || eta > 1.0) fail("eta: must be in (0,1]");
        if (split_ratio < 0.0 || split_ratio > 1.0) fail("split_ratio: must be in [0,1]");
        if (dead_time_ps < 0.0) fail("dead_time_ps: must be >= 0");
        if (dark_cps < 0.0) fail("dark_cps: must be >= 0");
        if (background_cps < 0.0) fail("background_cps: must be >= 0");
        if (jitter_sigma_ps < 0.0) fail("jitter_sigma_ps: must be >= 0");
        if (bin_width_ps <= 0) fail("bin_width_ps: must be > 0");
        if (window_ps <= 0 || window_ps % bin_width_ps != 0)
            fail("window_ps: must be a positive multiple of bin_width_ps");
        if (fix_rho && (*fix_rho < 0.0 || *fix_rho > 1.0)) fail("fix_rho: must be in [0,1]");
        if (!(zpl_fwhm_nm > 0.0)) fail("zpl_fwhm_nm: must be > 0");
        if (!(zpl_area > 0.0)) fail("zpl_area: must be > 0");
        zpl_line_shape();
        if (!(sideband_fwhm_nm > 0.0)) fail("sideband_fwhm_nm: must be > 0");
        if (sideband_area < 0.0) fail("sideband_area: must be >= 0");
        if (spectrum_baseline < 0.0) fail("spectrum_baseline: must be >= 0");
        if (!(grid_hi_nm > grid_lo_nm)) fail("grid_hi_nm: must be > grid_lo_nm");
        if (grid_n < 16) fail("grid_n: must be >= 16");
        if (powers_uW.empty()) fail("powers_uW: must list at least one power");
        for (size_t i = 0; i < powers_uW.size(); ++i) {
            if (!(powers_uW[i] > 0.0)) fail("powers_uW: powers must be > 0");
            if (i > 0 && !(powers_uW[i] > powers_uW[i - 1]))
                fail("powers_uW: powers must be strictly increasing");
        }
        if (!(duration_s > 0.0)) fail("duration_s: must be > 0");
        if (output_dir.empty()) fail("output_dir: must not be empty");
        emitter_model().validate();
        detection_chain().validate();
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

inline double config_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

inline int64_t config_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

inline uint64_t config_uint(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
    }
}

inline std::vector<double> config_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(config_double(key, trim(item)));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

}  // namespace detail

inline void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                               const std::string& value) {
    using detail::config_double;
    using detail::config_int;
    using detail::config_uint;
    if (key == "levels") cfg.levels = static_cast<int>(config_int(key, value));
    else if (key == "k21_per_s") cfg.k21_per_s = config_double(key, value);
    else if (key == "k23_per_s") cfg.k23_per_s = config_double(key, value);
    else if (key == "k31_per_s") cfg.k31_per_s = config_double(key, value);
    else if (key == "kappa_per_s_per_uW") cfg.kappa_per_s_per_uW = config_double(key, value);
    else if (key == "eta") cfg.eta = config_double(key, value);
    else if (key == "split_ratio") cfg.split_ratio = config_double(key, value);
    else if (key == "dead_time_ps") cfg.dead_time_ps = config_double(key, value);
    else if (key == "dark_cps") cfg.dark_cps = config_double(key, value);
    else if (key == "background_cps") cfg.background_cps = config_double(key, value);
    else if (key == "jitter_sigma_ps") cfg.jitter_sigma_ps = config_double(key, value);
    else if (key == "bin_width_ps") cfg.bin_width_ps = config_int(key, value);
    else if (key == "window_ps") cfg.window_ps = config_int(key, value);
    else if (key == "fix_rho") {
        if (value == "none") cfg.fix_rho.reset();
        else cfg.fix_rho = config_double(key, value);
    }
    else if (key == "zpl_center_nm") cfg.zpl_center_nm = config_double(key, value);
    else if (key == "zpl_fwhm_nm") cfg.zpl_fwhm_nm = config_double(key, value);
    else if (key == "zpl_area") cfg.zpl_area = config_double(key, value);
    else if (key == "zpl_shape") cfg.zpl_shape = value;
    else if (key == "sideband_center_nm") cfg.sideband_center_nm = config_double(key, value);
    else if (key == "sideband_fwhm_nm") cfg.sideband_fwhm_nm = config_double(key, value);
    else if (key == "sideband_area") cfg.sideband_area = config_double(key, value);
    else if (key == "spectrum_baseline") cfg.spectrum_baseline = config_double(key, value);
    else if (key == "grid_lo_nm") cfg.grid_lo_nm = config_double(key, value);
    else if (key == "grid_hi_nm") cfg.grid_hi_nm = config_double(key, value);
    else if (key == "grid_n") cfg.grid_n = static_cast<int>(config_int(key, value));
    else if (key == "powers_uW") cfg.powers_uW = detail::config_double_list(key, value);
    else if (key == "duration_s") cfg.duration_s = config_double(key, value);
    else if (key == "seed") cfg.seed = config_uint(key, value);
    else if (key == "output_dir") cfg.output_dir = value;
    else throw ConfigError("unknown config key '" + key + "'");
}

inline PipelineConfig parse_config_text(std::istream& in, const std::string& origin) {
    PipelineConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        try {
            apply_config_entry(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_config_text(in, path);
}

inline void write_config(std::ostream& out, const PipelineConfig& cfg) {
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "levels=" << cfg.levels << '\n'
        << "k21_per_s=" << num(cfg.k21_per_s) << '\n'
        << "k23_per_s=" << num(cfg.k23_per_s) << '\n'
        << "k31_per_s=" << num(cfg.k31_per_s) << '\n'
        << "kappa_per_s_per_uW=" << num(cfg.kappa_per_s_per_uW) << '\n'
        << "eta=" << num(cfg.eta) << '\n'
        << "split_ratio=" << num(cfg.split_ratio) << '\n'
        << "dead_time_ps=" << num(cfg.dead_time_ps) << '\n'
        << "dark_cps=" << num(cfg.dark_cps) << '\n'
        << "background_cps=" << num(cfg.background_cps) << '\n'
        << "jitter_sigma_ps=" << num(cfg.jitter_sigma_ps) << '\n'
        << "bin_width_ps=" << cfg.bin_width_ps << '\n'
        << "window_ps=" << cfg.window_ps << '\n'
        << "fix_rho=" << (cfg.fix_rho ? num(*cfg.fix_rho) : std::string("none")) << '\n'
        << "zpl_center_nm=" << num(cfg.zpl_center_nm) << '\n'
        << "zpl_fwhm_nm=" << num(cfg.zpl_fwhm_nm) << '\n'
        << "zpl_area=" << num(cfg.zpl_area) << '\n'
        << "zpl_shape=" << cfg.zpl_shape << '\n'
        << "sideband_center_nm=" << num(cfg.sideband_center_nm) << '\n'
        << "sideband_fwhm_nm=" << num(cfg.sideband_fwhm_nm) << '\n'
        << "sideband_area=" << num(cfg.sideband_area) << '\n'
        << "spectrum_baseline=" << num(cfg.spectrum_baseline) << '\n'
        << "grid_lo_nm=" << num(cfg.grid_lo_nm) << '\n'
        << "grid_hi_nm=" << num(cfg.grid_hi_nm) << '\n'
        << "grid_n=" << cfg.grid_n << '\n';
    out << "powers_uW=";
    for (size_t i = 0; i < cfg.powers_uW.size(); ++i)
        out << (i ? "," : "") << num(cfg.powers_uW[i]);
    out << '\n'
        << "duration_s=" << num(cfg.duration_s) << '\n'
        << "seed=" << cfg.seed << '\n'
        << "output_dir=" << cfg.output_dir << '\n';
}

}  // namespace photonstat
