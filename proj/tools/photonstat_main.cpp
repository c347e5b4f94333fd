// photonstat: simulate emitter time-tag streams, correlate them into g2
// curves, and fit the emitter parameters. All outputs are deterministic for
// a given config and seed.
//
// Exit codes: 0 success, 2 validation error, 3 I/O error, 4 all fits failed.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "photonstat/photonstat.hpp"

namespace ps = photonstat;
namespace fs = std::filesystem;

namespace {

struct AllFitsFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
    char b[40];
    std::snprintf(b, sizeof(b), "%.17g", v);
    return b;
}

std::string fmt_short(double v) {
    char b[40];
    std::snprintf(b, sizeof(b), "%.6g", v);
    return b;
}

std::string power_tag(double p_uW) {
    char b[40];
    std::snprintf(b, sizeof(b), "%g", p_uW);
    return b;
}

std::string strip_extension(const std::string& path) {
    fs::path p(path);
    return (p.parent_path() / p.stem()).string();
}

// manifest entries are resolved relative to the manifest file itself
std::string resolve_relative(const std::string& base_file, const std::string& rel) {
    fs::path p(rel);
    if (p.is_absolute()) return rel;
    return (fs::path(base_file).parent_path() / p).string();
}

ps::TimeTagStream read_tag_file(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw ps::IoError("cannot open " + path);
    char head[5] = {};
    probe.read(head, 5);
    probe.close();
    if (std::string(head, head + 5) == "PHTAG") return ps::read_phtag(path);
    return ps::read_tags_csv(path);
}

void add(ps::Report& r, const std::string& k, const std::string& v) { r.emplace_back(k, v); }
void add(ps::Report& r, const std::string& k, double v) { r.emplace_back(k, fmt(v)); }

void print_stream_summary(const std::string& label, const ps::TimeTagStream& s) {
    const double T = static_cast<double>(s.duration_ps) / ps::PS_PER_S;
    const double rate = T > 0 ? static_cast<double>(s.tags.size()) / T : 0.0;
    std::cout << label << " tags=" << s.tags.size() << " (A=" << s.n_a << ", B=" << s.n_b
              << ") duration_s=" << fmt_short(T) << " rate_cps=" << fmt_short(rate) << "\n";
}

struct GlobalOpts {
    ps::PipelineConfig cfg;
    int jobs = 1;
    bool csv = false;
};

// ---- simulate ----------------------------------------------------------

struct SimulateArgs {
    double power_uW = 0.0;
    bool have_power = false;
    bool all = false;
    double duration_s = 0.0;
    bool have_duration = false;
    std::string out = "out";
};

void run_one_power(const GlobalOpts& g, double p_uW, double duration_s, uint64_t seed,
                   const std::string& file, ps::ManifestEntry* rate_entry) {
    ps::RunConfig run;
    run.duration_ps = static_cast<uint64_t>(std::llround(duration_s * ps::PS_PER_S));
    run.seed = seed;
    run.power = ps::PumpPower{p_uW};
    const ps::TimeTagStream stream =
        ps::simulate_stream(g.cfg.emitter_model(), g.cfg.detection_chain(), run);
    if (g.csv)
        ps::write_tags_csv(file, stream);
    else
        ps::write_phtag(file, stream);
    print_stream_summary("P_uW=" + power_tag(p_uW) + " file=" + file, stream);
    if (rate_entry) {
        rate_entry->p_uW = p_uW;
        rate_entry->rate_cps = static_cast<double>(stream.tags.size()) / duration_s;
        rate_entry->sigma_cps = std::sqrt(static_cast<double>(stream.tags.size())) / duration_s;
    }
}

int cmd_simulate(const GlobalOpts& g, const SimulateArgs& a) {
    g.cfg.validate();
    const double duration_s = a.have_duration ? a.duration_s : g.cfg.duration_s;
    if (!(duration_s > 0.0)) throw ps::ConfigError("duration_s: must be > 0");
    const std::string ext = g.csv ? ".csv" : ".phtag";

    if (a.all) {
        fs::create_directories(a.out);
        ps::Manifest rates;
        rates.kind = ps::ManifestKind::saturation_points;
        rates.entries.resize(g.cfg.powers_uW.size());
        for (size_t i = 0; i < g.cfg.powers_uW.size(); ++i) {
            const double p = g.cfg.powers_uW[i];
            const std::string file =
                (fs::path(a.out) / ("tags_P" + power_tag(p) + "uW" + ext)).string();
            run_one_power(g, p, duration_s, ps::derive_seed(g.cfg.seed, i), file,
                          &rates.entries[i]);
        }
        const std::string rates_file = (fs::path(a.out) / "rates.csv").string();
        ps::write_manifest(rates_file, rates);
        std::cout << "wrote " << rates_file << "\n";
        return 0;
    }

    if (!a.have_power) throw ps::ConfigError("simulate: --power required unless --all is given");
    if (!(a.power_uW > 0.0)) throw ps::ConfigError("power: must be > 0");
    std::string file = a.out;
    if (fs::path(file).has_parent_path()) fs::create_directories(fs::path(file).parent_path());
    run_one_power(g, a.power_uW, duration_s, g.cfg.seed, file, nullptr);
    return 0;
}

// ---- correlate ---------------------------------------------------------

struct CorrelateArgs {
    std::string tagfile;
    int64_t bin_ps = 0;
    int64_t window_ps = 0;
    std::string out;
};

int cmd_correlate(const GlobalOpts& g, const CorrelateArgs& a) {
    const int64_t bin = a.bin_ps > 0 ? a.bin_ps : g.cfg.bin_width_ps;
    const int64_t window = a.window_ps > 0 ? a.window_ps : g.cfg.window_ps;
    const ps::TimeTagStream stream = read_tag_file(a.tagfile);
    const ps::CoincidenceHistogram hist =
        g.jobs > 1 ? ps::coincidence_histogram_parallel(stream, bin, window, g.jobs)
                   : ps::coincidence_histogram(stream, bin, window);
    const ps::G2Curve curve = ps::normalize_g2(hist);

    const std::string base = a.out.empty() ? strip_extension(a.tagfile) : a.out;
    if (fs::path(base).has_parent_path()) fs::create_directories(fs::path(base).parent_path());
    ps::write_histogram_csv(base + ".counts.csv", hist);
    ps::write_g2_csv(base + ".g2.csv", curve);

    const double g2_min = *std::min_element(curve.g2.begin(), curve.g2.end());
    std::cout << "bins=" << hist.counts.size() << " bin_ps=" << bin << " window_ps=" << window
              << " n_A=" << hist.n_a << " n_B=" << hist.n_b << " min_g2=" << fmt_short(g2_min)
              << "\nwrote " << base << ".counts.csv and " << base << ".g2.csv\n";
    return 0;
}

// ---- fit ---------------------------------------------------------------

struct FitArgs {
    std::string input;
    std::string mode = "kt-sweep";
    std::string out = "report.txt";
};

struct SweepEntry {
    double p_uW = 0.0;
    std::string file;
    ps::G2Curve curve;
    ps::FitResult fit;
    bool ok = false;
    std::string error;
};

void write_fig2_csv(const std::string& path, const SweepEntry& e) {
    const ps::detail::BinGrid grid = ps::detail::bin_grid_seconds(e.curve);
    const double kT = e.fit.param("k_T_per_s");
    double rho2 = 1.0;
    for (size_t i = 0; i < e.fit.param_names.size(); ++i)
        if (e.fit.param_names[i] == "rho") rho2 = e.fit.params[i] * e.fit.params[i];
    std::ofstream out(path);
    if (!out) throw ps::IoError("cannot open " + path + " for writing");
    out << "tau_ps,g2,sigma,model\n";
    for (size_t i = 0; i < e.curve.g2.size(); ++i) {
        const double model =
            1.0 - rho2 * ps::detail::exp_bin_average(grid.lo_s[i], grid.hi_s[i], kT);
        out << fmt(e.curve.tau_ps[i]) << ',' << fmt(e.curve.g2[i]) << ',' << fmt(e.curve.sigma[i])
            << ',' << fmt(model) << '\n';
    }
}

std::vector<SweepEntry> fit_sweep_entries(const GlobalOpts& g, const ps::Manifest& m,
                                          const std::string& manifest_path) {
    std::vector<SweepEntry> entries(m.entries.size());
    auto fit_one = [&](size_t i) {
        SweepEntry& e = entries[i];
        e.p_uW = m.entries[i].p_uW;
        e.file = resolve_relative(manifest_path, m.entries[i].g2_file);
        try {
            e.curve = ps::read_g2_csv(e.file);
            e.fit = ps::fit_antibunching(e.curve, g.cfg.fix_rho);
            e.ok = true;
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
    };
    if (g.jobs > 1) {
        std::vector<std::future<void>> futs;
        for (size_t i = 0; i < entries.size(); ++i)
            futs.push_back(std::async(std::launch::async, fit_one, i));
        for (auto& f : futs) f.get();
    } else {
        for (size_t i = 0; i < entries.size(); ++i) fit_one(i);
    }
    return entries;
}

void report_entry(ps::Report& r, const SweepEntry& e, const std::optional<double>& fix_rho) {
    const std::string pre = "P" + power_tag(e.p_uW) + "uW.";
    if (!e.ok) {
        add(r, pre + "error", e.error);
        return;
    }
    add(r, pre + "k_T_per_s", e.fit.param("k_T_per_s"));
    add(r, pre + "k_T_sigma_per_s", e.fit.sigma("k_T_per_s"));
    if (fix_rho) {
        add(r, pre + "rho", *fix_rho);
        add(r, pre + "rho_sigma", 0.0);
    } else {
        add(r, pre + "rho", e.fit.param("rho"));
        add(r, pre + "rho_sigma", e.fit.sigma("rho"));
    }
    add(r, pre + "reduced_chi2", e.fit.reduced_chi2);
    add(r, pre + "n_iter", static_cast<double>(e.fit.n_iter));
    add(r, pre + "converged", e.fit.converged ? "yes" : "no");
    if (!e.fit.flag.empty()) add(r, pre + "flag", e.fit.flag);
}

int cmd_fit_g2_modes(const GlobalOpts& g, const FitArgs& a, bool sweep_fit) {
    const ps::Manifest m = ps::read_manifest(a.input);
    if (m.kind != ps::ManifestKind::g2_files)
        throw ps::ConfigError("fit: mode '" + a.mode + "' needs a P_uW,g2_file manifest");
    std::vector<SweepEntry> entries = fit_sweep_entries(g, m, a.input);

    const std::string base = strip_extension(a.out);
    if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
    ps::Report r;
    size_t n_ok = 0;
    for (const SweepEntry& e : entries) {
        report_entry(r, e, g.cfg.fix_rho);
        if (e.ok) {
            write_fig2_csv(base + "_fig2_P" + power_tag(e.p_uW) + "uW.csv", e);
            ++n_ok;
        } else {
            std::cerr << "fit failed for P=" << power_tag(e.p_uW) << " uW: " << e.error << "\n";
        }
    }
    if (n_ok == 0) {
        ps::write_report(a.out, r);
        throw AllFitsFailed("fit: every manifest entry failed");
    }

    if (sweep_fit) {
        std::vector<ps::KtPoint> pts;
        for (const SweepEntry& e : entries)
            if (e.ok) pts.push_back({e.p_uW, e.fit.param("k_T_per_s"), e.fit.sigma("k_T_per_s")});
        if (pts.size() >= 2) {
            const ps::LifetimeFit lf = ps::fit_kT_vs_power(pts);
            add(r, "k21_per_s", lf.line.param("k21_per_s"));
            add(r, "k21_sigma_per_s", lf.line.sigma("k21_per_s"));
            add(r, "kappa_per_s_per_uW", lf.line.param("kappa_per_s_per_uW"));
            add(r, "kappa_sigma_per_s_per_uW", lf.line.sigma("kappa_per_s_per_uW"));
            add(r, "tau2_s", lf.tau2_s);
            add(r, "tau2_sigma_s", lf.tau2_sigma_s);
            add(r, "line_reduced_chi2", lf.line.reduced_chi2);
            if (!lf.flag.empty()) add(r, "lifetime_flag", lf.flag);

            // g2(0) from the lowest-power entry (narrowest k_T, best-resolved dip)
            for (const SweepEntry& e : entries) {
                if (!e.ok) continue;
                double rho, rho_sigma;
                if (g.cfg.fix_rho) {
                    rho = *g.cfg.fix_rho;
                    rho_sigma = 0.0;
                } else {
                    rho = e.fit.param("rho");
                    rho_sigma = e.fit.sigma("rho");
                }
                add(r, "g2_0", 1.0 - rho * rho);
                add(r, "g2_0_sigma", 2.0 * std::fabs(rho) * rho_sigma);
                break;
            }

            // classification needs a curve well above saturation; P_sat = k21/kappa
            const double k21 = lf.line.param("k21_per_s");
            const double kappa = lf.line.param("kappa_per_s_per_uW");
            if (k21 > 0.0 && kappa > 0.0) {
                std::vector<std::pair<double, ps::G2Curve>> sweep;
                for (const SweepEntry& e : entries)
                    if (e.ok) sweep.emplace_back(e.p_uW, e.curve);
                const ps::ClassificationResult cls = ps::classify_levels(sweep, k21 / kappa);
                add(r, "classification", ps::to_string(cls.classification));
                add(r, "bunching_amplitude", cls.amplitude);
                add(r, "bunching_amplitude_sigma", cls.amplitude_sigma);
                add(r, "max_model_g2", cls.max_model_g2);
                if (!cls.note.empty()) add(r, "classification_note", cls.note);
            } else {
                add(r, "classification", "inconclusive");
                add(r, "classification_note", "line fit gave non-positive k21 or kappa");
            }

            std::ofstream fig3(base + "_fig3.csv");
            if (!fig3) throw ps::IoError("cannot open " + base + "_fig3.csv for writing");
            fig3 << "P_uW,k_T_per_s,k_T_sigma_per_s,model_per_s\n";
            for (const ps::KtPoint& p : pts)
                fig3 << fmt(p.p_uW) << ',' << fmt(p.kT_per_s) << ',' << fmt(p.sigma_per_s) << ','
                     << fmt(lf.line.param("k21_per_s") +
                            lf.line.param("kappa_per_s_per_uW") * p.p_uW)
                     << '\n';
        } else {
            add(r, "lifetime_flag", "fewer than 2 usable powers, no extrapolation");
        }
    }

    ps::write_report(a.out, r);
    std::cout << "wrote " << a.out << " (" << n_ok << "/" << entries.size() << " entries fit)\n";
    return 0;
}

int cmd_fit_saturation(const GlobalOpts& g, const FitArgs& a) {
    const ps::Manifest m = ps::read_manifest(a.input);
    if (m.kind != ps::ManifestKind::saturation_points)
        throw ps::ConfigError("fit: mode saturation needs a P_uW,rate_cps,sigma_cps manifest");
    std::vector<ps::SaturationPoint> pts;
    double max_rate = 0.0;
    for (const ps::ManifestEntry& e : m.entries) {
        pts.push_back({e.p_uW, e.rate_cps, e.sigma_cps});
        max_rate = std::max(max_rate, e.rate_cps);
    }
    ps::FitResult fit;
    try {
        fit = ps::fit_saturation(pts);
    } catch (const std::exception& ex) {
        throw AllFitsFailed(std::string("fit_saturation failed: ") + ex.what());
    }
    if (!fit.converged) throw AllFitsFailed("fit_saturation did not converge");

    ps::Report r;
    add(r, "I_sat_cps", fit.param("I_sat_cps"));
    add(r, "I_sat_sigma_cps", fit.sigma("I_sat_cps"));
    add(r, "P_sat_uW", fit.param("P_sat_uW"));
    add(r, "P_sat_sigma_uW", fit.sigma("P_sat_uW"));
    add(r, "reduced_chi2", fit.reduced_chi2);
    add(r, "max_rate_cps", max_rate);
    // both efficiency conventions, using the configured radiative rate
    const double k21 = g.cfg.k21_per_s;
    add(r, "k21_per_s_reference", k21);
    if (max_rate <= k21) add(r, "eta_detected", ps::collection_efficiency(max_rate, k21));
    add(r, "eta_sat", fit.param("I_sat_cps") / k21);
    if (!fit.flag.empty()) add(r, "flag", fit.flag);

    const std::string base = strip_extension(a.out);
    if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
    std::ofstream fig4(base + "_fig4.csv");
    if (!fig4) throw ps::IoError("cannot open " + base + "_fig4.csv for writing");
    fig4 << "P_uW,rate_cps,sigma_cps,model_cps\n";
    for (const ps::SaturationPoint& p : pts)
        fig4 << fmt(p.p_uW) << ',' << fmt(p.rate_cps) << ',' << fmt(p.sigma_cps) << ','
             << fmt(fit.param("I_sat_cps") * p.p_uW / (fit.param("P_sat_uW") + p.p_uW)) << '\n';
    ps::write_report(a.out, r);
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

int cmd_fit_spectrum(const GlobalOpts& g, const FitArgs& a) {
    const ps::Spectrum s = ps::read_spectrum_csv(a.input);
    ps::ZplFit zf;
    try {
        zf = ps::fit_zpl(s, g.cfg.zpl_line_shape());
    } catch (const std::exception& ex) {
        throw AllFitsFailed(std::string("fit_zpl failed: ") + ex.what());
    }

    ps::Report r;
    add(r, "zpl_center_nm", zf.center_nm);
    add(r, "zpl_center_sigma_nm", zf.center_sigma_nm);
    add(r, "zpl_fwhm_nm", zf.fwhm_nm);
    add(r, "zpl_fwhm_sigma_nm", zf.fwhm_sigma_nm);
    add(r, "zpl_area", zf.zpl_area);
    add(r, "total_area", zf.total_area);
    add(r, "huang_rhys", zf.huang_rhys);
    const ps::Spectrum corrected = ps::subtract_baseline(s, ps::global_baseline_estimate(s));
    const double lo = std::max(zf.center_nm - 2.0 * zf.fwhm_nm, s.wavelength_nm.front());
    const double hi = std::min(zf.center_nm + 2.0 * zf.fwhm_nm, s.wavelength_nm.back());
    add(r, "huang_rhys_windowed_2fwhm", ps::huang_rhys_factor(corrected, lo, hi));
    add(r, "reduced_chi2", zf.fit.reduced_chi2);
    if (!zf.fit.flag.empty()) add(r, "flag", zf.fit.flag);

    const std::string base = strip_extension(a.out);
    if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
    std::ofstream fig1(base + "_fig1c.csv");
    if (!fig1) throw ps::IoError("cannot open " + base + "_fig1c.csv for writing");
    fig1 << "wavelength_nm,intensity,model\n";
    const ps::LineShape shape = g.cfg.zpl_line_shape();
    for (size_t i = 0; i < s.wavelength_nm.size(); ++i) {
        const double x = s.wavelength_nm[i];
        const double model =
            ps::detail::line_density(shape, x, zf.center_nm, zf.fwhm_nm, zf.fit.param("area")) +
            zf.base0 + zf.base1 * (x - zf.base_ref_nm);
        fig1 << fmt(x) << ',' << fmt(s.intensity[i]) << ',' << fmt(model) << '\n';
    }
    ps::write_report(a.out, r);
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

int cmd_fit(const GlobalOpts& g, const FitArgs& a) {
    if (a.mode == "g2") return cmd_fit_g2_modes(g, a, false);
    if (a.mode == "kt-sweep") return cmd_fit_g2_modes(g, a, true);
    if (a.mode == "saturation") return cmd_fit_saturation(g, a);
    if (a.mode == "spectrum") return cmd_fit_spectrum(g, a);
    throw ps::ConfigError("fit: unknown mode '" + a.mode +
                          "' (expected g2, kt-sweep, saturation, or spectrum)");
}

// ---- spectrum ----------------------------------------------------------

int cmd_spectrum_synth(const GlobalOpts& g, const std::string& out) {
    g.cfg.validate();
    const ps::Spectrum s = ps::synthesize_spectrum(
        {g.cfg.zpl_center_nm, g.cfg.zpl_fwhm_nm, g.cfg.zpl_area},
        {g.cfg.sideband_center_nm, g.cfg.sideband_fwhm_nm, g.cfg.sideband_area},
        g.cfg.spectrum_baseline, {g.cfg.grid_lo_nm, g.cfg.grid_hi_nm, g.cfg.grid_n},
        g.cfg.zpl_line_shape());
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    ps::write_spectrum_csv(out, s);
    std::cout << "wrote " << out << " (" << s.wavelength_nm.size() << " samples)\n";
    return 0;
}

// ---- report ------------------------------------------------------------

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
    ps::Report merged;
    std::optional<double> k21, i_sat, max_rate;
    for (const std::string& path : inputs) {
        const ps::Report part = ps::read_report(path);
        merged.emplace_back("# " + fs::path(path).filename().string(), "");
        for (const auto& [k, v] : part) {
            merged.emplace_back(k, v);
            if (k == "k21_per_s" || k == "k21_per_s_reference") k21 = std::stod(v);
            else if (k == "I_sat_cps") i_sat = std::stod(v);
            else if (k == "max_rate_cps") max_rate = std::stod(v);
        }
    }
    if (k21 && *k21 > 0.0 && (i_sat || max_rate)) {
        merged.emplace_back("# derived", "");
        if (max_rate) merged.emplace_back("eta_detected", fmt(*max_rate / *k21));
        if (i_sat) merged.emplace_back("eta_sat", fmt(*i_sat / *k21));
    }

    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    std::ofstream f(out);
    if (!f) throw ps::IoError("cannot open " + out + " for writing");
    for (const auto& [k, v] : merged) {
        if (!k.empty() && k[0] == '#') f << k << '\n';
        else f << k << '=' << v << '\n';
    }
    std::cout << "wrote " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-photon-emitter statistics workbench"};
    app.require_subcommand(1);

    std::string config_path;
    GlobalOpts g;
    uint64_t seed_override = 0;
    app.add_option("--config", config_path, "key=value config file");
    auto* seed_opt = app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--jobs", g.jobs, "worker threads for correlation and sweep fits")
        ->check(CLI::PositiveNumber);
    app.add_flag("--csv", g.csv, "read/write tag files as CSV instead of PHTAG binary");

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "generate a time-tag stream");
    auto* sim_power = c_sim->add_option("--power", sim.power_uW, "pump power in uW");
    c_sim->add_flag("--all", sim.all, "simulate every power in config powers_uW");
    auto* sim_dur = c_sim->add_option("--duration", sim.duration_s, "run length in seconds");
    c_sim->add_option("--out", sim.out, "output file (or directory with --all)");

    CorrelateArgs cor;
    auto* c_cor = app.add_subcommand("correlate", "histogram and normalize g2 from a tag file");
    c_cor->add_option("tagfile", cor.tagfile, "PHTAG or CSV tag file")->required();
    c_cor->add_option("--bin", cor.bin_ps, "bin width in ps");
    c_cor->add_option("--window", cor.window_ps, "correlation half-window in ps");
    c_cor->add_option("--out", cor.out, "output basename (default: tag file basename)");

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "fit curves listed in a manifest");
    c_fit->add_option("input", fit.input, "manifest CSV (or spectrum CSV for --mode spectrum)")
        ->required();
    c_fit->add_option("--mode", fit.mode, "g2 | kt-sweep | saturation | spectrum");
    c_fit->add_option("--out", fit.out, "report file");

    auto* c_spec = app.add_subcommand("spectrum", "synthesize or analyze spectra");
    c_spec->require_subcommand(1);
    std::string spec_out = "spectrum.csv";
    auto* c_spec_synth = c_spec->add_subcommand("synth", "synthesize from config");
    c_spec_synth->add_option("--out", spec_out, "output CSV");
    FitArgs spec_fit;
    spec_fit.mode = "spectrum";
    spec_fit.out = "spectrum_report.txt";
    auto* c_spec_an = c_spec->add_subcommand("analyze", "fit ZPL and Huang-Rhys factor");
    c_spec_an->add_option("input", spec_fit.input, "spectrum CSV")->required();
    c_spec_an->add_option("--out", spec_fit.out, "report file");

    std::vector<std::string> report_inputs;
    std::string report_out = "merged_report.txt";
    auto* c_rep = app.add_subcommand("report", "merge partial reports");
    c_rep->add_option("inputs", report_inputs, "report files")->required();
    c_rep->add_option("--out", report_out, "merged output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (!config_path.empty()) g.cfg = ps::load_config(config_path);
        if (seed_opt->count() > 0) g.cfg.seed = seed_override;

        if (c_sim->parsed()) {
            sim.have_power = sim_power->count() > 0;
            sim.have_duration = sim_dur->count() > 0;
            return cmd_simulate(g, sim);
        }
        if (c_cor->parsed()) return cmd_correlate(g, cor);
        if (c_fit->parsed()) return cmd_fit(g, fit);
        if (c_spec->parsed()) {
            if (c_spec_synth->parsed()) return cmd_spectrum_synth(g, spec_out);
            return cmd_fit_spectrum(g, spec_fit);
        }
        if (c_rep->parsed()) return cmd_report(report_inputs, report_out);
        std::cerr << "no subcommand given\n";
        return 2;
    } catch (const AllFitsFailed& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ps::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ps::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
