// Fitter and estimator tests. Oracles: longhand bin-averaged model data for
// exactness, hand-computed normal equations for the line fit, generating
// parameters for Monte Carlo recovery, and binomial bands for covariance
// coverage.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "photonstat/correlate.hpp"
#include "photonstat/estimators.hpp"
#include "photonstat/fit.hpp"
#include "photonstat/rng.hpp"
#include "photonstat/simulate.hpp"

using namespace photonstat;

namespace {

constexpr double K21 = 7.3529e7;
constexpr double KAPPA = 3.2825e5;

// Bin-averaged 1 - rho^2 exp(-kT |tau|), written out longhand. Bins never
// straddle zero because the window is a multiple of the bin width.
G2Curve model_curve(double kT, double rho2, std::int64_t bin_ps, std::int64_t window_ps,
                    double sigma) {
    G2Curve c;
    c.bin_width_ps = bin_ps;
    const std::int64_t n = 2 * window_ps / bin_ps;
    for (std::int64_t i = 0; i < n; ++i) {
        const double lo = static_cast<double>(-window_ps + i * bin_ps) * 1e-12;
        const double hi = lo + static_cast<double>(bin_ps) * 1e-12;
        double mean;
        if (lo >= 0.0)
            mean = (std::exp(-kT * lo) - std::exp(-kT * hi)) / (kT * (hi - lo));
        else
            mean = (std::exp(kT * hi) - std::exp(kT * lo)) / (kT * (hi - lo));
        c.tau_ps.push_back(static_cast<double>(-window_ps) + (static_cast<double>(i) + 0.5) * bin_ps);
        c.g2.push_back(1.0 - rho2 * mean);
        c.sigma.push_back(sigma);
    }
    c.n_a = c.n_b = 1;
    c.duration_ps = 1;
    return c;
}

G2Curve sim_g2(const EmitterModel& m, double p_uW, double duration_s, double eta,
               std::int64_t bin_ps, std::int64_t window_ps, std::uint64_t seed) {
    DetectionChain chain;
    chain.eta = eta;
    RunConfig run;
    run.duration_ps = static_cast<std::uint64_t>(duration_s * PS_PER_S);
    run.seed = seed;
    run.power = PumpPower{p_uW};
    const auto stream = simulate_stream(m, chain, run);
    return normalize_g2(coincidence_histogram(stream, bin_ps, window_ps));
}

}  // namespace

TEST_CASE("line fit matches hand-solved normal equations", "[fit][oracle]") {
    // x = {0,1,2}, y = {1,2,4}, unit sigma: Delta = 6, a = 5/6, b = 3/2
    const std::vector<double> x = {0, 1, 2}, y = {1, 2, 4}, s = {1, 1, 1};
    const auto r = weighted_line_fit(x, y, s);
    CHECK(r.param("intercept") == Catch::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(r.param("slope") == Catch::Approx(1.5).epsilon(1e-12));
    CHECK(r.covariance(0, 0) == Catch::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(r.covariance(1, 1) == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(r.covariance(0, 1) == Catch::Approx(-0.5).epsilon(1e-12));
    CHECK(r.chi2 == Catch::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(r.converged);
    CHECK(r.flag.empty());

    CHECK_THROWS_AS(weighted_line_fit(std::vector<double>{1, 1}, std::vector<double>{0, 1},
                                      std::vector<double>{1, 1}),
                    std::invalid_argument);
}

TEST_CASE("levmar recovers a noiseless exponential exactly", "[fit]") {
    std::vector<double> x(50), y(50), s(50, 0.1);
    for (int i = 0; i < 50; ++i) {
        x[i] = 0.1 * i;
        y[i] = 3.0 * std::exp(-0.7 * x[i]);
    }
    ModelFn model = [&x](std::span<const double> p, std::span<double> out) {
        for (size_t i = 0; i < out.size(); ++i) out[i] = p[0] * std::exp(-p[1] * x[i]);
    };
    const auto r = levmar_fit(model, y, s, {1.0, 1.0}, {"A", "k"});
    REQUIRE(r.converged);
    CHECK(r.param("A") == Catch::Approx(3.0).epsilon(1e-7));
    CHECK(r.param("k") == Catch::Approx(0.7).epsilon(1e-7));
    CHECK(r.reduced_chi2 < 1e-12);

    CHECK_THROWS_AS(levmar_fit(model, y, std::vector<double>(50, 0.0), {1.0, 1.0}, {"A", "k"}),
                    std::invalid_argument);
    CHECK_THROWS_AS(levmar_fit(model, std::vector<double>{1.0}, std::vector<double>{1.0},
                               {1.0, 1.0}, {"A", "k"}),
                    std::invalid_argument);
}

TEST_CASE("antibunching fit recovers exact model parameters", "[fit]") {
    // kT = 1e8, rho = 1, 200 bins over +-50 ns
    const auto c = model_curve(1e8, 1.0, 500, 50000, 0.01);
    const auto r = fit_antibunching(c);
    REQUIRE(r.converged);
    CHECK(r.flag.empty());
    CHECK(r.param("k_T_per_s") == Catch::Approx(1e8).epsilon(1e-6));
    CHECK(r.param("rho") == Catch::Approx(1.0).epsilon(1e-6));

    const auto rf = fit_antibunching(c, 1.0);
    REQUIRE(rf.converged);
    CHECK(rf.param("k_T_per_s") == Catch::Approx(1e8).epsilon(1e-6));
}

TEST_CASE("a 0.16 floor fits as rho squared 0.84", "[fit]") {
    const auto c = model_curve(1e8, 0.84, 500, 50000, 0.01);
    const auto r = fit_antibunching(c);
    REQUIRE(r.converged);
    const double rho = r.param("rho");
    CHECK(rho * rho == Catch::Approx(0.84).epsilon(1e-6));
    CHECK(1.0 - rho * rho == Catch::Approx(0.16).margin(1e-6));
    CHECK(r.param("k_T_per_s") == Catch::Approx(1e8).epsilon(1e-6));
}

TEST_CASE("antibunching fit flags and validation", "[fit]") {
    // flat curve: no dip anywhere
    auto flat = model_curve(1e8, 0.0, 500, 50000, 0.01);
    const auto r1 = fit_antibunching(flat);
    CHECK(r1.flag.find("no antibunching") != std::string::npos);

    // window 10 ns << 3/kT = 3 us
    const auto narrow = model_curve(1e6, 1.0, 100, 10000, 0.01);
    const auto r2 = fit_antibunching(narrow);
    CHECK(r2.flag.find("spans less than") != std::string::npos);

    G2Curve tiny = model_curve(1e8, 1.0, 500, 2000, 0.01);  // 8 bins
    CHECK_THROWS_AS(fit_antibunching(tiny), std::invalid_argument);
    CHECK_THROWS_AS(fit_antibunching(model_curve(1e8, 1.0, 500, 50000, 0.01), 1.5),
                    std::domain_error);
}

TEST_CASE("antibunching fit tracks the generating rates of a stream", "[fit][slow]") {
    const EmitterModel m = EmitterModel::two_level(K21, KAPPA);
    const double p_uW = 500.0;
    const auto curve = sim_g2(m, p_uW, 0.3, 0.2, 500, 50000, 8801);
    const auto r = fit_antibunching(curve);
    REQUIRE(r.converged);
    const double kT_true = KAPPA * p_uW + K21;
    CHECK(std::fabs(r.param("k_T_per_s") - kT_true) < 3.0 * r.sigma("k_T_per_s"));
    CHECK(r.sigma("k_T_per_s") / kT_true < 0.02);
}

TEST_CASE("exact linear sweep gives the 13.6 ns lifetime", "[fit]") {
    std::vector<KtPoint> pts;
    for (int p = 100; p <= 1000; p += 100)
        pts.push_back({static_cast<double>(p), K21 + KAPPA * p, 1e5});
    const auto fit = fit_kT_vs_power(pts);
    CHECK(fit.flag.empty());
    CHECK(fit.line.param("k21_per_s") == Catch::Approx(K21).epsilon(1e-12));
    CHECK(fit.line.param("kappa_per_s_per_uW") == Catch::Approx(KAPPA).epsilon(1e-12));
    CHECK(fit.tau2_s == Catch::Approx(1.0 / K21).epsilon(1e-9));
    CHECK(fit.tau2_s == Catch::Approx(13.6e-9).epsilon(1e-4));
    // delta-method propagation
    CHECK(fit.tau2_sigma_s ==
          Catch::Approx(fit.line.sigma("k21_per_s") / (K21 * K21)).epsilon(1e-12));
}

TEST_CASE("lifetime fit edge paths", "[fit]") {
    // two points: exact interpolation, flagged
    const std::vector<KtPoint> two = {{100.0, 1e8, 1e5}, {200.0, 1.2e8, 1e5}};
    const auto f2 = fit_kT_vs_power(two);
    CHECK(!f2.flag.empty());
    CHECK(f2.line.param("k21_per_s") == Catch::Approx(0.8e8).epsilon(1e-12));

    // negative extrapolated intercept
    const std::vector<KtPoint> bad = {{200.0, 1e7, 1e5}, {300.0, 2e7, 1e5}, {400.0, 3e7, 1e5}};
    const auto fb = fit_kT_vs_power(bad);
    CHECK(fb.flag.find("unphysical lifetime") != std::string::npos);
    CHECK(std::isnan(fb.tau2_s));

    CHECK_THROWS_AS(fit_kT_vs_power(std::vector<KtPoint>{{100.0, 1e8, 1e5}}),
                    std::invalid_argument);
    const std::vector<KtPoint> dup = {{100.0, 1e8, 1e5}, {100.0, 1.1e8, 1e5}};
    CHECK_THROWS_AS(fit_kT_vs_power(dup), std::invalid_argument);
}

TEST_CASE("saturation fit recovers exact curve parameters", "[fit]") {
    const double I_SAT = 1.8e6, P_SAT = 224.0;
    std::vector<SaturationPoint> pts;
    for (double p : {10.0, 25.0, 50.0, 100.0, 150.0, 224.0, 300.0, 500.0, 800.0, 1200.0, 2000.0})
        pts.push_back({p, I_SAT * p / (P_SAT + p), 1e3});
    const auto r = fit_saturation(pts);
    REQUIRE(r.converged);
    CHECK(r.param("I_sat_cps") == Catch::Approx(I_SAT).epsilon(1e-8));
    CHECK(r.param("P_sat_uW") == Catch::Approx(P_SAT).epsilon(1e-8));
    // half the asymptote at P = P_sat, by construction
    CHECK(pts[5].rate_cps == Catch::Approx(I_SAT / 2.0).epsilon(1e-12));

    CHECK_THROWS_AS(fit_saturation(std::vector<SaturationPoint>{{1, 1, 1}, {2, 2, 1}}),
                    std::invalid_argument);
}

TEST_CASE("saturation fit survives Poisson noise at 1 s dwell", "[fit][oracle]") {
    const double I_SAT = 1.8e6, P_SAT = 224.0;
    Rng rng(derive_seed(2711, 4));
    std::vector<SaturationPoint> pts;
    for (double p : {10.0, 25.0, 50.0, 100.0, 150.0, 224.0, 300.0, 500.0, 800.0, 1200.0, 2000.0}) {
        const double mean = I_SAT * p / (P_SAT + p);
        const double count = std::max(1.0, std::round(mean + std::sqrt(mean) * rng.normal()));
        pts.push_back({p, count, std::sqrt(count)});
    }
    // one deliberate monotonicity break, as noise can produce
    std::swap(pts[7].rate_cps, pts[8].rate_cps);
    const auto r = fit_saturation(pts);
    REQUIRE(r.converged);
    CHECK(r.param("I_sat_cps") == Catch::Approx(I_SAT).epsilon(0.03));
    CHECK(r.param("P_sat_uW") == Catch::Approx(P_SAT).epsilon(0.10));
}

TEST_CASE("collection efficiency conventions", "[fit]") {
    CHECK(collection_efficiency(1.6e6, K21) == Catch::Approx(0.02176).epsilon(1e-3));
    CHECK(collection_efficiency(K21, K21) == 1.0);
    CHECK(collection_efficiency(1.8e6, K21) == Catch::Approx(0.02448).epsilon(1e-3));
    CHECK_THROWS_AS(collection_efficiency(2.0 * K21, K21), std::domain_error);
    CHECK_THROWS_AS(collection_efficiency(-1.0, K21), std::domain_error);
    CHECK_THROWS_AS(collection_efficiency(1e6, 0.0), std::domain_error);
}

TEST_CASE("classification calls a clean two-level emitter two-level", "[fit][slow]") {
    const EmitterModel m = EmitterModel::two_level(K21, KAPPA);
    const double p_sat = K21 / KAPPA;  // 224 uW
    std::vector<std::pair<double, G2Curve>> sweep;
    sweep.emplace_back(100.0, sim_g2(m, 100.0, 0.05, 0.05, 2000, 200000, 311));
    sweep.emplace_back(1000.0, sim_g2(m, 1000.0, 0.4, 0.05, 2000, 200000, 312));
    const auto r = classify_levels(sweep, p_sat);
    CHECK(r.classification == LevelClassification::two_level);
}

TEST_CASE("classification spots the shelving state", "[fit][slow]") {
    const EmitterModel m = EmitterModel::three_level(K21, 5e6, 3e5, KAPPA);
    const double p_sat = K21 / KAPPA;
    std::vector<std::pair<double, G2Curve>> sweep;
    sweep.emplace_back(100.0, sim_g2(m, 100.0, 0.3, 0.0245, 5000, 1000000, 401));
    sweep.emplace_back(1000.0, sim_g2(m, 1000.0, 2.0, 0.0245, 5000, 1000000, 402));
    const auto r = classify_levels(sweep, p_sat);
    CHECK(r.classification == LevelClassification::three_level);
    CHECK(r.amplitude > 3.0 * r.amplitude_sigma);
    CHECK(r.max_model_g2 > 1.05);
}

TEST_CASE("classification demands high-power coverage", "[fit]") {
    const auto c = model_curve(1e8, 1.0, 500, 50000, 0.01);
    std::vector<std::pair<double, G2Curve>> one = {{100.0, c}};
    CHECK(classify_levels(one, 224.0).classification == LevelClassification::inconclusive);

    std::vector<std::pair<double, G2Curve>> low = {{100.0, c}, {300.0, c}};
    const auto r = classify_levels(low, 224.0);
    CHECK(r.classification == LevelClassification::inconclusive);
    CHECK(!r.note.empty());
}

TEST_CASE("68 percent intervals cover at the binomial rate", "[fit][oracle]") {
    // line fit: analytic covariance
    Rng rng(derive_seed(515, 1));
    int cover_line = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(10), y(10), s(10, 1.0);
        for (int i = 0; i < 10; ++i) {
            x[i] = i;
            y[i] = 2.0 + 3.0 * i + rng.normal();
        }
        const auto r = weighted_line_fit(x, y, s);
        if (std::fabs(r.param("intercept") - 2.0) < r.sigma("intercept")) ++cover_line;
    }
    CHECK(cover_line >= 60);
    CHECK(cover_line <= 76);

    // levmar covariance on the antibunching model
    int cover_kt = 0;
    for (int rep = 0; rep < 100; ++rep) {
        auto c = model_curve(1e8, 1.0, 500, 50000, 0.02);
        for (double& g : c.g2) g += 0.02 * rng.normal();
        const auto r = fit_antibunching(c);
        if (r.converged && std::fabs(r.param("k_T_per_s") - 1e8) < r.sigma("k_T_per_s"))
            ++cover_kt;
    }
    CHECK(cover_kt >= 60);
    CHECK(cover_kt <= 76);
}

TEST_CASE("parameter errors shrink like one over root duration", "[fit][slow]") {
    // rates scaled down 3x so the 8 s run stays in memory; P_sat unchanged
    const EmitterModel m = EmitterModel::two_level(K21 / 3.0, KAPPA / 3.0);
    std::vector<double> sig;
    for (double dur_s : {0.5, 2.0, 8.0}) {
        const auto c = sim_g2(m, 300.0, dur_s, 0.5, 1500, 150000, 606);
        const auto r = fit_antibunching(c);
        REQUIRE(r.converged);
        sig.push_back(r.sigma("k_T_per_s"));
    }
    for (size_t i = 1; i < sig.size(); ++i) {
        const double ratio = sig[i] / sig[i - 1];  // expect ~0.5 per 4x duration
        CHECK(ratio > 0.3);
        CHECK(ratio < 0.8);
    }
}
