// emitter.hpp - rate-equation models of two- and three-level single-photon
// emitters: pump coupling, steady states, and closed-form g2(tau).
//
// Level indexing is 1-based in names (1 = ground, 2 = excited, 3 = shelf) to
// match the usual k12/k21 subscript convention; arrays are 0-based internally.
// Rates are s^-1, pump powers uW, delays in this header are seconds.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "photonstat/linalg.hpp"

namespace photonstat {

struct PumpPower {
    double uW = 0.0;
};

// k12 = kappa * P. The pump coupling kappa [s^-1/uW] is a model input; the
// default below places the half-saturation point at 224 uW for a 13.6 ns
// emitter.
inline double pump_rate_from_power(PumpPower P, double kappa_per_uW) {
    if (P.uW < 0.0) throw std::domain_error("pump power must be >= 0 uW");
    if (!(kappa_per_uW > 0.0)) throw std::domain_error("pump coupling must be > 0");
    return kappa_per_uW * P.uW;
}

// Antibunching recovery rate of a driven two-level emitter.
inline double total_rate_kT(double k12, double k21) {
    if (k12 < 0.0 || k21 < 0.0) throw std::domain_error("rates must be >= 0");
    return k12 + k21;
}

struct EmitterModel {
    int n_levels = 2;            // 2 or 3
    double k21 = 0.0;            // radiative decay 2->1 [s^-1]
    double k23 = 0.0;            // shelving 2->3 [s^-1], three-level only
    double k31 = 0.0;            // deshelving 3->1 [s^-1], three-level only
    double pump_coupling = 0.0;  // kappa [s^-1 per uW], k12 = kappa * P

    static EmitterModel two_level(double k21, double kappa) {
        EmitterModel m;
        m.n_levels = 2;
        m.k21 = k21;
        m.pump_coupling = kappa;
        m.validate();
        return m;
    }

    static EmitterModel three_level(double k21, double k23, double k31, double kappa) {
        EmitterModel m;
        m.n_levels = 3;
        m.k21 = k21;
        m.k23 = k23;
        m.k31 = k31;
        m.pump_coupling = kappa;
        m.validate();
        return m;
    }

    void validate() const {
        if (n_levels != 2 && n_levels != 3)
            throw std::domain_error("emitter model: n_levels must be 2 or 3");
        if (!(k21 > 0.0))
            throw std::domain_error("emitter model: k21 must be > 0 s^-1");
        if (k23 < 0.0 || k31 < 0.0)
            throw std::domain_error("emitter model: shelving rates must be >= 0 s^-1");
        if (n_levels == 2 && (k23 != 0.0 || k31 != 0.0))
            throw std::domain_error("emitter model: two-level topology admits only k12 and k21");
        if (!(pump_coupling > 0.0))
            throw std::domain_error("emitter model: pump coupling must be > 0 s^-1/uW");
    }

    double pump_rate(PumpPower P) const { return pump_rate_from_power(P, pump_coupling); }

    // Transition-rate matrix entries, 1-based levels; rate(i, j) is the rate
    // from level i to level j. Off-topology entries are zero.
    double rate(int from, int to, PumpPower P) const {
        if (from == 1 && to == 2) return pump_rate(P);
        if (from == 2 && to == 1) return k21;
        if (from == 2 && to == 3) return k23;
        if (from == 3 && to == 1) return k31;
        return 0.0;
    }

    // Generator G of dp/dt = G p over the occupied levels (0-based index =
    // level - 1).
    Matrix generator(PumpPower P) const {
        const int n = n_levels;
        Matrix G(n, n);
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j) {
                if (i == j) continue;
                double r = rate(i, j, P);
                G(j - 1, i - 1) += r;
                G(i - 1, i - 1) -= r;
            }
        return G;
    }
};

// g2(tau) = 1 - rho^2 exp(-(k12+k21)|tau|). rho in [0,1] is the fraction of
// detected counts coming from the emitter; uncorrelated background lifts the
// dip floor to 1 - rho^2.
inline double g2_analytic_two_level(double tau_s, double k12, double k21, double rho = 1.0) {
    if (k12 < 0.0 || k21 < 0.0) throw std::domain_error("rates must be >= 0");
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::domain_error("signal fraction rho must be in [0,1]");
    double kT = k12 + k21;
    return 1.0 - rho * rho * std::exp(-kT * std::fabs(tau_s));
}

// Relaxation spectrum of the three-level model after a detection event
// (population starts in the ground state). g2(tau) = 1 + r1 e^(lam1 tau)
// + r2 e^(lam2 tau) with r1 + r2 = -1; the positive slow-component weight is
// the bunching amplitude.
struct ThreeLevelKinetics {
    double lambda_fast = 0.0;  // more negative eigenvalue [s^-1]
    double lambda_slow = 0.0;
    double r_fast = 0.0;       // weight on exp(lambda_fast tau)
    double r_slow = 0.0;
    double p2_inf = 0.0;       // steady-state excited population
    bool confluent = false;    // repeated eigenvalue, (a + b tau) e^(lam tau) form
    bool oscillatory = false;  // complex pair (cycle-dominated corner of rate space)
};

inline ThreeLevelKinetics three_level_kinetics(double k12, double k21, double k23, double k31) {
    if (k12 < 0.0 || k23 < 0.0 || k31 < 0.0 || !(k21 > 0.0))
        throw std::domain_error("three-level g2: rates must be >= 0 with k21 > 0");
    if (k23 > 0.0 && !(k31 > 0.0))
        throw std::domain_error("three-level g2: absorbing shelf (k23 > 0, k31 = 0) has no steady state");

    // Reduced 2x2 system in (p2, p3): p2' = k12 - A p2 - k12 p3, p3' = k23 p2 - B p3
    const double A = k12 + k21 + k23;
    const double B = k31;
    const double tr = -(A + B);
    const double det = A * B + k12 * k23;
    // q = k12 / p2_inf; finite even as k12 -> 0
    const double q = A + (k23 > 0.0 ? k12 * k23 / k31 : 0.0);

    ThreeLevelKinetics k;
    k.p2_inf = (det > 0.0) ? k12 * k31 / det : 0.0;

    const double disc = tr * tr - 4.0 * det;
    const double scale = std::max(std::fabs(tr), 1.0);
    if (std::fabs(disc) <= 1e-18 * scale * scale) {
        k.confluent = true;
        k.lambda_fast = k.lambda_slow = tr / 2.0;
        k.r_fast = -1.0;             // amplitude of e^(lam tau)
        k.r_slow = q + tr / 2.0;     // amplitude of tau e^(lam tau)
        return k;
    }
    if (disc < 0.0) {
        k.oscillatory = true;
        k.lambda_fast = tr / 2.0;                  // real part
        k.lambda_slow = std::sqrt(-disc) / 2.0;    // imaginary part
        // complex residue r = (q + conj(lambda)) / (lambda - conj(lambda))
        std::complex<double> lam(k.lambda_fast, k.lambda_slow);
        std::complex<double> r = (q + std::conj(lam)) / (lam - std::conj(lam));
        k.r_fast = r.real();
        k.r_slow = r.imag();
        return k;
    }
    const double s = std::sqrt(disc);
    double lam1 = (tr - s) / 2.0;  // fast
    double lam2 = (tr + s) / 2.0;  // slow
    k.lambda_fast = lam1;
    k.lambda_slow = lam2;
    k.r_fast = (q + lam2) / (lam1 - lam2);
    k.r_slow = -1.0 - k.r_fast;
    return k;
}

inline double g2_analytic_three_level(double tau_s, double k12, double k21, double k23,
                                      double k31, double rho = 1.0) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::domain_error("signal fraction rho must be in [0,1]");
    const double t = std::fabs(tau_s);
    const ThreeLevelKinetics k = three_level_kinetics(k12, k21, k23, k31);

    double ideal;
    if (k.confluent) {
        ideal = 1.0 + (k.r_fast + k.r_slow * t) * std::exp(k.lambda_fast * t);
    } else if (k.oscillatory) {
        std::complex<double> lam(k.lambda_fast, k.lambda_slow);
        std::complex<double> r(k.r_fast, k.r_slow);
        ideal = 1.0 + 2.0 * std::real(r * std::exp(lam * t));
    } else {
        ideal = 1.0 + k.r_fast * std::exp(k.lambda_fast * t) + k.r_slow * std::exp(k.lambda_slow * t);
    }
    return 1.0 + rho * rho * (ideal - 1.0);
}

struct SteadyState {
    std::array<double, 3> occupancy{};  // levels 1..3, unused entries zero
    double emission_rate = 0.0;         // k21 * p2 [photons/s]
    double detected_rate = 0.0;         // eta * emission_rate [counts/s]
};

// Solve G p = 0 with sum(p) = 1 and evaluate the emission/detection rates.
inline SteadyState steady_state(const EmitterModel& model, PumpPower P, double eta) {
    model.validate();
    if (P.uW < 0.0) throw std::domain_error("pump power must be >= 0 uW");
    if (!(eta > 0.0 && eta <= 1.0)) throw std::domain_error("efficiency eta must be in (0,1]");

    const int n = model.n_levels;
    Matrix A = model.generator(P);
    std::vector<double> b(n, 0.0);
    for (int j = 0; j < n; ++j) A(n - 1, j) = 1.0;  // replace last balance row
    b[n - 1] = 1.0;
    std::vector<double> p = solve_linear_system(A, b);

    SteadyState s;
    for (int i = 0; i < n; ++i) s.occupancy[i] = p[i];
    s.emission_rate = model.k21 * s.occupancy[1];
    s.detected_rate = eta * s.emission_rate;
    return s;
}

// Detected rate vs pump power; reduces to I_sat P / (P_sat + P) for the
// two-level model with I_sat = eta k21 and P_sat = k21 / kappa.
inline std::vector<std::pair<double, double>> saturation_curve(const EmitterModel& model,
                                                               double eta,
                                                               std::span<const double> powers_uW) {
    double prev = -1.0;
    for (double p : powers_uW) {
        if (p < 0.0) throw std::domain_error("saturation curve: powers must be >= 0 uW");
        if (p <= prev) throw std::domain_error("saturation curve: powers must be strictly increasing");
        prev = p;
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(powers_uW.size());
    for (double p : powers_uW)
        out.emplace_back(p, steady_state(model, PumpPower{p}, eta).detected_rate);
    return out;
}

}  // namespace photonstat
