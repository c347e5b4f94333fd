// simulate.hpp - kinetic Monte Carlo photon emission and the detection chain
//
// Emission is sampled event by event (exponential dwell in each level, branch
// by outgoing rates), so the photon statistics are exact at any rate. The
// detection chain then applies, in fixed order: binomial thinning (eta),
// beamsplitter routing, Poisson dark/background injection, per-click Gaussian
// jitter, time sorting, and non-paralyzable per-channel dead time. Timestamps
// stay continuous (double picoseconds) until the chain output, where they are
// rounded to 1 ps ticks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "photonstat/emitter.hpp"
#include "photonstat/rng.hpp"
#include "photonstat/timetags.hpp"

namespace photonstat {

struct DetectionChain {
    double eta = 1.0;               // collection-detection efficiency (0,1]
    double split_ratio = 0.5;       // probability of routing a click to channel A
    std::uint64_t dead_time_ps = 0; // non-paralyzable, per channel
    double dark_cps = 0.0;          // per channel
    double background_cps = 0.0;    // per channel
    double jitter_sigma_ps = 0.0;   // Gaussian, per click

    void validate() const {
        if (!(eta > 0.0 && eta <= 1.0))
            throw std::invalid_argument("detection chain: eta must be in (0,1]");
        if (!(split_ratio >= 0.0 && split_ratio <= 1.0))
            throw std::invalid_argument("detection chain: split_ratio must be in [0,1]");
        if (dark_cps < 0.0 || background_cps < 0.0)
            throw std::invalid_argument("detection chain: count rates must be >= 0");
        if (jitter_sigma_ps < 0.0)
            throw std::invalid_argument("detection chain: jitter_sigma_ps must be >= 0");
    }
};

struct RunConfig {
    std::uint64_t duration_ps = 0;
    std::uint64_t seed = 1;
    PumpPower power{0.0};

    void validate() const {
        if (duration_ps == 0) throw std::invalid_argument("run: duration must be > 0");
        if (power.uW < 0.0) throw std::invalid_argument("run: power must be >= 0 uW");
    }
};

namespace detail {
// Sub-stream ids for derive_seed.
inline constexpr std::uint64_t SEED_STREAM_EMISSION = 0x656d6974;  // "emit"
inline constexpr std::uint64_t SEED_STREAM_CHAIN = 0x64657463;     // "detc"

// Homogeneous Poisson arrival times on [0, duration), continuous ps.
inline std::vector<double> poisson_arrivals(double rate_cps, std::uint64_t duration_ps, Rng& rng) {
    std::vector<double> t;
    if (rate_cps <= 0.0) return t;
    const double rate_per_ps = rate_cps / PS_PER_S;
    double now = rng.exponential(rate_per_ps);
    while (now < static_cast<double>(duration_ps)) {
        t.push_back(now);
        now += rng.exponential(rate_per_ps);
    }
    return t;
}
}  // namespace detail

// Photon emission times [continuous ps] from an exact stochastic simulation of
// the level kinetics; one timestamp per radiative 2->1 transition.
inline std::vector<double> simulate_emission(const EmitterModel& model, PumpPower P,
                                             const RunConfig& run) {
    model.validate();
    run.validate();
    const double k12 = model.pump_rate(P);
    const double duration_s = static_cast<double>(run.duration_ps) / PS_PER_S;

    Rng rng(derive_seed(run.seed, detail::SEED_STREAM_EMISSION));
    std::vector<double> emissions;
    if (k12 > 0.0)
        emissions.reserve(static_cast<size_t>(
            1.2 * steady_state(model, P, 1.0).emission_rate * duration_s + 64.0));

    const double exit2 = model.k21 + model.k23;
    const double p_radiative = model.k21 / exit2;

    int level = 1;
    double t = 0.0;
    while (true) {
        double exit_rate;
        switch (level) {
            case 1: exit_rate = k12; break;
            case 2: exit_rate = exit2; break;
            default: exit_rate = model.k31; break;
        }
        if (exit_rate <= 0.0) break;  // absorbing (e.g. ground state at zero pump)
        t += rng.exponential(exit_rate);
        if (t >= duration_s) break;
        switch (level) {
            case 1:
                level = 2;
                break;
            case 2:
                if (model.k23 == 0.0 || rng.uniform() < p_radiative) {
                    level = 1;
                    emissions.push_back(t * PS_PER_S);
                } else {
                    level = 3;
                }
                break;
            default:
                level = 1;  // deshelving, non-radiative
                break;
        }
    }
    return emissions;
}

// emissions -> detected, channel-tagged, dead-time-censored integer-ps stream
inline TimeTagStream apply_detection_chain(std::span<const double> emissions_ps,
                                           const DetectionChain& chain, const RunConfig& run) {
    chain.validate();
    run.validate();
    Rng rng(derive_seed(run.seed, detail::SEED_STREAM_CHAIN));

    struct Click {
        double t_ps;
        Channel ch;
    };
    std::vector<Click> clicks;
    clicks.reserve(emissions_ps.size() + 64);

    // thin + split
    for (double t : emissions_ps) {
        if (chain.eta < 1.0 && rng.uniform() >= chain.eta) continue;
        Channel ch = (rng.uniform() < chain.split_ratio) ? Channel::A : Channel::B;
        clicks.push_back({t, ch});
    }
    // independent Poisson dark + background per channel
    const double inject_cps = chain.dark_cps + chain.background_cps;
    for (Channel ch : {Channel::A, Channel::B})
        for (double t : detail::poisson_arrivals(inject_cps, run.duration_ps, rng))
            clicks.push_back({t, ch});
    // per-click jitter
    if (chain.jitter_sigma_ps > 0.0)
        for (Click& c : clicks) c.t_ps += chain.jitter_sigma_ps * rng.normal();

    // quantize to 1 ps ticks, drop clicks jittered outside the run
    std::vector<TimeTag> tags;
    tags.reserve(clicks.size());
    for (const Click& c : clicks) {
        double r = std::round(c.t_ps);
        if (r < 0.0 || r >= static_cast<double>(run.duration_ps)) continue;
        tags.push_back({static_cast<std::uint64_t>(r), c.ch});
    }
    std::sort(tags.begin(), tags.end(), tag_order);

    // non-paralyzable dead time, per channel in time order
    if (chain.dead_time_ps > 0) {
        std::uint64_t last[2];
        bool seen[2] = {false, false};
        size_t out = 0;
        for (const TimeTag& tag : tags) {
            const int c = static_cast<int>(tag.channel);
            if (seen[c] && tag.t_ps - last[c] < chain.dead_time_ps) continue;
            seen[c] = true;
            last[c] = tag.t_ps;
            tags[out++] = tag;
        }
        tags.resize(out);
    }
    return TimeTagStream::from_tags(std::move(tags), run.duration_ps);
}

// One-call pipeline: emission simulation followed by the detection chain.
inline TimeTagStream simulate_stream(const EmitterModel& model, const DetectionChain& chain,
                                     const RunConfig& run) {
    return apply_detection_chain(simulate_emission(model, run.power, run), chain, run);
}

}  // namespace photonstat
