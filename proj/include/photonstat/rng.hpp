// rng.hpp - deterministic random sampling for the photon stream simulation
//
// All variates are derived from mt19937_64 through explicit transforms, so a
// given seed reproduces the same stream on every platform.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace photonstat {

// SplitMix64 step, used to decorrelate seed streams (emission vs detection).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed for a named sub-stream of a run. Stream ids are fixed constants so the
// emission and detection stages never share a generator state.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id) {
    return splitmix64(seed ^ splitmix64(stream_id));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform double in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // exponential dwell with the given rate [1/unit time]; rate > 0
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    // standard normal via Box-Muller, spare value cached
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi_v<double> * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace photonstat
