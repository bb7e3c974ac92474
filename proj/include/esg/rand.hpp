/*
 * Copyright (c) esgsim authors
 *
 * This source code is licensed under the Apache 2.0 license found in the
 * LICENSE file in the root directory of this source tree.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace esg {

// 64-bit FNV-1a. Also used by the dispatcher for home-invoker hashing,
// so the constants are part of the observable behavior.
inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// All randomness in a run flows from one root seed, split per subsystem by a
// fixed label so that adding draws to one subsystem never perturbs another.
inline uint64_t split_seed(uint64_t root, std::string_view label) {
    uint64_t h = fnv1a64(label);
    // splitmix64 finalizer over the combined value
    uint64_t z = root + 0x9e3779b97f4a7c15ULL + h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// mt19937_64 with portable derived draws. std::uniform_real_distribution and
// std::normal_distribution are implementation-defined, which would break
// cross-machine reproducibility of traces, so doubles are built from raw bits.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    uint64_t below(uint64_t n) {
        // multiply-shift rejection-free mapping; bias is < 2^-64 * n,
        // negligible for the small n used here
        return static_cast<uint64_t>((static_cast<__uint128_t>(eng_()) * n) >> 64);
    }

    // standard normal via Box-Muller (deterministic across platforms)
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace esg
