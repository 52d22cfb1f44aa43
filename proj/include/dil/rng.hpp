// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace dil {

// Counter-based deterministic generator. Every noise draw in the library is
// addressed by (seed, stream, index), so any single step of any procedure can
// be replayed without generating the draws that precede it. The core is the
// splitmix64 finalizer; normals come from Box-Muller so results do not depend
// on the platform's std::normal_distribution.
enum class Stream : std::uint64_t {
    generate_init = 1,  // initial latent of a generation pass
    step_noise = 2,     // per-step ancestral noise, indexed by source timestep
    forward_noise = 3,  // forward noising of clean data, indexed by timestep
    data = 4,           // toy data draws, indexed by sample number
    denoiser_matrix = 5,
    denoiser_cond = 6,
    denoiser_aux = 7,
};

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Prng {
public:
    static Prng substream(std::uint64_t seed, Stream stream, std::uint64_t index) {
        std::uint64_t s = mix64(seed ^ 0xA24BAED4963EE407ULL);
        s = mix64(s ^ (static_cast<std::uint64_t>(stream) * 0x9FB21C651E98DF25ULL));
        s = mix64(s ^ (index * 0xD6E8FEB86659FD93ULL));
        return Prng(s);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in (0, 1]; never zero, so it is safe under log().
    double next_open_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_open_unit();
        double u2 = (static_cast<double>(next_u64() >> 11)) * 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    std::vector<double> normal_vector(std::size_t n) {
        std::vector<double> out(n);
        for (auto& v : out) v = next_normal();
        return out;
    }

private:
    explicit Prng(std::uint64_t state) : state_(state) {}
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Per-trial seed derivation for Monte-Carlo fan-out.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(mix64(seed ^ 0x8FB8376E5A1CE94FULL) ^ (index * 0xB5297A4D3F84D5B5ULL));
}

}  // namespace dil
