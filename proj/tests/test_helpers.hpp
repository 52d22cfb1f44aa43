// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "dil/denoiser.hpp"
#include "dil/schedule.hpp"

namespace dil::testing {

inline NoiseSchedule sd_schedule() { return NoiseSchedule::build({}); }

inline ConditionParams gauss_cond(int id, bool is_null, Vec mean, double scale) {
    ConditionParams p;
    p.condition = Condition{id, is_null, std::nullopt};
    p.components.push_back(GmmComponent{1.0, std::move(mean), scale});
    return p;
}

// Unit gaussian under every condition; the Bayes prediction then collapses to
// sqrt(1 - alpha_bar) * x, which many closed-form oracles rely on.
inline Denoiser matched_unit_denoiser(int dim, int T = 1000) {
    const Vec zero(static_cast<std::size_t>(dim), 0.0);
    return Denoiser::gaussian(dim, T,
                              {gauss_cond(0, false, zero, 1.0), gauss_cond(1, false, zero, 1.0),
                               gauss_cond(2, true, zero, 1.0)});
}

// Huge prior scale makes the noise prediction vanish to ~1e-19 of the state:
// a practical stand-in for eps == 0.
inline Denoiser near_zero_denoiser(int dim, int T = 1000) {
    const Vec zero(static_cast<std::size_t>(dim), 0.0);
    return Denoiser::gaussian(dim, T,
                              {gauss_cond(0, false, zero, 1e12), gauss_cond(1, false, zero, 1e12),
                               gauss_cond(2, true, zero, 1e12)});
}

// Two well-separated modes (conditions 0/1) plus a broad null condition:
// the editing toy used across the editing and acceptance suites.
inline Denoiser two_mode_toy(int dim, double sep = 0.75, double scale = 1.25, int T = 1000) {
    const std::size_t n = static_cast<std::size_t>(dim);
    Vec mean_a(n, sep), mean_b(n, -sep), mean_phi(n, 0.0);
    std::vector<ConditionParams> conds;
    conds.push_back(gauss_cond(0, false, mean_a, scale));
    conds.push_back(gauss_cond(1, false, mean_b, scale));
    conds.push_back(gauss_cond(2, true, mean_phi, 1.6));
    return Denoiser::gmm(dim, T, std::move(conds));
}

inline Denoiser random_linear_denoiser(int dim, std::uint64_t seed, int T = 1000) {
    return Denoiser::linear_random(dim, T, seed,
                                   {Condition{0, false, std::nullopt}, Condition{1, false, std::nullopt},
                                    Condition{2, true, std::nullopt}});
}

inline Denoiser additive_denoiser(int dim, std::uint64_t seed, int T = 1000) {
    std::vector<ConditionParams> conds(3);
    conds[0].condition = Condition{0, false, std::nullopt};
    conds[1].condition = Condition{1, false, std::nullopt};
    conds[2].condition = Condition{2, true, std::nullopt};
    return Denoiser::additive(dim, T, seed, std::move(conds));
}

}  // namespace dil::testing
