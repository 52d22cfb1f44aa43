// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dil/denoiser.hpp"
#include "dil/schedule.hpp"
#include "dil/vecmath.hpp"

namespace dil {

enum class TrajectoryKind { generate, reconstruct, edit, sdedit };

std::string to_string(TrajectoryKind kind);
TrajectoryKind trajectory_kind_from_string(const std::string& s);

struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::generate;
    std::uint64_t seed = 0;
    TimestepPlan plan;
    int condition_id = 0;
    std::vector<std::pair<int, Vec>> states;  // (timestep, state), t_K down to 0

    const Vec& final_state() const { return states.back().second; }
};

/// x_t = sqrt(alpha_bar(t)) x0 + sqrt(1 - alpha_bar(t)) eps_tilde.
Vec forward_noise(const NoiseSchedule& schedule, const Vec& x0, int t, const Vec& eps_tilde);

/// Posterior-mean step from t_src to t_dst. The denoiser and the transition
/// coefficients are both evaluated at the shifted pair (t_src + delta,
/// t_dst + delta); delta = 0 is the plain update.
Vec mu(const NoiseSchedule& schedule, const Denoiser& denoiser, const Vec& x,
       int t_src, int t_dst, const Condition& c, int delta);

/// mu with classifier-free guidance: mu(x, phi) + lambda * (mu(x, c) - mu(x, phi)).
/// By linearity of the scheduler step this equals guiding on the noise
/// prediction first and stepping once.
Vec mu_cfg(const NoiseSchedule& schedule, const Denoiser& denoiser, const Vec& x,
           int t_src, int t_dst, const Condition& c, const Condition& phi,
           double lambda_s, int delta);

/// Ancestral generation along the plan. The initial latent and each step's
/// noise come from (seed, stream, timestep) substreams; the final transition
/// to timestep 0 is deterministic. The injected noise uses the unshifted
/// sigma even when the plan carries a delta.
Trajectory generate(const NoiseSchedule& schedule, const Denoiser& denoiser,
                    const TimestepPlan& plan, const Condition& c, std::uint64_t seed);

/// SDEdit baseline: forward-noise x0 to the entry timestep
/// ceil(strength * t_start), then denoise under c_hat over the plan steps
/// below the entry point.
Trajectory sdedit(const NoiseSchedule& schedule, const Denoiser& denoiser,
                  const TimestepPlan& plan, const Vec& x0, double strength,
                  const Condition& c_hat, std::uint64_t seed);

}  // namespace dil
