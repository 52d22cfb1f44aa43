// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#include "dil/sampler.hpp"

#include <cmath>

#include "dil/rng.hpp"

namespace dil {

std::string to_string(TrajectoryKind kind) {
    switch (kind) {
        case TrajectoryKind::generate: return "generate";
        case TrajectoryKind::reconstruct: return "reconstruct";
        case TrajectoryKind::edit: return "edit";
        case TrajectoryKind::sdedit: return "sdedit";
    }
    fail(ErrorCode::config, "unknown trajectory kind");
}

TrajectoryKind trajectory_kind_from_string(const std::string& s) {
    if (s == "generate") return TrajectoryKind::generate;
    if (s == "reconstruct") return TrajectoryKind::reconstruct;
    if (s == "edit") return TrajectoryKind::edit;
    if (s == "sdedit") return TrajectoryKind::sdedit;
    fail(ErrorCode::config, "unknown trajectory kind '" + s + "'");
}

Vec forward_noise(const NoiseSchedule& schedule, const Vec& x0, int t, const Vec& eps_tilde) {
    check_dim(eps_tilde, x0.size(), "forward_noise eps");
    const double croot = std::sqrt(schedule.alpha_bar(t));
    const double droot = std::sqrt(1.0 - schedule.alpha_bar(t));
    Vec out(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) out[i] = croot * x0[i] + droot * eps_tilde[i];
    return out;
}

Vec mu(const NoiseSchedule& schedule, const Denoiser& denoiser, const Vec& x,
       int t_src, int t_dst, const Condition& c, int delta) {
    if (delta < 0) fail(ErrorCode::config, "mu: delta must be >= 0");
    const StepCoefficients k = coefficients(schedule, t_src + delta, t_dst + delta);
    const Vec e = denoiser.eps(schedule, x, t_src + delta, c);
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = k.a * (x[i] - k.b * e[i]);
    return out;
}

Vec mu_cfg(const NoiseSchedule& schedule, const Denoiser& denoiser, const Vec& x,
           int t_src, int t_dst, const Condition& c, const Condition& phi,
           double lambda_s, int delta) {
    if (lambda_s < 0.0) fail(ErrorCode::config, "mu_cfg: lambda_s must be >= 0");
    const Vec mu_phi = mu(schedule, denoiser, x, t_src, t_dst, phi, delta);
    const Vec mu_c = mu(schedule, denoiser, x, t_src, t_dst, c, delta);
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = mu_phi[i] + lambda_s * (mu_c[i] - mu_phi[i]);
    return out;
}

Trajectory generate(const NoiseSchedule& schedule, const Denoiser& denoiser,
                    const TimestepPlan& plan, const Condition& c, std::uint64_t seed) {
    const std::size_t dim = static_cast<std::size_t>(denoiser.dim());
    Trajectory traj;
    traj.kind = TrajectoryKind::generate;
    traj.seed = seed;
    traj.plan = plan;
    traj.condition_id = c.id;

    Prng init = Prng::substream(seed, Stream::generate_init, 0);
    Vec x = init.normal_vector(dim);
    traj.states.emplace_back(plan.steps.front(), x);

    for (std::size_t k = 0; k < plan.steps.size(); ++k) {
        const int t = plan.steps[k];
        const int s = plan.targets[k];
        x = mu(schedule, denoiser, x, t, s, c, plan.delta);
        // Ancestral noise at the *unshifted* transition; the step to 0 is
        // noiseless because sigma(. -> 0) vanishes.
        const double sigma = coefficients(schedule, t, s).sigma;
        if (sigma > 0.0) {
            Prng step = Prng::substream(seed, Stream::step_noise, static_cast<std::uint64_t>(t));
            Vec z = step.normal_vector(dim);
            add_scaled_inplace(x, sigma, z);
        }
        traj.states.emplace_back(s, x);
    }
    return traj;
}

Trajectory sdedit(const NoiseSchedule& schedule, const Denoiser& denoiser,
                  const TimestepPlan& plan, const Vec& x0, double strength,
                  const Condition& c_hat, std::uint64_t seed) {
    if (!(strength > 0.0) || strength > 1.0) {
        fail(ErrorCode::config, "sdedit: strength must be in (0, 1]");
    }
    check_dim(x0, static_cast<std::size_t>(denoiser.dim()), "sdedit x0");

    const int entry = static_cast<int>(std::ceil(strength * plan.t_start()));
    // Entry joins the plan's grid as the first source step; plan steps at or
    // above it are dropped.
    std::vector<int> steps{entry};
    for (int t : plan.steps) {
        if (t < entry) steps.push_back(t);
    }
    TimestepPlan entry_plan = make_explicit_plan(schedule, std::move(steps), plan.delta);

    Prng forward = Prng::substream(seed, Stream::forward_noise, static_cast<std::uint64_t>(entry));
    Vec eps_tilde = forward.normal_vector(x0.size());
    Vec x = forward_noise(schedule, x0, entry, eps_tilde);

    Trajectory traj;
    traj.kind = TrajectoryKind::sdedit;
    traj.seed = seed;
    traj.plan = entry_plan;
    traj.condition_id = c_hat.id;
    traj.states.emplace_back(entry, x);

    for (std::size_t k = 0; k < entry_plan.steps.size(); ++k) {
        const int t = entry_plan.steps[k];
        const int s = entry_plan.targets[k];
        x = mu(schedule, denoiser, x, t, s, c_hat, entry_plan.delta);
        const double sigma = coefficients(schedule, t, s).sigma;
        if (sigma > 0.0) {
            Prng step = Prng::substream(seed, Stream::step_noise, static_cast<std::uint64_t>(t));
            Vec z = step.normal_vector(x.size());
            add_scaled_inplace(x, sigma, z);
        }
        traj.states.emplace_back(s, x);
    }
    return traj;
}

}  // namespace dil
