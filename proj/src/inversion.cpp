// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#include "dil/inversion.hpp"

#include <cmath>

#include "dil/rng.hpp"

namespace dil {

Vec clip_correction(const Vec& v, double max_norm) {
    if (!(max_norm > 0.0)) fail(ErrorCode::config, "clip_correction: max_norm must be positive");
    if (norm2(v) <= max_norm) return v;
    // Rescaling can land a few ulps outside the ball; repeat until the
    // recomputed norm is inside so clipping is exactly idempotent.
    Vec out = v;
    for (double n = norm2(out); n > max_norm; n = norm2(out)) {
        out = scaled(out, max_norm / n);
    }
    return out;
}

namespace {

Vec noised_state(const NoiseSchedule& schedule, const Vec& x0, int t, std::uint64_t seed) {
    if (t == 0) return x0;
    Prng prng = Prng::substream(seed, Stream::forward_noise, static_cast<std::uint64_t>(t));
    Vec eps_tilde = prng.normal_vector(x0.size());
    return forward_noise(schedule, x0, t, eps_tilde);
}

Vec step_mu(const NoiseSchedule& schedule, const Denoiser& denoiser, const Vec& x,
            int t, int s, const Condition& c, int delta,
            const std::optional<CfgGuidance>& cfg) {
    if (cfg) {
        const Condition& phi = denoiser.condition(cfg->phi_id);
        if (!phi.is_null) {
            fail(ErrorCode::config, "cfg inversion: condition " + std::to_string(cfg->phi_id) + " is not the null condition");
        }
        return mu_cfg(schedule, denoiser, x, t, s, c, phi, cfg->lambda_s, delta);
    }
    return mu(schedule, denoiser, x, t, s, c, delta);
}

RecordStep build_step(const NoiseSchedule& schedule, const Denoiser& denoiser,
                      const TimestepPlan& plan, std::size_t k, const Vec& x0,
                      const Condition& c, std::uint64_t seed,
                      const std::optional<double>& clip_max,
                      const std::optional<CfgGuidance>& cfg) {
    const int t = plan.steps[k];
    const int s = plan.targets[k];
    RecordStep step;
    step.t = t;
    step.s = s;
    step.x_t = noised_state(schedule, x0, t, seed);
    const Vec x_s = noised_state(schedule, x0, s, seed);
    step.v = sub(x_s, step_mu(schedule, denoiser, step.x_t, t, s, c, plan.delta, cfg));
    const bool is_final = (k + 1 == plan.steps.size());
    if (is_final && clip_max) {
        const double n = norm2(step.v);
        if (n > *clip_max) {
            step.v = clip_correction(step.v, *clip_max);
            step.clipped = true;
        }
    }
    return step;
}

}  // namespace

InversionRecord invert(const NoiseSchedule& schedule, const Denoiser& denoiser,
                       const TimestepPlan& plan, const Vec& x0, const Condition& c,
                       std::uint64_t seed, std::optional<double> clip_max,
                       std::optional<CfgGuidance> cfg) {
    check_dim(x0, static_cast<std::size_t>(denoiser.dim()), "invert x0");
    if (clip_max && !(*clip_max > 0.0)) fail(ErrorCode::config, "invert: clip_max must be positive");

    InversionRecord record;
    record.plan = plan;
    record.seed = seed;
    record.x0 = x0;
    record.condition_id = c.id;
    record.clip_max = clip_max;
    record.cfg = cfg;
    record.steps.reserve(plan.steps.size());
    for (std::size_t k = 0; k < plan.steps.size(); ++k) {
        record.steps.push_back(build_step(schedule, denoiser, plan, k, x0, c, seed, clip_max, cfg));
    }
    return record;
}

RecordStep on_the_fly_correction(const NoiseSchedule& schedule, const Denoiser& denoiser,
                                 const TimestepPlan& plan, int step_index, const Vec& x0,
                                 const Condition& c, std::uint64_t seed,
                                 std::optional<double> clip_max,
                                 std::optional<CfgGuidance> cfg) {
    if (step_index < 0 || step_index >= plan.K()) {
        fail(ErrorCode::bounds, "on_the_fly_correction: step index " + std::to_string(step_index) +
                                    " outside the plan's " + std::to_string(plan.K()) + " steps");
    }
    check_dim(x0, static_cast<std::size_t>(denoiser.dim()), "on_the_fly x0");
    return build_step(schedule, denoiser, plan, static_cast<std::size_t>(step_index), x0, c, seed, clip_max, cfg);
}

}  // namespace dil
