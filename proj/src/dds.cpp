// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#include "dil/dds.hpp"

#include <cmath>

#include "dil/editing.hpp"
#include "dil/inversion.hpp"
#include "dil/rng.hpp"
#include "dil/sampler.hpp"

namespace dil {

std::string to_string(LrMode mode) {
    switch (mode) {
        case LrMode::eq_lr: return "eq_lr";
        case LrMode::constant: return "constant";
    }
    fail(ErrorCode::config, "unknown lr mode");
}

LrMode lr_mode_from_string(const std::string& s) {
    if (s == "eq_lr") return LrMode::eq_lr;
    if (s == "constant") return LrMode::constant;
    fail(ErrorCode::config, "unknown lr mode '" + s + "'");
}

Vec dds_gradient(const NoiseSchedule& schedule, const Denoiser& denoiser,
                 const Vec& xhat0, const Vec& x0, int t,
                 const Condition& c, const Condition& c_hat, const Vec& eps_tilde) {
    check_dim(xhat0, x0.size(), "dds_gradient xhat0");
    const Vec x_t = forward_noise(schedule, x0, t, eps_tilde);
    const Vec xhat_t = forward_noise(schedule, xhat0, t, eps_tilde);
    const Vec e_hat = denoiser.eps(schedule, xhat_t, t, c_hat);
    const Vec e_src = denoiser.eps(schedule, x_t, t, c);
    return sub(e_hat, e_src);
}

DdsRun dds_edit(const NoiseSchedule& schedule, const Denoiser& denoiser,
                const TimestepPlan& plan, const Vec& x0,
                const Condition& c, const Condition& c_hat,
                LrMode lr_mode, double constant_gamma, std::uint64_t seed) {
    check_dim(x0, static_cast<std::size_t>(denoiser.dim()), "dds_edit x0");
    if (lr_mode == LrMode::constant && !(constant_gamma > 0.0)) {
        fail(ErrorCode::config, "dds_edit: constant gamma must be positive");
    }

    // The optimization visits the plan's transitions at face value; the
    // evaluation-time shift is outside the scope of this iteration and is
    // ignored even when the plan carries one.
    DdsRun run;
    run.seed = seed;
    run.iterates.push_back(x0);

    Vec xhat = x0;
    for (std::size_t k = 0; k < plan.steps.size(); ++k) {
        const int t = plan.steps[k];
        const int s = plan.targets[k];
        const StepCoefficients coeff = coefficients(schedule, t, s);
        const double gamma = (lr_mode == LrMode::eq_lr) ? coeff.b / coeff.c : constant_gamma;

        Prng forward = Prng::substream(seed, Stream::forward_noise, static_cast<std::uint64_t>(t));
        const Vec eps_tilde = forward.normal_vector(x0.size());
        const Vec grad = dds_gradient(schedule, denoiser, xhat, x0, t, c, c_hat, eps_tilde);
        add_scaled_inplace(xhat, -gamma, grad);

        run.timesteps.push_back(t);
        run.gammas.push_back(gamma);
        run.iterates.push_back(xhat);
    }
    return run;
}

std::vector<EquivConfig> make_equiv_configs(const NoiseSchedule& schedule, int n,
                                            std::uint64_t base_seed) {
    std::vector<EquivConfig> configs;
    configs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        EquivConfig cfg;
        cfg.seed = derive_seed(base_seed, static_cast<std::uint64_t>(i));
        Prng prng = Prng::substream(cfg.seed, Stream::data, 777);
        cfg.dim = 2 + static_cast<int>(prng.next_u64() % 15);                   // 2..16
        cfg.K = 3 + static_cast<int>(prng.next_u64() % 8);                      // 3..10
        const int t_max = schedule.T() - 1;
        const int lo = std::max(cfg.K, 100);
        cfg.t_start = lo + static_cast<int>(prng.next_u64() % static_cast<std::uint64_t>(std::max(1, t_max - 200 - lo)));
        configs.push_back(cfg);
    }
    return configs;
}

std::vector<EquivRow> ef_dds_equivalence_report(const NoiseSchedule& schedule,
                                                const std::vector<EquivConfig>& configs,
                                                LrMode lr_mode) {
    std::vector<EquivRow> rows;
    rows.reserve(configs.size());
    for (const EquivConfig& cfg : configs) {
        const Denoiser denoiser = Denoiser::linear_random(
            cfg.dim, schedule.T(), cfg.seed,
            {Condition{0, false, std::nullopt}, Condition{1, false, std::nullopt}, Condition{2, true, std::nullopt}});
        Prng data = Prng::substream(cfg.seed, Stream::data, 0);
        const Vec x0 = data.normal_vector(static_cast<std::size_t>(cfg.dim));
        const TimestepPlan plan = make_uniform_plan(schedule, cfg.K, cfg.t_start, 0);
        const Condition& c = denoiser.condition(0);
        const Condition& c_hat = denoiser.condition(1);

        double gamma = 0.0;
        if (lr_mode == LrMode::constant) {
            // Deliberately wrong: 1.5x the mean of the exact per-step rates.
            double mean = 0.0;
            for (std::size_t k = 0; k < plan.steps.size(); ++k) {
                const StepCoefficients coeff = coefficients(schedule, plan.steps[k], plan.targets[k]);
                mean += coeff.b / coeff.c;
            }
            gamma = 1.5 * mean / static_cast<double>(plan.steps.size());
        }

        const InversionRecord record = invert(schedule, denoiser, plan, x0, c, cfg.seed);
        EditConfig edit_cfg;
        edit_cfg.mode = EditMode::ef;
        const Trajectory ef_traj = edit(schedule, denoiser, record, c_hat, edit_cfg);
        const DdsRun dds = dds_edit(schedule, denoiser, plan, x0, c, c_hat, lr_mode, gamma, cfg.seed);

        EquivRow row;
        row.dim = cfg.dim;
        row.K = cfg.K;
        row.seed = cfg.seed;
        row.lr_mode = lr_mode;
        row.max_abs_diff = max_abs_diff(ef_traj.final_state(), dds.final_iterate());
        rows.push_back(row);
    }
    return rows;
}

}  // namespace dil
