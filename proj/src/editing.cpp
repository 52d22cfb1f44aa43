// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#include "dil/editing.hpp"

#include <cmath>

#include "dil/rng.hpp"
#include "dil/serialize.hpp"

namespace dil {

std::string to_string(EditMode mode) {
    switch (mode) {
        case EditMode::ef: return "ef";
        case EditMode::decomposed: return "decomposed";
        case EditMode::pseudo: return "pseudo";
        case EditMode::cfg_both: return "cfg_both";
    }
    fail(ErrorCode::config, "unknown edit mode");
}

EditMode edit_mode_from_string(const std::string& s) {
    if (s == "ef") return EditMode::ef;
    if (s == "decomposed") return EditMode::decomposed;
    if (s == "pseudo") return EditMode::pseudo;
    if (s == "cfg_both") return EditMode::cfg_both;
    fail(ErrorCode::config, "unknown edit mode '" + s + "'");
}

Vec ef_step(const NoiseSchedule& schedule, const Denoiser& denoiser, const RecordStep& step,
            const Vec& xhat_t, const Condition& c_src, const Condition& c_tgt, int delta) {
    (void)c_src;
    Vec out = mu(schedule, denoiser, xhat_t, step.t, step.s, c_tgt, delta);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += step.v[i];
    return out;
}

Vec decomposed_step(const NoiseSchedule& schedule, const Denoiser& denoiser, const RecordStep& step,
                    const Vec& xhat_t, const Condition& c_src, const Condition& c_tgt, int delta,
                    double w_p, double w_t) {
    const Vec mu_src = mu(schedule, denoiser, step.x_t, step.t, step.s, c_src, delta);
    const Vec mu_hat_src = mu(schedule, denoiser, xhat_t, step.t, step.s, c_src, delta);
    const Vec mu_hat_tgt = mu(schedule, denoiser, xhat_t, step.t, step.s, c_tgt, delta);
    Vec out(xhat_t.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = mu_src[i] + step.v[i] + w_p * (mu_hat_tgt[i] - mu_hat_src[i]) +
                 w_t * (mu_hat_src[i] - mu_src[i]);
    }
    return out;
}

Vec pseudo_guided_step(const NoiseSchedule& schedule, const Denoiser& denoiser, const RecordStep& step,
                       const Vec& xhat_t, const Condition& c_src, const Condition& c_tgt, int delta,
                       double w) {
    // Written against the stored correction so the cross-trajectory term needs
    // no extra prediction on the source branch: v + mu(xhat, c) restores
    // x_s + (mu(xhat, c) - mu(x, c)).
    const Vec mu_hat_src = mu(schedule, denoiser, xhat_t, step.t, step.s, c_src, delta);
    const Vec mu_hat_tgt = mu(schedule, denoiser, xhat_t, step.t, step.s, c_tgt, delta);
    Vec out(xhat_t.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = step.v[i] + mu_hat_src[i] + w * (mu_hat_tgt[i] - mu_hat_src[i]);
    }
    return out;
}

Vec cfg_both_step(const NoiseSchedule& schedule, const Denoiser& denoiser, const RecordStep& step,
                  const Vec& xhat_t, const Condition& c_src, const Condition& c_tgt,
                  const Condition& phi, double lambda_s, int delta) {
    (void)c_src;
    Vec out = mu_cfg(schedule, denoiser, xhat_t, step.t, step.s, c_tgt, phi, lambda_s, delta);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += step.v[i];
    return out;
}

Vec guidance_residual(const NoiseSchedule& schedule, const Denoiser& denoiser,
                      const Vec& xhat_t, const Vec& x_t, int t_src, int t_dst,
                      const Condition& c, const Condition& phi, int delta) {
    const StepCoefficients k = coefficients(schedule, t_src + delta, t_dst + delta);
    const int t_eval = t_src + delta;
    const Vec e_hat_c = denoiser.eps(schedule, xhat_t, t_eval, c);
    const Vec e_c = denoiser.eps(schedule, x_t, t_eval, c);
    const Vec e_hat_phi = denoiser.eps(schedule, xhat_t, t_eval, phi);
    const Vec e_phi = denoiser.eps(schedule, x_t, t_eval, phi);
    Vec out(xhat_t.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = -k.a * k.b * ((e_hat_c[i] - e_c[i]) - (e_hat_phi[i] - e_phi[i]));
    }
    return out;
}

namespace {

void check_cfg_pairing(const Denoiser& denoiser, const InversionRecord& record, const EditConfig& config) {
    if (config.mode == EditMode::cfg_both) {
        if (record.cfg) {
            if (record.cfg->lambda_s != config.lambda_s) {
                fail(ErrorCode::config,
                     "cfg_both edit: record was inverted at lambda_s=" + std::to_string(record.cfg->lambda_s) +
                         " but the edit requests lambda_s=" + std::to_string(config.lambda_s));
            }
            if (record.cfg->phi_id != denoiser.null_condition().id) {
                fail(ErrorCode::config, "cfg_both edit: record's null condition differs from the denoiser's");
            }
        } else if (config.lambda_s != 1.0) {
            fail(ErrorCode::config, "cfg_both edit at lambda_s != 1 needs a cfg-matched inversion record");
        }
    } else if (record.cfg && record.cfg->lambda_s != 1.0) {
        fail(ErrorCode::config, "record was inverted with cfg lambda_s=" + std::to_string(record.cfg->lambda_s) +
                                    "; replay it with mode cfg_both at the same strength");
    }
}

Vec apply_step(const NoiseSchedule& schedule, const Denoiser& denoiser, const RecordStep& step,
               const Vec& xhat, const Condition& c_src, const Condition& c_tgt,
               int delta, const EditConfig& config) {
    switch (config.mode) {
        case EditMode::ef:
            return ef_step(schedule, denoiser, step, xhat, c_src, c_tgt, delta);
        case EditMode::decomposed:
            return decomposed_step(schedule, denoiser, step, xhat, c_src, c_tgt, delta, config.w_p, config.w_t);
        case EditMode::pseudo:
            return pseudo_guided_step(schedule, denoiser, step, xhat, c_src, c_tgt, delta, config.w);
        case EditMode::cfg_both:
            return cfg_both_step(schedule, denoiser, step, xhat, c_src, c_tgt,
                                 denoiser.null_condition(), config.lambda_s, delta);
    }
    fail(ErrorCode::config, "unreachable edit mode");
}

void validate_weights(const EditConfig& config) {
    if (config.w < 0.0) fail(ErrorCode::config, "edit: w must be >= 0");
    if (config.lambda_s < 0.0) fail(ErrorCode::config, "edit: lambda_s must be >= 0");
}

}  // namespace

Trajectory edit(const NoiseSchedule& schedule, const Denoiser& denoiser,
                const InversionRecord& record, const Condition& target,
                const EditConfig& config) {
    validate_weights(config);
    if (!record.schedule_hash.empty() && record.schedule_hash != schedule_hash(schedule)) {
        fail(ErrorCode::integrity, "record schedule hash " + record.schedule_hash +
                                       " does not match the active schedule " + schedule_hash(schedule));
    }
    if (!record.denoiser_hash.empty() && record.denoiser_hash != denoiser_hash(denoiser)) {
        fail(ErrorCode::integrity, "record denoiser hash " + record.denoiser_hash +
                                       " does not match the active denoiser " + denoiser_hash(denoiser));
    }
    if (record.steps.empty()) fail(ErrorCode::config, "edit: record has no steps");
    check_cfg_pairing(denoiser, record, config);
    const Condition& c_src = denoiser.condition(record.condition_id);

    Trajectory traj;
    traj.kind = (target.id == record.condition_id) ? TrajectoryKind::reconstruct : TrajectoryKind::edit;
    traj.seed = record.seed;
    traj.plan = record.plan;
    traj.condition_id = target.id;

    Vec xhat = record.steps.front().x_t;
    traj.states.emplace_back(record.steps.front().t, xhat);
    for (const RecordStep& step : record.steps) {
        check_dim(step.v, xhat.size(), "record step v");
        xhat = apply_step(schedule, denoiser, step, xhat, c_src, target, record.plan.delta, config);
        traj.states.emplace_back(step.s, xhat);
    }
    return traj;
}

Trajectory edit_on_the_fly(const NoiseSchedule& schedule, const Denoiser& denoiser,
                           const TimestepPlan& plan, const Vec& x0, const Condition& c,
                           const Condition& target, std::uint64_t seed,
                           std::optional<double> clip_max, const EditConfig& config) {
    validate_weights(config);
    std::optional<CfgGuidance> cfg;
    if (config.mode == EditMode::cfg_both && config.lambda_s != 1.0) {
        cfg = CfgGuidance{denoiser.null_condition().id, config.lambda_s};
    }

    Trajectory traj;
    traj.kind = (target.id == c.id) ? TrajectoryKind::reconstruct : TrajectoryKind::edit;
    traj.seed = seed;
    traj.plan = plan;
    traj.condition_id = target.id;

    Vec xhat;
    for (int k = 0; k < plan.K(); ++k) {
        const RecordStep step = on_the_fly_correction(schedule, denoiser, plan, k, x0, c, seed, clip_max, cfg);
        if (k == 0) {
            xhat = step.x_t;
            traj.states.emplace_back(step.t, xhat);
        }
        xhat = apply_step(schedule, denoiser, step, xhat, c, target, plan.delta, config);
        traj.states.emplace_back(step.s, xhat);
    }
    return traj;
}

std::vector<CfgEquivalenceRow> cfg_equivalence_report(const NoiseSchedule& schedule,
                                                      int n_configs, std::uint64_t base_seed,
                                                      const std::vector<double>& w_values) {
    std::vector<CfgEquivalenceRow> rows;
    for (int i = 0; i < n_configs; ++i) {
        const std::uint64_t seed = derive_seed(base_seed, static_cast<std::uint64_t>(i));
        Prng dims = Prng::substream(seed, Stream::data, 999);
        const int dim = 2 + static_cast<int>(dims.next_u64() % 15);
        const int K = 1 + static_cast<int>(dims.next_u64() % 8);
        const int t_start = std::max(K, 50 + static_cast<int>(dims.next_u64() % 700));

        std::vector<ConditionParams> conds(3);
        conds[0].condition = Condition{0, false, std::nullopt};
        conds[1].condition = Condition{1, false, std::nullopt};
        conds[2].condition = Condition{2, true, std::nullopt};
        const Denoiser denoiser = Denoiser::additive(dim, schedule.T(), seed, std::move(conds));

        Prng data = Prng::substream(seed, Stream::data, 0);
        const Vec x0 = data.normal_vector(static_cast<std::size_t>(dim));
        const TimestepPlan plan = make_uniform_plan(schedule, K, t_start, 0);
        const Condition& c = denoiser.condition(0);
        const Condition& c_hat = denoiser.condition(1);
        const Condition& phi = denoiser.null_condition();

        const InversionRecord plain = invert(schedule, denoiser, plan, x0, c, seed);
        for (double w : w_values) {
            EditConfig pseudo_cfg;
            pseudo_cfg.mode = EditMode::pseudo;
            pseudo_cfg.w = w;
            const Trajectory pseudo_traj = edit(schedule, denoiser, plain, c_hat, pseudo_cfg);

            const InversionRecord guided =
                invert(schedule, denoiser, plan, x0, c, seed, std::nullopt, CfgGuidance{phi.id, w});
            EditConfig cfg_cfg;
            cfg_cfg.mode = EditMode::cfg_both;
            cfg_cfg.lambda_s = w;
            const Trajectory cfg_traj = edit(schedule, denoiser, guided, c_hat, cfg_cfg);

            CfgEquivalenceRow row;
            row.config_index = i;
            row.dim = dim;
            row.K = K;
            row.seed = seed;
            row.w = w;
            for (std::size_t si = 0; si < pseudo_traj.states.size(); ++si) {
                row.max_abs_diff = std::max(
                    row.max_abs_diff, max_abs_diff(pseudo_traj.states[si].second, cfg_traj.states[si].second));
            }
            for (std::size_t k = 0; k < plain.steps.size(); ++k) {
                const Vec residual = guidance_residual(schedule, denoiser, pseudo_traj.states[k].second,
                                                       plain.steps[k].x_t, plain.steps[k].t, plain.steps[k].s,
                                                       c, phi, plan.delta);
                row.max_residual = std::max(row.max_residual, norm2(residual));
            }
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace dil
