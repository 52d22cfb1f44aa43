// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dil/denoiser.hpp"
#include "dil/inversion.hpp"
#include "dil/sampler.hpp"
#include "dil/schedule.hpp"

namespace dil {

enum class EditMode { ef, decomposed, pseudo, cfg_both };

std::string to_string(EditMode mode);
EditMode edit_mode_from_string(const std::string& s);

struct EditConfig {
    EditMode mode = EditMode::pseudo;
    double w = 1.5;        // pseudo-guidance scale on the cross-prompt term
    double w_p = 1.0;      // decomposed mode: cross-prompt weight
    double w_t = 1.0;      // decomposed mode: cross-trajectory weight
    double lambda_s = 1.0; // cfg_both mode: guidance strength of both passes
};

// One generative step per formulation. All take the stored correction step,
// the current edited state xhat_t, and evaluate the scheduler at the plan's
// shifted timesteps. Each reduces to ef_step at its neutral weight.

Vec ef_step(const NoiseSchedule& schedule, const Denoiser& denoiser, const RecordStep& step,
            const Vec& xhat_t, const Condition& c_src, const Condition& c_tgt, int delta);

Vec decomposed_step(const NoiseSchedule& schedule, const Denoiser& denoiser, const RecordStep& step,
                    const Vec& xhat_t, const Condition& c_src, const Condition& c_tgt, int delta,
                    double w_p, double w_t);

Vec pseudo_guided_step(const NoiseSchedule& schedule, const Denoiser& denoiser, const RecordStep& step,
                       const Vec& xhat_t, const Condition& c_src, const Condition& c_tgt, int delta,
                       double w);

Vec cfg_both_step(const NoiseSchedule& schedule, const Denoiser& denoiser, const RecordStep& step,
                  const Vec& xhat_t, const Condition& c_src, const Condition& c_tgt,
                  const Condition& phi, double lambda_s, int delta);

/// The residual that controls how far pseudo-guidance is from true
/// CFG-in-both-passes:
///   (mu(xhat,c) - mu(x,c)) - (mu(xhat,phi) - mu(x,phi))
/// evaluated through the noise-prediction differences so that for additive
/// denoisers it is exactly zero.
Vec guidance_residual(const NoiseSchedule& schedule, const Denoiser& denoiser,
                      const Vec& xhat_t, const Vec& x_t, int t_src, int t_dst,
                      const Condition& c, const Condition& phi, int delta);

/// Replay the record under a (possibly different) target condition with the
/// selected step rule. Verifies the record's schedule/denoiser hashes and the
/// cfg pairing before running.
Trajectory edit(const NoiseSchedule& schedule, const Denoiser& denoiser,
                const InversionRecord& record, const Condition& target,
                const EditConfig& config);

/// Same result as edit() on a freshly inverted record, computed without one:
/// each step's correction is derived on the fly from x0. Bitwise identical to
/// the record-based path for the same seed.
Trajectory edit_on_the_fly(const NoiseSchedule& schedule, const Denoiser& denoiser,
                           const TimestepPlan& plan, const Vec& x0, const Condition& c,
                           const Condition& target, std::uint64_t seed,
                           std::optional<double> clip_max, const EditConfig& config);

struct CfgEquivalenceRow {
    int config_index = 0;
    int dim = 0;
    int K = 0;
    std::uint64_t seed = 0;
    double w = 1.0;
    double max_abs_diff = 0.0;   // pseudo(w) vs cfg_both(lambda = w), final states
    double max_residual = 0.0;   // largest guidance-residual norm along the way
};

/// Pseudo-guidance vs CFG-in-both-passes comparison over seeded additive
/// denoiser configs, one row per (config, w).
std::vector<CfgEquivalenceRow> cfg_equivalence_report(const NoiseSchedule& schedule,
                                                      int n_configs, std::uint64_t base_seed,
                                                      const std::vector<double>& w_values);

}  // namespace dil
