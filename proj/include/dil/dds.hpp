// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dil/denoiser.hpp"
#include "dil/schedule.hpp"
#include "dil/vecmath.hpp"

namespace dil {

enum class LrMode { eq_lr, constant };

std::string to_string(LrMode mode);
LrMode lr_mode_from_string(const std::string& s);

struct DdsRun {
    std::uint64_t seed = 0;
    std::vector<int> timesteps;     // visited source timesteps, descending
    std::vector<double> gammas;     // learning rate used at each of them
    std::vector<Vec> iterates;      // optimized clean image, initial first
    const Vec& final_iterate() const { return iterates.back(); }
};

/// eps(xhat noised to t, c_hat) - eps(x noised to t, c), both branches noised
/// with the same eps_tilde draw.
Vec dds_gradient(const NoiseSchedule& schedule, const Denoiser& denoiser,
                 const Vec& xhat0, const Vec& x0, int t,
                 const Condition& c, const Condition& c_hat, const Vec& eps_tilde);

/// Delta-denoising-score optimization over the plan's timesteps taken
/// sequentially. eq_lr uses gamma = b_{t->s} / sqrt(alpha_bar(t)), the rate
/// under which the iteration reproduces edit-friendly stepping exactly;
/// constant mode uses the given gamma at every step. Noise draws are shared
/// between the source and optimized branches and keyed the same way as
/// inversion, so runs are directly comparable to edits with the same seed.
DdsRun dds_edit(const NoiseSchedule& schedule, const Denoiser& denoiser,
                const TimestepPlan& plan, const Vec& x0,
                const Condition& c, const Condition& c_hat,
                LrMode lr_mode, double constant_gamma, std::uint64_t seed);

struct EquivConfig {
    std::uint64_t seed = 0;
    int dim = 0;
    int K = 0;
    int t_start = 0;
};

struct EquivRow {
    int dim = 0;
    int K = 0;
    std::uint64_t seed = 0;
    LrMode lr_mode = LrMode::eq_lr;
    double max_abs_diff = 0.0;
};

std::vector<EquivConfig> make_equiv_configs(const NoiseSchedule& schedule, int n,
                                            std::uint64_t base_seed);

/// Per config: max absolute difference between the DDS final iterate and the
/// edit-friendly edit of the same x0/seed/plan. In constant mode the gamma is
/// a deliberately wrong 1.5x the mean of the exact rates.
std::vector<EquivRow> ef_dds_equivalence_report(const NoiseSchedule& schedule,
                                                const std::vector<EquivConfig>& configs,
                                                LrMode lr_mode);

}  // namespace dil
