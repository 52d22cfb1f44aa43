// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dil/denoiser.hpp"
#include "dil/sampler.hpp"
#include "dil/schedule.hpp"
#include "dil/vecmath.hpp"

namespace dil {

/// Classifier-free guidance applied during inversion, so the record can be
/// replayed with guidance applied in both passes.
struct CfgGuidance {
    int phi_id = 0;
    double lambda_s = 1.0;
};

struct RecordStep {
    int t = 0;            // source timestep
    int s = 0;            // target timestep
    Vec x_t;              // forward-noised source state
    Vec v;                // stored correction x_s - mu_{t+delta}(x_t, c)
    bool clipped = false;
};

struct InversionRecord {
    std::string schedule_hash;
    std::string denoiser_hash;
    TimestepPlan plan;
    std::uint64_t seed = 0;
    Vec x0;
    int condition_id = 0;
    std::optional<double> clip_max;
    std::optional<CfgGuidance> cfg;
    std::vector<RecordStep> steps;
};

/// Rescale v onto the closed ball of radius max_norm; identity inside it.
Vec clip_correction(const Vec& v, double max_norm);

/// Edit-friendly inversion: independent forward noisings per plan timestep,
/// one stored correction per transition, optional norm clip on the final
/// step's correction. Pure given (inputs, seed).
InversionRecord invert(const NoiseSchedule& schedule, const Denoiser& denoiser,
                       const TimestepPlan& plan, const Vec& x0, const Condition& c,
                       std::uint64_t seed, std::optional<double> clip_max = std::nullopt,
                       std::optional<CfgGuidance> cfg = std::nullopt);

/// Recomputes the record entry for one plan step straight from x0, using the
/// same substreams batch inversion would use. Matches invert() bit for bit,
/// including the final-step clip.
RecordStep on_the_fly_correction(const NoiseSchedule& schedule, const Denoiser& denoiser,
                                 const TimestepPlan& plan, int step_index, const Vec& x0,
                                 const Condition& c, std::uint64_t seed,
                                 std::optional<double> clip_max = std::nullopt,
                                 std::optional<CfgGuidance> cfg = std::nullopt);

}  // namespace dil
