// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dil/denoiser.hpp"
#include "dil/inversion.hpp"
#include "dil/schedule.hpp"
#include "dil/vecmath.hpp"

namespace dil {

/// Source of clean data for the Monte-Carlo diagnostics: either the denoiser's
/// own conditional law, or a fixed vector.
struct DataSampler {
    enum class Kind { condition, constant };
    Kind kind = Kind::condition;
    int condition_id = 0;
    Vec value;  // constant kind

    static DataSampler from_condition(int id) { return {Kind::condition, id, {}}; }
    static DataSampler from_constant(Vec v) { return {Kind::constant, 0, std::move(v)}; }
};

struct CurvePoint {
    int t = 0;
    int s = 0;
    double measured_std = 0.0;   // pooled per-component std of the corrections
    double expected_sigma = 0.0; // unshifted sigma_{t->s}
    double ci_half = 0.0;        // 68% confidence half-width
};

struct CurveOptions {
    int N = 10000;
    std::uint64_t seed = 0;
    int source_condition = 0;
    bool zero_forward_noise = false;  // diagnostic: force eps_tilde = 0
};

std::vector<CurvePoint> correction_std_curve(const NoiseSchedule& schedule,
                                             const Denoiser& denoiser,
                                             const TimestepPlan& plan,
                                             const DataSampler& sampler,
                                             const CurveOptions& options);

struct OffsetRow {
    int t = 0;
    int t_star = 0;
    int offset = 0;  // t_star - t
};

struct OffsetHistogram {
    std::vector<OffsetRow> rows;
    double median_offset = 0.0;
    double iqr_low = 0.0;
    double iqr_high = 0.0;
};

struct OffsetOptions {
    // plan_stride: candidate t' is scored against sigma(t' -> t' - (t - s));
    // adjacent:    scored against the single-step sigma(t' -> t' - 1).
    enum class Stride { plan_stride, adjacent };
    Stride stride = Stride::plan_stride;
};

/// For each curve row, brute-force scan over every valid t' for the timestep
/// whose schedule sigma is closest to the measured std; reports t* - t.
OffsetHistogram offset_histogram(const NoiseSchedule& schedule,
                                 const std::vector<CurvePoint>& curve,
                                 const OffsetOptions& options = {});

struct CosinePair {
    double cos_a = 0.0;  // cross-trajectory direction under c vs under phi
    double cos_b = 0.0;  // mean cosine of those two against the cross-prompt term
};

CosinePair cosine_diagnostics(const NoiseSchedule& schedule, const Denoiser& denoiser,
                              const RecordStep& step, const Vec& xhat_t,
                              const Condition& c, const Condition& c_hat,
                              const Condition& phi, int delta);

}  // namespace dil
