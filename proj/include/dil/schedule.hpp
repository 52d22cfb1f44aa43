// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dil/errors.hpp"

namespace dil {

enum class ScheduleKind { linear, scaled_linear, constant };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& s);

struct ScheduleConfig {
    ScheduleKind kind = ScheduleKind::scaled_linear;
    double beta_start = 0.00085;
    double beta_end = 0.012;
    int T = 1000;
};

/// Diffusion noise schedule. Tables are 1-based in the timestep: beta(t),
/// alpha(t) and alpha_bar(t) are defined for t in [1, T], and alpha_bar(0) is
/// pinned to 1 so a transition targeting timestep 0 is exactly noise-free.
/// Instances are immutable after construction and safe to share across threads.
class NoiseSchedule {
public:
    static NoiseSchedule build(const ScheduleConfig& config);

    int T() const { return config_.T; }
    const ScheduleConfig& config() const { return config_; }

    double beta(int t) const;
    double alpha(int t) const;
    double alpha_bar(int t) const;  // alpha_bar(0) == 1

    const std::vector<double>& betas() const { return betas_; }
    const std::vector<double>& alphas() const { return alphas_; }
    const std::vector<double>& alpha_bars() const { return alpha_bars_; }

private:
    NoiseSchedule() = default;
    ScheduleConfig config_;
    std::vector<double> betas_;       // betas_[i] is beta(i + 1)
    std::vector<double> alphas_;
    std::vector<double> alpha_bars_;
};

/// Coefficients of the eta=1 stochastic transition from source timestep t to
/// target s < t, with alpha_{t->s} := alpha_bar(t) / alpha_bar(s):
///   a     = 1 / sqrt(alpha_{t->s})
///   b     = (1 - alpha_{t->s}) / sqrt(1 - alpha_bar(t))
///   c, d  = sqrt(alpha_bar(t)), sqrt(1 - alpha_bar(t))
///   sigma = posterior noise scale; zero when the target is timestep 0.
/// For adjacent steps (s = t-1) these reduce to the classic DDPM update and
/// posterior sigma.
struct StepCoefficients {
    int t = 0;
    int s = 0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double sigma = 0.0;
};

StepCoefficients coefficients(const NoiseSchedule& schedule, int t, int s);

/// Descending few-step timestep plan. steps[k] denoises into targets[k];
/// the last target is always 0. delta is the evaluation-time shift added to
/// both ends of every transition when calling the denoiser and the scheduler.
struct TimestepPlan {
    std::vector<int> steps;
    std::vector<int> targets;
    int delta = 0;

    int K() const { return static_cast<int>(steps.size()); }
    int t_start() const { return steps.empty() ? 0 : steps.front(); }
};

TimestepPlan make_uniform_plan(const NoiseSchedule& schedule, int K, int t_start, int delta);
TimestepPlan make_strided_plan(const NoiseSchedule& schedule, int K, int t_start, int stride, int delta);
TimestepPlan make_explicit_plan(const NoiseSchedule& schedule, std::vector<int> steps, int delta);

}  // namespace dil
