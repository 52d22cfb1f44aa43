// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#include "dil/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace dil {

std::string to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::linear: return "linear";
        case ScheduleKind::scaled_linear: return "scaled_linear";
        case ScheduleKind::constant: return "constant";
    }
    fail(ErrorCode::config, "unknown schedule kind");
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "linear") return ScheduleKind::linear;
    if (s == "scaled_linear") return ScheduleKind::scaled_linear;
    if (s == "constant") return ScheduleKind::constant;
    fail(ErrorCode::config, "unknown schedule kind '" + s + "'");
}

namespace {

std::vector<double> linspace(double start, double end, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n == 1) {
        out[0] = start;
        return out;
    }
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = start + (end - start) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

}  // namespace

NoiseSchedule NoiseSchedule::build(const ScheduleConfig& config) {
    if (config.T < 1) {
        fail(ErrorCode::config, "schedule.T must be >= 1, got " + std::to_string(config.T));
    }
    if (!(config.beta_start > 0.0) || !(config.beta_end < 1.0) || config.beta_start > config.beta_end) {
        fail(ErrorCode::config, "schedule betas must satisfy 0 < beta_start <= beta_end < 1");
    }

    NoiseSchedule out;
    out.config_ = config;
    switch (config.kind) {
        case ScheduleKind::linear:
            out.betas_ = linspace(config.beta_start, config.beta_end, config.T);
            break;
        case ScheduleKind::scaled_linear: {
            out.betas_ = linspace(std::sqrt(config.beta_start), std::sqrt(config.beta_end), config.T);
            for (auto& b : out.betas_) b *= b;
            break;
        }
        case ScheduleKind::constant:
            out.betas_.assign(static_cast<std::size_t>(config.T), config.beta_start);
            break;
    }

    out.alphas_.resize(out.betas_.size());
    out.alpha_bars_.resize(out.betas_.size());
    double running = 1.0;
    for (std::size_t i = 0; i < out.betas_.size(); ++i) {
        out.alphas_[i] = 1.0 - out.betas_[i];
        running *= out.alphas_[i];
        out.alpha_bars_[i] = running;
    }

    for (std::size_t i = 0; i < out.alpha_bars_.size(); ++i) {
        if (!(out.alpha_bars_[i] > 0.0) || !(out.alpha_bars_[i] < 1.0)) {
            fail(ErrorCode::config, "alpha_bar left (0,1) at t=" + std::to_string(i + 1));
        }
        if (i > 0 && !(out.alpha_bars_[i] < out.alpha_bars_[i - 1])) {
            fail(ErrorCode::config, "alpha_bar not strictly decreasing at t=" + std::to_string(i + 1));
        }
    }
    return out;
}

double NoiseSchedule::beta(int t) const {
    if (t < 1 || t > config_.T) {
        fail(ErrorCode::bounds, "beta(t): t=" + std::to_string(t) + " outside [1, " + std::to_string(config_.T) + "]");
    }
    return betas_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha(int t) const {
    if (t < 1 || t > config_.T) {
        fail(ErrorCode::bounds, "alpha(t): t=" + std::to_string(t) + " outside [1, " + std::to_string(config_.T) + "]");
    }
    return alphas_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha_bar(int t) const {
    if (t == 0) return 1.0;
    if (t < 0 || t > config_.T) {
        fail(ErrorCode::bounds, "alpha_bar(t): t=" + std::to_string(t) + " outside [0, " + std::to_string(config_.T) + "]");
    }
    return alpha_bars_[static_cast<std::size_t>(t - 1)];
}

StepCoefficients coefficients(const NoiseSchedule& schedule, int t, int s) {
    if (s >= t) {
        fail(ErrorCode::ordering, "coefficients: target s=" + std::to_string(s) +
                                      " must be below source t=" + std::to_string(t));
    }
    if (s < 0 || t > schedule.T() - 1) {
        fail(ErrorCode::bounds, "coefficients: (t=" + std::to_string(t) + ", s=" + std::to_string(s) +
                                    ") outside [0, " + std::to_string(schedule.T() - 1) + "]");
    }
    const double abar_t = schedule.alpha_bar(t);
    const double abar_s = schedule.alpha_bar(s);
    const double ratio = abar_t / abar_s;  // alpha_{t->s}

    StepCoefficients out;
    out.t = t;
    out.s = s;
    out.a = 1.0 / std::sqrt(ratio);
    out.b = (1.0 - ratio) / std::sqrt(1.0 - abar_t);
    out.c = std::sqrt(abar_t);
    out.d = std::sqrt(1.0 - abar_t);
    const double sigma2 = ((1.0 - abar_s) / (1.0 - abar_t)) * (1.0 - ratio);
    out.sigma = std::sqrt(std::max(sigma2, 0.0));
    return out;
}

namespace {

TimestepPlan finalize_plan(const NoiseSchedule& schedule, std::vector<int> steps, int delta) {
    if (steps.empty()) fail(ErrorCode::config, "plan: needs at least one step");
    if (delta < 0) fail(ErrorCode::config, "plan: delta must be >= 0");
    const int t_max = schedule.T() - 1;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i] < 1 || steps[i] > t_max) {
            fail(ErrorCode::bounds, "plan: step " + std::to_string(steps[i]) + " outside [1, " + std::to_string(t_max) + "]");
        }
        if (steps[i] + delta > t_max) {
            fail(ErrorCode::bounds, "plan: step " + std::to_string(steps[i]) + " + delta " + std::to_string(delta) +
                                        " exceeds " + std::to_string(t_max));
        }
        if (i > 0 && steps[i] >= steps[i - 1]) {
            fail(ErrorCode::config, "plan: steps must be strictly descending (offending step " +
                                        std::to_string(steps[i]) + ")");
        }
    }
    TimestepPlan plan;
    plan.steps = std::move(steps);
    plan.targets.assign(plan.steps.begin() + 1, plan.steps.end());
    plan.targets.push_back(0);
    plan.delta = delta;
    return plan;
}

}  // namespace

TimestepPlan make_uniform_plan(const NoiseSchedule& schedule, int K, int t_start, int delta) {
    if (K < 1) fail(ErrorCode::config, "plan: K must be >= 1");
    std::vector<int> steps(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
        steps[static_cast<std::size_t>(i)] = (t_start * (K - i)) / K;
    }
    return finalize_plan(schedule, std::move(steps), delta);
}

TimestepPlan make_strided_plan(const NoiseSchedule& schedule, int K, int t_start, int stride, int delta) {
    if (K < 1) fail(ErrorCode::config, "plan: K must be >= 1");
    if (stride < 1) fail(ErrorCode::config, "plan: stride must be >= 1");
    std::vector<int> steps(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
        steps[static_cast<std::size_t>(i)] = t_start - i * stride;
    }
    return finalize_plan(schedule, std::move(steps), delta);
}

TimestepPlan make_explicit_plan(const NoiseSchedule& schedule, std::vector<int> steps, int delta) {
    return finalize_plan(schedule, std::move(steps), delta);
}

}  // namespace dil
