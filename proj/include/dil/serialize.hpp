// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "dil/analysis.hpp"
#include "dil/dds.hpp"
#include "dil/denoiser.hpp"
#include "dil/editing.hpp"
#include "dil/inversion.hpp"
#include "dil/sampler.hpp"
#include "dil/schedule.hpp"

namespace dil {

using nlohmann::json;

/// Canonical serialization: object keys sorted, every floating-point number
/// printed with %.17g so the text round-trips binary64 exactly and hashes are
/// stable across runs of the same build.
std::string canonical_dump(const json& j, int indent = -1);

std::uint64_t fnv1a64(const std::string& s);
std::string hash_hex(const json& j);

json schedule_config_to_json(const ScheduleConfig& config);
ScheduleConfig schedule_config_from_json(const json& j);
std::string schedule_hash(const NoiseSchedule& schedule);
std::string schedule_table_csv(const NoiseSchedule& schedule);

json plan_to_json(const TimestepPlan& plan);
TimestepPlan plan_from_json(const NoiseSchedule& schedule, const json& j);

json denoiser_to_json(const Denoiser& denoiser);
Denoiser denoiser_from_json(const json& j);
std::string denoiser_hash(const Denoiser& denoiser);

json record_to_json(const InversionRecord& record);
InversionRecord record_from_json(const NoiseSchedule& schedule, const json& j);

json trajectory_to_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const NoiseSchedule& schedule, const json& j);

json edit_config_to_json(const EditConfig& config);
EditConfig edit_config_from_json(const json& j);

std::string curve_to_csv(const std::vector<CurvePoint>& curve);
std::vector<CurvePoint> curve_from_csv(const std::string& csv);
std::string offsets_to_csv(const OffsetHistogram& histogram);
std::string equiv_rows_to_csv(const std::vector<EquivRow>& rows);
std::string cfg_equiv_rows_to_csv(const std::vector<CfgEquivalenceRow>& rows);

/// Built-in experiment configuration: the default schedule, a dim-8 two-mode
/// toy with a null condition, the default plan and editing constants.
json default_experiment_json();

}  // namespace dil
