// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#include "dil.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "dil/analysis.hpp"
#include "dil/dds.hpp"
#include "dil/editing.hpp"
#include "dil/serialize.hpp"

using dil::json;

struct dil_schedule {
    dil::NoiseSchedule rep;
};
struct dil_denoiser {
    dil::Denoiser rep;
};
struct dil_plan {
    dil::TimestepPlan rep;
};
struct dil_record {
    dil::InversionRecord rep;
};
struct dil_trajectory {
    dil::Trajectory rep;
};

namespace {

thread_local std::string g_last_error;

dil_status status_of(const dil::Error& e) {
    switch (e.code()) {
        case dil::ErrorCode::config: return DIL_ERR_CONFIG;
        case dil::ErrorCode::bounds: return DIL_ERR_BOUNDS;
        case dil::ErrorCode::ordering: return DIL_ERR_ORDERING;
        case dil::ErrorCode::shape: return DIL_ERR_SHAPE;
        case dil::ErrorCode::lookup: return DIL_ERR_LOOKUP;
        case dil::ErrorCode::integrity: return DIL_ERR_INTEGRITY;
        case dil::ErrorCode::undefined: return DIL_ERR_UNDEFINED;
        case dil::ErrorCode::io: return DIL_ERR_IO;
    }
    return DIL_ERR_INVALID;
}

template <typename Fn>
dil_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return DIL_OK;
    } catch (const dil::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const json::exception& e) {
        g_last_error = std::string("json: ") + e.what();
        return DIL_ERR_CONFIG;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return DIL_ERR_INVALID;
    }
}

dil_status invalid(const char* msg) {
    g_last_error = msg;
    return DIL_ERR_INVALID;
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

json parse(const char* text, const char* what) {
    if (text == nullptr) return json::object();
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        dil::fail(dil::ErrorCode::config, std::string(what) + ": malformed JSON");
    }
    return j;
}

std::optional<double> opt_clip(const json& options) {
    if (!options.contains("clip_max")) return std::nullopt;
    const double v = options.at("clip_max").get<double>();
    if (v <= 0.0) return std::nullopt;
    return v;
}

std::optional<dil::CfgGuidance> opt_cfg(const json& options) {
    if (!options.contains("cfg")) return std::nullopt;
    dil::CfgGuidance cfg;
    cfg.phi_id = options.at("cfg").at("phi").get<int>();
    cfg.lambda_s = options.at("cfg").at("lambda").get<double>();
    return cfg;
}

dil::Vec to_vec(const double* data, size_t dim) { return dil::Vec(data, data + dim); }

}  // namespace

extern "C" {

const char* dil_version(void) { return "0.1.0"; }

const char* dil_last_error(void) { return g_last_error.c_str(); }

void dil_string_free(char* s) { delete[] s; }

dil_status dil_default_config(char** json_out) {
    if (json_out == nullptr) return invalid("dil_default_config: out is null");
    return guarded([&] { *json_out = copy_string(dil::canonical_dump(dil::default_experiment_json(), 2)); });
}

dil_status dil_config_hash(const char* json_text, char** hex_out) {
    if (json_text == nullptr || hex_out == nullptr) return invalid("dil_config_hash: null argument");
    return guarded([&] { *hex_out = copy_string(dil::hash_hex(parse(json_text, "config"))); });
}

dil_status dil_schedule_create(const char* config_json, dil_schedule** out) {
    if (out == nullptr) return invalid("dil_schedule_create: out is null");
    return guarded([&] {
        const auto config = dil::schedule_config_from_json(parse(config_json, "schedule config"));
        *out = new dil_schedule{dil::NoiseSchedule::build(config)};
    });
}

void dil_schedule_free(dil_schedule* schedule) { delete schedule; }

dil_status dil_schedule_hash(const dil_schedule* schedule, char** hex_out) {
    if (schedule == nullptr || hex_out == nullptr) return invalid("dil_schedule_hash: null argument");
    return guarded([&] { *hex_out = copy_string(dil::schedule_hash(schedule->rep)); });
}

dil_status dil_schedule_table_csv(const dil_schedule* schedule, char** csv_out) {
    if (schedule == nullptr || csv_out == nullptr) return invalid("dil_schedule_table_csv: null argument");
    return guarded([&] { *csv_out = copy_string(dil::schedule_table_csv(schedule->rep)); });
}

dil_status dil_denoiser_create(const char* spec_json, dil_denoiser** out) {
    if (out == nullptr) return invalid("dil_denoiser_create: out is null");
    return guarded([&] { *out = new dil_denoiser{dil::denoiser_from_json(parse(spec_json, "denoiser spec"))}; });
}

void dil_denoiser_free(dil_denoiser* denoiser) { delete denoiser; }

dil_status dil_denoiser_hash(const dil_denoiser* denoiser, char** hex_out) {
    if (denoiser == nullptr || hex_out == nullptr) return invalid("dil_denoiser_hash: null argument");
    return guarded([&] { *hex_out = copy_string(dil::denoiser_hash(denoiser->rep)); });
}

dil_status dil_denoiser_dim(const dil_denoiser* denoiser, size_t* dim_out) {
    if (denoiser == nullptr || dim_out == nullptr) return invalid("dil_denoiser_dim: null argument");
    *dim_out = static_cast<size_t>(denoiser->rep.dim());
    return DIL_OK;
}

dil_status dil_denoiser_sample_x0(const dil_denoiser* denoiser, int condition_id,
                                  uint64_t seed, double* buf, size_t dim) {
    if (denoiser == nullptr || buf == nullptr) return invalid("dil_denoiser_sample_x0: null argument");
    return guarded([&] {
        if (dim != static_cast<size_t>(denoiser->rep.dim())) {
            dil::fail(dil::ErrorCode::shape, "sample_x0: buffer dimension mismatch");
        }
        dil::Prng prng = dil::Prng::substream(seed, dil::Stream::data, 0);
        const dil::Vec x = denoiser->rep.sample_x0(denoiser->rep.condition(condition_id), prng);
        std::memcpy(buf, x.data(), dim * sizeof(double));
    });
}

dil_status dil_target_responsibility(const dil_denoiser* denoiser, const double* x, size_t dim,
                                     int target_condition, int source_condition, double* out) {
    if (denoiser == nullptr || x == nullptr || out == nullptr) {
        return invalid("dil_target_responsibility: null argument");
    }
    return guarded([&] {
        const dil::Vec v = to_vec(x, dim);
        const double lt = denoiser->rep.log_density_x0(v, denoiser->rep.condition(target_condition));
        const double ls = denoiser->rep.log_density_x0(v, denoiser->rep.condition(source_condition));
        *out = 1.0 / (1.0 + std::exp(ls - lt));
    });
}

dil_status dil_plan_uniform(const dil_schedule* schedule, int k, int t_start, int delta,
                            dil_plan** out) {
    if (schedule == nullptr || out == nullptr) return invalid("dil_plan_uniform: null argument");
    return guarded([&] { *out = new dil_plan{dil::make_uniform_plan(schedule->rep, k, t_start, delta)}; });
}

dil_status dil_plan_explicit(const dil_schedule* schedule, const int* steps, size_t n_steps,
                             int delta, dil_plan** out) {
    if (schedule == nullptr || steps == nullptr || out == nullptr) return invalid("dil_plan_explicit: null argument");
    return guarded([&] {
        std::vector<int> s(steps, steps + n_steps);
        *out = new dil_plan{dil::make_explicit_plan(schedule->rep, std::move(s), delta)};
    });
}

void dil_plan_free(dil_plan* plan) { delete plan; }

dil_status dil_plan_to_json(const dil_plan* plan, char** json_out) {
    if (plan == nullptr || json_out == nullptr) return invalid("dil_plan_to_json: null argument");
    return guarded([&] { *json_out = copy_string(dil::canonical_dump(dil::plan_to_json(plan->rep), 2)); });
}

dil_status dil_invert(const dil_schedule* schedule, const dil_denoiser* denoiser,
                      const dil_plan* plan, const double* x0, size_t dim, int condition_id,
                      uint64_t seed, const char* options_json, dil_record** out) {
    if (schedule == nullptr || denoiser == nullptr || plan == nullptr || x0 == nullptr || out == nullptr) {
        return invalid("dil_invert: null argument");
    }
    return guarded([&] {
        const json options = parse(options_json, "invert options");
        dil::InversionRecord record =
            dil::invert(schedule->rep, denoiser->rep, plan->rep, to_vec(x0, dim),
                        denoiser->rep.condition(condition_id), seed, opt_clip(options), opt_cfg(options));
        record.schedule_hash = dil::schedule_hash(schedule->rep);
        record.denoiser_hash = dil::denoiser_hash(denoiser->rep);
        *out = new dil_record{std::move(record)};
    });
}

void dil_record_free(dil_record* record) { delete record; }

dil_status dil_record_to_json(const dil_record* record, char** json_out) {
    if (record == nullptr || json_out == nullptr) return invalid("dil_record_to_json: null argument");
    return guarded([&] { *json_out = copy_string(dil::canonical_dump(dil::record_to_json(record->rep), 2)); });
}

dil_status dil_record_from_json(const dil_schedule* schedule, const char* json_text, dil_record** out) {
    if (schedule == nullptr || json_text == nullptr || out == nullptr) {
        return invalid("dil_record_from_json: null argument");
    }
    return guarded([&] {
        *out = new dil_record{dil::record_from_json(schedule->rep, parse(json_text, "record"))};
    });
}

dil_status dil_edit(const dil_schedule* schedule, const dil_denoiser* denoiser,
                    const dil_record* record, int target_condition,
                    const char* edit_config_json, dil_trajectory** out) {
    if (schedule == nullptr || denoiser == nullptr || record == nullptr || out == nullptr) {
        return invalid("dil_edit: null argument");
    }
    return guarded([&] {
        const dil::EditConfig config = dil::edit_config_from_json(parse(edit_config_json, "edit config"));
        *out = new dil_trajectory{dil::edit(schedule->rep, denoiser->rep, record->rep,
                                            denoiser->rep.condition(target_condition), config)};
    });
}

dil_status dil_edit_on_the_fly(const dil_schedule* schedule, const dil_denoiser* denoiser,
                               const dil_plan* plan, const double* x0, size_t dim,
                               int condition_id, int target_condition, uint64_t seed,
                               double clip_max, const char* edit_config_json,
                               dil_trajectory** out) {
    if (schedule == nullptr || denoiser == nullptr || plan == nullptr || x0 == nullptr || out == nullptr) {
        return invalid("dil_edit_on_the_fly: null argument");
    }
    return guarded([&] {
        const dil::EditConfig config = dil::edit_config_from_json(parse(edit_config_json, "edit config"));
        std::optional<double> clip;
        if (clip_max > 0.0) clip = clip_max;
        *out = new dil_trajectory{dil::edit_on_the_fly(schedule->rep, denoiser->rep, plan->rep,
                                                       to_vec(x0, dim), denoiser->rep.condition(condition_id),
                                                       denoiser->rep.condition(target_condition), seed, clip,
                                                       config)};
    });
}

dil_status dil_generate(const dil_schedule* schedule, const dil_denoiser* denoiser,
                        const dil_plan* plan, int condition_id, uint64_t seed,
                        dil_trajectory** out) {
    if (schedule == nullptr || denoiser == nullptr || plan == nullptr || out == nullptr) {
        return invalid("dil_generate: null argument");
    }
    return guarded([&] {
        *out = new dil_trajectory{dil::generate(schedule->rep, denoiser->rep, plan->rep,
                                                denoiser->rep.condition(condition_id), seed)};
    });
}

dil_status dil_sdedit(const dil_schedule* schedule, const dil_denoiser* denoiser,
                      const dil_plan* plan, const double* x0, size_t dim, double strength,
                      int target_condition, uint64_t seed, dil_trajectory** out) {
    if (schedule == nullptr || denoiser == nullptr || plan == nullptr || x0 == nullptr || out == nullptr) {
        return invalid("dil_sdedit: null argument");
    }
    return guarded([&] {
        *out = new dil_trajectory{dil::sdedit(schedule->rep, denoiser->rep, plan->rep, to_vec(x0, dim),
                                              strength, denoiser->rep.condition(target_condition), seed)};
    });
}

void dil_trajectory_free(dil_trajectory* trajectory) { delete trajectory; }

dil_status dil_trajectory_to_json(const dil_trajectory* trajectory, char** json_out) {
    if (trajectory == nullptr || json_out == nullptr) return invalid("dil_trajectory_to_json: null argument");
    return guarded([&] { *json_out = copy_string(dil::canonical_dump(dil::trajectory_to_json(trajectory->rep), 2)); });
}

dil_status dil_trajectory_from_json(const dil_schedule* schedule, const char* json_text,
                                    dil_trajectory** out) {
    if (schedule == nullptr || json_text == nullptr || out == nullptr) {
        return invalid("dil_trajectory_from_json: null argument");
    }
    return guarded([&] {
        *out = new dil_trajectory{dil::trajectory_from_json(schedule->rep, parse(json_text, "trajectory"))};
    });
}

dil_status dil_trajectory_dim(const dil_trajectory* trajectory, size_t* dim_out) {
    if (trajectory == nullptr || dim_out == nullptr) return invalid("dil_trajectory_dim: null argument");
    if (trajectory->rep.states.empty()) return invalid("dil_trajectory_dim: empty trajectory");
    *dim_out = trajectory->rep.states.back().second.size();
    return DIL_OK;
}

dil_status dil_trajectory_final_state(const dil_trajectory* trajectory, double* buf, size_t dim) {
    if (trajectory == nullptr || buf == nullptr) return invalid("dil_trajectory_final_state: null argument");
    return guarded([&] {
        const dil::Vec& x = trajectory->rep.final_state();
        if (dim != x.size()) dil::fail(dil::ErrorCode::shape, "final_state: buffer dimension mismatch");
        std::memcpy(buf, x.data(), dim * sizeof(double));
    });
}

dil_status dil_reconstruct_check(const dil_schedule* schedule, const dil_denoiser* denoiser,
                                 const dil_plan* plan, const double* x0, size_t dim,
                                 int condition_id, uint64_t seed, const char* options_json,
                                 double* max_rel_err_out) {
    if (schedule == nullptr || denoiser == nullptr || plan == nullptr || x0 == nullptr ||
        max_rel_err_out == nullptr) {
        return invalid("dil_reconstruct_check: null argument");
    }
    return guarded([&] {
        const json options = parse(options_json, "invert options");
        const dil::Vec source = to_vec(x0, dim);
        const dil::Condition& c = denoiser->rep.condition(condition_id);
        dil::InversionRecord record = dil::invert(schedule->rep, denoiser->rep, plan->rep, source, c, seed,
                                                  opt_clip(options), opt_cfg(options));
        record.schedule_hash = dil::schedule_hash(schedule->rep);
        record.denoiser_hash = dil::denoiser_hash(denoiser->rep);
        dil::EditConfig config;
        config.mode = dil::EditMode::ef;
        const dil::Trajectory traj = dil::edit(schedule->rep, denoiser->rep, record, c, config);
        double scale = 0.0;
        for (double v : source) scale = std::max(scale, std::abs(v));
        *max_rel_err_out = dil::max_abs_diff(traj.final_state(), source) / std::max(scale, 1e-300);
    });
}

dil_status dil_correction_std_csv(const dil_schedule* schedule, const dil_denoiser* denoiser,
                                  const dil_plan* plan, const char* options_json,
                                  char** csv_out) {
    if (schedule == nullptr || denoiser == nullptr || plan == nullptr || csv_out == nullptr) {
        return invalid("dil_correction_std_csv: null argument");
    }
    return guarded([&] {
        const json options = parse(options_json, "stats options");
        dil::CurveOptions curve_options;
        curve_options.N = options.value("n", 10000);
        curve_options.seed = options.value("seed", 0ULL);
        curve_options.source_condition = options.value("condition", 0);
        curve_options.zero_forward_noise = options.value("zero_noise", false);
        dil::DataSampler sampler = dil::DataSampler::from_condition(curve_options.source_condition);
        if (options.contains("constant")) {
            sampler = dil::DataSampler::from_constant(options.at("constant").get<dil::Vec>());
        }
        const auto curve = dil::correction_std_curve(schedule->rep, denoiser->rep, plan->rep, sampler,
                                                     curve_options);
        *csv_out = copy_string(dil::curve_to_csv(curve));
    });
}

dil_status dil_offset_histogram_csv(const dil_schedule* schedule, const char* curve_csv,
                                    const char* options_json, char** csv_out) {
    if (schedule == nullptr || curve_csv == nullptr || csv_out == nullptr) {
        return invalid("dil_offset_histogram_csv: null argument");
    }
    return guarded([&] {
        const json options = parse(options_json, "offsets options");
        dil::OffsetOptions offset_options;
        if (options.value("stride", "plan") == std::string("adjacent")) {
            offset_options.stride = dil::OffsetOptions::Stride::adjacent;
        }
        const auto curve = dil::curve_from_csv(curve_csv);
        const auto histogram = dil::offset_histogram(schedule->rep, curve, offset_options);
        std::string csv = dil::offsets_to_csv(histogram);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "# median_offset %.17g\n# iqr %.17g %.17g\n",
                      histogram.median_offset, histogram.iqr_low, histogram.iqr_high);
        csv += buf;
        *csv_out = copy_string(csv);
    });
}

dil_status dil_cosine_csv(const dil_schedule* schedule, const dil_denoiser* denoiser,
                          const dil_record* record, int target_condition, char** csv_out) {
    if (schedule == nullptr || denoiser == nullptr || record == nullptr || csv_out == nullptr) {
        return invalid("dil_cosine_csv: null argument");
    }
    return guarded([&] {
        const dil::Condition& target = denoiser->rep.condition(target_condition);
        const dil::Condition& c = denoiser->rep.condition(record->rep.condition_id);
        const dil::Condition& phi = denoiser->rep.null_condition();
        if (record->rep.steps.size() < 2) {
            dil::fail(dil::ErrorCode::undefined,
                      "cosine diagnostics need at least two plan steps; the edited trajectory only "
                      "diverges from the source after the first");
        }
        dil::EditConfig config;
        config.mode = dil::EditMode::ef;
        const dil::Trajectory traj = dil::edit(schedule->rep, denoiser->rep, record->rep, target, config);
        std::string csv = "t,cos_a,cos_b\n";
        char buf[128];
        // Skip the first step: there xhat_t == x_t and every direction is zero.
        for (std::size_t k = 1; k < record->rep.steps.size(); ++k) {
            const auto pair = dil::cosine_diagnostics(schedule->rep, denoiser->rep, record->rep.steps[k],
                                                      traj.states[k].second, c, target, phi,
                                                      record->rep.plan.delta);
            std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", record->rep.steps[k].t, pair.cos_a, pair.cos_b);
            csv += buf;
        }
        *csv_out = copy_string(csv);
    });
}

dil_status dil_dds_equiv_csv(const dil_schedule* schedule, const char* options_json,
                             char** csv_out) {
    if (schedule == nullptr || csv_out == nullptr) return invalid("dil_dds_equiv_csv: null argument");
    return guarded([&] {
        const json options = parse(options_json, "equiv-dds options");
        const int n = options.value("configs", 50);
        const std::uint64_t base_seed = options.value("base_seed", 0ULL);
        const dil::LrMode mode = dil::lr_mode_from_string(options.value("lr_mode", "eq_lr"));
        const auto configs = dil::make_equiv_configs(schedule->rep, n, base_seed);
        const auto rows = dil::ef_dds_equivalence_report(schedule->rep, configs, mode);
        *csv_out = copy_string(dil::equiv_rows_to_csv(rows));
    });
}

dil_status dil_cfg_equiv_csv(const dil_schedule* schedule, const char* options_json,
                             char** csv_out) {
    if (schedule == nullptr || csv_out == nullptr) return invalid("dil_cfg_equiv_csv: null argument");
    return guarded([&] {
        const json options = parse(options_json, "equiv-cfg options");
        const int n = options.value("configs", 100);
        const std::uint64_t base_seed = options.value("base_seed", 0ULL);
        std::vector<double> w_values{1.0, 1.5, 2.0, 3.0};
        if (options.contains("w")) w_values = options.at("w").get<std::vector<double>>();
        const auto rows = dil::cfg_equivalence_report(schedule->rep, n, base_seed, w_values);
        *csv_out = copy_string(dil::cfg_equiv_rows_to_csv(rows));
    });
}

}  // extern "C"
