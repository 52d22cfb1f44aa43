// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
//
// Exercises the shared library strictly through the C header.
#include "dil.h"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "doctest.h"

using nlohmann::json;

namespace {

std::string take(char* s) {
    std::string out = s ? s : "";
    dil_string_free(s);
    return out;
}

struct Env {
    dil_schedule* schedule = nullptr;
    dil_denoiser* denoiser = nullptr;
    dil_plan* plan = nullptr;
    json config;

    Env() {
        char* raw = nullptr;
        REQUIRE(dil_default_config(&raw) == DIL_OK);
        config = json::parse(take(raw));
        REQUIRE(dil_schedule_create(config.at("schedule").dump().c_str(), &schedule) == DIL_OK);
        REQUIRE(dil_denoiser_create(config.at("denoiser").dump().c_str(), &denoiser) == DIL_OK);
        REQUIRE(dil_plan_uniform(schedule, 4, 599, 200, &plan) == DIL_OK);
    }
    ~Env() {
        dil_plan_free(plan);
        dil_denoiser_free(denoiser);
        dil_schedule_free(schedule);
    }
};

}  // namespace

TEST_CASE("version and error plumbing") {
    CHECK(std::string(dil_version()) == "0.1.0");
    dil_schedule* schedule = nullptr;
    CHECK(dil_schedule_create("{", &schedule) == DIL_ERR_CONFIG);
    CHECK(std::string(dil_last_error()).find("malformed") != std::string::npos);
    CHECK(dil_schedule_create(nullptr, nullptr) == DIL_ERR_INVALID);
}

TEST_CASE("schedule handle: hash and table") {
    Env env;
    char* hex = nullptr;
    REQUIRE(dil_schedule_hash(env.schedule, &hex) == DIL_OK);
    const std::string hash = take(hex);
    CHECK(hash.size() == 16);

    char* csv = nullptr;
    REQUIRE(dil_schedule_table_csv(env.schedule, &csv) == DIL_OK);
    const std::string table = take(csv);
    CHECK(table.rfind("t,beta,alpha,alpha_bar\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 1001);
}

TEST_CASE("plan bounds errors surface through the status code") {
    Env env;
    dil_plan* plan = nullptr;
    CHECK(dil_plan_uniform(env.schedule, 4, 999, 200, &plan) == DIL_ERR_BOUNDS);
    CHECK(std::string(dil_last_error()).find("999") != std::string::npos);

    const int steps[2] = {100, 200};  // ascending: rejected
    CHECK(dil_plan_explicit(env.schedule, steps, 2, 0, &plan) == DIL_ERR_CONFIG);

    char* plan_json = nullptr;
    REQUIRE(dil_plan_to_json(env.plan, &plan_json) == DIL_OK);
    const json parsed = json::parse(take(plan_json));
    CHECK(parsed.at("steps") == json({599, 449, 299, 149}));
    CHECK(parsed.at("delta") == 200);
}

TEST_CASE("invert, serialize, reload, edit: the full round trip through files") {
    Env env;
    size_t dim = 0;
    REQUIRE(dil_denoiser_dim(env.denoiser, &dim) == DIL_OK);
    REQUIRE(dim == 8);

    std::vector<double> x0(dim);
    REQUIRE(dil_denoiser_sample_x0(env.denoiser, 0, 11, x0.data(), dim) == DIL_OK);

    dil_record* record = nullptr;
    REQUIRE(dil_invert(env.schedule, env.denoiser, env.plan, x0.data(), dim, 0, 11,
                       R"({"clip_max": 15.5})", &record) == DIL_OK);

    char* record_json = nullptr;
    REQUIRE(dil_record_to_json(record, &record_json) == DIL_OK);
    const std::string text = take(record_json);

    dil_record* reloaded = nullptr;
    REQUIRE(dil_record_from_json(env.schedule, text.c_str(), &reloaded) == DIL_OK);

    dil_trajectory* traj = nullptr;
    REQUIRE(dil_edit(env.schedule, env.denoiser, reloaded, 0, R"({"mode":"ef"})", &traj) == DIL_OK);
    std::vector<double> final_state(dim);
    REQUIRE(dil_trajectory_final_state(traj, final_state.data(), dim) == DIL_OK);

    double scale = 0.0, err = 0.0;
    for (size_t i = 0; i < dim; ++i) {
        scale = std::max(scale, std::abs(x0[i]));
        err = std::max(err, std::abs(final_state[i] - x0[i]));
    }
    CHECK(err / scale <= 1e-6);

    dil_trajectory_free(traj);
    dil_record_free(reloaded);
    dil_record_free(record);
}

TEST_CASE("record edited under a different denoiser is an integrity error") {
    Env env;
    std::vector<double> x0(8, 0.5);
    dil_record* record = nullptr;
    REQUIRE(dil_invert(env.schedule, env.denoiser, env.plan, x0.data(), x0.size(), 0, 3, "{}", &record) ==
            DIL_OK);

    json other = env.config.at("denoiser");
    other["conditions"][0]["components"][0]["scale"] = 0.5;
    dil_denoiser* tampered = nullptr;
    REQUIRE(dil_denoiser_create(other.dump().c_str(), &tampered) == DIL_OK);

    dil_trajectory* traj = nullptr;
    CHECK(dil_edit(env.schedule, tampered, record, 1, R"({"mode":"ef"})", &traj) == DIL_ERR_INTEGRITY);
    CHECK(std::string(dil_last_error()).find("hash") != std::string::npos);

    dil_denoiser_free(tampered);
    dil_record_free(record);
}

TEST_CASE("on-the-fly editing matches record-based editing through the C surface") {
    Env env;
    std::vector<double> x0(8);
    REQUIRE(dil_denoiser_sample_x0(env.denoiser, 0, 21, x0.data(), x0.size()) == DIL_OK);

    dil_record* record = nullptr;
    REQUIRE(dil_invert(env.schedule, env.denoiser, env.plan, x0.data(), x0.size(), 0, 21,
                       R"({"clip_max": 15.5})", &record) == DIL_OK);
    dil_trajectory* via_record = nullptr;
    REQUIRE(dil_edit(env.schedule, env.denoiser, record, 1, R"({"mode":"pseudo","w":1.5})", &via_record) ==
            DIL_OK);
    dil_trajectory* on_the_fly = nullptr;
    REQUIRE(dil_edit_on_the_fly(env.schedule, env.denoiser, env.plan, x0.data(), x0.size(), 0, 1, 21, 15.5,
                                R"({"mode":"pseudo","w":1.5})", &on_the_fly) == DIL_OK);

    std::vector<double> a(8), b(8);
    REQUIRE(dil_trajectory_final_state(via_record, a.data(), 8) == DIL_OK);
    REQUIRE(dil_trajectory_final_state(on_the_fly, b.data(), 8) == DIL_OK);
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * 8) == 0);

    // Shape errors on the output buffer are caught.
    CHECK(dil_trajectory_final_state(via_record, a.data(), 4) == DIL_ERR_SHAPE);

    dil_trajectory_free(on_the_fly);
    dil_trajectory_free(via_record);
    dil_record_free(record);
}

TEST_CASE("generation and sdedit smoke through the C surface") {
    Env env;
    dil_trajectory* gen = nullptr;
    REQUIRE(dil_generate(env.schedule, env.denoiser, env.plan, 1, 5, &gen) == DIL_OK);
    char* gen_json = nullptr;
    REQUIRE(dil_trajectory_to_json(gen, &gen_json) == DIL_OK);
    const json parsed = json::parse(take(gen_json));
    CHECK(parsed.at("kind") == "generate");
    CHECK(parsed.at("states").size() == 5);

    dil_trajectory* reparsed = nullptr;
    REQUIRE(dil_trajectory_from_json(env.schedule, parsed.dump().c_str(), &reparsed) == DIL_OK);
    size_t dim = 0;
    REQUIRE(dil_trajectory_dim(reparsed, &dim) == DIL_OK);
    CHECK(dim == 8);

    std::vector<double> x0(8, 0.25);
    dil_trajectory* sd = nullptr;
    REQUIRE(dil_sdedit(env.schedule, env.denoiser, env.plan, x0.data(), x0.size(), 0.75, 1, 5, &sd) == DIL_OK);
    CHECK(dil_sdedit(env.schedule, env.denoiser, env.plan, x0.data(), x0.size(), 1.75, 1, 5, &sd) ==
          DIL_ERR_CONFIG);

    dil_trajectory_free(sd);
    dil_trajectory_free(reparsed);
    dil_trajectory_free(gen);
}

TEST_CASE("unknown condition ids map to the lookup status") {
    Env env;
    std::vector<double> x0(8, 0.1);
    dil_record* record = nullptr;
    CHECK(dil_invert(env.schedule, env.denoiser, env.plan, x0.data(), x0.size(), 42, 3, "{}", &record) ==
          DIL_ERR_LOOKUP);
}

TEST_CASE("reconstruct-check helper reports a tiny error on the default toy") {
    Env env;
    std::vector<double> x0(8);
    REQUIRE(dil_denoiser_sample_x0(env.denoiser, 0, 33, x0.data(), x0.size()) == DIL_OK);
    double err = 1.0;
    REQUIRE(dil_reconstruct_check(env.schedule, env.denoiser, env.plan, x0.data(), x0.size(), 0, 33,
                                  R"({"clip_max": 15.5})", &err) == DIL_OK);
    CHECK(err <= 1e-6);
}

TEST_CASE("analysis and equivalence reports emit parseable CSV") {
    Env env;
    char* raw = nullptr;
    REQUIRE(dil_correction_std_csv(env.schedule, env.denoiser, env.plan,
                                   R"({"n":200,"seed":1,"condition":0})", &raw) == DIL_OK);
    const std::string curve = take(raw);
    CHECK(curve.rfind("step,t,s,", 0) == 0);
    CHECK(std::count(curve.begin(), curve.end(), '\n') == 5);

    REQUIRE(dil_offset_histogram_csv(env.schedule, curve.c_str(), "{}", &raw) == DIL_OK);
    const std::string offsets = take(raw);
    CHECK(offsets.rfind("t,t_star,offset\n", 0) == 0);
    CHECK(offsets.find("# median_offset ") != std::string::npos);

    REQUIRE(dil_dds_equiv_csv(env.schedule, R"({"configs":3,"base_seed":7})", &raw) == DIL_OK);
    const std::string equiv = take(raw);
    CHECK(std::count(equiv.begin(), equiv.end(), '\n') == 4);

    REQUIRE(dil_cfg_equiv_csv(env.schedule, R"({"configs":2,"base_seed":7,"w":[1.5]})", &raw) == DIL_OK);
    const std::string cfg_equiv = take(raw);
    CHECK(std::count(cfg_equiv.begin(), cfg_equiv.end(), '\n') == 3);

    std::vector<double> x0(8);
    REQUIRE(dil_denoiser_sample_x0(env.denoiser, 0, 44, x0.data(), x0.size()) == DIL_OK);
    dil_record* record = nullptr;
    REQUIRE(dil_invert(env.schedule, env.denoiser, env.plan, x0.data(), x0.size(), 0, 44, "{}", &record) ==
            DIL_OK);
    REQUIRE(dil_cosine_csv(env.schedule, env.denoiser, record, 1, &raw) == DIL_OK);
    const std::string cosine = take(raw);
    CHECK(cosine.rfind("t,cos_a,cos_b\n", 0) == 0);
    dil_record_free(record);
}

TEST_CASE("config hash helper is stable") {
    char* a = nullptr;
    char* b = nullptr;
    REQUIRE(dil_config_hash(R"({"b":1,"a":2})", &a) == DIL_OK);
    REQUIRE(dil_config_hash(R"({"a":2,"b":1})", &b) == DIL_OK);
    CHECK(take(a) == take(b));
    CHECK(dil_config_hash("not json", &a) == DIL_ERR_CONFIG);
}

TEST_CASE("target responsibility classifies the toy modes") {
    Env env;
    std::vector<double> near_target(8, -0.75);
    double resp = 0.0;
    REQUIRE(dil_target_responsibility(env.denoiser, near_target.data(), 8, 1, 0, &resp) == DIL_OK);
    CHECK(resp > 0.9);
}
