#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dicke/config.hpp"

using namespace dicke;

TEST_CASE("minimal config parses with defaults") {
    const auto res = parse_config("model.N = 8\nsolver = meanfield\n");
    REQUIRE(res.ok());
    CHECK(res.config->model.N == 8);
    CHECK(res.config->solver == SolverKind::MeanField);
    CHECK(res.config->seed == 1);
}

TEST_CASE("comments and blank lines are ignored") {
    const auto res = parse_config(
        "# a run\n"
        "model.N = 4   # inline comment\n"
        "\n"
        "solver = hops\n");
    REQUIRE(res.ok());
    CHECK(res.config->model.N == 4);
    CHECK(res.config->solver == SolverKind::Hops);
}

TEST_CASE("domain error names the key") {
    const auto res = parse_config("model.N = -3\nsolver = exact\n");
    REQUIRE_FALSE(res.ok());
    bool found = false;
    for (const auto& e : res.errors)
        if (e.message.find("model.N") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("duplicate keys report both lines") {
    const auto res = parse_config("model.N = 8\nsolver = exact\nmodel.N = 9\n");
    REQUIRE_FALSE(res.ok());
    REQUIRE(res.errors.size() == 1);
    CHECK(res.errors[0].line == 3);
    CHECK(res.errors[0].message.find("line 1") != std::string::npos);
}

TEST_CASE("unknown keys are rejected") {
    const auto res = parse_config("model.N = 8\nsolver = exact\nmodel.gamma = 1\n");
    REQUIRE_FALSE(res.ok());
    CHECK(res.errors[0].message.find("unknown key") != std::string::npos);
}

TEST_CASE("all errors are collected, not only the first") {
    const auto res = parse_config(
        "model.N = x\n"
        "solver = tomography\n"
        "time.dt = -1\n"
        "bogus = 1\n");
    REQUIRE_FALSE(res.ok());
    CHECK(res.errors.size() >= 4);
}

TEST_CASE("missing required keys are reported") {
    const auto res = parse_config("time.t_end = 4\n");
    REQUIRE_FALSE(res.ok());
    int missing = 0;
    for (const auto& e : res.errors)
        if (e.message.find("missing required") != std::string::npos) ++missing;
    CHECK(missing == 2);
}

TEST_CASE("serialize/parse round trip is lossless") {
    RunConfig cfg;
    cfg.model.N = 17;
    cfg.model.omega_c = 2.5;
    cfg.model.kappa = 0.3123456789012345;
    cfg.model.g_minus = 1.8;
    cfg.model.g_plus = 0.782;
    cfg.solver = SolverKind::Hops;
    cfg.initial_kind = InitialKind::Coherent;
    cfg.initial_theta = M_PI / 4;
    cfg.initial_phi = M_PI;
    cfg.t_end = 12.5;
    cfg.dt = 0.0025;
    cfg.sample_stride = 10;
    cfg.hops_n_traj = 321;
    cfg.observables = {"sz", "sx"};
    cfg.seed = 987654321;
    cfg.rates_n_list = {10, 20};
    cfg.rates_s_list = {0.25, 0.5, 0.75};

    const auto res = parse_config(cfg.serialize());
    REQUIRE(res.ok());
    CHECK(res.config->serialize() == cfg.serialize());
}

TEST_CASE("override supersedes the file value") {
    auto res = parse_config("model.N = 8\nsolver = exact\n");
    REQUIRE(res.ok());
    RunConfig cfg = *res.config;
    CHECK_FALSE(apply_override(cfg, "model.N", "12").has_value());
    CHECK(cfg.model.N == 12);
    CHECK(apply_override(cfg, "model.N", "0").has_value());   // invalid value
    CHECK(apply_override(cfg, "nope", "1").has_value());      // unknown key
}
