#include <doctest.h>

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "contracert/model_io.hpp"
#include "helpers.hpp"

using namespace contracert;
using namespace contracert::testing;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/contracert_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

ContractionProblem sample_problem(std::uint64_t seed) {
    Rng rng(seed);
    return random_pendulum_problem(rng, 6, 6);
}

}  // namespace

TEST_CASE("model save and load reproduce outputs bit for bit") {
    const ContractionProblem prob = sample_problem(8);
    TempFile f("model.json");
    save_model(prob, f.path);
    const ContractionProblem back = load_model(f.path);

    Rng rng(9);
    for (int s = 0; s < 100; ++s) {
        const Vec x = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const Vec u1 = prob.controller.eval(x);
        const Vec u2 = back.controller.eval(x);
        CHECK(u1[0] == u2[0]);
        const Mat m1 = eval_M(prob.metric, x);
        const Mat m2 = eval_M(back.metric, x);
        for (size_t i = 0; i < m1.data.size(); ++i) CHECK(m1.data[i] == m2.data[i]);
    }
    CHECK(back.plant->name() == "inverted_pendulum");
    CHECK(back.controller.scale == prob.controller.scale);
}

TEST_CASE("constant-metric models round-trip") {
    ContractionProblem prob;
    prob.plant = std::make_shared<InvertedPendulum>(2.0, 0.5, 9.81);
    prob.controller = zero_controller(2, 1, 3.0);
    prob.metric = constant_metric(Mat(2, 2, {2, 0.3, 0.3, 1}));
    TempFile f("const_model.json");
    save_model(prob, f.path);
    const ContractionProblem back = load_model(f.path);
    CHECK(back.metric.constant_mode);
    CHECK(back.metric.constant_M(0, 1) == 0.3);
    CHECK(dynamic_cast<const InvertedPendulum&>(*back.plant).mass() == 2.0);
}

TEST_CASE("fingerprint tracks every model byte") {
    ContractionProblem prob = sample_problem(10);
    const std::string fp1 = problem_fingerprint(prob);
    CHECK(problem_fingerprint(prob) == fp1);  // stable

    ContractionProblem tweaked = prob;
    tweaked.controller.base.layers[0].W.data[0] += 1e-12;
    CHECK(problem_fingerprint(tweaked) != fp1);

    ContractionProblem rate_changed = prob;
    rate_changed.rate = 0.1;
    CHECK(problem_fingerprint(rate_changed) != fp1);

    ContractionProblem plant_changed = prob;
    plant_changed.plant = std::make_shared<InvertedPendulum>(1.0, 1.0, 9.8);
    CHECK(problem_fingerprint(plant_changed) != fp1);
}

TEST_CASE("malformed and unknown-key model files are rejected") {
    TempFile f("bad_model.json");
    {
        std::ofstream out(f.path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_model(f.path), ModelError);
    {
        std::ofstream out(f.path);
        out << R"({"version":1,"controller":{},"metric":{},"plant":{"name":"inverted_pendulum","params":{}},"rate":0,"extra":3})";
    }
    CHECK_THROWS(load_model(f.path));
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ModelError);
}

TEST_CASE("config loading applies defaults and rejects unknown keys") {
    TempFile f("config.json");
    {
        std::ofstream out(f.path);
        out << R"({"seed": 5, "epochs": 100})";
    }
    const RunConfig cfg = load_config(f.path);
    CHECK(cfg.train.seed == 5);
    CHECK(cfg.train.epochs == 100);
    CHECK(cfg.train.learning_rate == 0.01);
    CHECK(cfg.train.initial_r == 16);
    CHECK(cfg.train.refinement_trigger == 2000);
    CHECK(cfg.train.curriculum_start[1] == 0.05);
    CHECK(cfg.train.curriculum_increment[1] == 0.06);
    CHECK(cfg.epsilon == 0.1);
    CHECK(cfg.controller_hidden == std::vector<int>{16, 16});
    CHECK(cfg.metric_hidden == std::vector<int>{32, 32});

    {
        std::ofstream out(f.path);
        out << R"({"seed": 5, "learning_rte": 0.01})";
    }
    CHECK_THROWS_AS(load_config(f.path), ConfigError);

    {
        std::ofstream out(f.path);
        out << R"({"learning_rate": -1})";
    }
    const RunConfig bad = load_config(f.path);
    CHECK_THROWS(bad.train.validate(2));
}

TEST_CASE("built problems derive the input bound from the plant") {
    RunConfig cfg;
    cfg.pendulum_mass = 2.0;
    cfg.pendulum_length = 0.5;
    cfg.pendulum_gravity = 10.0;
    const ContractionProblem prob = build_problem(cfg);
    CHECK(prob.controller.scale == doctest::Approx(4.0 * 2.0 * 10.0 * 0.5));
    CHECK(prob.controller.base.layers.size() == 3);
    CHECK(prob.metric.base.output_dim() == 4);
}

TEST_CASE("checkpoints resume with identical state") {
    ContractionProblem prob = sample_problem(12);
    initialize_params(prob, 3);
    TrainState st;
    st.theta = ParamIndexer(prob).flatten(prob);
    st.m.assign(st.theta.size(), 0.25);
    st.v.assign(st.theta.size(), 0.5);
    st.step = 42;
    st.epoch = 17;
    st.half_widths = {0.2, 0.3};
    st.r = 18;
    st.stagnation = 5;

    TempFile f("ckpt.json");
    save_checkpoint(prob, st, f.path);
    ContractionProblem restored;
    const TrainState back = load_checkpoint(f.path, restored);
    CHECK(back.epoch == 17);
    CHECK(back.step == 42);
    CHECK(back.r == 18);
    CHECK(back.stagnation == 5);
    CHECK(back.half_widths == Vec{0.2, 0.3});
    REQUIRE(back.theta.size() == st.theta.size());
    for (size_t i = 0; i < st.theta.size(); ++i) {
        CHECK(back.theta[i] == st.theta[i]);
        CHECK(back.m[i] == 0.25);
        CHECK(back.v[i] == 0.5);
    }
}

TEST_CASE("certificates serialize the published fields") {
    const ContractionProblem prob = sample_problem(14);
    DomainCertificate cert =
        verify_domain(prob, IntervalVector(Vec{-0.1, -0.1}, Vec{0.1, 0.1}), 2);
    cert.fingerprint = problem_fingerprint(prob);
    TempFile f("cert.json");
    save_certificate(cert, f.path);

    std::ifstream in(f.path);
    nlohmann::json j;
    in >> j;
    CHECK(j.at("version") == 1);
    CHECK(j.at("tool_version") == kToolVersion);
    CHECK(j.at("fingerprint") == cert.fingerprint);
    CHECK(j.at("all_verified").is_boolean());
    CHECK(j.at("rate") == 0.0);
    CHECK(j.at("metric_upper_bound").is_number());
    REQUIRE(j.at("cells").size() == 4);
    for (const auto& cell : j.at("cells")) {
        CHECK(cell.contains("lo"));
        CHECK(cell.contains("hi"));
        CHECK(cell.contains("lambda_max"));
        CHECK(cell.contains("verified"));
        CHECK(cell.contains("depth"));
    }
    CHECK(j.at("domain").at("lo").size() == 2);
    CHECK(j.at("plant").at("name") == "inverted_pendulum");
    CHECK(j.at("plant").at("params").at("g") == 9.81);
}

TEST_CASE("a drifted cached anchor is flagged but not fatal") {
    const ContractionProblem prob = sample_problem(15);
    TempFile f("anchor_model.json");
    save_model(prob, f.path);

    nlohmann::json j;
    {
        std::ifstream in(f.path);
        in >> j;
    }
    j["controller"]["anchor"][0] = j["controller"]["anchor"][0].get<double>() + 1.0;
    {
        std::ofstream out(f.path);
        out << j.dump();
    }
    const ContractionProblem back = load_model(f.path);  // warns, keeps recomputed anchor
    const Vec x{0.3, -0.2};
    CHECK(back.controller.eval(x)[0] == prob.controller.eval(x)[0]);
}
