#include "contracert/model_io.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace contracert {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
}

json layer_to_json(const Layer& l) {
    return json{{"rows", l.W.rows}, {"cols", l.W.cols}, {"W", l.W.data}, {"b", l.b}};
}

Layer layer_from_json(const json& j, const std::string& where) {
    check_keys(j, {"rows", "cols", "W", "b"}, where);
    Layer l;
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    if (rows <= 0 || cols <= 0) throw ModelError(where + ": nonpositive layer shape");
    l.W.rows = rows;
    l.W.cols = cols;
    l.W.data = j.at("W").get<std::vector<double>>();
    l.b = j.at("b").get<Vec>();
    if (static_cast<int>(l.W.data.size()) != rows * cols)
        throw ModelError(where + ": weight size does not match shape");
    if (static_cast<int>(l.b.size()) != rows)
        throw ModelError(where + ": bias size does not match rows");
    return l;
}

json activation_to_json(const Activation& a) {
    json j{{"name", a.name()}};
    if (a.kind == Activation::Kind::smooth_leaky_relu) j["alpha"] = a.alpha;
    if (a.kind == Activation::Kind::scaled_tanh) j["scale"] = a.scale;
    return j;
}

Activation activation_from_json(const json& j, const std::string& where) {
    check_keys(j, {"name", "alpha", "scale"}, where);
    return Activation::from_name(j.at("name").get<std::string>(), j.value("alpha", 0.01),
                                 j.value("scale", 1.0));
}

json model_json(const ContractionProblem& prob) {
    json ctrl;
    ctrl["layers"] = json::array();
    for (const auto& l : prob.controller.base.layers) ctrl["layers"].push_back(layer_to_json(l));
    ctrl["hidden_activation"] = activation_to_json(prob.controller.base.hidden);
    ctrl["output_scale"] = prob.controller.scale;
    ctrl["anchor"] = prob.controller.anchor();

    json met;
    if (prob.metric.constant_mode) {
        met["constant"] = prob.metric.constant_M.data;
        met["n"] = prob.metric.n;
        met["epsilon"] = prob.metric.epsilon;
    } else {
        met["layers"] = json::array();
        for (const auto& l : prob.metric.base.layers) met["layers"].push_back(layer_to_json(l));
        met["hidden_activation"] = activation_to_json(prob.metric.base.hidden);
        met["epsilon"] = prob.metric.epsilon;
        met["n"] = prob.metric.n;
        met["reshape"] = "row-major";
    }

    json plant;
    plant["name"] = prob.plant->name();
    plant["params"] = json::parse(prob.plant->params_json());

    return json{{"version", kModelFormatVersion},
                {"controller", ctrl},
                {"metric", met},
                {"plant", plant},
                {"rate", prob.rate}};
}

std::shared_ptr<const Plant> plant_from_json(const json& j) {
    check_keys(j, {"name", "params"}, "plant");
    const std::string name = j.at("name").get<std::string>();
    if (name == "inverted_pendulum") {
        const json& p = j.at("params");
        check_keys(p, {"m", "l", "g"}, "plant.params");
        return std::make_shared<InvertedPendulum>(p.value("m", 1.0), p.value("l", 1.0),
                                                  p.value("g", 9.81));
    }
    throw ModelError("unknown plant: " + name);
}

}  // namespace

std::string model_to_json(const ContractionProblem& prob) { return model_json(prob).dump(); }

void save_model(const ContractionProblem& prob, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ModelError("cannot open for writing: " + path);
    out << model_json(prob).dump(2) << "\n";
}

namespace {

ContractionProblem model_from_json(const json& j, const std::string& path) {
    try {
        check_keys(j, {"version", "controller", "metric", "plant", "rate"}, "model");
        if (j.at("version").get<int>() != kModelFormatVersion)
            throw ModelError("unsupported model version");

        ContractionProblem prob;
        prob.plant = plant_from_json(j.at("plant"));
        prob.rate = j.value("rate", 0.0);

        const json& jc = j.at("controller");
        check_keys(jc, {"layers", "hidden_activation", "output_scale", "anchor"}, "controller");
        for (size_t k = 0; k < jc.at("layers").size(); ++k)
            prob.controller.base.layers.push_back(
                layer_from_json(jc.at("layers")[k], "controller.layers[" + std::to_string(k) + "]"));
        prob.controller.base.hidden =
            activation_from_json(jc.at("hidden_activation"), "controller.hidden_activation");
        prob.controller.base.output = Activation::identity();
        prob.controller.scale = jc.at("output_scale").get<double>();

        const json& jm = j.at("metric");
        if (jm.contains("constant")) {
            check_keys(jm, {"constant", "n", "epsilon"}, "metric");
            prob.metric.constant_mode = true;
            prob.metric.n = jm.at("n").get<int>();
            prob.metric.epsilon = jm.at("epsilon").get<double>();
            prob.metric.constant_M.rows = prob.metric.n;
            prob.metric.constant_M.cols = prob.metric.n;
            prob.metric.constant_M.data = jm.at("constant").get<std::vector<double>>();
            if (static_cast<int>(prob.metric.constant_M.data.size()) !=
                prob.metric.n * prob.metric.n)
                throw ModelError("metric.constant size mismatch");
        } else {
            check_keys(jm, {"layers", "hidden_activation", "epsilon", "n", "reshape"}, "metric");
            if (jm.value("reshape", "row-major") != std::string("row-major"))
                throw ModelError("metric.reshape must be row-major");
            prob.metric.n = jm.at("n").get<int>();
            prob.metric.epsilon = jm.at("epsilon").get<double>();
            for (size_t k = 0; k < jm.at("layers").size(); ++k)
                prob.metric.base.layers.push_back(
                    layer_from_json(jm.at("layers")[k], "metric.layers[" + std::to_string(k) + "]"));
            prob.metric.base.hidden =
                activation_from_json(jm.at("hidden_activation"), "metric.hidden_activation");
            prob.metric.base.output = Activation::identity();
        }

        prob.validate();

        // the cached anchor is re-derivable; recompute and flag drift
        if (jc.contains("anchor")) {
            const Vec cached = jc.at("anchor").get<Vec>();
            const Vec fresh = prob.controller.anchor();
            if (cached.size() != fresh.size()) throw ModelError("controller.anchor size mismatch");
            for (size_t i = 0; i < fresh.size(); ++i)
                if (std::fabs(cached[i] - fresh[i]) > 1e-9) {
                    std::cerr << "warning: cached controller anchor differs from recomputed value"
                                 " by more than 1e-9; using the recomputed anchor\n";
                    break;
                }
        }
        return prob;
    } catch (const json::exception& e) {
        throw ModelError("invalid model file " + path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ModelError("invalid model file " + path + ": " + e.what());
    }
}

}  // namespace

ContractionProblem load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ModelError("malformed model JSON in " + path + ": " + e.what());
    }
    return model_from_json(j, path);
}

std::string problem_fingerprint(const ContractionProblem& prob) {
    const std::string canon = model_to_json(prob);
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed config JSON in " + path + ": " + e.what());
    }
    try {
        check_keys(j,
                   {"seed", "learning_rate", "epochs", "max_epochs_total", "initial_r",
                    "refinement_trigger", "refinement_increment", "curriculum_start",
                    "curriculum_increment", "threads", "diag_slack", "adam", "controller_hidden",
                    "metric_hidden", "epsilon", "output_scale", "rate", "plant", "out_dir"},
                   "config");
        RunConfig cfg;
        TrainConfig& t = cfg.train;
        t.seed = j.value("seed", static_cast<std::uint64_t>(0));
        t.learning_rate = j.value("learning_rate", 0.01);
        t.epochs = j.value("epochs", 20000);
        t.max_epochs_total = j.value("max_epochs_total", 20000);
        t.initial_r = j.value("initial_r", 16);
        t.refinement_trigger = j.value("refinement_trigger", 2000);
        t.refinement_increment = j.value("refinement_increment", 2);
        constexpr double kPi = 3.14159265358979323846;
        t.curriculum_start = j.value("curriculum_start", Vec{kPi / 100.0, 0.05});
        t.curriculum_increment = j.value("curriculum_increment", Vec{kPi / 100.0, 0.06});
        t.threads = j.value("threads", 0);
        t.diag_slack = j.value("diag_slack", 0.0);
        if (j.contains("adam")) {
            check_keys(j["adam"], {"beta1", "beta2", "eps"}, "config.adam");
            t.adam.beta1 = j["adam"].value("beta1", 0.9);
            t.adam.beta2 = j["adam"].value("beta2", 0.999);
            t.adam.eps = j["adam"].value("eps", 1e-8);
        }
        cfg.controller_hidden = j.value("controller_hidden", std::vector<int>{16, 16});
        cfg.metric_hidden = j.value("metric_hidden", std::vector<int>{32, 32});
        cfg.epsilon = j.value("epsilon", 0.1);
        cfg.output_scale = j.value("output_scale", 0.0);
        cfg.rate = j.value("rate", 0.0);
        if (j.contains("plant")) {
            check_keys(j["plant"], {"name", "m", "l", "g"}, "config.plant");
            cfg.plant_name = j["plant"].value("name", "inverted_pendulum");
            cfg.pendulum_mass = j["plant"].value("m", 1.0);
            cfg.pendulum_length = j["plant"].value("l", 1.0);
            cfg.pendulum_gravity = j["plant"].value("g", 9.81);
        }
        cfg.out_dir = j.value("out_dir", ".");
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError("invalid config file " + path + ": " + e.what());
    }
}

ContractionProblem build_problem(const RunConfig& cfg) {
    if (cfg.plant_name != "inverted_pendulum")
        throw ConfigError("unknown plant: " + cfg.plant_name);

    ContractionProblem prob;
    prob.plant = std::make_shared<InvertedPendulum>(cfg.pendulum_mass, cfg.pendulum_length,
                                                    cfg.pendulum_gravity);
    prob.rate = cfg.rate;
    const int n = prob.plant->state_dim();
    const int m = prob.plant->input_dim();

    auto build_net = [](int in, const std::vector<int>& hidden, int out) {
        FeedforwardNetwork net;
        int prev = in;
        for (int h : hidden) {
            if (h < 1) throw ConfigError("hidden layer width must be >= 1");
            net.layers.push_back({Mat(h, prev), Vec(static_cast<size_t>(h), 0.0)});
            prev = h;
        }
        net.layers.push_back({Mat(out, prev), Vec(static_cast<size_t>(out), 0.0)});
        net.hidden = Activation::softplus();
        net.output = Activation::identity();
        return net;
    };

    prob.controller.base = build_net(n, cfg.controller_hidden, m);
    const double mgl = cfg.pendulum_mass * cfg.pendulum_gravity * cfg.pendulum_length;
    prob.controller.scale = cfg.output_scale > 0.0 ? cfg.output_scale : 4.0 * mgl;
    prob.metric.n = n;
    prob.metric.epsilon = cfg.epsilon;
    prob.metric.base = build_net(n, cfg.metric_hidden, n * n);
    return prob;
}

void save_certificate(const DomainCertificate& cert, const std::string& path) {
    json j;
    j["version"] = 1;
    j["tool_version"] = kToolVersion;
    j["fingerprint"] = cert.fingerprint;
    j["domain"] = json{{"lo", cert.domain.lo}, {"hi", cert.domain.hi}};
    j["rate"] = cert.rate;
    j["all_verified"] = cert.all_verified;
    j["metric_upper_bound"] = cert.metric_upper;
    if (!cert.plant_name.empty())
        j["plant"] = json{{"name", cert.plant_name},
                          {"params", json::parse(cert.plant_params.empty() ? "{}"
                                                                           : cert.plant_params)}};
    j["cells"] = json::array();
    for (const auto& c : cert.cells)
        j["cells"].push_back(json{{"lo", c.cell.lo},
                                  {"hi", c.cell.hi},
                                  {"lambda_max", c.lambda_max},
                                  {"verified", c.verified},
                                  {"depth", c.depth}});
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

void save_checkpoint(const ContractionProblem& prob, const TrainState& state,
                     const std::string& path) {
    json j;
    j["model"] = json::parse(model_to_json(prob));
    j["state"] = json{{"epoch", state.epoch},     {"step", state.step},
                      {"m", state.m},             {"v", state.v},
                      {"half_widths", state.half_widths}, {"r", state.r},
                      {"stagnation", state.stagnation}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

TrainState load_checkpoint(const std::string& path, ContractionProblem& prob) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open checkpoint: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ModelError("malformed checkpoint JSON in " + path + ": " + e.what());
    }
    check_keys(j, {"model", "state"}, "checkpoint");
    prob = model_from_json(j.at("model"), path);

    const json& s = j.at("state");
    check_keys(s, {"epoch", "step", "m", "v", "half_widths", "r", "stagnation"},
               "checkpoint.state");
    TrainState st;
    st.epoch = s.at("epoch").get<int>();
    st.step = s.at("step").get<long long>();
    st.m = s.at("m").get<Vec>();
    st.v = s.at("v").get<Vec>();
    st.half_widths = s.at("half_widths").get<Vec>();
    st.r = s.at("r").get<int>();
    st.stagnation = s.at("stagnation").get<int>();
    st.theta = ParamIndexer(prob).flatten(prob);
    return st;
}

void write_training_log_csv(const std::vector<EpochLog>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    const size_t n = log.empty() ? 0 : log.front().half_widths.size();
    out << "epoch,loss,r";
    for (size_t i = 0; i < n; ++i) out << ",half_width_" << i;
    out << ",wall_seconds\n";
    out.precision(17);
    for (const auto& row : log) {
        out << row.epoch << "," << row.loss << "," << row.r;
        for (double h : row.half_widths) out << "," << h;
        out << "," << row.wall_seconds << "\n";
    }
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    const size_t n = traj.states.empty() ? 0 : traj.states.front().size();
    const size_t m = traj.inputs.empty() ? 0 : traj.inputs.front().size();
    out << "t";
    for (size_t i = 1; i <= n; ++i) out << ",x" << i;
    for (size_t i = 1; i <= m; ++i) out << ",u" << i;
    out << "\n";
    out.precision(17);
    for (size_t s = 0; s < traj.times.size(); ++s) {
        out << traj.times[s];
        for (double x : traj.states[s]) out << "," << x;
        for (double u : traj.inputs[s]) out << "," << u;
        out << "\n";
    }
}

}  // namespace contracert
