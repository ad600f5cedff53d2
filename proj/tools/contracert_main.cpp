// contracert: train, verify, and inspect contraction certificates for
// control-affine systems under neural network controllers.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "contracert/model_io.hpp"
#include "contracert/trainer.hpp"
#include "contracert/verifier.hpp"

namespace {

using namespace contracert;

constexpr int kExitOk = 0;
constexpr int kExitUnverified = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitConfig = 64;
constexpr int kExitModel = 65;

Vec parse_csv_doubles(const std::string& s) {
    Vec out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

// "lo..hi,lo..hi" with one token per state axis
IntervalVector parse_domain(const std::string& s) {
    Vec lo, hi;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const size_t pos = tok.find("..");
        if (pos == std::string::npos)
            throw std::invalid_argument("domain axis must look like lo..hi: " + tok);
        lo.push_back(std::stod(tok.substr(0, pos)));
        hi.push_back(std::stod(tok.substr(pos + 2)));
    }
    if (lo.empty()) throw std::invalid_argument("empty domain");
    return IntervalVector(std::move(lo), std::move(hi));
}

int cmd_train(const std::string& config_path, const std::string& resume_path, int threads_flag) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
        if (const char* env_seed = std::getenv("CONTRACERT_SEED"))
            cfg.train.seed = std::strtoull(env_seed, nullptr, 10);
        if (threads_flag > 0) cfg.train.threads = threads_flag;
        ContractionProblem check = build_problem(cfg);
        cfg.train.validate(check.plant->state_dim());
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    std::filesystem::create_directories(cfg.out_dir);
    ContractionProblem prob = build_problem(cfg);

    TrainState resume_state;
    const TrainState* resume = nullptr;
    if (!resume_path.empty()) {
        try {
            resume_state = load_checkpoint(resume_path, prob);
            resume = &resume_state;
        } catch (const std::exception& e) {
            std::cerr << "model error: " << e.what() << "\n";
            return kExitModel;
        }
    }

    int milestone_count = 0;
    TrainCallbacks cb;
    cb.on_milestone = [&](const Milestone& ms) {
        milestone_count += 1;
        ContractionProblem snapshot = prob;
        ParamIndexer(snapshot).scatter(ms.theta, snapshot);
        char tag[32];
        std::snprintf(tag, sizeof(tag), "milestone_%04d", milestone_count);
        const std::string base = cfg.out_dir + "/" + tag;
        save_model(snapshot, base + "_model.json");
        DomainCertificate cert = ms.certificate;
        cert.fingerprint = problem_fingerprint(snapshot);
        save_certificate(cert, base + "_certificate.json");
        std::cout << "certified domain up to half-widths (";
        for (size_t i = 0; i < ms.domain.hi.size(); ++i)
            std::cout << (i ? ", " : "") << ms.domain.hi[i];
        std::cout << ") at epoch " << ms.epoch << "\n";
    };

    TrainResult result = train(prob, cfg.train, cb, resume);

    write_training_log_csv(result.log, cfg.out_dir + "/training_log.csv");
    save_model(prob, cfg.out_dir + "/model_final.json");
    save_checkpoint(prob, result.state, cfg.out_dir + "/checkpoint.json");
    if (!result.milestones.empty()) {
        const Milestone& last = result.milestones.back();
        ContractionProblem snapshot = prob;
        ParamIndexer(snapshot).scatter(last.theta, snapshot);
        save_model(snapshot, cfg.out_dir + "/model_certified.json");
        DomainCertificate cert = last.certificate;
        cert.fingerprint = problem_fingerprint(snapshot);
        save_certificate(cert, cfg.out_dir + "/certificate.json");
    }
    std::cout << "epochs run: " << result.log.size() << ", certified milestones: "
              << result.milestones.size() << "\n";
    return result.start_certified ? kExitOk : kExitUnverified;
}

int cmd_verify(const std::string& model_path, const std::string& domain_str, int r, bool adaptive,
               int max_depth, double rate, double margin, double slack, int threads,
               const std::string& out_path) {
    ContractionProblem prob;
    try {
        prob = load_model(model_path);
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitModel;
    }
    IntervalVector domain;
    try {
        domain = parse_domain(domain_str);
        if (domain.size() != prob.plant->state_dim())
            throw std::invalid_argument("domain dimension does not match the plant");
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (rate >= 0.0) prob.rate = rate;

    VerifySettings settings;
    settings.margin = margin;
    settings.diag_slack = slack;
    settings.threads = threads;

    DomainCertificate cert = adaptive ? adaptive_verify(prob, domain, max_depth, settings)
                                      : verify_domain(prob, domain, r, settings);
    cert.fingerprint = problem_fingerprint(prob);
    if (!out_path.empty()) save_certificate(cert, out_path);

    int verified = 0;
    for (const auto& c : cert.cells) verified += c.verified ? 1 : 0;
    std::cout << (cert.all_verified ? "VERIFIED" : "NOT VERIFIED") << ": " << verified << "/"
              << cert.cells.size() << " cells, rate " << cert.rate << "\n";
    return cert.all_verified ? kExitOk : kExitUnverified;
}

int cmd_simulate(const std::string& model_path, const std::string& x0_str, double horizon,
                 double dt, const std::string& out_path) {
    ContractionProblem prob;
    try {
        prob = load_model(model_path);
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitModel;
    }
    Vec x0;
    try {
        x0 = parse_csv_doubles(x0_str);
        if (static_cast<int>(x0.size()) != prob.plant->state_dim())
            throw std::invalid_argument("x0 dimension does not match the plant");
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        const Trajectory traj = simulate(*prob.plant, &prob.controller, x0, horizon, dt);
        write_trajectory_csv(traj, out_path);
    } catch (const SimulationDivergence& e) {
        std::cerr << "divergence at t=" << e.time << "\n";
        return kExitDiverged;
    }
    return kExitOk;
}

int cmd_export_field(const std::string& model_path, const std::string& domain_str, int grid,
                     const std::string& out_path) {
    ContractionProblem prob;
    try {
        prob = load_model(model_path);
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitModel;
    }
    IntervalVector domain;
    try {
        domain = parse_domain(domain_str);
        if (domain.size() != 2 || prob.plant->state_dim() != 2)
            throw std::invalid_argument("field export supports 2-dimensional plants");
        if (grid < 1) throw std::invalid_argument("grid must be >= 1");
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "cannot open for writing: " << out_path << "\n";
        return kExitConfig;
    }
    const int m = prob.plant->input_dim();
    out << "x1,x2,dx1,dx2";
    for (int i = 1; i <= m; ++i) out << ",u" << i;
    out << "\n";
    out.precision(17);
    auto coord = [&](int axis, int i) {
        if (grid == 1) return 0.5 * (domain.lo[axis] + domain.hi[axis]);
        return domain.lo[axis] + (domain.hi[axis] - domain.lo[axis]) * i / (grid - 1);
    };
    const Mat& b = prob.plant->input_matrix();
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            const Vec x{coord(0, i), coord(1, j)};
            const Vec u = prob.controller.eval(x);
            Vec dx = prob.plant->eval_f(x);
            for (int r = 0; r < b.rows; ++r)
                for (int c = 0; c < b.cols; ++c) dx[r] += b(r, c) * u[c];
            out << x[0] << "," << x[1] << "," << dx[0] << "," << dx[1];
            for (double ui : u) out << "," << ui;
            out << "\n";
        }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"closed-loop contraction certificates for neural network controllers"};
    app.require_subcommand(1);

    std::string config_path, resume_path;
    int train_threads = 0;
    auto* train_cmd = app.add_subcommand("train", "train controller and metric to a certificate");
    train_cmd->add_option("config", config_path, "training config JSON")->required();
    train_cmd->add_option("--resume", resume_path, "checkpoint to resume from");
    train_cmd->add_option("--threads", train_threads, "worker threads");

    std::string model_path, domain_str, out_path;
    int r = 16, max_depth = 6, verify_threads = 0;
    bool adaptive = false;
    double rate = -1.0, margin = 0.0, slack = 0.0;
    auto* verify_cmd = app.add_subcommand("verify", "verify contraction on a domain");
    verify_cmd->add_option("model", model_path, "model JSON")->required();
    verify_cmd->add_option("--domain", domain_str, "per-axis lo..hi, comma separated")->required();
    verify_cmd->add_option("--r", r, "uniform cells per axis");
    verify_cmd->add_flag("--adaptive", adaptive, "adaptive bisection instead of a uniform grid");
    verify_cmd->add_option("--max-depth", max_depth, "adaptive bisection depth limit");
    verify_cmd->add_option("--rate", rate, "override the contraction rate c");
    verify_cmd->add_option("--margin", margin, "require lambda_max <= -margin");
    verify_cmd->add_option("--slack", slack, "slack added to the diagonal of G");
    verify_cmd->add_option("--threads", verify_threads, "worker threads");
    verify_cmd->add_option("--out", out_path, "certificate JSON output path");

    std::string x0_str, sim_out = "trajectory.csv";
    double horizon = 10.0, dt = 1e-3;
    auto* sim_cmd = app.add_subcommand("simulate", "integrate the closed loop");
    sim_cmd->add_option("model", model_path, "model JSON")->required();
    sim_cmd->add_option("--x0", x0_str, "initial state, comma separated")->required();
    sim_cmd->add_option("--T", horizon, "horizon");
    sim_cmd->add_option("--dt", dt, "step size");
    sim_cmd->add_option("--out", sim_out, "trajectory CSV output path");

    int grid = 20;
    std::string field_out = "field.csv";
    auto* field_cmd = app.add_subcommand("export-field", "closed-loop vector field on a grid");
    field_cmd->add_option("model", model_path, "model JSON")->required();
    field_cmd->add_option("--domain", domain_str, "per-axis lo..hi, comma separated")->required();
    field_cmd->add_option("--grid", grid, "grid points per axis");
    field_cmd->add_option("--out", field_out, "field CSV output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return cmd_train(config_path, resume_path, train_threads);
        if (verify_cmd->parsed())
            return cmd_verify(model_path, domain_str, r, adaptive, max_depth, rate, margin, slack,
                              verify_threads, out_path);
        if (sim_cmd->parsed()) return cmd_simulate(model_path, x0_str, horizon, dt, sim_out);
        if (field_cmd->parsed()) return cmd_export_field(model_path, domain_str, grid, field_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
