#pragma once

#include <stdexcept>
#include <string>

#include "contracert/plant.hpp"
#include "contracert/trainer.hpp"
#include "contracert/verifier.hpp"

namespace contracert {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kModelFormatVersion = 1;

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Canonical JSON form of a problem (controller, metric, plant, rate); the
// fingerprint hashes this string, so any parameter change changes it.
std::string model_to_json(const ContractionProblem& prob);
void save_model(const ContractionProblem& prob, const std::string& path);
ContractionProblem load_model(const std::string& path);  // throws ModelError
std::string problem_fingerprint(const ContractionProblem& prob);

// Training run description; strict schema, unknown keys rejected.
struct RunConfig {
    TrainConfig train;
    std::vector<int> controller_hidden{16, 16};
    std::vector<int> metric_hidden{32, 32};
    double epsilon = 0.1;
    double output_scale = 0.0;  // 0 = derive 4*m*g*l from the pendulum parameters
    double rate = 0.0;
    std::string plant_name = "inverted_pendulum";
    double pendulum_mass = 1.0;
    double pendulum_length = 1.0;
    double pendulum_gravity = 9.81;
    std::string out_dir = ".";
};
RunConfig load_config(const std::string& path);  // throws ConfigError
ContractionProblem build_problem(const RunConfig& cfg);

void save_certificate(const DomainCertificate& cert, const std::string& path);

// Model plus optimizer state for resumable training.
void save_checkpoint(const ContractionProblem& prob, const TrainState& state,
                     const std::string& path);
TrainState load_checkpoint(const std::string& path, ContractionProblem& prob);

void write_training_log_csv(const std::vector<EpochLog>& log, const std::string& path);
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace contracert
