#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "contracert/adjoint.hpp"
#include "contracert/verifier.hpp"

namespace contracert {

// Flat view of the trainable parameters: controller layers first, then
// metric layers (skipped in constant-metric mode), each as row-major weights
// followed by the bias.
class ParamIndexer {
  public:
    explicit ParamIndexer(const ContractionProblem& prob);

    int size() const { return total_; }
    Vec flatten(const ContractionProblem& prob) const;
    void scatter(const Vec& theta, ContractionProblem& prob) const;
    Vec flatten_grads(const NetGrads& dctrl, const NetGrads& dmet) const;
    std::string block_name(int index) const;

  private:
    struct Block {
        std::string name;
        int offset;
        int length;
    };
    std::vector<Block> blocks_;
    int ctrl_layers_ = 0;
    int metric_layers_ = 0;
    int total_ = 0;
};

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainState {
    Vec theta;
    Vec m, v;  // Adam moments
    long long step = 0;
    int epoch = 0;
    Vec half_widths;  // current curriculum domain, centered at the origin
    int r = 16;
    int stagnation = 0;  // epochs since the last certified epoch or refinement
};

// Bias-corrected Adam update on state.theta. Throws on non-finite gradient
// entries, naming the parameter block.
void adam_step(TrainState& state, const AdamParams& p, double lr, const Vec& grad,
               const ParamIndexer& idx);

struct TrainConfig {
    double learning_rate = 0.01;
    int epochs = 20000;            // epochs to run in this invocation
    int max_epochs_total = 20000;  // cap on the cumulative epoch counter
    int initial_r = 16;
    int refinement_trigger = 2000;
    int refinement_increment = 2;
    Vec curriculum_start;      // half-widths
    Vec curriculum_increment;  // added to the half-widths at each certification
    std::uint64_t seed = 0;
    AdamParams adam;
    int threads = 0;
    double diag_slack = 0.0;

    void validate(int state_dim) const;
};

// One forward pass of the certificate pipeline over a partition, with every
// per-cell record kept; backward() walks them once in reverse.
class GradientTape {
  public:
    GradientTape(const ContractionProblem& prob, const std::vector<IntervalVector>& cells,
                 int threads = 0, double diag_slack = 0.0);

    double value() const { return value_; }
    const std::vector<Vec>& spectra() const { return spectra_; }
    const std::vector<CellComputation>& cell_records() const { return comps_; }
    const std::vector<EigResult>& eigs() const { return eigs_; }
    const std::vector<IntervalVector>& cells() const { return cells_; }

    // dLoss/dtheta; consumes the tape (second call throws)
    Vec backward(const ParamIndexer& idx);

  private:
    const ContractionProblem* prob_;
    std::vector<IntervalVector> cells_;
    std::vector<CellComputation> comps_;
    std::vector<EigResult> eigs_;
    std::vector<Vec> spectra_;
    double value_ = 0.0;
    int threads_ = 0;
    bool consumed_ = false;
};

// Certificate loss: sum of the positive parts of all eigenvalues of every
// cell's dominating matrix. Zero exactly when the whole partition verifies.
std::pair<double, std::vector<Vec>> loss(const ContractionProblem& prob,
                                         const std::vector<IntervalVector>& cells,
                                         int threads = 0, double diag_slack = 0.0);
Vec grad_loss(const ContractionProblem& prob, const std::vector<IntervalVector>& cells,
              int threads = 0, double diag_slack = 0.0);

double positive_part_sum(const std::vector<Vec>& spectra);

// Centered-uniform weights scaled by 1/sqrt(fan-in), zero biases.
void initialize_params(ContractionProblem& prob, std::uint64_t seed);

IntervalVector box_from_half_widths(const Vec& hw);

struct EpochLog {
    int epoch;
    double loss;
    int r;
    Vec half_widths;
    double wall_seconds;
};

struct Milestone {
    int epoch;
    IntervalVector domain;
    int r;
    Vec theta;
    DomainCertificate certificate;
};

struct TrainCallbacks {
    std::function<void(const EpochLog&)> on_epoch;
    std::function<void(const Milestone&)> on_milestone;
};

struct TrainResult {
    std::vector<EpochLog> log;
    std::vector<Milestone> milestones;  // nested certified domains, in order
    TrainState state;
    bool start_certified = false;
};

// Curriculum training loop: certify-and-grow on zero loss, Adam step
// otherwise, partition refinement on stagnation. Mutates prob in place; the
// returned milestones carry parameter snapshots.
TrainResult train(ContractionProblem& prob, const TrainConfig& cfg,
                  const TrainCallbacks& callbacks = {}, const TrainState* resume = nullptr);

}  // namespace contracert
