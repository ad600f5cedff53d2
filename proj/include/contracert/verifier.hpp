#pragma once

#include <functional>
#include <memory>
#include <string>

#include "contracert/controller.hpp"
#include "contracert/eig.hpp"
#include "contracert/metric.hpp"
#include "contracert/plant.hpp"

namespace contracert {

struct ContractionProblem {
    std::shared_ptr<const Plant> plant;
    ZeroAnchoredBoundedController controller;
    NeuralContractionMetric metric;
    double rate = 0.0;  // contraction rate c; the certificate covers rate c

    void validate() const;
};

struct VerifySettings {
    double margin = 0.0;      // require lambda_max(G) <= -margin
    double diag_slack = 0.0;  // added to the diagonal of G
    int threads = 0;          // 0 = hardware concurrency
};

// Full bound pipeline for one cell. Trainer and verifier share this
// computation, so certificates and training loss see identical matrices.
// The stored intermediates double as the reverse-pass tape.
struct CellComputation {
    IntervalVector f;
    IntervalMatrix jf;
    ControllerRecord ctrl;
    IntervalVector bu;       // [B u]
    IntervalMatrix bju;      // [B du/dx]
    MetricRecord met;
    MetricBounds mbounds;
    Mat mdotf_lo, mdotf_hi;  // entrywise bounds on the Lie derivative along f
    Mat mdotu_lo, mdotu_hi;  // ... along B u
    IntervalMatrix lf;       // [M * jf]
    IntervalMatrix lu;       // [M * B du/dx]
    IntervalMatrix a_pre;    // assembled bounds before symmetrization
    IntervalMatrix a;
    Mat g;
};

// Interval enclosure of the contraction matrix over the cell, assembled in
// the fixed order: plant bounds, controller bounds (input matrix applied
// outside the tanh factor), metric bounds, Lie-derivative inner products,
// the two metric-Jacobian products, the symmetric sums, and the rate term.
IntervalMatrix assemble_A_interval(const ContractionProblem& prob, const IntervalVector& cell,
                                   CellComputation* rec = nullptr);

// Constant dominating matrix: off-diagonal max{upper, -lower}, diagonal
// upper (plus slack). Dominates the Metzler majorant of every matrix in the
// interval.
Mat assemble_G(const IntervalMatrix& a, double diag_slack = 0.0);

Mat assemble_cell_G(const ContractionProblem& prob, const IntervalVector& cell,
                    double diag_slack = 0.0, CellComputation* rec = nullptr);

struct CellCertificate {
    IntervalVector cell;
    Mat G;
    double lambda_max = 0.0;
    bool verified = false;
    int depth = 0;
    double metric_upper = 0.0;  // lambda_max of the upper metric bound
};

struct DomainCertificate {
    IntervalVector domain;
    std::vector<CellCertificate> cells;
    bool all_verified = false;
    double rate = 0.0;
    double metric_upper = 0.0;  // max over cells
    std::string plant_name;
    std::string plant_params;   // canonical JSON
    std::string fingerprint;    // set by the serialization layer
};

CellCertificate verify_cell(const ContractionProblem& prob, const IntervalVector& cell,
                            const VerifySettings& settings = {}, int depth = 0);

// Uniform r^n grid, cells verified independently (parallel over cells).
DomainCertificate verify_domain(const ContractionProblem& prob, const IntervalVector& domain,
                                int r, const VerifySettings& settings = {});

// Recursively bisects unverified cells until they verify or reach
// max_depth; exhausted cells stay in the certificate as unverified leaves.
DomainCertificate adaptive_verify(const ContractionProblem& prob, const IntervalVector& domain,
                                  int max_depth, const VerifySettings& settings = {});

// Static-chunk parallel map; results must be written to per-index slots.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

// Pointwise contraction matrix from the exact evaluation path (analytic
// Jacobians, no interval arithmetic); diagnostic counterpart of the interval
// assembly.
Mat contraction_matrix_at(const ContractionProblem& prob, const Vec& x);

}  // namespace contracert
