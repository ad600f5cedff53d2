#pragma once

#include "contracert/network.hpp"

namespace contracert {

// State-dependent metric M(x) = N(x)^T N(x) + eps*I with N the base-network
// output reshaped row-major to n x n. The eps floor keeps M(x) >= eps*I.
// A constant-matrix mode is available for problems where a fixed M suffices.
struct NeuralContractionMetric {
    int n = 0;
    FeedforwardNetwork base;  // output dimension n*n, identity output
    double epsilon = 0.1;
    bool constant_mode = false;
    Mat constant_M;  // symmetric positive definite when constant_mode

    void validate() const;
};

Mat eval_M(const NeuralContractionMetric& m, const Vec& x);

// Entry gradients: grad[i*n+j] is the length-n gradient of M_ij at x.
std::vector<Vec> eval_gradM(const NeuralContractionMetric& m, const Vec& x);

struct MetricBounds {
    IntervalMatrix M;                     // symmetric interval enclosure of M(x)
    std::vector<IntervalVector> gradM;    // gradM[i*n+j] encloses the gradient of M_ij
};

// Intermediates of bound_metric for the reverse pass.
struct MetricRecord {
    LayerBounds ibp;
    IntervalMatrix N;                     // reshaped output bounds
    IntervalMatrix NT;
    IntervalMatrix M_raw;                 // before symmetrization
    std::vector<JacChain> col_chains;     // per column of N
    std::vector<IntervalMatrix> colT;     // transposed column Jacobian bounds
    std::vector<IntervalMatrix> ncols;    // column j of [N] as n x 1
    std::vector<IntervalMatrix> grad_terms;  // 2 per unordered pair, in pair order
};

MetricBounds bound_metric(const NeuralContractionMetric& m, const IntervalVector& box,
                          MetricRecord* rec = nullptr);

// 0/1 selector whose product with the flat n^2 output extracts column i of
// the reshaped matrix.
Mat column_selector(int n, int i);

}  // namespace contracert
