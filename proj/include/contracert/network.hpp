#pragma once

#include <vector>

#include "contracert/activation.hpp"
#include "contracert/interval.hpp"
#include "contracert/mat.hpp"

namespace contracert {

struct Layer {
    Mat W;
    Vec b;
};

// Plain feedforward network: affine layers with an entrywise hidden
// activation between them and an optional output activation on the last
// preactivation (identity or scaled-tanh).
struct FeedforwardNetwork {
    std::vector<Layer> layers;
    Activation hidden = Activation::softplus();
    Activation output = Activation::identity();

    int depth() const { return static_cast<int>(layers.size()); }
    int input_dim() const { return layers.empty() ? 0 : layers.front().W.cols; }
    int output_dim() const { return layers.empty() ? 0 : layers.back().W.rows; }
    int param_count() const;
    void validate() const;  // throws on dimension chain breaks or bad output kind
};

Vec forward(const FeedforwardNetwork& net, const Vec& x);

// forward pass with stored layer inputs and preactivations
struct ForwardTrace {
    std::vector<Vec> inputs;  // inputs[k] feeds layer k; inputs[0] = x
    std::vector<Vec> pre;     // pre[k] = W_k inputs[k] + b_k
    Vec output;
};
ForwardTrace forward_trace(const FeedforwardNetwork& net, const Vec& x);

Mat jacobian(const FeedforwardNetwork& net, const Vec& x);

// Interval bound propagation. pre[k]/post[k] are the preactivation bounds of
// layer k and the input bounds feeding layer k (post[0] = box).
struct LayerBounds {
    std::vector<IntervalVector> pre;
    std::vector<IntervalVector> post;
    IntervalVector output;
};
LayerBounds ibp(const FeedforwardNetwork& net, const IntervalVector& box);

// Running product of the interval Jacobian chain, kept for the reverse pass.
// steps[0] is the first weight layer as a degenerate interval; after that,
// one entry per diagonal-scale and per weight multiply, plus a final
// diagonal-scale when the network has an output activation.
struct JacChain {
    std::vector<IntervalMatrix> steps;
    std::vector<IntervalVector> jbounds;  // σ' bounds per hidden layer
    IntervalVector out_deriv;             // output-activation σ' bounds (if any)
    const IntervalMatrix& result() const { return steps.back(); }
};

// Interval enclosure of the network Jacobian over the box, or of
// left * Jacobian when `left` is given. The left factor is folded into the
// last weight matrix before the interval product (valid only for identity
// output activation, where the last layer is affine).
IntervalMatrix interval_jacobian(const FeedforwardNetwork& net, const IntervalVector& box,
                                 const Mat* left = nullptr);
IntervalMatrix interval_jacobian(const FeedforwardNetwork& net, const LayerBounds& bounds,
                                 const Mat* left = nullptr, JacChain* chain = nullptr);

}  // namespace contracert
