#pragma once

#include "contracert/network.hpp"

namespace contracert {

// Feedback controller u(x) = s*tanh((N(x) - N(0))/s) built on an
// identity-output base network. Anchoring at the origin makes u(0) = 0 exact
// and the tanh keeps every output inside [-s, s].
struct ZeroAnchoredBoundedController {
    FeedforwardNetwork base;
    double scale = 1.0;

    int state_dim() const { return base.input_dim(); }
    int input_dim() const { return base.output_dim(); }
    void validate() const;

    Vec anchor() const;  // base(0)
    Vec eval(const Vec& x) const;
    Mat jacobian(const Vec& x) const;
};

// Everything the bound computation touches, stored for the reverse pass.
struct ControllerRecord {
    bool has_bounds = false;
    LayerBounds ibp;
    ForwardTrace anchor_trace;
    IntervalVector shifted;  // last preactivation bounds minus the anchor
    IntervalVector u;

    bool has_jac = false;
    JacChain chain;           // base-network Jacobian chain
    IntervalVector tanh_deriv;
    IntervalMatrix du;        // diag(tanh') * [∂base]
    IntervalMatrix left_du;   // left * du when a left factor was supplied
};

// Output bounds over the box: IBP through the base net, shift the final
// preactivation interval by the anchor, map through the tanh.
IntervalVector controller_bounds(const ZeroAnchoredBoundedController& c, const IntervalVector& box,
                                 ControllerRecord* rec = nullptr);

// Jacobian bounds over the box, with the tanh derivative interval appended
// as the final diagonal factor; `left` (e.g. the plant input matrix) is
// applied outside that factor.
IntervalMatrix controller_jacobian_bounds(const ZeroAnchoredBoundedController& c,
                                          const IntervalVector& box, const Mat* left = nullptr,
                                          ControllerRecord* rec = nullptr);

}  // namespace contracert
