#include "contracert/controller.hpp"

#include <stdexcept>

namespace contracert {

void ZeroAnchoredBoundedController::validate() const {
    base.validate();
    if (base.output.kind != Activation::Kind::identity)
        throw std::invalid_argument("controller: base network must have identity output");
    if (!(scale > 0.0)) throw std::invalid_argument("controller: scale must be positive");
}

Vec ZeroAnchoredBoundedController::anchor() const {
    return forward(base, Vec(static_cast<size_t>(base.input_dim()), 0.0));
}

Vec ZeroAnchoredBoundedController::eval(const Vec& x) const {
    const Vec a = anchor();
    Vec y = forward(base, x);
    const Activation tanh_act = Activation::scaled_tanh(scale);
    for (size_t i = 0; i < y.size(); ++i) y[i] = tanh_act.f(y[i] - a[i]);
    return y;
}

Mat ZeroAnchoredBoundedController::jacobian(const Vec& x) const {
    const Vec a = anchor();
    const Vec y = forward(base, x);
    Mat J = contracert::jacobian(base, x);
    const Activation tanh_act = Activation::scaled_tanh(scale);
    for (int i = 0; i < J.rows; ++i) {
        const double d = tanh_act.df(y[i] - a[i]);
        for (int j = 0; j < J.cols; ++j) J(i, j) *= d;
    }
    return J;
}

namespace {

void fill_bounds(const ZeroAnchoredBoundedController& c, const IntervalVector& box,
                 ControllerRecord& rec) {
    rec.ibp = ibp(c.base, box);
    rec.anchor_trace = forward_trace(c.base, Vec(static_cast<size_t>(c.base.input_dim()), 0.0));
    const Vec& a = rec.anchor_trace.output;
    const IntervalVector& last = rec.ibp.pre.back();
    rec.shifted.lo.resize(last.lo.size());
    rec.shifted.hi.resize(last.hi.size());
    for (size_t i = 0; i < a.size(); ++i) {
        rec.shifted.lo[i] = last.lo[i] - a[i];
        rec.shifted.hi[i] = last.hi[i] - a[i];
    }
    const Activation tanh_act = Activation::scaled_tanh(c.scale);
    rec.u.lo.resize(a.size());
    rec.u.hi.resize(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        rec.u.lo[i] = tanh_act.f(rec.shifted.lo[i]);
        rec.u.hi[i] = tanh_act.f(rec.shifted.hi[i]);
    }
    rec.has_bounds = true;
}

}  // namespace

IntervalVector controller_bounds(const ZeroAnchoredBoundedController& c, const IntervalVector& box,
                                 ControllerRecord* rec) {
    ControllerRecord local;
    ControllerRecord& r = rec ? *rec : local;
    if (!r.has_bounds) fill_bounds(c, box, r);
    return r.u;
}

IntervalMatrix controller_jacobian_bounds(const ZeroAnchoredBoundedController& c,
                                          const IntervalVector& box, const Mat* left,
                                          ControllerRecord* rec) {
    ControllerRecord local;
    ControllerRecord& r = rec ? *rec : local;
    if (!r.has_bounds) fill_bounds(c, box, r);

    interval_jacobian(c.base, r.ibp, nullptr, &r.chain);

    const Activation tanh_act = Activation::scaled_tanh(c.scale);
    const int m = c.base.output_dim();
    r.tanh_deriv.lo.resize(m);
    r.tanh_deriv.hi.resize(m);
    for (int i = 0; i < m; ++i) {
        const Interval d = tanh_act.deriv_bounds(r.shifted[i]);
        r.tanh_deriv.lo[i] = d.lo;
        r.tanh_deriv.hi[i] = d.hi;
    }
    r.du = imm_diag_left(r.tanh_deriv, r.chain.result());
    r.has_jac = true;
    if (left) {
        r.left_du = imm_exact_left(*left, r.du);
        return r.left_du;
    }
    return r.du;
}

}  // namespace contracert
