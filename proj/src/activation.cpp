#include "contracert/activation.hpp"

#include <cmath>
#include <stdexcept>

namespace contracert {

double softplus_stable(double x) {
    // log(1+e^x) without overflow; for large x this is x + log1p(e^-x)
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid_stable(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Activation Activation::smooth_leaky_relu(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("smooth_leaky_relu: alpha must be in (0,1)");
    return {Kind::smooth_leaky_relu, alpha, 0.0};
}

Activation Activation::scaled_tanh(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("scaled_tanh: scale must be positive");
    return {Kind::scaled_tanh, 0.0, scale};
}

double Activation::f(double x) const {
    switch (kind) {
        case Kind::softplus:
            return softplus_stable(x);
        case Kind::smooth_leaky_relu:
            return alpha * x + (1.0 - alpha) * softplus_stable(x);
        case Kind::scaled_tanh:
            return scale * std::tanh(x / scale);
        case Kind::identity:
            return x;
    }
    return x;
}

double Activation::df(double x) const {
    switch (kind) {
        case Kind::softplus:
            return sigmoid_stable(x);
        case Kind::smooth_leaky_relu:
            return alpha + (1.0 - alpha) * sigmoid_stable(x);
        case Kind::scaled_tanh: {
            const double t = std::tanh(x / scale);
            return 1.0 - t * t;
        }
        case Kind::identity:
            return 1.0;
    }
    return 1.0;
}

double Activation::ddf(double x) const {
    switch (kind) {
        case Kind::softplus: {
            const double s = sigmoid_stable(x);
            return s * (1.0 - s);
        }
        case Kind::smooth_leaky_relu: {
            const double s = sigmoid_stable(x);
            return (1.0 - alpha) * s * (1.0 - s);
        }
        case Kind::scaled_tanh: {
            const double t = std::tanh(x / scale);
            return -2.0 * t * (1.0 - t * t) / scale;
        }
        case Kind::identity:
            return 0.0;
    }
    return 0.0;
}

Interval Activation::range(const Interval& pre) const {
    return Interval(f(pre.lo), f(pre.hi));
}

Interval Activation::deriv_bounds(const Interval& pre) const {
    switch (kind) {
        case Kind::softplus:
        case Kind::smooth_leaky_relu:
            return Interval(df(pre.lo), df(pre.hi));
        case Kind::scaled_tanh: {
            const double dl = df(pre.lo), dh = df(pre.hi);
            const double lo = dl <= dh ? dl : dh;
            const double hi =
                (pre.lo <= 0.0 && 0.0 <= pre.hi) ? 1.0 : (dl >= dh ? dl : dh);
            return Interval(lo, hi);
        }
        case Kind::identity:
            return Interval(1.0, 1.0);
    }
    return Interval(1.0, 1.0);
}

std::string Activation::name() const {
    switch (kind) {
        case Kind::softplus:
            return "softplus";
        case Kind::smooth_leaky_relu:
            return "smooth-leaky-relu";
        case Kind::scaled_tanh:
            return "scaled-tanh";
        case Kind::identity:
            return "identity";
    }
    return "identity";
}

Activation Activation::from_name(const std::string& name, double alpha, double scale) {
    if (name == "softplus") return softplus();
    if (name == "smooth-leaky-relu") return smooth_leaky_relu(alpha);
    if (name == "scaled-tanh") return scaled_tanh(scale);
    if (name == "identity") return identity();
    throw std::invalid_argument("unknown activation: " + name);
}

}  // namespace contracert
