#pragma once

#include <string>

#include "contracert/interval.hpp"

namespace contracert {

// Entrywise activation. softplus and smooth_leaky_relu have monotone
// nondecreasing derivatives; scaled_tanh does not, so its derivative range
// needs the endpoint-min / interior-max treatment.
struct Activation {
    enum class Kind { softplus, smooth_leaky_relu, scaled_tanh, identity };

    Kind kind = Kind::identity;
    double alpha = 0.01;  // smooth_leaky_relu slope at -inf, in (0,1)
    double scale = 1.0;   // scaled_tanh output bound, > 0

    static Activation softplus() { return {Kind::softplus, 0.0, 0.0}; }
    static Activation smooth_leaky_relu(double alpha);
    static Activation scaled_tanh(double scale);
    static Activation identity() { return {Kind::identity, 0.0, 0.0}; }

    double f(double x) const;
    double df(double x) const;
    double ddf(double x) const;

    // σ is monotone increasing for all four kinds, so image endpoints map.
    Interval range(const Interval& pre) const;

    // Bounds on σ'(x) over the preactivation interval: derivative endpoints
    // when σ' is monotone, endpoint-min with interior max 1 for scaled_tanh.
    Interval deriv_bounds(const Interval& pre) const;

    bool monotone_derivative() const { return kind != Kind::scaled_tanh; }

    std::string name() const;
    static Activation from_name(const std::string& name, double alpha, double scale);
};

// overflow-safe helpers shared with tests
double softplus_stable(double x);
double sigmoid_stable(double x);

}  // namespace contracert
