#pragma once

#include <memory>
#include <string>
#include <vector>

#include "contracert/controller.hpp"
#include "contracert/interval.hpp"

namespace contracert {

// Control-affine plant dx/dt = f(x) + B u with exact dynamics/Jacobian and
// interval bounds over a box. Bounds must contain f and its Jacobian for
// every state in the box and collapse to exact values on degenerate boxes.
class Plant {
  public:
    virtual ~Plant() = default;
    virtual int state_dim() const = 0;
    virtual int input_dim() const = 0;
    virtual const Mat& input_matrix() const = 0;
    virtual Vec eval_f(const Vec& x) const = 0;
    virtual Mat eval_jf(const Vec& x) const = 0;
    virtual IntervalVector bound_f(const IntervalVector& box) const = 0;
    virtual IntervalMatrix bound_jf(const IntervalVector& box) const = 0;
    virtual std::string name() const = 0;
    virtual std::string params_json() const = 0;  // canonical parameter record
};

// Exact range of sin/cos over an interval, including interior extrema.
Interval sin_range(const Interval& a);
Interval cos_range(const Interval& a);

// Pendulum about the upright position: x1 angle, x2 angular velocity.
class InvertedPendulum final : public Plant {
  public:
    InvertedPendulum(double mass = 1.0, double length = 1.0, double gravity = 9.81);

    int state_dim() const override { return 2; }
    int input_dim() const override { return 1; }
    const Mat& input_matrix() const override { return b_; }
    Vec eval_f(const Vec& x) const override;
    Mat eval_jf(const Vec& x) const override;
    IntervalVector bound_f(const IntervalVector& box) const override;
    IntervalMatrix bound_jf(const IntervalVector& box) const override;
    std::string name() const override { return "inverted_pendulum"; }
    std::string params_json() const override;

    double mass() const { return mass_; }
    double length() const { return length_; }
    double gravity() const { return gravity_; }

  private:
    double mass_, length_, gravity_;
    Mat b_;
};

struct Trajectory {
    Vec times;
    std::vector<Vec> states;
    std::vector<Vec> inputs;
};

struct SimulationDivergence : std::runtime_error {
    double time;
    explicit SimulationDivergence(double t)
        : std::runtime_error("simulation diverged at t=" + std::to_string(t)), time(t) {}
};

// Fixed-step classical Runge-Kutta integration of the closed loop
// dx/dt = f(x) + B u(x). Pass controller = nullptr for zero input. Throws
// SimulationDivergence when the state leaves the finite range.
Trajectory simulate(const Plant& plant, const ZeroAnchoredBoundedController* controller,
                    const Vec& x0, double horizon, double dt);

}  // namespace contracert
