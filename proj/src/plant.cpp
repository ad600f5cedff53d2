#include "contracert/plant.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace contracert {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Is there an integer k with base + k*2pi inside [lo, hi]?
bool contains_angle(double lo, double hi, double base) {
    const double k_lo = std::ceil((lo - base) / (2.0 * kPi));
    const double k_hi = std::floor((hi - base) / (2.0 * kPi));
    return k_lo <= k_hi;
}

}  // namespace

Interval sin_range(const Interval& a) {
    double lo = std::min(std::sin(a.lo), std::sin(a.hi));
    double hi = std::max(std::sin(a.lo), std::sin(a.hi));
    if (contains_angle(a.lo, a.hi, kPi / 2.0)) hi = 1.0;
    if (contains_angle(a.lo, a.hi, -kPi / 2.0)) lo = -1.0;
    return Interval(lo, hi);
}

Interval cos_range(const Interval& a) {
    double lo = std::min(std::cos(a.lo), std::cos(a.hi));
    double hi = std::max(std::cos(a.lo), std::cos(a.hi));
    if (contains_angle(a.lo, a.hi, 0.0)) hi = 1.0;
    if (contains_angle(a.lo, a.hi, kPi)) lo = -1.0;
    return Interval(lo, hi);
}

InvertedPendulum::InvertedPendulum(double mass, double length, double gravity)
    : mass_(mass), length_(length), gravity_(gravity), b_(2, 1) {
    if (!(mass > 0.0 && length > 0.0 && gravity > 0.0))
        throw std::invalid_argument("pendulum: mass, length, gravity must be positive");
    b_(1, 0) = 1.0 / (mass_ * length_ * length_);
}

Vec InvertedPendulum::eval_f(const Vec& x) const {
    return {x[1], gravity_ * std::sin(x[0]) / length_};
}

Mat InvertedPendulum::eval_jf(const Vec& x) const {
    Mat j(2, 2);
    j(0, 1) = 1.0;
    j(1, 0) = gravity_ * std::cos(x[0]) / length_;
    return j;
}

IntervalVector InvertedPendulum::bound_f(const IntervalVector& box) const {
    if (box.size() != 2) throw std::invalid_argument("pendulum: box must be 2-dimensional");
    const double g_over_l = gravity_ / length_;
    const Interval s = sin_range(box[0]);
    IntervalVector f;
    f.lo = {box.lo[1], g_over_l * s.lo};
    f.hi = {box.hi[1], g_over_l * s.hi};
    return f;
}

IntervalMatrix InvertedPendulum::bound_jf(const IntervalVector& box) const {
    if (box.size() != 2) throw std::invalid_argument("pendulum: box must be 2-dimensional");
    const double g_over_l = gravity_ / length_;
    const Interval c = cos_range(box[0]);
    IntervalMatrix j;
    j.lo.reshape(2, 2);
    j.hi.reshape(2, 2);
    j.lo(0, 1) = j.hi(0, 1) = 1.0;
    j.lo(1, 0) = g_over_l * c.lo;
    j.hi(1, 0) = g_over_l * c.hi;
    return j;
}

std::string InvertedPendulum::params_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"m\":" << mass_ << ",\"l\":" << length_ << ",\"g\":" << gravity_ << "}";
    return os.str();
}

namespace {

Vec closed_loop_rhs(const Plant& plant, const ZeroAnchoredBoundedController* controller,
                    const Vec& x, Vec* u_out) {
    Vec dx = plant.eval_f(x);
    if (controller) {
        const Vec u = controller->eval(x);
        const Mat& b = plant.input_matrix();
        for (int i = 0; i < b.rows; ++i)
            for (int j = 0; j < b.cols; ++j) dx[i] += b(i, j) * u[j];
        if (u_out) *u_out = u;
    } else if (u_out) {
        u_out->assign(static_cast<size_t>(plant.input_dim()), 0.0);
    }
    return dx;
}

bool finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

Trajectory simulate(const Plant& plant, const ZeroAnchoredBoundedController* controller,
                    const Vec& x0, double horizon, double dt) {
    if (!(dt > 0.0) || !(horizon > 0.0))
        throw std::invalid_argument("simulate: horizon and dt must be positive");
    if (static_cast<int>(x0.size()) != plant.state_dim())
        throw std::invalid_argument("simulate: initial state dimension mismatch");

    const auto steps = static_cast<size_t>(std::ceil(horizon / dt - 1e-12));
    Trajectory traj;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.inputs.reserve(steps + 1);

    Vec x = x0;
    Vec u;
    for (size_t s = 0; s <= steps; ++s) {
        const double t = std::min(s * dt, horizon);
        const Vec k1 = closed_loop_rhs(plant, controller, x, &u);
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.inputs.push_back(u);
        if (s == steps) break;

        const double h = std::min(dt, horizon - t);
        Vec x2 = x, x3 = x, x4 = x;
        axpy(0.5 * h, k1, x2);
        const Vec k2 = closed_loop_rhs(plant, controller, x2, nullptr);
        axpy(0.5 * h, k2, x3);
        const Vec k3 = closed_loop_rhs(plant, controller, x3, nullptr);
        axpy(h, k3, x4);
        const Vec k4 = closed_loop_rhs(plant, controller, x4, nullptr);
        for (size_t i = 0; i < x.size(); ++i)
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!finite(x)) throw SimulationDivergence(t + h);
    }
    return traj;
}

}  // namespace contracert
