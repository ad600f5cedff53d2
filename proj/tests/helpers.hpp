#pragma once

// Shared test doubles and builders.

#include <memory>

#include "contracert/util.hpp"
#include "contracert/verifier.hpp"

namespace contracert::testing {

// dx/dt = A x + B u with exact interval bounds
class LinearPlant final : public Plant {
  public:
    LinearPlant(Mat a, Mat b) : a_(std::move(a)), b_(std::move(b)) {}

    int state_dim() const override { return a_.rows; }
    int input_dim() const override { return b_.cols; }
    const Mat& input_matrix() const override { return b_; }
    Vec eval_f(const Vec& x) const override { return matvec(a_, x); }
    Mat eval_jf(const Vec&) const override { return a_; }
    IntervalVector bound_f(const IntervalVector& box) const override {
        IntervalMatrix col;
        col.lo.reshape(box.size(), 1);
        col.hi.reshape(box.size(), 1);
        for (int i = 0; i < box.size(); ++i) {
            col.lo(i, 0) = box.lo[i];
            col.hi(i, 0) = box.hi[i];
        }
        const IntervalMatrix out = imm_exact_left(a_, col);
        IntervalVector f;
        f.lo.resize(a_.rows);
        f.hi.resize(a_.rows);
        for (int i = 0; i < a_.rows; ++i) {
            f.lo[i] = out.lo(i, 0);
            f.hi[i] = out.hi(i, 0);
        }
        return f;
    }
    IntervalMatrix bound_jf(const IntervalVector&) const override { return IntervalMatrix(a_); }
    std::string name() const override { return "linear"; }
    std::string params_json() const override { return "{}"; }

  private:
    Mat a_;
    Mat b_;
};

inline ZeroAnchoredBoundedController zero_controller(int n, int m, double scale = 1.0) {
    ZeroAnchoredBoundedController c;
    c.base.layers.push_back({Mat(m, n), Vec(static_cast<size_t>(m), 0.0)});
    c.base.hidden = Activation::softplus();
    c.scale = scale;
    return c;
}

// single affine layer u = scaledtanh(K x); linear near the origin
inline ZeroAnchoredBoundedController linear_controller(const Mat& k, double scale) {
    ZeroAnchoredBoundedController c;
    c.base.layers.push_back({k, Vec(static_cast<size_t>(k.rows), 0.0)});
    c.base.hidden = Activation::softplus();
    c.scale = scale;
    return c;
}

inline NeuralContractionMetric constant_metric(const Mat& m, double eps = 0.1) {
    NeuralContractionMetric met;
    met.n = m.rows;
    met.epsilon = eps;
    met.constant_mode = true;
    met.constant_M = m;
    return met;
}

inline FeedforwardNetwork random_ffn(Rng& rng, const std::vector<int>& dims,
                                     Activation hidden = Activation::softplus(),
                                     double weight_scale = 1.0) {
    FeedforwardNetwork net;
    net.hidden = hidden;
    for (size_t k = 0; k + 1 < dims.size(); ++k) {
        Layer l{Mat(dims[k + 1], dims[k]), Vec(static_cast<size_t>(dims[k + 1]), 0.0)};
        const double bound = weight_scale / std::sqrt(static_cast<double>(dims[k]));
        for (auto& w : l.W.data) w = rng.uniform(-bound, bound);
        for (auto& b : l.b) b = rng.uniform(-0.2, 0.2);
        net.layers.push_back(std::move(l));
    }
    return net;
}

inline NeuralContractionMetric random_ncm(Rng& rng, int n, int width, double eps = 0.1) {
    NeuralContractionMetric met;
    met.n = n;
    met.epsilon = eps;
    met.base = random_ffn(rng, {n, width, width, n * n});
    return met;
}

// pendulum with random small controller and metric networks
inline ContractionProblem random_pendulum_problem(Rng& rng, int ctrl_width = 8,
                                                  int metric_width = 8) {
    ContractionProblem prob;
    prob.plant = std::make_shared<InvertedPendulum>();
    ZeroAnchoredBoundedController c;
    c.base = random_ffn(rng, {2, ctrl_width, ctrl_width, 1});
    c.scale = 4.0 * 9.81;
    prob.controller = std::move(c);
    prob.metric = random_ncm(rng, 2, metric_width);
    return prob;
}

inline Vec sample_in(Rng& rng, const IntervalVector& box) {
    Vec x(box.size());
    for (int i = 0; i < box.size(); ++i) x[i] = rng.uniform(box.lo[i], box.hi[i]);
    return x;
}

// 2x2 Lyapunov solve: P A + A^T P = -Q with P, Q symmetric
inline Mat lyapunov_2x2(const Mat& a, const Mat& q) {
    // unknowns p11, p12, p22
    double m[3][4] = {};
    // equation rows: (1,1), (1,2), (2,2)
    // (P A + A^T P)_{11} = 2(p11 a11 + p12 a21)
    m[0][0] = 2 * a(0, 0);
    m[0][1] = 2 * a(1, 0);
    m[0][2] = 0;
    m[0][3] = -q(0, 0);
    // (P A + A^T P)_{12} = p11 a12 + p12 (a11 + a22) + p22 a21
    m[1][0] = a(0, 1);
    m[1][1] = a(0, 0) + a(1, 1);
    m[1][2] = a(1, 0);
    m[1][3] = -q(0, 1);
    // (P A + A^T P)_{22} = 2(p12 a12 + p22 a22)
    m[2][0] = 0;
    m[2][1] = 2 * a(0, 1);
    m[2][2] = 2 * a(1, 1);
    m[2][3] = -q(1, 1);
    // gaussian elimination with partial pivoting
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
        for (int j = 0; j < 4; ++j) std::swap(m[c][j], m[piv][j]);
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double f = m[r][c] / m[c][c];
            for (int j = c; j < 4; ++j) m[r][j] -= f * m[c][j];
        }
    }
    const double p11 = m[0][3] / m[0][0];
    const double p12 = m[1][3] / m[1][1];
    const double p22 = m[2][3] / m[2][2];
    return Mat(2, 2, {p11, p12, p12, p22});
}

}  // namespace contracert::testing
