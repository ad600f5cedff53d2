#include "contracert/metric.hpp"

#include <stdexcept>

namespace contracert {

void NeuralContractionMetric::validate() const {
    if (n <= 0) throw std::invalid_argument("metric: state dimension must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("metric: epsilon must be positive");
    if (constant_mode) {
        if (constant_M.rows != n || constant_M.cols != n)
            throw std::invalid_argument("metric: constant matrix must be n x n");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j)
                if (constant_M(i, j) != constant_M(j, i))
                    throw std::invalid_argument("metric: constant matrix must be symmetric");
        return;
    }
    base.validate();
    if (base.output.kind != Activation::Kind::identity)
        throw std::invalid_argument("metric: base network must have identity output");
    if (base.output_dim() != n * n)
        throw std::invalid_argument("metric: base network output dimension must be n^2");
    if (base.input_dim() != n)
        throw std::invalid_argument("metric: base network input dimension must be n");
}

Mat column_selector(int n, int i) {
    Mat s(n, n * n);
    for (int r = 0; r < n; ++r) s(r, r * n + i) = 1.0;
    return s;
}

Mat eval_M(const NeuralContractionMetric& m, const Vec& x) {
    if (m.constant_mode) return m.constant_M;
    const Vec flat = forward(m.base, x);
    const int n = m.n;
    Mat M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int r = 0; r < n; ++r) s += flat[r * n + i] * flat[r * n + j];
            M(i, j) = s + (i == j ? m.epsilon : 0.0);
        }
    return M;
}

std::vector<Vec> eval_gradM(const NeuralContractionMetric& m, const Vec& x) {
    const int n = m.n;
    std::vector<Vec> grad(static_cast<size_t>(n) * n, Vec(n, 0.0));
    if (m.constant_mode) return grad;
    const Vec flat = forward(m.base, x);
    const Mat J = jacobian(m.base, x);  // n^2 x n
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Vec& g = grad[static_cast<size_t>(i) * n + j];
            for (int c = 0; c < n; ++c) {
                double s = 0.0;
                for (int r = 0; r < n; ++r)
                    s += J(r * n + i, c) * flat[r * n + j] + J(r * n + j, c) * flat[r * n + i];
                g[c] = s;
            }
        }
    return grad;
}

MetricBounds bound_metric(const NeuralContractionMetric& m, const IntervalVector& box,
                          MetricRecord* rec) {
    const int n = m.n;
    MetricBounds out;
    if (m.constant_mode) {
        out.M = IntervalMatrix(m.constant_M);
        out.gradM.assign(static_cast<size_t>(n) * n,
                         IntervalVector(Vec(static_cast<size_t>(n), 0.0)));
        return out;
    }

    MetricRecord local;
    MetricRecord& r = rec ? *rec : local;
    r.ibp = ibp(m.base, box);

    // reshape flat output bounds row-major to n x n
    r.N.lo.reshape(n, n);
    r.N.hi.reshape(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            r.N.lo(i, j) = r.ibp.output.lo[i * n + j];
            r.N.hi(i, j) = r.ibp.output.hi[i * n + j];
        }
    r.NT = transpose(r.N);
    r.M_raw = imm(r.NT, r.N);
    for (int i = 0; i < n; ++i) {
        r.M_raw.lo(i, i) += m.epsilon;
        r.M_raw.hi(i, i) += m.epsilon;
    }
    out.M = hull(r.M_raw, transpose(r.M_raw));

    // one interval Jacobian pass per column of N, eliding the row selector
    r.col_chains.assign(n, JacChain{});
    r.colT.assign(n, IntervalMatrix{});
    r.ncols.assign(n, IntervalMatrix{});
    for (int i = 0; i < n; ++i) {
        const Mat sel = column_selector(n, i);
        interval_jacobian(m.base, r.ibp, &sel, &r.col_chains[i]);
        r.colT[i] = transpose(r.col_chains[i].result());
        r.ncols[i].lo.reshape(n, 1);
        r.ncols[i].hi.reshape(n, 1);
        for (int row = 0; row < n; ++row) {
            r.ncols[i].lo(row, 0) = r.N.lo(row, i);
            r.ncols[i].hi(row, 0) = r.N.hi(row, i);
        }
    }

    out.gradM.assign(static_cast<size_t>(n) * n, IntervalVector{});
    r.grad_terms.clear();
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            IntervalMatrix t1 = imm(r.colT[i], r.ncols[j]);
            IntervalMatrix t2 = imm(r.colT[j], r.ncols[i]);
            IntervalVector g;
            g.lo.resize(n);
            g.hi.resize(n);
            for (int c = 0; c < n; ++c) {
                g.lo[c] = t1.lo(c, 0) + t2.lo(c, 0);
                g.hi[c] = t1.hi(c, 0) + t2.hi(c, 0);
            }
            r.grad_terms.push_back(std::move(t1));
            r.grad_terms.push_back(std::move(t2));
            out.gradM[static_cast<size_t>(i) * n + j] = g;
            out.gradM[static_cast<size_t>(j) * n + i] = std::move(g);
        }
    return out;
}

}  // namespace contracert
