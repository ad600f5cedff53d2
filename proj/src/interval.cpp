#include "contracert/interval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "contracert/kernels.hpp"

namespace contracert {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Interval::Interval(double l, double h) : lo(l), hi(h) {
    require(std::isfinite(l) && std::isfinite(h), "Interval: endpoints must be finite");
    require(l <= h, "Interval: lo > hi");
}

Interval add(const Interval& a, const Interval& b) { return Interval(a.lo + b.lo, a.hi + b.hi); }

Interval mul(const Interval& a, const Interval& b) {
    const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    return Interval(std::min(std::min(p1, p2), std::min(p3, p4)),
                    std::max(std::max(p1, p2), std::max(p3, p4)));
}

Interval hull(const Interval& a, const Interval& b) {
    return Interval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}

IntervalVector::IntervalVector(Vec l, Vec h) : lo(std::move(l)), hi(std::move(h)) {
    require(lo.size() == hi.size(), "IntervalVector: size mismatch");
    for (size_t i = 0; i < lo.size(); ++i) {
        require(std::isfinite(lo[i]) && std::isfinite(hi[i]), "IntervalVector: non-finite endpoint");
        require(lo[i] <= hi[i], "IntervalVector: lo > hi");
    }
}

bool IntervalVector::contains(const Vec& x, double slack) const {
    if (x.size() != lo.size()) return false;
    for (size_t i = 0; i < x.size(); ++i) {
        const double tol = slack * std::max(1.0, std::max(std::fabs(lo[i]), std::fabs(hi[i])));
        if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
    }
    return true;
}

Vec IntervalVector::midpoint() const {
    Vec m(lo.size());
    for (size_t i = 0; i < lo.size(); ++i) m[i] = 0.5 * (lo[i] + hi[i]);
    return m;
}

IntervalMatrix::IntervalMatrix(Mat l, Mat h) : lo(std::move(l)), hi(std::move(h)) {
    require(lo.same_shape(hi), "IntervalMatrix: shape mismatch");
    for (size_t i = 0; i < lo.data.size(); ++i) {
        require(std::isfinite(lo.data[i]) && std::isfinite(hi.data[i]),
                "IntervalMatrix: non-finite endpoint");
        require(lo.data[i] <= hi.data[i], "IntervalMatrix: lo > hi");
    }
}

IntervalVector add(const IntervalVector& a, const IntervalVector& b) {
    require(a.size() == b.size(), "interval add: size mismatch");
    IntervalVector c;
    c.lo.resize(a.lo.size());
    c.hi.resize(a.hi.size());
    for (size_t i = 0; i < a.lo.size(); ++i) {
        c.lo[i] = a.lo[i] + b.lo[i];
        c.hi[i] = a.hi[i] + b.hi[i];
    }
    return c;
}

IntervalMatrix add(const IntervalMatrix& a, const IntervalMatrix& b) {
    require(a.lo.same_shape(b.lo), "interval add: shape mismatch");
    IntervalMatrix c;
    c.lo.reshape(a.rows(), a.cols());
    c.hi.reshape(a.rows(), a.cols());
    for (size_t i = 0; i < a.lo.data.size(); ++i) {
        c.lo.data[i] = a.lo.data[i] + b.lo.data[i];
        c.hi.data[i] = a.hi.data[i] + b.hi.data[i];
    }
    return c;
}

IntervalMatrix scale(double c, const IntervalMatrix& a) {
    IntervalMatrix r;
    r.lo.reshape(a.rows(), a.cols());
    r.hi.reshape(a.rows(), a.cols());
    for (size_t i = 0; i < a.lo.data.size(); ++i) {
        const double p = c * a.lo.data[i], q = c * a.hi.data[i];
        r.lo.data[i] = std::min(p, q);
        r.hi.data[i] = std::max(p, q);
    }
    return r;
}

IntervalMatrix transpose(const IntervalMatrix& a) {
    IntervalMatrix t;
    t.lo = transpose(a.lo);
    t.hi = transpose(a.hi);
    return t;
}

IntervalMatrix hull(const IntervalMatrix& a, const IntervalMatrix& b) {
    require(a.lo.same_shape(b.lo), "interval hull: shape mismatch");
    IntervalMatrix c;
    c.lo.reshape(a.rows(), a.cols());
    c.hi.reshape(a.rows(), a.cols());
    for (size_t i = 0; i < a.lo.data.size(); ++i) {
        c.lo.data[i] = std::min(a.lo.data[i], b.lo.data[i]);
        c.hi.data[i] = std::max(a.hi.data[i], b.hi.data[i]);
    }
    return c;
}

IntervalMatrix imm(const IntervalMatrix& a, const IntervalMatrix& b) {
    require(a.cols() == b.rows(), "imm: inner dimensions disagree");
    IntervalMatrix c;
    c.lo.reshape(a.rows(), b.cols());
    c.hi.reshape(a.rows(), b.cols());
    kern::active_kernels().gemm(a.rows(), a.cols(), b.cols(), a.lo.data.data(), a.hi.data.data(),
                                b.lo.data.data(), b.hi.data.data(), c.lo.data.data(),
                                c.hi.data.data());
    return c;
}

IntervalMatrix imm_exact_left(const Mat& w, const IntervalMatrix& b) {
    require(w.cols == b.rows(), "imm_exact_left: inner dimensions disagree");
    IntervalMatrix c;
    c.lo.reshape(w.rows, b.cols());
    c.hi.reshape(w.rows, b.cols());
    kern::active_kernels().gemm_wexact(w.rows, w.cols, b.cols(), w.data.data(), b.lo.data.data(),
                                       b.hi.data.data(), c.lo.data.data(), c.hi.data.data());
    return c;
}

IntervalVector imm_exact_left(const Mat& w, const IntervalVector& x) {
    require(w.cols == x.size(), "imm_exact_left: dimension mismatch");
    IntervalVector y;
    y.lo.resize(w.rows);
    y.hi.resize(w.rows);
    kern::active_kernels().matvec_wexact(w.rows, w.cols, w.data.data(), x.lo.data(), x.hi.data(),
                                         y.lo.data(), y.hi.data());
    return y;
}

IntervalMatrix imm_diag_left(const IntervalVector& d, const IntervalMatrix& b) {
    require(d.size() == b.rows(), "imm_diag_left: dimension mismatch");
    IntervalMatrix c;
    c.lo.reshape(b.rows(), b.cols());
    c.hi.reshape(b.rows(), b.cols());
    kern::active_kernels().diag_scale(b.rows(), b.cols(), d.lo.data(), d.hi.data(),
                                      b.lo.data.data(), b.hi.data.data(), c.lo.data.data(),
                                      c.hi.data.data());
    return c;
}

Mat metzler_majorant(const Mat& a) {
    require(a.rows == a.cols, "metzler_majorant: matrix must be square");
    Mat m(a.rows, a.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) m(i, j) = (i == j) ? a(i, j) : std::fabs(a(i, j));
    return m;
}

std::vector<IntervalVector> bisect(const IntervalVector& box) {
    const int n = box.size();
    require(n >= 1, "bisect: empty box");
    Vec mid(n);
    for (int d = 0; d < n; ++d) mid[d] = 0.5 * (box.lo[d] + box.hi[d]);
    std::vector<IntervalVector> out;
    out.reserve(static_cast<size_t>(1) << n);
    for (size_t c = 0; c < (static_cast<size_t>(1) << n); ++c) {
        IntervalVector child;
        child.lo.resize(n);
        child.hi.resize(n);
        for (int d = 0; d < n; ++d) {
            if (c & (static_cast<size_t>(1) << d)) {
                child.lo[d] = mid[d];
                child.hi[d] = box.hi[d];
            } else {
                child.lo[d] = box.lo[d];
                child.hi[d] = mid[d];
            }
        }
        out.push_back(std::move(child));
    }
    return out;
}

std::vector<IntervalVector> uniform_partition(const IntervalVector& box, int r) {
    require(r >= 1, "uniform_partition: r must be >= 1");
    const int n = box.size();
    require(n >= 1, "uniform_partition: empty box");

    // shared boundary grid per axis so adjacent cells match faces exactly
    std::vector<Vec> edges(n, Vec(static_cast<size_t>(r) + 1));
    for (int d = 0; d < n; ++d) {
        const double lo = box.lo[d], hi = box.hi[d], w = hi - lo;
        edges[d][0] = lo;
        for (int i = 1; i < r; ++i) edges[d][i] = std::clamp(lo + (w * i) / r, lo, hi);
        edges[d][r] = hi;
    }

    size_t total = 1;
    for (int d = 0; d < n; ++d) total *= static_cast<size_t>(r);
    std::vector<IntervalVector> out;
    out.reserve(total);
    std::vector<int> idx(n, 0);
    for (size_t c = 0; c < total; ++c) {
        IntervalVector cell;
        cell.lo.resize(n);
        cell.hi.resize(n);
        size_t rem = c;
        for (int d = n - 1; d >= 0; --d) {
            idx[d] = static_cast<int>(rem % r);
            rem /= r;
        }
        for (int d = 0; d < n; ++d) {
            cell.lo[d] = edges[d][idx[d]];
            cell.hi[d] = edges[d][idx[d] + 1];
        }
        out.push_back(std::move(cell));
    }
    return out;
}

}  // namespace contracert
