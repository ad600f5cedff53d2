#pragma once

#include <vector>

#include "contracert/mat.hpp"

namespace contracert {

// Closed interval [lo, hi]. Endpoints are plain doubles; no outward rounding
// (round-off is absorbed by tolerances and the verification slack).
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double point) : lo(point), hi(point) {}
    Interval(double l, double h);

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
};

Interval add(const Interval& a, const Interval& b);
Interval mul(const Interval& a, const Interval& b);
Interval hull(const Interval& a, const Interval& b);

// Hyperrectangle: elementwise lower/upper vectors.
struct IntervalVector {
    Vec lo;
    Vec hi;

    IntervalVector() = default;
    IntervalVector(Vec l, Vec h);
    explicit IntervalVector(const Vec& point) : lo(point), hi(point) {}

    int size() const { return static_cast<int>(lo.size()); }
    Interval operator[](int i) const { return Interval(lo[i], hi[i]); }
    bool contains(const Vec& x, double slack = 0.0) const;
    Vec midpoint() const;
};

struct IntervalMatrix {
    Mat lo;
    Mat hi;

    IntervalMatrix() = default;
    IntervalMatrix(Mat l, Mat h);
    explicit IntervalMatrix(const Mat& exact) : lo(exact), hi(exact) {}

    int rows() const { return lo.rows; }
    int cols() const { return lo.cols; }
    Interval at(int i, int j) const { return Interval(lo(i, j), hi(i, j)); }
};

IntervalVector add(const IntervalVector& a, const IntervalVector& b);
IntervalMatrix add(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix scale(double c, const IntervalMatrix& a);  // exact scalar times interval
IntervalMatrix transpose(const IntervalMatrix& a);

// Elementwise hull; used to symmetrize nearly-symmetric interval matrices.
IntervalMatrix hull(const IntervalMatrix& a, const IntervalMatrix& b);

// Interval matrix multiplication: entry (i,j) sums the endpoint-product
// min/max bounds over the inner index.
IntervalMatrix imm(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix imm_exact_left(const Mat& w, const IntervalMatrix& b);
IntervalVector imm_exact_left(const Mat& w, const IntervalVector& x);
// diag([d]) * [B]: d has one interval per row of B.
IntervalMatrix imm_diag_left(const IntervalVector& d, const IntervalMatrix& b);

// Off-diagonal absolute values, diagonal kept; result dominates the input
// elementwise and has nonnegative off-diagonal entries.
Mat metzler_majorant(const Mat& a);

// Splits each axis at its midpoint into 2^n boxes. Child c takes the lower
// half of axis d when bit d of c is 0. Union covers the input exactly.
std::vector<IntervalVector> bisect(const IntervalVector& box);

// Axis-aligned grid of r^n equal cells; axis 0 varies slowest.
std::vector<IntervalVector> uniform_partition(const IntervalVector& box, int r);

}  // namespace contracert
