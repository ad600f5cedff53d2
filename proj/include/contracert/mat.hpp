#pragma once

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace contracert {

using Vec = std::vector<double>;

// Dense row-major matrix. Small sizes (network widths, state dims), so no
// attempt at expression templates; the hot loops live in kernels.hpp.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}
    Mat(int r, int c, std::initializer_list<double> vals) : rows(r), cols(c), data(vals) {
        if (static_cast<int>(data.size()) != r * c) throw std::invalid_argument("Mat: initializer size mismatch");
    }

    double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    // resize without preserving contents; keeps capacity when shrinking
    void reshape(int r, int c) {
        rows = r;
        cols = c;
        data.assign(static_cast<size_t>(r) * c, 0.0);
    }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline Mat transpose(const Mat& a) {
    Mat t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

inline Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions disagree");
    Mat c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int p = 0; p < a.cols; ++p) {
            const double aip = a(i, p);
            for (int j = 0; j < b.cols; ++j) c(i, j) += aip * b(p, j);
        }
    return c;
}

inline Vec matvec(const Mat& a, const Vec& x) {
    if (a.cols != static_cast<int>(x.size())) throw std::invalid_argument("matvec: dimension mismatch");
    Vec y(a.rows, 0.0);
    for (int i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (int p = 0; p < a.cols; ++p) s += a(i, p) * x[p];
        y[i] = s;
    }
    return y;
}

inline void axpy(double alpha, const Vec& x, Vec& y) {
    assert(x.size() == y.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace contracert
