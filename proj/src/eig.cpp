#include "contracert/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace contracert {

EigResult eigh_jacobi(const Mat& sym) {
    if (sym.rows != sym.cols) throw std::invalid_argument("eigh: matrix must be square");
    const int n = sym.rows;

    Mat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = 0.5 * (sym(i, j) + sym(j, i));
    Mat v = Mat::identity(n);

    double scale = 0.0;
    for (double x : a.data) scale += x * x;
    scale = std::sqrt(scale);
    const double off_tol = 1e-15 * std::max(1.0, scale);

    const int max_sweeps = 100;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(2.0 * off) <= off_tol) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a(r, p), arq = a(r, q);
                    a(r, p) = a(p, r) = c * arp - s * arq;
                    a(r, q) = a(q, r) = s * arp + c * arq;
                }
                for (int r = 0; r < n; ++r) {
                    const double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = c * vrp - s * vrq;
                    v(r, q) = s * vrp + c * vrq;
                }
            }
        }
    }
    if (sweep == max_sweeps) throw EigFailure(sym);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, i) > a(j, j); });

    EigResult res;
    res.values.resize(n);
    res.vectors.reshape(n, n);
    for (int k = 0; k < n; ++k) {
        const int src = order[k];
        res.values[k] = a(src, src);
        // sign convention: largest-magnitude component nonnegative
        int arg = 0;
        for (int r = 1; r < n; ++r)
            if (std::fabs(v(r, src)) > std::fabs(v(arg, src))) arg = r;
        const double flip = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (int r = 0; r < n; ++r) res.vectors(r, k) = flip * v(r, src);
    }
    return res;
}

std::pair<double, Vec> lambda_max_sym(const Mat& g) {
    const EigResult e = eigh_jacobi(g);
    Vec vec(g.rows);
    for (int r = 0; r < g.rows; ++r) vec[r] = e.vectors(r, 0);
    return {e.values[0], vec};
}

}  // namespace contracert
