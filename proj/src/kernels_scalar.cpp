#include "contracert/kernels.hpp"

#include <cstddef>

// Reference kernels. kmin/kmax mirror the SSE/AVX min/max semantics
// ((a<b)?a:b) so the SIMD variants can match bit-for-bit, including
// signed-zero cases.

namespace contracert::kern {
namespace {

inline double kmin(double a, double b) { return a < b ? a : b; }
inline double kmax(double a, double b) { return a > b ? a : b; }
inline double pos_part(double w) { return w > 0.0 ? w : 0.0; }
inline double neg_part(double w) { return w < 0.0 ? w : 0.0; }

void gemm_wexact_scalar(int m, int k, int n, const double* W, const double* blo,
                        const double* bhi, double* clo, double* chi) {
    for (int i = 0; i < m; ++i) {
        const double* wrow = W + static_cast<size_t>(i) * k;
        double* crl = clo + static_cast<size_t>(i) * n;
        double* crh = chi + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            double lo = 0.0, hi = 0.0;
            for (int p = 0; p < k; ++p) {
                const double w = wrow[p];
                const double wp = pos_part(w), wm = neg_part(w);
                const double bl = blo[static_cast<size_t>(p) * n + j];
                const double bh = bhi[static_cast<size_t>(p) * n + j];
                lo = lo + (wp * bl + wm * bh);
                hi = hi + (wp * bh + wm * bl);
            }
            crl[j] = lo;
            crh[j] = hi;
        }
    }
}

void matvec_wexact_scalar(int m, int k, const double* W, const double* xlo, const double* xhi,
                          double* ylo, double* yhi) {
    for (int i = 0; i < m; ++i) {
        const double* wrow = W + static_cast<size_t>(i) * k;
        double alo[4] = {0.0, 0.0, 0.0, 0.0};
        double ahi[4] = {0.0, 0.0, 0.0, 0.0};
        int p = 0;
        for (; p + 4 <= k; p += 4) {
            for (int l = 0; l < 4; ++l) {
                const double w = wrow[p + l];
                const double wp = pos_part(w), wm = neg_part(w);
                alo[l] = alo[l] + (wp * xlo[p + l] + wm * xhi[p + l]);
                ahi[l] = ahi[l] + (wp * xhi[p + l] + wm * xlo[p + l]);
            }
        }
        double lo = (alo[0] + alo[1]) + (alo[2] + alo[3]);
        double hi = (ahi[0] + ahi[1]) + (ahi[2] + ahi[3]);
        for (; p < k; ++p) {
            const double w = wrow[p];
            const double wp = pos_part(w), wm = neg_part(w);
            lo = lo + (wp * xlo[p] + wm * xhi[p]);
            hi = hi + (wp * xhi[p] + wm * xlo[p]);
        }
        ylo[i] = lo;
        yhi[i] = hi;
    }
}

void diag_scale_scalar(int m, int n, const double* dlo, const double* dhi, const double* blo,
                       const double* bhi, double* clo, double* chi) {
    for (int i = 0; i < m; ++i) {
        const double dl = dlo[i], dh = dhi[i];
        const size_t off = static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double bl = blo[off + j], bh = bhi[off + j];
            const double p1 = dl * bl, p2 = dl * bh, p3 = dh * bl, p4 = dh * bh;
            clo[off + j] = kmin(kmin(p1, p2), kmin(p3, p4));
            chi[off + j] = kmax(kmax(p1, p2), kmax(p3, p4));
        }
    }
}

void gemm_scalar(int m, int k, int n, const double* alo, const double* ahi, const double* blo,
                 const double* bhi, double* clo, double* chi) {
    for (int i = 0; i < m; ++i) {
        const double* arl = alo + static_cast<size_t>(i) * k;
        const double* arh = ahi + static_cast<size_t>(i) * k;
        double* crl = clo + static_cast<size_t>(i) * n;
        double* crh = chi + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            double lo = 0.0, hi = 0.0;
            for (int p = 0; p < k; ++p) {
                const double al = arl[p], ah = arh[p];
                const double bl = blo[static_cast<size_t>(p) * n + j];
                const double bh = bhi[static_cast<size_t>(p) * n + j];
                const double p1 = al * bl, p2 = al * bh, p3 = ah * bl, p4 = ah * bh;
                lo = lo + kmin(kmin(p1, p2), kmin(p3, p4));
                hi = hi + kmax(kmax(p1, p2), kmax(p3, p4));
            }
            crl[j] = lo;
            crh[j] = hi;
        }
    }
}

}  // namespace

const Kernels& scalar_kernels() {
    static const Kernels k{"scalar", gemm_wexact_scalar, matvec_wexact_scalar, diag_scale_scalar,
                           gemm_scalar};
    return k;
}

}  // namespace contracert::kern
