#include "contracert/kernels.hpp"

#include <cstddef>

#if defined(__AVX2__)
#include <immintrin.h>
#endif

// AVX2 variants of the reference kernels. Lanes run across output columns
// (or across p for the matvec), so every output entry accumulates its terms
// in the same order as the scalar kernel and the results agree bit-for-bit.

namespace contracert::kern {

#if defined(__AVX2__)
namespace {

inline double kmin(double a, double b) { return a < b ? a : b; }
inline double kmax(double a, double b) { return a > b ? a : b; }
inline double pos_part(double w) { return w > 0.0 ? w : 0.0; }
inline double neg_part(double w) { return w < 0.0 ? w : 0.0; }

void gemm_wexact_avx2(int m, int k, int n, const double* W, const double* blo, const double* bhi,
                      double* clo, double* chi) {
    const __m256d z4 = _mm256_setzero_pd();
    const __m128d z2 = _mm_setzero_pd();
    for (int i = 0; i < m; ++i) {
        const double* wrow = W + static_cast<size_t>(i) * k;
        double* crl = clo + static_cast<size_t>(i) * n;
        double* crh = chi + static_cast<size_t>(i) * n;
        int j = 0;
        for (; j + 4 <= n; j += 4) {
            __m256d lo = z4, hi = z4;
            for (int p = 0; p < k; ++p) {
                const __m256d w = _mm256_set1_pd(wrow[p]);
                const __m256d wp = _mm256_max_pd(w, z4);
                const __m256d wm = _mm256_min_pd(w, z4);
                const __m256d bl = _mm256_loadu_pd(blo + static_cast<size_t>(p) * n + j);
                const __m256d bh = _mm256_loadu_pd(bhi + static_cast<size_t>(p) * n + j);
                lo = _mm256_add_pd(lo, _mm256_add_pd(_mm256_mul_pd(wp, bl), _mm256_mul_pd(wm, bh)));
                hi = _mm256_add_pd(hi, _mm256_add_pd(_mm256_mul_pd(wp, bh), _mm256_mul_pd(wm, bl)));
            }
            _mm256_storeu_pd(crl + j, lo);
            _mm256_storeu_pd(crh + j, hi);
        }
        for (; j + 2 <= n; j += 2) {
            __m128d lo = z2, hi = z2;
            for (int p = 0; p < k; ++p) {
                const __m128d w = _mm_set1_pd(wrow[p]);
                const __m128d wp = _mm_max_pd(w, z2);
                const __m128d wm = _mm_min_pd(w, z2);
                const __m128d bl = _mm_loadu_pd(blo + static_cast<size_t>(p) * n + j);
                const __m128d bh = _mm_loadu_pd(bhi + static_cast<size_t>(p) * n + j);
                lo = _mm_add_pd(lo, _mm_add_pd(_mm_mul_pd(wp, bl), _mm_mul_pd(wm, bh)));
                hi = _mm_add_pd(hi, _mm_add_pd(_mm_mul_pd(wp, bh), _mm_mul_pd(wm, bl)));
            }
            _mm_storeu_pd(crl + j, lo);
            _mm_storeu_pd(crh + j, hi);
        }
        for (; j < n; ++j) {
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

void matvec_wexact_avx2(int m, int k, const double* W, const double* xlo, const double* xhi,
                        double* ylo, double* yhi) {
    const __m256d z4 = _mm256_setzero_pd();
    for (int i = 0; i < m; ++i) {
        const double* wrow = W + static_cast<size_t>(i) * k;
        __m256d accl = z4, acch = z4;
        int p = 0;
        for (; p + 4 <= k; p += 4) {
            const __m256d w = _mm256_loadu_pd(wrow + p);
            const __m256d wp = _mm256_max_pd(w, z4);
            const __m256d wm = _mm256_min_pd(w, z4);
            const __m256d xl = _mm256_loadu_pd(xlo + p);
            const __m256d xh = _mm256_loadu_pd(xhi + p);
            accl = _mm256_add_pd(accl, _mm256_add_pd(_mm256_mul_pd(wp, xl), _mm256_mul_pd(wm, xh)));
            acch = _mm256_add_pd(acch, _mm256_add_pd(_mm256_mul_pd(wp, xh), _mm256_mul_pd(wm, xl)));
        }
        // combine lanes as (a0+a1)+(a2+a3), matching the scalar reference
        alignas(32) double bl[4], bh[4];
        _mm256_store_pd(bl, accl);
        _mm256_store_pd(bh, acch);
        double lo = (bl[0] + bl[1]) + (bl[2] + bl[3]);
        double hi = (bh[0] + bh[1]) + (bh[2] + bh[3]);
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

void diag_scale_avx2(int m, int n, const double* dlo, const double* dhi, const double* blo,
                     const double* bhi, double* clo, double* chi) {
    for (int i = 0; i < m; ++i) {
        const size_t off = static_cast<size_t>(i) * n;
        const __m256d dl4 = _mm256_set1_pd(dlo[i]);
        const __m256d dh4 = _mm256_set1_pd(dhi[i]);
        int j = 0;
        for (; j + 4 <= n; j += 4) {
            const __m256d bl = _mm256_loadu_pd(blo + off + j);
            const __m256d bh = _mm256_loadu_pd(bhi + off + j);
            const __m256d p1 = _mm256_mul_pd(dl4, bl), p2 = _mm256_mul_pd(dl4, bh);
            const __m256d p3 = _mm256_mul_pd(dh4, bl), p4 = _mm256_mul_pd(dh4, bh);
            _mm256_storeu_pd(clo + off + j,
                             _mm256_min_pd(_mm256_min_pd(p1, p2), _mm256_min_pd(p3, p4)));
            _mm256_storeu_pd(chi + off + j,
                             _mm256_max_pd(_mm256_max_pd(p1, p2), _mm256_max_pd(p3, p4)));
        }
        const double dl = dlo[i], dh = dhi[i];
        for (; j < n; ++j) {
            const double bl = blo[off + j], bh = bhi[off + j];
            const double p1 = dl * bl, p2 = dl * bh, p3 = dh * bl, p4 = dh * bh;
            clo[off + j] = kmin(kmin(p1, p2), kmin(p3, p4));
            chi[off + j] = kmax(kmax(p1, p2), kmax(p3, p4));
        }
    }
}

void gemm_avx2(int m, int k, int n, const double* alo, const double* ahi, const double* blo,
               const double* bhi, double* clo, double* chi) {
    const __m256d z4 = _mm256_setzero_pd();
    for (int i = 0; i < m; ++i) {
        const double* arl = alo + static_cast<size_t>(i) * k;
        const double* arh = ahi + static_cast<size_t>(i) * k;
        double* crl = clo + static_cast<size_t>(i) * n;
        double* crh = chi + static_cast<size_t>(i) * n;
        int j = 0;
        for (; j + 4 <= n; j += 4) {
            __m256d lo = z4, hi = z4;
            for (int p = 0; p < k; ++p) {
                const __m256d al = _mm256_set1_pd(arl[p]);
                const __m256d ah = _mm256_set1_pd(arh[p]);
                const __m256d bl = _mm256_loadu_pd(blo + static_cast<size_t>(p) * n + j);
                const __m256d bh = _mm256_loadu_pd(bhi + static_cast<size_t>(p) * n + j);
                const __m256d p1 = _mm256_mul_pd(al, bl), p2 = _mm256_mul_pd(al, bh);
                const __m256d p3 = _mm256_mul_pd(ah, bl), p4 = _mm256_mul_pd(ah, bh);
                lo = _mm256_add_pd(lo, _mm256_min_pd(_mm256_min_pd(p1, p2), _mm256_min_pd(p3, p4)));
                hi = _mm256_add_pd(hi, _mm256_max_pd(_mm256_max_pd(p1, p2), _mm256_max_pd(p3, p4)));
            }
            _mm256_storeu_pd(crl + j, lo);
            _mm256_storeu_pd(crh + j, hi);
        }
        for (; j < n; ++j) {
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

const Kernels& avx2_kernels() {
    static const Kernels k{"avx2", gemm_wexact_avx2, matvec_wexact_avx2, diag_scale_avx2,
                           gemm_avx2};
    return k;
}

#else  // !__AVX2__

const Kernels& avx2_kernels() { return scalar_kernels(); }

#endif

}  // namespace contracert::kern
