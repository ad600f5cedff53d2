#pragma once

// Interval matrix kernels. The scalar implementations are the reference
// semantics (term order, zero handling, min/max tie behavior); the AVX2
// variants reproduce them bit-for-bit and are selected at runtime.
//
// All matrices are dense row-major. Outputs are overwritten.

namespace contracert::kern {

// C = W * [B]; W exact m x k, B interval k x n.
// Entry (i,j): sum over ascending p of  max(w,0)*blo + min(w,0)*bhi  (lower)
// and the mirrored upper term.
using GemmWExactFn = void (*)(int m, int k, int n, const double* W, const double* blo,
                              const double* bhi, double* clo, double* chi);

// y = W * [x]; vector RHS with a 4-lane blocked reduction over p.
using MatvecWExactFn = void (*)(int m, int k, const double* W, const double* xlo,
                                const double* xhi, double* ylo, double* yhi);

// C = diag([d]) * [B]; row i of B scaled by the interval d_i. B is m x n.
using DiagScaleFn = void (*)(int m, int n, const double* dlo, const double* dhi,
                             const double* blo, const double* bhi, double* clo, double* chi);

// C = [A] * [B]; both interval, m x k times k x n. Each term takes the
// min/max over the four endpoint products.
using GemmFn = void (*)(int m, int k, int n, const double* alo, const double* ahi,
                        const double* blo, const double* bhi, double* clo, double* chi);

struct Kernels {
    const char* name;
    GemmWExactFn gemm_wexact;
    MatvecWExactFn matvec_wexact;
    DiagScaleFn diag_scale;
    GemmFn gemm;
};

const Kernels& scalar_kernels();
const Kernels& avx2_kernels();  // entries fall back to scalar when built without AVX2
bool cpu_has_avx2();

// AVX2 when supported, else scalar; CONTRACERT_KERNEL=scalar|avx2 overrides.
const Kernels& active_kernels();
void set_active_kernels(const char* name);

}  // namespace contracert::kern
