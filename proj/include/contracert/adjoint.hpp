#pragma once

#include "contracert/verifier.hpp"

namespace contracert {

// Parameter adjoints for one network.
struct NetGrads {
    std::vector<Mat> dW;
    std::vector<Vec> db;

    void init_like(const FeedforwardNetwork& net);
    void clear();
    void add(const NetGrads& o);
};

// Reverse pass through the cell pipeline recorded in `comp`. The adjoint of
// the dominating matrix G is propagated back through the majorant selection,
// the interval products (active endpoints fixed), the derivative bounds, the
// bound propagation, and the anchor forward pass, accumulating parameter
// adjoints for the controller and metric networks.
void cell_backward(const ContractionProblem& prob, const CellComputation& comp, const Mat& dG,
                   NetGrads& dctrl, NetGrads& dmet);

namespace adj {

// Adjoints of the interval kernels; selections are re-derived with a
// first-wins scan so ties route deterministically. Null outputs are skipped.
void gemm_wexact_bwd(const Mat& w, const IntervalMatrix& b, const Mat& dclo, const Mat& dchi,
                     Mat* dw, Mat* dblo, Mat* dbhi);
void matvec_wexact_bwd(const Mat& w, const IntervalVector& x, const Vec& dylo, const Vec& dyhi,
                       Mat* dw, Vec* dxlo, Vec* dxhi);
void diag_scale_bwd(const IntervalVector& d, const IntervalMatrix& b, const Mat& dclo,
                    const Mat& dchi, Vec* ddlo, Vec* ddhi, Mat* dblo, Mat* dbhi);
void gemm_bwd(const IntervalMatrix& a, const IntervalMatrix& b, const Mat& dclo, const Mat& dchi,
              Mat* dalo, Mat* dahi, Mat* dblo, Mat* dbhi);
void dot_bwd(const IntervalVector& a, const IntervalVector& b, double dlo, double dhi, Vec* dalo,
             Vec* dahi, Vec* dblo, Vec* dbhi);

// Adjoint of Activation::deriv_bounds.
void deriv_bounds_bwd(const Activation& act, double pre_lo, double pre_hi, double dblo,
                      double dbhi, double& dpre_lo, double& dpre_hi);

// Adjoint of the interval Jacobian chain; accumulates weight adjoints and
// preactivation-bound adjoints (activation-derivative path).
void jac_chain_bwd(const FeedforwardNetwork& net, const JacChain& chain, const LayerBounds& lb,
                   const Mat* left, Mat dplo, Mat dphi, NetGrads& dnet, std::vector<Vec>& dpre_lo,
                   std::vector<Vec>& dpre_hi);

// Adjoint of ibp(); consumes the accumulated preactivation adjoints.
void ibp_bwd(const FeedforwardNetwork& net, const LayerBounds& lb, std::vector<Vec>& dpre_lo,
             std::vector<Vec>& dpre_hi, NetGrads& dnet);

// Adjoint of forward_trace().
void forward_bwd(const FeedforwardNetwork& net, const ForwardTrace& t, Vec dout, NetGrads& dnet);

}  // namespace adj

}  // namespace contracert
