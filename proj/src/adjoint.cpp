#include "contracert/adjoint.hpp"

#include <stdexcept>

namespace contracert {

void NetGrads::init_like(const FeedforwardNetwork& net) {
    dW.resize(net.layers.size());
    db.resize(net.layers.size());
    for (size_t k = 0; k < net.layers.size(); ++k) {
        dW[k].reshape(net.layers[k].W.rows, net.layers[k].W.cols);
        db[k].assign(net.layers[k].b.size(), 0.0);
    }
}

void NetGrads::clear() {
    for (auto& m : dW) std::fill(m.data.begin(), m.data.end(), 0.0);
    for (auto& v : db) std::fill(v.begin(), v.end(), 0.0);
}

void NetGrads::add(const NetGrads& o) {
    for (size_t k = 0; k < dW.size(); ++k) {
        for (size_t i = 0; i < dW[k].data.size(); ++i) dW[k].data[i] += o.dW[k].data[i];
        for (size_t i = 0; i < db[k].size(); ++i) db[k][i] += o.db[k][i];
    }
}

namespace adj {

namespace {

// first-wins selection over the four endpoint products
inline int argmin4(double p1, double p2, double p3, double p4) {
    int idx = 0;
    double v = p1;
    if (p2 < v) { v = p2; idx = 1; }
    if (p3 < v) { v = p3; idx = 2; }
    if (p4 < v) { v = p4; idx = 3; }
    return idx;
}

inline int argmax4(double p1, double p2, double p3, double p4) {
    int idx = 0;
    double v = p1;
    if (p2 > v) { v = p2; idx = 1; }
    if (p3 > v) { v = p3; idx = 2; }
    if (p4 > v) { v = p4; idx = 3; }
    return idx;
}

// route one selected product adjoint into the operand endpoints
inline void route4(int sel, double d, double al, double ah, double bl, double bh, double* dal,
                   double* dah, double* dbl, double* dbh) {
    switch (sel) {
        case 0:
            if (dal) *dal += d * bl;
            if (dbl) *dbl += d * al;
            break;
        case 1:
            if (dal) *dal += d * bh;
            if (dbh) *dbh += d * al;
            break;
        case 2:
            if (dah) *dah += d * bl;
            if (dbl) *dbl += d * ah;
            break;
        default:
            if (dah) *dah += d * bh;
            if (dbh) *dbh += d * ah;
            break;
    }
}

}  // namespace

void gemm_wexact_bwd(const Mat& w, const IntervalMatrix& b, const Mat& dclo, const Mat& dchi,
                     Mat* dw, Mat* dblo, Mat* dbhi) {
    const int m = w.rows, k = w.cols, n = b.cols();
    for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
            const double wip = w(i, p);
            if (wip == 0.0) continue;
            double dwip = 0.0;
            for (int j = 0; j < n; ++j) {
                const double dcl = dclo(i, j), dch = dchi(i, j);
                const double bl = b.lo(p, j), bh = b.hi(p, j);
                if (wip > 0.0) {
                    dwip += dcl * bl + dch * bh;
                    if (dblo) (*dblo)(p, j) += wip * dcl;
                    if (dbhi) (*dbhi)(p, j) += wip * dch;
                } else {
                    dwip += dcl * bh + dch * bl;
                    if (dbhi) (*dbhi)(p, j) += wip * dcl;
                    if (dblo) (*dblo)(p, j) += wip * dch;
                }
            }
            if (dw) (*dw)(i, p) += dwip;
        }
}

void matvec_wexact_bwd(const Mat& w, const IntervalVector& x, const Vec& dylo, const Vec& dyhi,
                       Mat* dw, Vec* dxlo, Vec* dxhi) {
    const int m = w.rows, k = w.cols;
    for (int i = 0; i < m; ++i) {
        const double dyl = dylo[i], dyh = dyhi[i];
        if (dyl == 0.0 && dyh == 0.0) continue;
        for (int p = 0; p < k; ++p) {
            const double wip = w(i, p);
            if (wip == 0.0) continue;
            if (wip > 0.0) {
                if (dw) (*dw)(i, p) += dyl * x.lo[p] + dyh * x.hi[p];
                if (dxlo) (*dxlo)[p] += wip * dyl;
                if (dxhi) (*dxhi)[p] += wip * dyh;
            } else {
                if (dw) (*dw)(i, p) += dyl * x.hi[p] + dyh * x.lo[p];
                if (dxhi) (*dxhi)[p] += wip * dyl;
                if (dxlo) (*dxlo)[p] += wip * dyh;
            }
        }
    }
}

void diag_scale_bwd(const IntervalVector& d, const IntervalMatrix& b, const Mat& dclo,
                    const Mat& dchi, Vec* ddlo, Vec* ddhi, Mat* dblo, Mat* dbhi) {
    const int m = b.rows(), n = b.cols();
    for (int i = 0; i < m; ++i) {
        const double dl = d.lo[i], dh = d.hi[i];
        for (int j = 0; j < n; ++j) {
            const double dcl = dclo(i, j), dch = dchi(i, j);
            if (dcl == 0.0 && dch == 0.0) continue;
            const double bl = b.lo(i, j), bh = b.hi(i, j);
            const double p1 = dl * bl, p2 = dl * bh, p3 = dh * bl, p4 = dh * bh;
            double* pdl = ddlo ? &(*ddlo)[i] : nullptr;
            double* pdh = ddhi ? &(*ddhi)[i] : nullptr;
            double* pbl = dblo ? &(*dblo)(i, j) : nullptr;
            double* pbh = dbhi ? &(*dbhi)(i, j) : nullptr;
            if (dcl != 0.0) route4(argmin4(p1, p2, p3, p4), dcl, dl, dh, bl, bh, pdl, pdh, pbl, pbh);
            if (dch != 0.0) route4(argmax4(p1, p2, p3, p4), dch, dl, dh, bl, bh, pdl, pdh, pbl, pbh);
        }
    }
}

void gemm_bwd(const IntervalMatrix& a, const IntervalMatrix& b, const Mat& dclo, const Mat& dchi,
              Mat* dalo, Mat* dahi, Mat* dblo, Mat* dbhi) {
    const int m = a.rows(), k = a.cols(), n = b.cols();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            const double dcl = dclo(i, j), dch = dchi(i, j);
            if (dcl == 0.0 && dch == 0.0) continue;
            for (int p = 0; p < k; ++p) {
                const double al = a.lo(i, p), ah = a.hi(i, p);
                const double bl = b.lo(p, j), bh = b.hi(p, j);
                const double p1 = al * bl, p2 = al * bh, p3 = ah * bl, p4 = ah * bh;
                double* pal = dalo ? &(*dalo)(i, p) : nullptr;
                double* pah = dahi ? &(*dahi)(i, p) : nullptr;
                double* pbl = dblo ? &(*dblo)(p, j) : nullptr;
                double* pbh = dbhi ? &(*dbhi)(p, j) : nullptr;
                if (dcl != 0.0)
                    route4(argmin4(p1, p2, p3, p4), dcl, al, ah, bl, bh, pal, pah, pbl, pbh);
                if (dch != 0.0)
                    route4(argmax4(p1, p2, p3, p4), dch, al, ah, bl, bh, pal, pah, pbl, pbh);
            }
        }
}

void dot_bwd(const IntervalVector& a, const IntervalVector& b, double dlo, double dhi, Vec* dalo,
             Vec* dahi, Vec* dblo, Vec* dbhi) {
    if (dlo == 0.0 && dhi == 0.0) return;
    for (int p = 0; p < a.size(); ++p) {
        const double al = a.lo[p], ah = a.hi[p];
        const double bl = b.lo[p], bh = b.hi[p];
        const double p1 = al * bl, p2 = al * bh, p3 = ah * bl, p4 = ah * bh;
        double* pal = dalo ? &(*dalo)[p] : nullptr;
        double* pah = dahi ? &(*dahi)[p] : nullptr;
        double* pbl = dblo ? &(*dblo)[p] : nullptr;
        double* pbh = dbhi ? &(*dbhi)[p] : nullptr;
        if (dlo != 0.0) route4(argmin4(p1, p2, p3, p4), dlo, al, ah, bl, bh, pal, pah, pbl, pbh);
        if (dhi != 0.0) route4(argmax4(p1, p2, p3, p4), dhi, al, ah, bl, bh, pal, pah, pbl, pbh);
    }
}

void deriv_bounds_bwd(const Activation& act, double pre_lo, double pre_hi, double dblo,
                      double dbhi, double& dpre_lo, double& dpre_hi) {
    switch (act.kind) {
        case Activation::Kind::identity:
            return;
        case Activation::Kind::softplus:
        case Activation::Kind::smooth_leaky_relu:
            dpre_lo += act.ddf(pre_lo) * dblo;
            dpre_hi += act.ddf(pre_hi) * dbhi;
            return;
        case Activation::Kind::scaled_tanh: {
            const double dl = act.df(pre_lo), dh = act.df(pre_hi);
            if (dl <= dh) {
                dpre_lo += act.ddf(pre_lo) * dblo;
            } else {
                dpre_hi += act.ddf(pre_hi) * dblo;
            }
            if (pre_lo <= 0.0 && 0.0 <= pre_hi) return;  // upper bound pinned at 1
            if (dl >= dh) {
                dpre_lo += act.ddf(pre_lo) * dbhi;
            } else {
                dpre_hi += act.ddf(pre_hi) * dbhi;
            }
            return;
        }
    }
}

void jac_chain_bwd(const FeedforwardNetwork& net, const JacChain& chain, const LayerBounds& lb,
                   const Mat* left, Mat dplo, Mat dphi, NetGrads& dnet, std::vector<Vec>& dpre_lo,
                   std::vector<Vec>& dpre_hi) {
    const int L = net.depth();
    size_t s = chain.steps.size() - 1;

    if (net.output.kind != Activation::Kind::identity) {
        // final diagonal factor from the output activation
        const IntervalMatrix& prev = chain.steps[s - 1];
        Vec ddlo(chain.out_deriv.lo.size(), 0.0), ddhi(chain.out_deriv.hi.size(), 0.0);
        Mat nlo(prev.rows(), prev.cols()), nhi(prev.rows(), prev.cols());
        diag_scale_bwd(chain.out_deriv, prev, dplo, dphi, &ddlo, &ddhi, &nlo, &nhi);
        for (size_t i = 0; i < ddlo.size(); ++i)
            deriv_bounds_bwd(net.output, lb.pre[L - 1].lo[i], lb.pre[L - 1].hi[i], ddlo[i],
                             ddhi[i], dpre_lo[L - 1][i], dpre_hi[L - 1][i]);
        dplo = std::move(nlo);
        dphi = std::move(nhi);
        --s;
    }

    for (int k = L - 1; k >= 1; --k) {
        // weight multiply
        const bool elided = (k == L - 1) && left != nullptr;
        const Mat& wk = net.layers[k].W;
        const IntervalMatrix& prev = chain.steps[s - 1];
        Mat dweff(elided ? left->rows : wk.rows, wk.cols);
        Mat nlo(prev.rows(), prev.cols()), nhi(prev.rows(), prev.cols());
        if (elided) {
            const Mat weff = matmul(*left, wk);
            gemm_wexact_bwd(weff, prev, dplo, dphi, &dweff, &nlo, &nhi);
            const Mat back = matmul(transpose(*left), dweff);
            for (size_t i = 0; i < back.data.size(); ++i) dnet.dW[k].data[i] += back.data[i];
        } else {
            gemm_wexact_bwd(wk, prev, dplo, dphi, &dweff, &nlo, &nhi);
            for (size_t i = 0; i < dweff.data.size(); ++i) dnet.dW[k].data[i] += dweff.data[i];
        }
        dplo = std::move(nlo);
        dphi = std::move(nhi);
        --s;

        // diagonal activation-derivative factor
        const IntervalVector& jb = chain.jbounds[k - 1];
        const IntervalMatrix& base = chain.steps[s - 1];
        Vec djlo(jb.lo.size(), 0.0), djhi(jb.hi.size(), 0.0);
        Mat blo(base.rows(), base.cols()), bhi(base.rows(), base.cols());
        diag_scale_bwd(jb, base, dplo, dphi, &djlo, &djhi, &blo, &bhi);
        for (size_t i = 0; i < djlo.size(); ++i)
            deriv_bounds_bwd(net.hidden, lb.pre[k - 1].lo[i], lb.pre[k - 1].hi[i], djlo[i],
                             djhi[i], dpre_lo[k - 1][i], dpre_hi[k - 1][i]);
        dplo = std::move(blo);
        dphi = std::move(bhi);
        --s;
    }

    // first factor: a width-zero interval of the (possibly elided) first layer
    if (L == 1 && left != nullptr) {
        Mat dweff(left->rows, net.layers[0].W.cols);
        for (size_t i = 0; i < dweff.data.size(); ++i)
            dweff.data[i] = dplo.data[i] + dphi.data[i];
        const Mat back = matmul(transpose(*left), dweff);
        for (size_t i = 0; i < back.data.size(); ++i) dnet.dW[0].data[i] += back.data[i];
    } else {
        for (size_t i = 0; i < dplo.data.size(); ++i)
            dnet.dW[0].data[i] += dplo.data[i] + dphi.data[i];
    }
}

void ibp_bwd(const FeedforwardNetwork& net, const LayerBounds& lb, std::vector<Vec>& dpre_lo,
             std::vector<Vec>& dpre_hi, NetGrads& dnet) {
    const int L = net.depth();
    for (int k = L - 1; k >= 0; --k) {
        for (size_t i = 0; i < dpre_lo[k].size(); ++i)
            dnet.db[k][i] += dpre_lo[k][i] + dpre_hi[k][i];
        Vec dpost_lo(net.layers[k].W.cols, 0.0), dpost_hi(net.layers[k].W.cols, 0.0);
        matvec_wexact_bwd(net.layers[k].W, lb.post[k], dpre_lo[k], dpre_hi[k], &dnet.dW[k],
                          &dpost_lo, &dpost_hi);
        if (k > 0) {
            for (size_t i = 0; i < dpost_lo.size(); ++i) {
                dpre_lo[k - 1][i] += net.hidden.df(lb.pre[k - 1].lo[i]) * dpost_lo[i];
                dpre_hi[k - 1][i] += net.hidden.df(lb.pre[k - 1].hi[i]) * dpost_hi[i];
            }
        }
    }
}

void forward_bwd(const FeedforwardNetwork& net, const ForwardTrace& t, Vec dout, NetGrads& dnet) {
    const int L = net.depth();
    Vec dz = std::move(dout);
    for (int k = L - 1; k >= 0; --k) {
        const Activation& act = (k + 1 < L) ? net.hidden : net.output;
        Vec dpre(t.pre[k].size());
        for (size_t i = 0; i < dpre.size(); ++i) dpre[i] = dz[i] * act.df(t.pre[k][i]);
        const Mat& w = net.layers[k].W;
        for (int i = 0; i < w.rows; ++i) {
            dnet.db[k][i] += dpre[i];
            for (int p = 0; p < w.cols; ++p) dnet.dW[k](i, p) += dpre[i] * t.inputs[k][p];
        }
        if (k > 0) {
            dz.assign(w.cols, 0.0);
            for (int i = 0; i < w.rows; ++i)
                for (int p = 0; p < w.cols; ++p) dz[p] += w(i, p) * dpre[i];
        }
    }
}

}  // namespace adj

namespace {

std::vector<Vec> zeros_like_pre(const LayerBounds& lb) {
    std::vector<Vec> z(lb.pre.size());
    for (size_t k = 0; k < lb.pre.size(); ++k) z[k].assign(lb.pre[k].lo.size(), 0.0);
    return z;
}

}  // namespace

void cell_backward(const ContractionProblem& prob, const CellComputation& comp, const Mat& dG,
                   NetGrads& dctrl, NetGrads& dmet) {
    const int n = prob.plant->state_dim();
    const int m = prob.plant->input_dim();

    // majorant entry selection (Metzler dominant matrix -> interval bounds)
    Mat dAlo(n, n), dAhi(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) {
                dAhi(i, i) += dG(i, i);
            } else if (comp.a.hi(i, j) >= -comp.a.lo(i, j)) {
                dAhi(i, j) += dG(i, j);
            } else {
                dAlo(i, j) -= dG(i, j);
            }
        }

    // hull symmetrization
    Mat dAPlo(n, n), dAPhi(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (comp.a_pre.lo(i, j) <= comp.a_pre.lo(j, i)) {
                dAPlo(i, j) += dAlo(i, j);
            } else {
                dAPlo(j, i) += dAlo(i, j);
            }
            if (comp.a_pre.hi(i, j) >= comp.a_pre.hi(j, i)) {
                dAPhi(i, j) += dAhi(i, j);
            } else {
                dAPhi(j, i) += dAhi(i, j);
            }
        }

    // assembled sums
    Mat dLflo(n, n), dLfhi(n, n), dLulo(n, n), dLuhi(n, n);
    Mat dMlo(n, n), dMhi(n, n);
    std::vector<Vec> dglo(static_cast<size_t>(n) * n, Vec(n, 0.0));
    std::vector<Vec> dghi(static_cast<size_t>(n) * n, Vec(n, 0.0));
    Vec dbulo(n, 0.0), dbuhi(n, 0.0);
    Mat dBjulo(n, n), dBjuhi(n, n);

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            dLflo(i, j) = dAPlo(i, j) + dAPlo(j, i);
            dLfhi(i, j) = dAPhi(i, j) + dAPhi(j, i);
            dLulo(i, j) = dAPlo(i, j) + dAPlo(j, i);
            dLuhi(i, j) = dAPhi(i, j) + dAPhi(j, i);
        }
    if (prob.rate > 0.0) {
        const double two_c = 2.0 * prob.rate;
        for (size_t i = 0; i < dMlo.data.size(); ++i) {
            dMlo.data[i] += two_c * dAPlo.data[i];
            dMhi.data[i] += two_c * dAPhi.data[i];
        }
    }

    // Lie-derivative inner products (the mdot adjoint of entry (i,j) is the
    // symmetrized-sum adjoint at (i,j))
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const size_t idx = static_cast<size_t>(i) * n + j;
            adj::dot_bwd(comp.mbounds.gradM[idx], comp.f, dAPlo(i, j), dAPhi(i, j), &dglo[idx],
                         &dghi[idx], nullptr, nullptr);
            adj::dot_bwd(comp.mbounds.gradM[idx], comp.bu, dAPlo(i, j), dAPhi(i, j), &dglo[idx],
                         &dghi[idx], &dbulo, &dbuhi);
        }

    // metric-Jacobian products
    adj::gemm_bwd(comp.mbounds.M, comp.jf, dLflo, dLfhi, &dMlo, &dMhi, nullptr, nullptr);
    adj::gemm_bwd(comp.mbounds.M, comp.bju, dLulo, dLuhi, &dMlo, &dMhi, &dBjulo, &dBjuhi);

    // ---- controller path ----
    {
        const ZeroAnchoredBoundedController& c = prob.controller;
        const Mat& b = prob.plant->input_matrix();
        const ControllerRecord& cr = comp.ctrl;

        Mat dDulo(m, n), dDuhi(m, n);
        adj::gemm_wexact_bwd(b, cr.du, dBjulo, dBjuhi, nullptr, &dDulo, &dDuhi);

        Vec dtdlo(m, 0.0), dtdhi(m, 0.0);
        const IntervalMatrix& chain_res = cr.chain.result();
        Mat dPlo(chain_res.rows(), chain_res.cols()), dPhi(chain_res.rows(), chain_res.cols());
        adj::diag_scale_bwd(cr.tanh_deriv, chain_res, dDulo, dDuhi, &dtdlo, &dtdhi, &dPlo, &dPhi);

        const Activation tanh_act = Activation::scaled_tanh(c.scale);
        Vec dshift_lo(m, 0.0), dshift_hi(m, 0.0);
        for (int i = 0; i < m; ++i)
            adj::deriv_bounds_bwd(tanh_act, cr.shifted.lo[i], cr.shifted.hi[i], dtdlo[i], dtdhi[i],
                                  dshift_lo[i], dshift_hi[i]);

        std::vector<Vec> dpre_lo = zeros_like_pre(cr.ibp);
        std::vector<Vec> dpre_hi = zeros_like_pre(cr.ibp);
        adj::jac_chain_bwd(c.base, cr.chain, cr.ibp, nullptr, std::move(dPlo), std::move(dPhi),
                           dctrl, dpre_lo, dpre_hi);

        Vec dulo(m, 0.0), duhi(m, 0.0);
        adj::matvec_wexact_bwd(b, cr.u, dbulo, dbuhi, nullptr, &dulo, &duhi);
        for (int i = 0; i < m; ++i) {
            dshift_lo[i] += tanh_act.df(cr.shifted.lo[i]) * dulo[i];
            dshift_hi[i] += tanh_act.df(cr.shifted.hi[i]) * duhi[i];
        }

        // shifted = last preactivation bounds - anchor
        Vec danchor(m, 0.0);
        const int lc = c.base.depth();
        for (int i = 0; i < m; ++i) {
            dpre_lo[lc - 1][i] += dshift_lo[i];
            dpre_hi[lc - 1][i] += dshift_hi[i];
            danchor[i] -= dshift_lo[i] + dshift_hi[i];
        }
        adj::forward_bwd(c.base, cr.anchor_trace, std::move(danchor), dctrl);
        adj::ibp_bwd(c.base, cr.ibp, dpre_lo, dpre_hi, dctrl);
    }

    // ---- metric path ----
    if (!prob.metric.constant_mode) {
        const NeuralContractionMetric& met = prob.metric;
        const MetricRecord& mr = comp.met;

        // hull symmetrization of the metric interval
        Mat dMrawlo(n, n), dMrawhi(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (mr.M_raw.lo(i, j) <= mr.M_raw.lo(j, i)) {
                    dMrawlo(i, j) += dMlo(i, j);
                } else {
                    dMrawlo(j, i) += dMlo(i, j);
                }
                if (mr.M_raw.hi(i, j) >= mr.M_raw.hi(j, i)) {
                    dMrawhi(i, j) += dMhi(i, j);
                } else {
                    dMrawhi(j, i) += dMhi(i, j);
                }
            }

        Mat dNTlo(n, n), dNThi(n, n), dNlo(n, n), dNhi(n, n);
        adj::gemm_bwd(mr.NT, mr.N, dMrawlo, dMrawhi, &dNTlo, &dNThi, &dNlo, &dNhi);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                dNlo(i, j) += dNTlo(j, i);
                dNhi(i, j) += dNThi(j, i);
            }

        // gradient-entry products, same pair order as the forward pass
        std::vector<Mat> dcolTlo(n, Mat(n, n)), dcolThi(n, Mat(n, n));
        std::vector<Mat> dncolslo(n, Mat(n, 1)), dncolshi(n, Mat(n, 1));
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Vec pair_lo(n, 0.0), pair_hi(n, 0.0);
                const size_t ij = static_cast<size_t>(i) * n + j;
                const size_t ji = static_cast<size_t>(j) * n + i;
                for (int cidx = 0; cidx < n; ++cidx) {
                    pair_lo[cidx] = dglo[ij][cidx] + (i == j ? 0.0 : dglo[ji][cidx]);
                    pair_hi[cidx] = dghi[ij][cidx] + (i == j ? 0.0 : dghi[ji][cidx]);
                }
                Mat dtllo(n, 1), dtlhi(n, 1);
                for (int cidx = 0; cidx < n; ++cidx) {
                    dtllo(cidx, 0) = pair_lo[cidx];
                    dtlhi(cidx, 0) = pair_hi[cidx];
                }
                adj::gemm_bwd(mr.colT[i], mr.ncols[j], dtllo, dtlhi, &dcolTlo[i], &dcolThi[i],
                              &dncolslo[j], &dncolshi[j]);
                adj::gemm_bwd(mr.colT[j], mr.ncols[i], dtllo, dtlhi, &dcolTlo[j], &dcolThi[j],
                              &dncolslo[i], &dncolshi[i]);
            }

        for (int j = 0; j < n; ++j)
            for (int row = 0; row < n; ++row) {
                dNlo(row, j) += dncolslo[j](row, 0);
                dNhi(row, j) += dncolshi[j](row, 0);
            }

        std::vector<Vec> dpre_lo = zeros_like_pre(mr.ibp);
        std::vector<Vec> dpre_hi = zeros_like_pre(mr.ibp);

        for (int i = 0; i < n; ++i) {
            const Mat sel = column_selector(n, i);
            adj::jac_chain_bwd(met.base, mr.col_chains[i], mr.ibp, &sel, transpose(dcolTlo[i]),
                               transpose(dcolThi[i]), dmet, dpre_lo, dpre_hi);
        }

        // reshaped output bounds feed the final preactivation (identity output)
        const int lm = met.base.depth();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                dpre_lo[lm - 1][i * n + j] += dNlo(i, j);
                dpre_hi[lm - 1][i * n + j] += dNhi(i, j);
            }
        adj::ibp_bwd(met.base, mr.ibp, dpre_lo, dpre_hi, dmet);
    }
}

}  // namespace contracert
