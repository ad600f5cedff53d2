#include "contracert/network.hpp"

#include <stdexcept>

namespace contracert {

int FeedforwardNetwork::param_count() const {
    int n = 0;
    for (const auto& l : layers) n += l.W.rows * l.W.cols + static_cast<int>(l.b.size());
    return n;
}

void FeedforwardNetwork::validate() const {
    if (layers.empty()) throw std::invalid_argument("network: no layers");
    for (size_t k = 0; k < layers.size(); ++k) {
        const auto& l = layers[k];
        if (l.W.rows <= 0 || l.W.cols <= 0)
            throw std::invalid_argument("network: empty weight matrix");
        if (static_cast<int>(l.b.size()) != l.W.rows)
            throw std::invalid_argument("network: bias size does not match layer rows");
        if (k > 0 && layers[k - 1].W.rows != l.W.cols)
            throw std::invalid_argument("network: layer dimensions do not chain");
    }
    if (output.kind != Activation::Kind::identity && output.kind != Activation::Kind::scaled_tanh)
        throw std::invalid_argument("network: output activation must be identity or scaled-tanh");
}

Vec forward(const FeedforwardNetwork& net, const Vec& x) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw std::invalid_argument("forward: input dimension mismatch");
    Vec z = x;
    const int L = net.depth();
    for (int k = 0; k < L; ++k) {
        Vec pre = matvec(net.layers[k].W, z);
        for (size_t i = 0; i < pre.size(); ++i) pre[i] += net.layers[k].b[i];
        const Activation& act = (k + 1 < L) ? net.hidden : net.output;
        z.resize(pre.size());
        for (size_t i = 0; i < pre.size(); ++i) z[i] = act.f(pre[i]);
    }
    return z;
}

ForwardTrace forward_trace(const FeedforwardNetwork& net, const Vec& x) {
    ForwardTrace t;
    const int L = net.depth();
    t.inputs.resize(L);
    t.pre.resize(L);
    Vec z = x;
    for (int k = 0; k < L; ++k) {
        t.inputs[k] = z;
        Vec pre = matvec(net.layers[k].W, z);
        for (size_t i = 0; i < pre.size(); ++i) pre[i] += net.layers[k].b[i];
        t.pre[k] = pre;
        const Activation& act = (k + 1 < L) ? net.hidden : net.output;
        z.resize(pre.size());
        for (size_t i = 0; i < pre.size(); ++i) z[i] = act.f(pre[i]);
    }
    t.output = z;
    return t;
}

Mat jacobian(const FeedforwardNetwork& net, const Vec& x) {
    const int L = net.depth();
    Vec z = x;
    Mat J = net.layers[0].W;
    for (int k = 0; k < L; ++k) {
        Vec pre = matvec(net.layers[k].W, z);
        for (size_t i = 0; i < pre.size(); ++i) pre[i] += net.layers[k].b[i];
        if (k + 1 < L) {
            // chain through the hidden activation, then the next weight layer
            Mat scaled(J.rows, J.cols);
            for (int i = 0; i < J.rows; ++i) {
                const double d = net.hidden.df(pre[i]);
                for (int j = 0; j < J.cols; ++j) scaled(i, j) = d * J(i, j);
            }
            J = matmul(net.layers[k + 1].W, scaled);
            z.resize(pre.size());
            for (size_t i = 0; i < pre.size(); ++i) z[i] = net.hidden.f(pre[i]);
        } else if (net.output.kind != Activation::Kind::identity) {
            for (int i = 0; i < J.rows; ++i) {
                const double d = net.output.df(pre[i]);
                for (int j = 0; j < J.cols; ++j) J(i, j) *= d;
            }
        }
    }
    return J;
}

LayerBounds ibp(const FeedforwardNetwork& net, const IntervalVector& box) {
    if (box.size() != net.input_dim()) throw std::invalid_argument("ibp: box dimension mismatch");
    const int L = net.depth();
    LayerBounds lb;
    lb.pre.resize(L);
    lb.post.resize(L);
    lb.post[0] = box;
    for (int k = 0; k < L; ++k) {
        IntervalVector pre = imm_exact_left(net.layers[k].W, lb.post[k]);
        for (size_t i = 0; i < pre.lo.size(); ++i) {
            pre.lo[i] += net.layers[k].b[i];
            pre.hi[i] += net.layers[k].b[i];
        }
        lb.pre[k] = std::move(pre);
        if (k + 1 < L) {
            IntervalVector z;
            z.lo.resize(lb.pre[k].lo.size());
            z.hi.resize(lb.pre[k].hi.size());
            for (size_t i = 0; i < z.lo.size(); ++i) {
                z.lo[i] = net.hidden.f(lb.pre[k].lo[i]);
                z.hi[i] = net.hidden.f(lb.pre[k].hi[i]);
            }
            lb.post[k + 1] = std::move(z);
        }
    }
    const IntervalVector& last = lb.pre[L - 1];
    lb.output.lo.resize(last.lo.size());
    lb.output.hi.resize(last.hi.size());
    for (size_t i = 0; i < last.lo.size(); ++i) {
        lb.output.lo[i] = net.output.f(last.lo[i]);
        lb.output.hi[i] = net.output.f(last.hi[i]);
    }
    return lb;
}

IntervalMatrix interval_jacobian(const FeedforwardNetwork& net, const IntervalVector& box,
                                 const Mat* left) {
    const LayerBounds lb = ibp(net, box);
    return interval_jacobian(net, lb, left, nullptr);
}

IntervalMatrix interval_jacobian(const FeedforwardNetwork& net, const LayerBounds& bounds,
                                 const Mat* left, JacChain* chain) {
    const int L = net.depth();
    if (left && net.output.kind != Activation::Kind::identity)
        throw std::invalid_argument(
            "interval_jacobian: left factor requires an affine (identity) output layer");

    JacChain local;
    JacChain& c = chain ? *chain : local;
    c.steps.clear();
    c.jbounds.clear();

    // running product, built right to left; the first factor is the first
    // weight matrix as a width-zero interval
    if (L == 1 && left) {
        c.steps.emplace_back(IntervalMatrix(matmul(*left, net.layers[0].W)));
    } else {
        c.steps.emplace_back(IntervalMatrix(net.layers[0].W));
    }
    for (int k = 1; k < L; ++k) {
        const IntervalVector& pre = bounds.pre[k - 1];
        IntervalVector j;
        j.lo.resize(pre.lo.size());
        j.hi.resize(pre.hi.size());
        for (size_t i = 0; i < j.lo.size(); ++i) {
            const Interval b = net.hidden.deriv_bounds(Interval(pre.lo[i], pre.hi[i]));
            j.lo[i] = b.lo;
            j.hi[i] = b.hi;
        }
        c.steps.push_back(imm_diag_left(j, c.steps.back()));
        c.jbounds.push_back(std::move(j));
        if (k == L - 1 && left) {
            c.steps.push_back(imm_exact_left(matmul(*left, net.layers[k].W), c.steps.back()));
        } else {
            c.steps.push_back(imm_exact_left(net.layers[k].W, c.steps.back()));
        }
    }
    if (net.output.kind != Activation::Kind::identity) {
        const IntervalVector& pre = bounds.pre[L - 1];
        IntervalVector d;
        d.lo.resize(pre.lo.size());
        d.hi.resize(pre.hi.size());
        for (size_t i = 0; i < d.lo.size(); ++i) {
            const Interval b = net.output.deriv_bounds(Interval(pre.lo[i], pre.hi[i]));
            d.lo[i] = b.lo;
            d.hi[i] = b.hi;
        }
        c.steps.push_back(imm_diag_left(d, c.steps.back()));
        c.out_deriv = std::move(d);
    }
    return c.steps.back();
}

}  // namespace contracert
