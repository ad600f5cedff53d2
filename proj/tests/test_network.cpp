#include <doctest.h>

#include <cmath>

#include "contracert/controller.hpp"
#include "contracert/network.hpp"
#include "contracert/util.hpp"

using namespace contracert;

namespace {

FeedforwardNetwork random_net(Rng& rng, const std::vector<int>& dims, Activation hidden,
                              double weight_scale = 1.0) {
    FeedforwardNetwork net;
    net.hidden = hidden;
    for (size_t k = 0; k + 1 < dims.size(); ++k) {
        Layer l{Mat(dims[k + 1], dims[k]), Vec(static_cast<size_t>(dims[k + 1]), 0.0)};
        const double bound = weight_scale / std::sqrt(static_cast<double>(dims[k]));
        for (auto& w : l.W.data) w = rng.uniform(-bound, bound);
        for (auto& b : l.b) b = rng.uniform(-0.3, 0.3);
        net.layers.push_back(std::move(l));
    }
    return net;
}

IntervalVector random_box(Rng& rng, int dim, double max_halfwidth = 0.5) {
    Vec lo(dim), hi(dim);
    for (int i = 0; i < dim; ++i) {
        const double c = rng.uniform(-1, 1);
        const double h = rng.uniform(0.01, max_halfwidth);
        lo[i] = c - h;
        hi[i] = c + h;
    }
    return IntervalVector(lo, hi);
}

Vec sample_point(Rng& rng, const IntervalVector& box) {
    Vec x(box.size());
    for (int i = 0; i < box.size(); ++i) x[i] = rng.uniform(box.lo[i], box.hi[i]);
    return x;
}

Mat fd_jacobian(const FeedforwardNetwork& net, const Vec& x, double h = 1e-5) {
    Mat j(net.output_dim(), net.input_dim());
    for (int c = 0; c < net.input_dim(); ++c) {
        Vec xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const Vec fp = forward(net, xp), fm = forward(net, xm);
        for (int r = 0; r < net.output_dim(); ++r) j(r, c) = (fp[r] - fm[r]) / (2.0 * h);
    }
    return j;
}

}  // namespace

TEST_CASE("forward evaluates affine layers and activations") {
    FeedforwardNetwork net;
    net.layers.push_back({Mat(1, 1, {2.0}), Vec{1.0}});
    net.hidden = Activation::softplus();
    net.output = Activation::identity();
    CHECK(forward(net, Vec{3.0})[0] == 7.0);

    FeedforwardNetwork sp;
    sp.layers.push_back({Mat(1, 1, {1.0}), Vec{0.0}});
    sp.layers.push_back({Mat(1, 1, {1.0}), Vec{0.0}});
    sp.hidden = Activation::softplus();
    CHECK(forward(sp, Vec{0.0})[0] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("forward equals the composition of layer evaluations") {
    Rng rng(3);
    const FeedforwardNetwork net = random_net(rng, {3, 5, 4, 2}, Activation::softplus());
    const Vec x = {0.3, -0.7, 1.1};
    Vec z = x;
    for (int k = 0; k < net.depth(); ++k) {
        Vec pre = matvec(net.layers[k].W, z);
        for (size_t i = 0; i < pre.size(); ++i) pre[i] += net.layers[k].b[i];
        const Activation& act = k + 1 < net.depth() ? net.hidden : net.output;
        z.resize(pre.size());
        for (size_t i = 0; i < pre.size(); ++i) z[i] = act.f(pre[i]);
    }
    const Vec direct = forward(net, x);
    for (size_t i = 0; i < z.size(); ++i) CHECK(direct[i] == z[i]);
}

TEST_CASE("jacobian of a linear network is the weight product") {
    FeedforwardNetwork net;
    net.layers.push_back({Mat(2, 2, {1, 2, 3, 4}), Vec{0, 0}});
    net.layers.push_back({Mat(2, 2, {0, 1, -1, 0}), Vec{0, 0}});
    net.hidden = Activation::identity();
    const Mat j = jacobian(net, Vec{0.5, -0.5});
    const Mat expect = matmul(net.layers[1].W, net.layers[0].W);
    for (size_t i = 0; i < expect.data.size(); ++i) CHECK(j.data[i] == expect.data[i]);
}

TEST_CASE("jacobian matches central finite differences") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const FeedforwardNetwork net = random_net(rng, {3, 8, 6, 2}, Activation::softplus());
        const Vec x = sample_point(rng, random_box(rng, 3));
        const Mat j = jacobian(net, x);
        const Mat fd = fd_jacobian(net, x);
        for (size_t i = 0; i < j.data.size(); ++i) {
            const double denom = std::max(1e-6, std::fabs(fd.data[i]));
            CHECK(std::fabs(j.data[i] - fd.data[i]) / denom <= 1e-6);
        }
    }
}

TEST_CASE("jacobian of a single softplus layer at zero") {
    FeedforwardNetwork net;
    net.layers.push_back({Mat(1, 1, {1.0}), Vec{0.0}});
    net.layers.push_back({Mat(1, 1, {1.0}), Vec{0.0}});
    net.hidden = Activation::softplus();
    const Mat j = jacobian(net, Vec{0.0});
    CHECK(j(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("ibp on a negative weight flips the box") {
    FeedforwardNetwork net;
    net.layers.push_back({Mat(1, 1, {-2.0}), Vec{0.0}});
    const LayerBounds lb = ibp(net, IntervalVector(Vec{0.0}, Vec{1.0}));
    CHECK(lb.output.lo[0] == -2.0);
    CHECK(lb.output.hi[0] == 0.0);
}

TEST_CASE("ibp collapses on a degenerate box") {
    Rng rng(29);
    const FeedforwardNetwork net = random_net(rng, {2, 6, 6, 3}, Activation::softplus());
    const Vec x = {0.4, -0.2};
    const LayerBounds lb = ibp(net, IntervalVector(x));
    const Vec y = forward(net, x);
    for (size_t i = 0; i < y.size(); ++i) {
        CHECK(lb.output.lo[i] == doctest::Approx(y[i]).epsilon(1e-15));
        CHECK(lb.output.lo[i] == lb.output.hi[i]);
    }
}

TEST_CASE("ibp output bounds contain sampled network values") {
    Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const FeedforwardNetwork net = random_net(rng, {2, 12, 12, 2}, Activation::softplus());
        const IntervalVector box = random_box(rng, 2);
        const LayerBounds lb = ibp(net, box);
        for (int s = 0; s < 10000; ++s) {
            const Vec y = forward(net, sample_point(rng, box));
            CHECK(lb.output.contains(y, 1e-9));
        }
    }
}

TEST_CASE("ibp never widens when the box shrinks") {
    Rng rng(37);
    const FeedforwardNetwork net = random_net(rng, {2, 10, 10, 2}, Activation::softplus());
    const IntervalVector box = random_box(rng, 2);
    Vec lo = box.lo, hi = box.hi;
    for (int d = 0; d < 2; ++d) {
        const double mid = 0.5 * (lo[d] + hi[d]);
        lo[d] = 0.5 * (lo[d] + mid);
        hi[d] = 0.5 * (hi[d] + mid);
    }
    const LayerBounds big = ibp(net, box);
    const LayerBounds small = ibp(net, IntervalVector(lo, hi));
    for (size_t k = 0; k < big.pre.size(); ++k)
        for (size_t i = 0; i < big.pre[k].lo.size(); ++i) {
            CHECK(small.pre[k].lo[i] >= big.pre[k].lo[i]);
            CHECK(small.pre[k].hi[i] <= big.pre[k].hi[i]);
        }
}

TEST_CASE("activation derivative bounds") {
    const Interval sp = Activation::softplus().deriv_bounds(Interval(0.0, 0.0));
    CHECK(sp.lo == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sp.hi == doctest::Approx(0.5).epsilon(1e-15));

    const Activation st = Activation::scaled_tanh(1.0);
    const Interval sb = st.deriv_bounds(Interval(-1.0, 2.0));
    const double sech2 = [](double x) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
    }(2.0);
    CHECK(sb.lo == doctest::Approx(sech2).epsilon(1e-12));
    CHECK(sb.hi == 1.0);

    // away from zero the maximum sits at an endpoint
    const Interval off = st.deriv_bounds(Interval(0.5, 2.0));
    CHECK(off.hi == doctest::Approx(st.df(0.5)).epsilon(1e-12));

    const Activation lr = Activation::smooth_leaky_relu(0.1);
    const Interval lb = lr.deriv_bounds(Interval(-50.0, 50.0));
    CHECK(lb.lo >= 0.1 - 1e-12);
    CHECK(lb.hi <= 1.0 + 1e-12);
}

TEST_CASE("derivative bounds cover sampled derivatives") {
    Rng rng(41);
    for (const Activation& act :
         {Activation::softplus(), Activation::smooth_leaky_relu(0.2), Activation::scaled_tanh(2.5),
          Activation::identity()}) {
        for (int trial = 0; trial < 20; ++trial) {
            const double a = rng.uniform(-4, 4), b = rng.uniform(-4, 4);
            const Interval pre(std::min(a, b), std::max(a, b));
            const Interval bounds = act.deriv_bounds(pre);
            for (int s = 0; s < 1000; ++s) {
                const double x = rng.uniform(pre.lo, pre.hi);
                const double d = act.df(x);
                CHECK(d >= bounds.lo - 1e-12);
                CHECK(d <= bounds.hi + 1e-12);
            }
        }
    }
}

TEST_CASE("interval jacobian collapses to the exact jacobian on a point box") {
    Rng rng(43);
    const FeedforwardNetwork net = random_net(rng, {2, 7, 5, 3}, Activation::softplus());
    const Vec x = {0.1, -0.6};
    const IntervalMatrix ij = interval_jacobian(net, IntervalVector(x));
    const Mat j = jacobian(net, x);
    for (size_t i = 0; i < j.data.size(); ++i) {
        CHECK(ij.lo.data[i] == doctest::Approx(j.data[i]).epsilon(1e-13));
        CHECK(std::fabs(ij.hi.data[i] - ij.lo.data[i]) <= 1e-12);
    }
}

TEST_CASE("interval jacobian of a linear network has width zero") {
    FeedforwardNetwork net;
    net.layers.push_back({Mat(2, 2, {1, -2, 0.5, 3}), Vec{0, 0}});
    net.layers.push_back({Mat(1, 2, {2, 1}), Vec{0}});
    net.hidden = Activation::identity();
    const IntervalMatrix ij = interval_jacobian(net, IntervalVector(Vec{-1, -1}, Vec{1, 1}));
    const Mat expect = matmul(net.layers[1].W, net.layers[0].W);
    for (size_t i = 0; i < expect.data.size(); ++i) {
        CHECK(ij.lo.data[i] == expect.data[i]);
        CHECK(ij.hi.data[i] == expect.data[i]);
    }
}

TEST_CASE("interval jacobian contains sampled jacobians") {
    Rng rng(47);
    for (int trial = 0; trial < 5; ++trial) {
        const FeedforwardNetwork net = random_net(rng, {2, 10, 10, 2}, Activation::softplus());
        const IntervalVector box = random_box(rng, 2);
        const IntervalMatrix ij = interval_jacobian(net, box);
        for (int s = 0; s < 10000; ++s) {
            const Mat j = jacobian(net, sample_point(rng, box));
            for (size_t i = 0; i < j.data.size(); ++i) {
                const double tol = 1e-9 * std::max(
                    {1.0, std::fabs(ij.lo.data[i]), std::fabs(ij.hi.data[i])});
                CHECK(j.data[i] >= ij.lo.data[i] - tol);
                CHECK(j.data[i] <= ij.hi.data[i] + tol);
            }
        }
    }
}

TEST_CASE("folding the left factor is at least as tight as multiplying after") {
    Rng rng(53);
    for (int trial = 0; trial < 10; ++trial) {
        const FeedforwardNetwork net = random_net(rng, {3, 9, 9, 4}, Activation::softplus());
        Mat left(2, 4);
        for (auto& v : left.data) v = rng.uniform(-1.5, 1.5);
        const IntervalVector box = random_box(rng, 3);
        const IntervalMatrix folded = interval_jacobian(net, box, &left);
        const IntervalMatrix outer = imm(IntervalMatrix(left), interval_jacobian(net, box));
        for (size_t i = 0; i < folded.lo.data.size(); ++i) {
            CHECK(folded.lo.data[i] >= outer.lo.data[i] - 1e-12);
            CHECK(folded.hi.data[i] <= outer.hi.data[i] + 1e-12);
        }
    }
}

TEST_CASE("anchored controller is zero at the origin and bounded everywhere") {
    Rng rng(59);
    for (int trial = 0; trial < 5; ++trial) {
        ZeroAnchoredBoundedController ctrl;
        ctrl.base = random_net(rng, {2, 8, 8, 1}, Activation::softplus());
        for (auto& b : ctrl.base.layers.back().b) b = rng.uniform(-2, 2);
        ctrl.scale = rng.uniform(0.5, 40.0);
        ctrl.validate();

        const Vec u0 = ctrl.eval(Vec{0.0, 0.0});
        CHECK(u0[0] == 0.0);

        for (int s = 0; s < 200; ++s) {
            const Vec x = {rng.uniform(-30, 30), rng.uniform(-30, 30)};
            const Vec u = ctrl.eval(x);
            CHECK(std::fabs(u[0]) <= ctrl.scale);
        }
    }
}

TEST_CASE("controller bounds contain sampled outputs and jacobians") {
    Rng rng(61);
    for (int trial = 0; trial < 4; ++trial) {
        ZeroAnchoredBoundedController ctrl;
        ctrl.base = random_net(rng, {2, 10, 10, 1}, Activation::softplus(), 2.0);
        ctrl.scale = rng.uniform(0.5, 5.0);
        Mat b(2, 1, {0.0, 1.0});

        const IntervalVector box = random_box(rng, 2, 1.0);
        const IntervalVector ub = controller_bounds(ctrl, box);
        const IntervalMatrix jb = controller_jacobian_bounds(ctrl, box, &b);

        for (int s = 0; s < 5000; ++s) {
            const Vec x = sample_point(rng, box);
            const Vec u = ctrl.eval(x);
            CHECK(ub.contains(u, 1e-9));
            const Mat ju = ctrl.jacobian(x);
            const Mat bju = matmul(b, ju);
            for (size_t i = 0; i < bju.data.size(); ++i) {
                const double tol = 1e-9 * std::max(
                    {1.0, std::fabs(jb.lo.data[i]), std::fabs(jb.hi.data[i])});
                CHECK(bju.data[i] >= jb.lo.data[i] - tol);
                CHECK(bju.data[i] <= jb.hi.data[i] + tol);
            }
        }
    }
}
