#include <doctest.h>

#include <cmath>

#include "contracert/interval.hpp"
#include "contracert/util.hpp"

using namespace contracert;

namespace {

IntervalMatrix random_interval_matrix(Rng& rng, int rows, int cols, double scale = 2.0) {
    IntervalMatrix m;
    m.lo.reshape(rows, cols);
    m.hi.reshape(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const double a = rng.uniform(-scale, scale);
            const double b = rng.uniform(-scale, scale);
            m.lo(i, j) = std::min(a, b);
            m.hi(i, j) = std::max(a, b);
        }
    return m;
}

Mat sample_member(Rng& rng, const IntervalMatrix& m) {
    Mat s(m.rows(), m.cols());
    for (size_t i = 0; i < s.data.size(); ++i)
        s.data[i] = rng.uniform(m.lo.data[i], m.hi.data[i]);
    return s;
}

// independent enumeration oracle: all endpoint corners of one row of A and
// one column of B
Interval brute_force_product_entry(const IntervalMatrix& a, const IntervalMatrix& b, int i,
                                   int j) {
    const int k = a.cols();
    double lo = 0.0, hi = 0.0;
    const size_t combos = static_cast<size_t>(1) << (2 * k);
    for (size_t c = 0; c < combos; ++c) {
        double sum = 0.0;
        for (int p = 0; p < k; ++p) {
            const double av = (c >> (2 * p)) & 1 ? a.hi(i, p) : a.lo(i, p);
            const double bv = (c >> (2 * p + 1)) & 1 ? b.hi(p, j) : b.lo(p, j);
            sum += av * bv;
        }
        if (c == 0) {
            lo = hi = sum;
        } else {
            lo = std::min(lo, sum);
            hi = std::max(hi, sum);
        }
    }
    return Interval(lo, hi);
}

}  // namespace

TEST_CASE("interval add follows endpoint sums") {
    const Interval r = add(Interval(1, 2), Interval(3, 5));
    CHECK(r.lo == 4.0);
    CHECK(r.hi == 7.0);
    const Interval id = add(Interval(0, 0), Interval(-2.5, 3.25));
    CHECK(id.lo == -2.5);
    CHECK(id.hi == 3.25);
    const Interval m = add(Interval(-1, 1), Interval(-2, 3));
    CHECK(m.lo == -3.0);
    CHECK(m.hi == 4.0);
}

TEST_CASE("interval mul takes the endpoint-product hull") {
    const Interval r = mul(Interval(1, 2), Interval(-1, 3));
    CHECK(r.lo == -2.0);
    CHECK(r.hi == 6.0);
    const Interval z = mul(Interval(0, 0), Interval(-7, 11));
    CHECK(z.lo == 0.0);
    CHECK(z.hi == 0.0);
    const Interval n = mul(Interval(-2, -1), Interval(-3, -1));
    CHECK(n.lo == 1.0);
    CHECK(n.hi == 6.0);
}

TEST_CASE("interval constructor rejects invalid endpoints") {
    CHECK_THROWS(Interval(2.0, 1.0));
    CHECK_THROWS(Interval(0.0, std::numeric_limits<double>::infinity()));
}

TEST_CASE("imm scalar and identity cases") {
    IntervalMatrix a(Mat(1, 1, {-1.0}), Mat(1, 1, {1.0}));
    IntervalMatrix b(Mat(1, 1, {2.0}));
    const IntervalMatrix c = imm(a, b);
    CHECK(c.lo(0, 0) == -2.0);
    CHECK(c.hi(0, 0) == 2.0);

    Rng rng(7);
    const IntervalMatrix m = random_interval_matrix(rng, 3, 4);
    const IntervalMatrix eye(Mat::identity(3));
    const IntervalMatrix out = imm(eye, m);
    for (size_t i = 0; i < m.lo.data.size(); ++i) {
        CHECK(out.lo.data[i] == m.lo.data[i]);
        CHECK(out.hi.data[i] == m.hi.data[i]);
    }
}

TEST_CASE("imm row-times-column matches the endpoint-grid oracle") {
    // A = [[1,1],[0,2]] (single row), B = ([1,1]; [-1,1])
    IntervalMatrix a(Mat(1, 2, {1.0, 0.0}), Mat(1, 2, {1.0, 2.0}));
    IntervalMatrix b(Mat(2, 1, {1.0, -1.0}), Mat(2, 1, {1.0, 1.0}));
    const IntervalMatrix c = imm(a, b);
    const Interval oracle = brute_force_product_entry(a, b, 0, 0);
    CHECK(c.lo(0, 0) == oracle.lo);
    CHECK(c.hi(0, 0) == oracle.hi);
    CHECK(c.lo(0, 0) == -1.0);
    CHECK(c.hi(0, 0) == 3.0);
}

TEST_CASE("imm bounds match the endpoint-grid oracle on random instances") {
    Rng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const IntervalMatrix a = random_interval_matrix(rng, 2, 3);
        const IntervalMatrix b = random_interval_matrix(rng, 3, 2);
        const IntervalMatrix c = imm(a, b);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const Interval oracle = brute_force_product_entry(a, b, i, j);
                CHECK(c.lo(i, j) == doctest::Approx(oracle.lo).epsilon(1e-14));
                CHECK(c.hi(i, j) == doctest::Approx(oracle.hi).epsilon(1e-14));
            }
    }
}

TEST_CASE("imm containment soundness under random sampling") {
    Rng rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = rng.uniform_int(1, 5), k = rng.uniform_int(1, 5), m = rng.uniform_int(1, 5);
        const IntervalMatrix a = random_interval_matrix(rng, n, k);
        const IntervalMatrix b = random_interval_matrix(rng, k, m);
        const IntervalMatrix c = imm(a, b);
        for (int s = 0; s < 50; ++s) {
            const Mat av = sample_member(rng, a);
            const Mat bv = sample_member(rng, b);
            const Mat prod = matmul(av, bv);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    const double tol =
                        1e-12 * std::max({1.0, std::fabs(c.lo(i, j)), std::fabs(c.hi(i, j))});
                    CHECK(prod(i, j) >= c.lo(i, j) - tol);
                    CHECK(prod(i, j) <= c.hi(i, j) + tol);
                }
        }
    }
}

TEST_CASE("imm is inclusion isotone") {
    Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const IntervalMatrix a = random_interval_matrix(rng, 3, 3);
        const IntervalMatrix b = random_interval_matrix(rng, 3, 3);
        // shrink both operands toward their midpoints
        auto shrink = [&](const IntervalMatrix& m) {
            IntervalMatrix s = m;
            for (size_t i = 0; i < s.lo.data.size(); ++i) {
                const double mid = 0.5 * (s.lo.data[i] + s.hi.data[i]);
                s.lo.data[i] = s.lo.data[i] + rng.unit() * (mid - s.lo.data[i]);
                s.hi.data[i] = s.hi.data[i] - rng.unit() * (s.hi.data[i] - mid);
            }
            return s;
        };
        const IntervalMatrix c = imm(a, b);
        const IntervalMatrix cs = imm(shrink(a), shrink(b));
        for (size_t i = 0; i < c.lo.data.size(); ++i) {
            CHECK(cs.lo.data[i] >= c.lo.data[i] - 1e-12);
            CHECK(cs.hi.data[i] <= c.hi.data[i] + 1e-12);
        }
    }
}

TEST_CASE("imm is exact on width-zero operands") {
    Rng rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        Mat av(3, 3), bv(3, 3);
        for (auto& x : av.data) x = rng.uniform(-2, 2);
        for (auto& x : bv.data) x = rng.uniform(-2, 2);
        const IntervalMatrix c = imm(IntervalMatrix(av), IntervalMatrix(bv));
        const Mat prod = matmul(av, bv);
        for (size_t i = 0; i < prod.data.size(); ++i) {
            CHECK(c.lo.data[i] == doctest::Approx(prod.data[i]).epsilon(1e-15));
            CHECK(c.lo.data[i] == c.hi.data[i]);
        }
    }
}

TEST_CASE("metzler majorant definition and properties") {
    const Mat a(2, 2, {-3, -2, 2, -3});
    const Mat m = metzler_majorant(a);
    CHECK(m(0, 0) == -3.0);
    CHECK(m(0, 1) == 2.0);
    CHECK(m(1, 0) == 2.0);
    CHECK(m(1, 1) == -3.0);

    const Mat d(2, 2, {-1, 0, 0, -2});
    const Mat md = metzler_majorant(d);
    for (size_t i = 0; i < d.data.size(); ++i) CHECK(md.data[i] == d.data[i]);

    const Mat rot(2, 2, {0, -5, 5, 0});
    const Mat mrot = metzler_majorant(rot);
    CHECK(mrot(0, 1) == 5.0);
    CHECK(mrot(1, 0) == 5.0);

    CHECK_THROWS(metzler_majorant(Mat(2, 3)));

    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        Mat x(4, 4);
        for (auto& v : x.data) v = rng.uniform(-3, 3);
        const Mat mx = metzler_majorant(x);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                CHECK(mx(i, j) >= x(i, j));
                if (i != j) CHECK(mx(i, j) >= 0.0);
            }
        // idempotent on its own output
        const Mat mm = metzler_majorant(mx);
        for (size_t i = 0; i < mm.data.size(); ++i) CHECK(mm.data[i] == mx.data[i]);
    }
}

TEST_CASE("bisect splits each axis at its midpoint") {
    const IntervalVector box(Vec{0, 0}, Vec{2, 2});
    const auto children = bisect(box);
    REQUIRE(children.size() == 4);
    CHECK(children[0].lo == Vec{0, 0});
    CHECK(children[0].hi == Vec{1, 1});
    CHECK(children[3].lo == Vec{1, 1});
    CHECK(children[3].hi == Vec{2, 2});

    const auto halves = bisect(IntervalVector(Vec{-1}, Vec{1}));
    REQUIRE(halves.size() == 2);
    CHECK(halves[0].lo[0] == -1.0);
    CHECK(halves[0].hi[0] == 0.0);
    CHECK(halves[1].lo[0] == 0.0);
    CHECK(halves[1].hi[0] == 1.0);

    // degenerate axis stays degenerate
    const auto deg = bisect(IntervalVector(Vec{0.5, 0}, Vec{0.5, 2}));
    REQUIRE(deg.size() == 4);
    for (const auto& c : deg) {
        CHECK(c.lo[0] == 0.5);
        CHECK(c.hi[0] == 0.5);
    }
}

TEST_CASE("uniform partition covers the box with matched faces") {
    const auto four = uniform_partition(IntervalVector(Vec{0, 0}, Vec{4, 4}), 2);
    REQUIRE(four.size() == 4);
    for (const auto& c : four) {
        CHECK(c.hi[0] - c.lo[0] == doctest::Approx(2.0));
        CHECK(c.hi[1] - c.lo[1] == doctest::Approx(2.0));
    }

    const auto one = uniform_partition(IntervalVector(Vec{-1, 2}, Vec{1, 3}), 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].lo == Vec{-1, 2});
    CHECK(one[0].hi == Vec{1, 3});

    const auto quarters = uniform_partition(IntervalVector(Vec{0.0}, Vec{1.0}), 4);
    REQUIRE(quarters.size() == 4);
    CHECK(quarters[0].hi[0] == 0.25);
    CHECK(quarters[1].lo[0] == 0.25);
    CHECK(quarters[3].hi[0] == 1.0);
}

TEST_CASE("partition cells tile the parent exactly") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        Vec lo(2), hi(2);
        for (int d = 0; d < 2; ++d) {
            lo[d] = rng.uniform(-3, 0);
            hi[d] = lo[d] + rng.uniform(0.1, 3.0);
        }
        const IntervalVector box(lo, hi);
        for (const auto& cells :
             {uniform_partition(box, 3), uniform_partition(box, 5), bisect(box)}) {
            // shared faces: every interior edge appears as both a hi and a lo
            for (int s = 0; s < 200; ++s) {
                Vec x(2);
                for (int d = 0; d < 2; ++d) x[d] = rng.uniform(box.lo[d], box.hi[d]);
                bool inside = false;
                for (const auto& c : cells) inside = inside || c.contains(x);
                CHECK(inside);
            }
            // cell volumes sum to the box volume
            double vol = 0.0;
            for (const auto& c : cells) vol += (c.hi[0] - c.lo[0]) * (c.hi[1] - c.lo[1]);
            CHECK(vol == doctest::Approx((box.hi[0] - box.lo[0]) * (box.hi[1] - box.lo[1]))
                             .epsilon(1e-12));
        }
    }
}
