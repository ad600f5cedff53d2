#include "contracert/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

namespace contracert {

void ContractionProblem::validate() const {
    if (!plant) throw std::invalid_argument("problem: plant missing");
    controller.validate();
    metric.validate();
    if (controller.state_dim() != plant->state_dim())
        throw std::invalid_argument("problem: controller input dimension != plant state dimension");
    if (controller.input_dim() != plant->input_dim())
        throw std::invalid_argument("problem: controller output dimension != plant input dimension");
    if (metric.n != plant->state_dim())
        throw std::invalid_argument("problem: metric dimension != plant state dimension");
    if (rate < 0.0) throw std::invalid_argument("problem: rate must be nonnegative");
}

namespace {

// interval dot product, term order fixed for the reverse pass
Interval interval_dot(const IntervalVector& a, const IntervalVector& b) {
    double lo = 0.0, hi = 0.0;
    for (int p = 0; p < a.size(); ++p) {
        const double p1 = a.lo[p] * b.lo[p], p2 = a.lo[p] * b.hi[p];
        const double p3 = a.hi[p] * b.lo[p], p4 = a.hi[p] * b.hi[p];
        lo += std::min(std::min(p1, p2), std::min(p3, p4));
        hi += std::max(std::max(p1, p2), std::max(p3, p4));
    }
    return Interval(lo, hi);
}

}  // namespace

IntervalMatrix assemble_A_interval(const ContractionProblem& prob, const IntervalVector& cell,
                                   CellComputation* rec) {
    const int n = prob.plant->state_dim();
    if (cell.size() != n) throw std::invalid_argument("assemble: cell dimension mismatch");

    CellComputation local;
    CellComputation& r = rec ? *rec : local;

    // plant
    r.f = prob.plant->bound_f(cell);
    r.jf = prob.plant->bound_jf(cell);

    // controller: [B u] and [B du/dx]
    const Mat& b = prob.plant->input_matrix();
    const IntervalVector u = controller_bounds(prob.controller, cell, &r.ctrl);
    r.bu = imm_exact_left(b, u);
    r.bju = controller_jacobian_bounds(prob.controller, cell, &b, &r.ctrl);

    // metric
    r.mbounds = bound_metric(prob.metric, cell, &r.met);

    // Lie derivative entries
    r.mdotf_lo.reshape(n, n);
    r.mdotf_hi.reshape(n, n);
    r.mdotu_lo.reshape(n, n);
    r.mdotu_hi.reshape(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const IntervalVector& g = r.mbounds.gradM[static_cast<size_t>(i) * n + j];
            const Interval df = interval_dot(g, r.f);
            const Interval du = interval_dot(g, r.bu);
            r.mdotf_lo(i, j) = df.lo;
            r.mdotf_hi(i, j) = df.hi;
            r.mdotu_lo(i, j) = du.lo;
            r.mdotu_hi(i, j) = du.hi;
        }

    // products with the metric
    r.lf = imm(r.mbounds.M, r.jf);
    r.lu = imm(r.mbounds.M, r.bju);

    // symmetric sums plus Lie terms, then the rate term
    r.a_pre.lo.reshape(n, n);
    r.a_pre.hi.reshape(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            r.a_pre.lo(i, j) = r.lf.lo(i, j) + r.lf.lo(j, i) + r.mdotf_lo(i, j) + r.lu.lo(i, j) +
                               r.lu.lo(j, i) + r.mdotu_lo(i, j);
            r.a_pre.hi(i, j) = r.lf.hi(i, j) + r.lf.hi(j, i) + r.mdotf_hi(i, j) + r.lu.hi(i, j) +
                               r.lu.hi(j, i) + r.mdotu_hi(i, j);
        }
    if (prob.rate > 0.0) {
        const double two_c = 2.0 * prob.rate;
        for (size_t i = 0; i < r.a_pre.lo.data.size(); ++i) {
            r.a_pre.lo.data[i] += two_c * r.mbounds.M.lo.data[i];
            r.a_pre.hi.data[i] += two_c * r.mbounds.M.hi.data[i];
        }
    }
    r.a = hull(r.a_pre, transpose(r.a_pre));
    return r.a;
}

Mat assemble_G(const IntervalMatrix& a, double diag_slack) {
    if (a.rows() != a.cols()) throw std::invalid_argument("assemble_G: interval must be square");
    const int n = a.rows();
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g(i, j) = (i == j) ? a.hi(i, i) + diag_slack : std::max(a.hi(i, j), -a.lo(i, j));
    return g;
}

Mat assemble_cell_G(const ContractionProblem& prob, const IntervalVector& cell, double diag_slack,
                    CellComputation* rec) {
    CellComputation local;
    CellComputation& r = rec ? *rec : local;
    assemble_A_interval(prob, cell, &r);
    r.g = assemble_G(r.a, diag_slack);
    return r.g;
}

CellCertificate verify_cell(const ContractionProblem& prob, const IntervalVector& cell,
                            const VerifySettings& settings, int depth) {
    CellComputation comp;
    CellCertificate cert;
    cert.cell = cell;
    cert.G = assemble_cell_G(prob, cell, settings.diag_slack, &comp);
    cert.lambda_max = lambda_max_sym(cert.G).first;
    cert.verified = cert.lambda_max <= -settings.margin;
    cert.depth = depth;
    cert.metric_upper = lambda_max_sym(comp.mbounds.M.hi).first;
    return cert;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (int t = 0; t < threads; ++t) {
        const int begin = static_cast<int>(static_cast<long long>(count) * t / threads);
        const int end = static_cast<int>(static_cast<long long>(count) * (t + 1) / threads);
        pool.emplace_back([&, begin, end] {
            try {
                for (int i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

Mat contraction_matrix_at(const ContractionProblem& prob, const Vec& x) {
    const int n = prob.plant->state_dim();
    const Mat& b = prob.plant->input_matrix();

    Mat jcl = prob.plant->eval_jf(x);
    const Mat bju = matmul(b, prob.controller.jacobian(x));
    for (size_t i = 0; i < jcl.data.size(); ++i) jcl.data[i] += bju.data[i];

    Vec fcl = prob.plant->eval_f(x);
    const Vec u = prob.controller.eval(x);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < b.cols; ++j) fcl[i] += b(i, j) * u[j];

    const Mat m = eval_M(prob.metric, x);
    const auto grad = eval_gradM(prob.metric, x);

    const Mat mj = matmul(m, jcl);
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double mdot = 0.0;
            for (int c = 0; c < n; ++c) mdot += grad[static_cast<size_t>(i) * n + j][c] * fcl[c];
            a(i, j) = mj(i, j) + mj(j, i) + mdot + 2.0 * prob.rate * m(i, j);
        }
    return a;
}

DomainCertificate verify_domain(const ContractionProblem& prob, const IntervalVector& domain,
                                int r, const VerifySettings& settings) {
    if (r < 1) throw std::invalid_argument("verify_domain: r must be >= 1");
    prob.validate();
    const std::vector<IntervalVector> cells = uniform_partition(domain, r);

    DomainCertificate cert;
    cert.domain = domain;
    cert.rate = prob.rate;
    cert.plant_name = prob.plant->name();
    cert.plant_params = prob.plant->params_json();
    cert.cells.resize(cells.size());
    parallel_for(static_cast<int>(cells.size()), settings.threads,
                 [&](int i) { cert.cells[i] = verify_cell(prob, cells[i], settings, 0); });

    cert.all_verified = true;
    cert.metric_upper = 0.0;
    for (size_t i = 0; i < cert.cells.size(); ++i) {
        cert.all_verified = cert.all_verified && cert.cells[i].verified;
        cert.metric_upper = i == 0 ? cert.cells[i].metric_upper
                                   : std::max(cert.metric_upper, cert.cells[i].metric_upper);
    }
    return cert;
}

DomainCertificate adaptive_verify(const ContractionProblem& prob, const IntervalVector& domain,
                                  int max_depth, const VerifySettings& settings) {
    if (max_depth < 0) throw std::invalid_argument("adaptive_verify: max_depth must be >= 0");
    prob.validate();

    DomainCertificate cert;
    cert.domain = domain;
    cert.rate = prob.rate;
    cert.plant_name = prob.plant->name();
    cert.plant_params = prob.plant->params_json();

    struct Item {
        IntervalVector cell;
        int depth;
    };
    std::vector<Item> level{{domain, 0}};
    while (!level.empty()) {
        std::vector<CellCertificate> results(level.size());
        parallel_for(static_cast<int>(level.size()), settings.threads, [&](int i) {
            results[i] = verify_cell(prob, level[i].cell, settings, level[i].depth);
        });
        std::vector<Item> next;
        for (size_t i = 0; i < results.size(); ++i) {
            if (!results[i].verified && results[i].depth < max_depth) {
                for (auto& child : bisect(level[i].cell))
                    next.push_back({std::move(child), results[i].depth + 1});
            } else {
                cert.cells.push_back(std::move(results[i]));
            }
        }
        level = std::move(next);
    }

    cert.all_verified = !cert.cells.empty();
    cert.metric_upper = 0.0;
    for (size_t i = 0; i < cert.cells.size(); ++i) {
        cert.all_verified = cert.all_verified && cert.cells[i].verified;
        cert.metric_upper = i == 0 ? cert.cells[i].metric_upper
                                   : std::max(cert.metric_upper, cert.cells[i].metric_upper);
    }
    return cert;
}

}  // namespace contracert
