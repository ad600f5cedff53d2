#include "contracert/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "contracert/util.hpp"

namespace contracert {

ParamIndexer::ParamIndexer(const ContractionProblem& prob) {
    int off = 0;
    auto add_net = [&](const FeedforwardNetwork& net, const std::string& prefix) {
        for (size_t k = 0; k < net.layers.size(); ++k) {
            const auto& l = net.layers[k];
            blocks_.push_back({prefix + ".layers[" + std::to_string(k) + "].W", off,
                               l.W.rows * l.W.cols});
            off += l.W.rows * l.W.cols;
            blocks_.push_back({prefix + ".layers[" + std::to_string(k) + "].b", off,
                               static_cast<int>(l.b.size())});
            off += static_cast<int>(l.b.size());
        }
    };
    add_net(prob.controller.base, "controller");
    ctrl_layers_ = prob.controller.base.depth();
    if (!prob.metric.constant_mode) {
        add_net(prob.metric.base, "metric");
        metric_layers_ = prob.metric.base.depth();
    }
    total_ = off;
}

Vec ParamIndexer::flatten(const ContractionProblem& prob) const {
    Vec theta;
    theta.reserve(total_);
    auto add_net = [&](const FeedforwardNetwork& net) {
        for (const auto& l : net.layers) {
            theta.insert(theta.end(), l.W.data.begin(), l.W.data.end());
            theta.insert(theta.end(), l.b.begin(), l.b.end());
        }
    };
    add_net(prob.controller.base);
    if (!prob.metric.constant_mode) add_net(prob.metric.base);
    if (static_cast<int>(theta.size()) != total_)
        throw std::logic_error("ParamIndexer: layout changed since construction");
    return theta;
}

void ParamIndexer::scatter(const Vec& theta, ContractionProblem& prob) const {
    if (static_cast<int>(theta.size()) != total_)
        throw std::invalid_argument("scatter: parameter vector size mismatch");
    size_t pos = 0;
    auto fill_net = [&](FeedforwardNetwork& net) {
        for (auto& l : net.layers) {
            std::copy(theta.begin() + pos, theta.begin() + pos + l.W.data.size(),
                      l.W.data.begin());
            pos += l.W.data.size();
            std::copy(theta.begin() + pos, theta.begin() + pos + l.b.size(), l.b.begin());
            pos += l.b.size();
        }
    };
    fill_net(prob.controller.base);
    if (!prob.metric.constant_mode) fill_net(prob.metric.base);
}

Vec ParamIndexer::flatten_grads(const NetGrads& dctrl, const NetGrads& dmet) const {
    Vec g;
    g.reserve(total_);
    auto add = [&](const NetGrads& ng) {
        for (size_t k = 0; k < ng.dW.size(); ++k) {
            g.insert(g.end(), ng.dW[k].data.begin(), ng.dW[k].data.end());
            g.insert(g.end(), ng.db[k].begin(), ng.db[k].end());
        }
    };
    add(dctrl);
    if (metric_layers_ > 0) add(dmet);
    if (static_cast<int>(g.size()) != total_)
        throw std::logic_error("flatten_grads: layout mismatch");
    return g;
}

std::string ParamIndexer::block_name(int index) const {
    for (const auto& b : blocks_)
        if (index >= b.offset && index < b.offset + b.length) return b.name;
    return "<out of range>";
}

void adam_step(TrainState& state, const AdamParams& p, double lr, const Vec& grad,
               const ParamIndexer& idx) {
    if (grad.size() != state.theta.size())
        throw std::invalid_argument("adam_step: gradient size mismatch");
    for (size_t i = 0; i < grad.size(); ++i)
        if (!std::isfinite(grad[i]))
            throw std::runtime_error("adam_step: non-finite gradient in " +
                                     idx.block_name(static_cast<int>(i)));
    if (state.m.size() != state.theta.size()) state.m.assign(state.theta.size(), 0.0);
    if (state.v.size() != state.theta.size()) state.v.assign(state.theta.size(), 0.0);

    state.step += 1;
    const double b1t = 1.0 - std::pow(p.beta1, static_cast<double>(state.step));
    const double b2t = 1.0 - std::pow(p.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < grad.size(); ++i) {
        state.m[i] = p.beta1 * state.m[i] + (1.0 - p.beta1) * grad[i];
        state.v[i] = p.beta2 * state.v[i] + (1.0 - p.beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / b1t;
        const double vhat = state.v[i] / b2t;
        state.theta[i] -= lr * mhat / (std::sqrt(vhat) + p.eps);
    }
}

void TrainConfig::validate(int state_dim) const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be > 0");
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (max_epochs_total < 1) throw std::invalid_argument("config: max_epochs_total must be >= 1");
    if (initial_r < 1) throw std::invalid_argument("config: initial_r must be >= 1");
    if (refinement_trigger < 1)
        throw std::invalid_argument("config: refinement_trigger must be >= 1");
    if (refinement_increment < 1)
        throw std::invalid_argument("config: refinement_increment must be >= 1");
    if (static_cast<int>(curriculum_start.size()) != state_dim)
        throw std::invalid_argument("config: curriculum_start dimension mismatch");
    if (static_cast<int>(curriculum_increment.size()) != state_dim)
        throw std::invalid_argument("config: curriculum_increment dimension mismatch");
    for (double h : curriculum_start)
        if (!(h > 0.0)) throw std::invalid_argument("config: curriculum_start must be positive");
    for (double h : curriculum_increment)
        if (h < 0.0)
            throw std::invalid_argument("config: curriculum_increment must be nonnegative");
    if (diag_slack < 0.0) throw std::invalid_argument("config: diag_slack must be nonnegative");
}

IntervalVector box_from_half_widths(const Vec& hw) {
    Vec lo(hw.size()), hi(hw.size());
    for (size_t i = 0; i < hw.size(); ++i) {
        lo[i] = -hw[i];
        hi[i] = hw[i];
    }
    return IntervalVector(std::move(lo), std::move(hi));
}

GradientTape::GradientTape(const ContractionProblem& prob,
                           const std::vector<IntervalVector>& cells, int threads,
                           double diag_slack)
    : prob_(&prob), cells_(cells), threads_(threads) {
    const size_t count = cells_.size();
    comps_.resize(count);
    eigs_.resize(count);
    spectra_.resize(count);
    parallel_for(static_cast<int>(count), threads_, [&](int i) {
        assemble_cell_G(prob, cells_[i], diag_slack, &comps_[i]);
        eigs_[i] = eigh_jacobi(comps_[i].g);
        spectra_[i] = eigs_[i].values;
    });
    value_ = positive_part_sum(spectra_);
}

double positive_part_sum(const std::vector<Vec>& spectra) {
    double total = 0.0;
    for (const auto& s : spectra)
        for (double lam : s)
            if (lam > 0.0) total += lam;
    return total;
}

Vec GradientTape::backward(const ParamIndexer& idx) {
    if (consumed_) throw std::logic_error("GradientTape: reverse pass already consumed");
    consumed_ = true;

    const size_t count = cells_.size();
    std::vector<Vec> per_cell(count);
    parallel_for(static_cast<int>(count), threads_, [&](int i) {
        const EigResult& e = eigs_[i];
        const int n = static_cast<int>(e.values.size());
        bool active = false;
        Mat dG(n, n);
        for (int j = 0; j < n; ++j) {
            if (e.values[j] <= 0.0) continue;  // dead positive-part branch at 0
            active = true;
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) dG(r, c) += e.vectors(r, j) * e.vectors(c, j);
        }
        if (!active) return;
        NetGrads dctrl, dmet;
        dctrl.init_like(prob_->controller.base);
        if (!prob_->metric.constant_mode) dmet.init_like(prob_->metric.base);
        cell_backward(*prob_, comps_[i], dG, dctrl, dmet);
        per_cell[i] = idx.flatten_grads(dctrl, dmet);
    });

    // fixed-order reduction over cells
    Vec total(static_cast<size_t>(idx.size()), 0.0);
    for (size_t i = 0; i < count; ++i) {
        if (per_cell[i].empty()) continue;
        for (size_t j = 0; j < total.size(); ++j) total[j] += per_cell[i][j];
    }
    return total;
}

std::pair<double, std::vector<Vec>> loss(const ContractionProblem& prob,
                                         const std::vector<IntervalVector>& cells, int threads,
                                         double diag_slack) {
    GradientTape tape(prob, cells, threads, diag_slack);
    return {tape.value(), tape.spectra()};
}

Vec grad_loss(const ContractionProblem& prob, const std::vector<IntervalVector>& cells,
              int threads, double diag_slack) {
    GradientTape tape(prob, cells, threads, diag_slack);
    const ParamIndexer idx(prob);
    return tape.backward(idx);
}

void initialize_params(ContractionProblem& prob, std::uint64_t seed) {
    Rng rng(seed);
    auto init_net = [&](FeedforwardNetwork& net) {
        for (auto& l : net.layers) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(l.W.cols));
            for (double& w : l.W.data) w = rng.uniform(-bound, bound);
            std::fill(l.b.begin(), l.b.end(), 0.0);
        }
    };
    init_net(prob.controller.base);
    if (!prob.metric.constant_mode) init_net(prob.metric.base);
}

namespace {

DomainCertificate certificate_from_tape(const GradientTape& tape, const IntervalVector& domain,
                                        const ContractionProblem& prob) {
    DomainCertificate cert;
    cert.domain = domain;
    cert.rate = prob.rate;
    cert.plant_name = prob.plant->name();
    cert.plant_params = prob.plant->params_json();
    const auto& cells = tape.cells();
    const auto& comps = tape.cell_records();
    const auto& spectra = tape.spectra();
    cert.cells.resize(cells.size());
    for (size_t i = 0; i < cells.size(); ++i) {
        CellCertificate& c = cert.cells[i];
        c.cell = cells[i];
        c.G = comps[i].g;
        c.lambda_max = spectra[i][0];
        c.verified = c.lambda_max <= 0.0;
        c.depth = 0;
        c.metric_upper = lambda_max_sym(comps[i].mbounds.M.hi).first;
        cert.metric_upper = i == 0 ? c.metric_upper : std::max(cert.metric_upper, c.metric_upper);
    }
    cert.all_verified = true;
    for (const auto& c : cert.cells) cert.all_verified = cert.all_verified && c.verified;
    return cert;
}

bool covers(const IntervalVector& outer, const IntervalVector& inner) {
    for (int i = 0; i < outer.size(); ++i)
        if (inner.lo[i] < outer.lo[i] || inner.hi[i] > outer.hi[i]) return false;
    return true;
}

}  // namespace

TrainResult train(ContractionProblem& prob, const TrainConfig& cfg,
                  const TrainCallbacks& callbacks, const TrainState* resume) {
    prob.validate();
    cfg.validate(prob.plant->state_dim());

    const ParamIndexer idx(prob);
    TrainResult result;
    TrainState& st = result.state;
    if (resume) {
        st = *resume;
        idx.scatter(st.theta, prob);
    } else {
        initialize_params(prob, cfg.seed);
        st.theta = idx.flatten(prob);
        st.half_widths = cfg.curriculum_start;
        st.r = cfg.initial_r;
    }

    const double t0 = now_seconds();
    for (int it = 0; it < cfg.epochs && st.epoch < cfg.max_epochs_total; ++it) {
        const IntervalVector domain = box_from_half_widths(st.half_widths);
        const std::vector<IntervalVector> partition = uniform_partition(domain, st.r);
        GradientTape tape(prob, partition, cfg.threads, cfg.diag_slack);

        EpochLog row{st.epoch, tape.value(), st.r, st.half_widths, now_seconds() - t0};
        result.log.push_back(row);
        if (callbacks.on_epoch) callbacks.on_epoch(row);

        if (tape.value() == 0.0) {
            Milestone ms;
            ms.epoch = st.epoch;
            ms.domain = domain;
            ms.r = st.r;
            ms.theta = st.theta;
            ms.certificate = certificate_from_tape(tape, domain, prob);
            if (callbacks.on_milestone) callbacks.on_milestone(ms);
            result.milestones.push_back(std::move(ms));
            for (size_t i = 0; i < st.half_widths.size(); ++i)
                st.half_widths[i] += cfg.curriculum_increment[i];
            st.stagnation = 0;
        } else {
            const Vec g = tape.backward(idx);
            adam_step(st, cfg.adam, cfg.learning_rate, g, idx);
            idx.scatter(st.theta, prob);
            st.stagnation += 1;
            if (st.stagnation >= cfg.refinement_trigger) {
                st.r += cfg.refinement_increment;
                st.stagnation = 0;
            }
        }
        st.epoch += 1;
    }

    const IntervalVector start_box = box_from_half_widths(cfg.curriculum_start);
    for (const auto& ms : result.milestones)
        if (covers(ms.domain, start_box)) {
            result.start_certified = true;
            break;
        }
    return result;
}

}  // namespace contracert
