#include "fcl/oracle.hpp"

#include <chrono>
#include <cmath>
#include <functional>

#include "fcl/rng.hpp"

namespace fcl {

namespace {

// Sample U_j given V by inverting the h-function chain (outermost factor
// first). Mixture links pick a component with one extra uniform, then invert
// the component's conditional quantile.
double sample_entity_u(const Entity& e, const Eigen::Ref<const Eigen::VectorXd>& v,
                       SplitMix64& rng) {
    double u = rng.uniform();
    for (size_t k = 0; k < e.links.size(); ++k) {
        const Copula& c = e.links[k];
        if (!c.is_mixture()) {
            u = detail::hinv_single(c.components()[0].params, u, v[k]);
        } else {
            double pick = rng.uniform(), acc = 0.0;
            const auto& comps = c.components();
            size_t chosen = comps.size() - 1;
            for (size_t i = 0; i < comps.size(); ++i) {
                acc += comps[i].weight;
                if (pick <= acc) { chosen = i; break; }
            }
            u = detail::hinv_single(comps[chosen].params, u, v[k]);
        }
    }
    return u;
}

int sample_loss_units(const Eigen::VectorXd& pmf, SplitMix64& rng) {
    double w = rng.uniform(), acc = 0.0;
    for (int k = 0; k < pmf.size(); ++k) {
        acc += pmf[k];
        if (w <= acc) return k;
    }
    return static_cast<int>(pmf.size()) - 1;
}

} // namespace

LossDistribution recursive_pmf(const Portfolio& pf, double t, const QuadratureRule& q) {
    pf.validate();
    if (t < 0.0) throw std::domain_error("recursive_pmf: t must be >= 0");
    if (q.d != pf.model.d) throw config_error("recursive_pmf: quadrature dimension mismatch");
    const int m_max = pf.max_units();
    Eigen::VectorXd p(pf.size());
    for (int j = 0; j < pf.size(); ++j)
        p[j] = marginal_default_prob(pf.model.entities[j].marginal, t);

    QuadratureRule rq = endpoint_regularized(q);
    Eigen::ArrayXd pmf = Eigen::ArrayXd::Zero(m_max + 1);
    Eigen::ArrayXd cond(m_max + 1), next(m_max + 1);
    for (Eigen::Index i = 0; i < rq.size(); ++i) {
        auto v = rq.nodes.col(i);
        cond.setZero();
        cond[0] = 1.0;
        int reach = 0;  // current maximal attainable loss in units
        for (int j = 0; j < pf.size(); ++j) {
            double pv = conditional_default_prob_u(pf.model.entities[j], p[j], v);
            Eigen::VectorXd lpmf = loss_conditional_pmf(pf.laws[j], v);
            const int lmax = static_cast<int>(lpmf.size()) - 1;
            next.head(reach + lmax + 1).setZero();
            for (int k = 0; k <= reach; ++k) {
                if (cond[k] == 0.0) continue;
                next[k] += (1.0 - pv) * cond[k];
                for (int l = 0; l <= lmax; ++l)
                    if (lpmf[l] != 0.0) next[k + l] += pv * lpmf[l] * cond[k];
            }
            reach += lmax;
            cond.head(reach + 1) = next.head(reach + 1);
        }
        pmf += rq.weights[i] * cond;
    }
    pmf = pmf.max(0.0);
    return {pf.delta, pmf / pmf.sum()};
}

LossDistribution brute_force_pmf(const Portfolio& pf, double t, const QuadratureRule& q) {
    if (pf.model.entities.empty()) return {pf.delta, Eigen::ArrayXd::Ones(1)};
    pf.validate();
    if (t < 0.0) throw std::domain_error("brute_force_pmf: t must be >= 0");
    if (q.d != pf.model.d) throw config_error("brute_force_pmf: quadrature dimension mismatch");
    if (pf.size() > 12)
        throw config_error("brute_force_pmf: resource limit, N must be <= 12");
    double combos = 1.0;
    for (const auto& law : pf.laws) combos *= loss_max_units(law) + 1.0;
    if (combos > 1e6)
        throw config_error("brute_force_pmf: resource limit, too many loss outcomes");

    const int m_max = pf.max_units();
    Eigen::VectorXd p(pf.size());
    for (int j = 0; j < pf.size(); ++j)
        p[j] = marginal_default_prob(pf.model.entities[j].marginal, t);

    Eigen::ArrayXd pmf = Eigen::ArrayXd::Zero(m_max + 1);
    std::vector<Eigen::VectorXd> lpmf(pf.size());
    Eigen::ArrayXd node_pmf(m_max + 1);
    QuadratureRule rq = endpoint_regularized(q);
    for (Eigen::Index i = 0; i < rq.size(); ++i) {
        auto v = rq.nodes.col(i);
        Eigen::VectorXd pv(pf.size());
        for (int j = 0; j < pf.size(); ++j) {
            pv[j] = conditional_default_prob_u(pf.model.entities[j], p[j], v);
            lpmf[j] = loss_conditional_pmf(pf.laws[j], v);
        }
        node_pmf.setZero();
        std::function<void(int, double, int)> walk = [&](int j, double prob, int units) {
            if (prob == 0.0) return;
            if (j == pf.size()) {
                node_pmf[units] += prob;
                return;
            }
            walk(j + 1, prob * (1.0 - pv[j]), units);
            for (int l = 0; l < lpmf[j].size(); ++l)
                if (lpmf[j][l] != 0.0) walk(j + 1, prob * pv[j] * lpmf[j][l], units + l);
        };
        walk(0, 1.0, 0);
        pmf += rq.weights[i] * node_pmf;
    }
    pmf = pmf.max(0.0);
    return {pf.delta, pmf / pmf.sum()};
}

SimSummary simulate(const Portfolio& pf, const SimConfig& cfg, bool record_paths) {
    pf.validate();
    cfg.validate();
    const int n = pf.size();
    const int d = pf.model.d;
    const int m_max = pf.max_units();
    const double t = cfg.horizon;

    Eigen::VectorXd p(n);
    for (int j = 0; j < n; ++j)
        p[j] = marginal_default_prob(pf.model.entities[j].marginal, t);

    SimSummary out;
    out.paths = cfg.paths;
    out.delta = pf.delta;
    Eigen::ArrayXd def_count = Eigen::ArrayXd::Zero(n);
    Eigen::ArrayXd loss_count = Eigen::ArrayXd::Zero(m_max + 1);
    Eigen::ArrayXd ndef_count = Eigen::ArrayXd::Zero(n + 1);
    Eigen::ArrayXd loss_sum_by_n = Eigen::ArrayXd::Zero(n + 1);
    std::int64_t all_count = 0;
    if (record_paths) out.records.reserve(static_cast<size_t>(cfg.paths));

    Eigen::VectorXd v(d);
    for (std::int64_t path = 0; path < cfg.paths; ++path) {
        SplitMix64 rng = split_stream(cfg.seed, static_cast<std::uint64_t>(path));
        for (int k = 0; k < d; ++k) v[k] = rng.uniform();
        int ndef = 0;
        std::vector<int> who;
        for (int j = 0; j < n; ++j) {
            double u = sample_entity_u(pf.model.entities[j], v, rng);
            if (u <= p[j]) {
                ++ndef;
                who.push_back(j);
                def_count[j] += 1.0;
            }
        }
        int units = 0;
        for (int j : who)
            units += sample_loss_units(loss_conditional_pmf(pf.laws[j], v), rng);
        loss_count[units] += 1.0;
        ndef_count[ndef] += 1.0;
        loss_sum_by_n[ndef] += units * pf.delta;
        if (ndef == n) ++all_count;
        if (record_paths) out.records.push_back({path, ndef, units});
    }

    const double np = static_cast<double>(cfg.paths);
    out.entity_default_freq = def_count / np;
    out.all_default_freq = static_cast<double>(all_count) / np;
    out.loss_hist = loss_count / np;
    out.defaults_hist = ndef_count / np;
    out.loss_by_defaults = Eigen::ArrayXd::Constant(n + 1, std::nan(""));
    for (int k = 0; k <= n; ++k)
        if (ndef_count[k] > 0.0) out.loss_by_defaults[k] = loss_sum_by_n[k] / ndef_count[k];
    return out;
}

std::vector<BenchRow> bench_dft_vs_recursion(const std::vector<int>& sizes, int d) {
    for (size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] <= sizes[i - 1])
            throw config_error("bench: sizes must be ascending");
    std::vector<BenchRow> rows;
    for (int m : sizes) {
        Entity proto;
        for (int k = 0; k < d; ++k) proto.links.push_back(Copula(gaussian_copula(0.25)));
        proto.marginal = ConstantIntensity{0.05};
        Portfolio pf;
        pf.model.d = d;
        pf.model.entities.assign(m, proto);
        pf.laws.assign(m, ConstantLoss{1});
        QuadratureRule q = gauss_legendre_rule(d == 1 ? 64 : (d == 2 ? 32 : 16), d);

        auto tic = std::chrono::steady_clock::now();
        loss_pmf(pf, 5.0, q, CfInversion::Fft);
        auto mid = std::chrono::steady_clock::now();
        recursive_pmf(pf, 5.0, q);
        auto toc = std::chrono::steady_clock::now();
        rows.push_back({"dft", m, d, std::chrono::duration<double>(mid - tic).count()});
        rows.push_back({"recursion", m, d, std::chrono::duration<double>(toc - mid).count()});
    }
    return rows;
}

} // namespace fcl
