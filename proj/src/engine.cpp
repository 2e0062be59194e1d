#include "fcl/engine.hpp"

#include <algorithm>
#include <cmath>

#include "fcl/fft.hpp"

namespace fcl {

namespace {

using Cplx = std::complex<double>;
using ArrayXc = Eigen::ArrayXcd;

// Entities sharing (default probability at t, link chain, loss law) contribute
// identical conditional factors; collapse them to one power per group.
struct EntityGroup {
    double p = 0.0;  // unconditional default probability at t
    const Entity* rep = nullptr;
    const LossLaw* law = nullptr;
    int count = 0;
};

bool same_links(const Entity& a, const Entity& b) {
    if (a.links.size() != b.links.size()) return false;
    for (size_t k = 0; k < a.links.size(); ++k)
        if (!(a.links[k] == b.links[k])) return false;
    return true;
}

std::vector<EntityGroup> group_entities(const Portfolio& pf, double t) {
    std::vector<EntityGroup> groups;
    for (int j = 0; j < pf.size(); ++j) {
        const Entity& e = pf.model.entities[j];
        double p = marginal_default_prob(e.marginal, t);
        bool merged = false;
        for (auto& g : groups) {
            if (g.p == p && *g.law == pf.laws[j] && same_links(*g.rep, e)) {
                ++g.count;
                merged = true;
                break;
            }
        }
        if (!merged) groups.push_back({p, &e, &pf.laws[j], 1});
    }
    return groups;
}

std::vector<Cplx> unit_roots(int period) {
    std::vector<Cplx> w(period);
    for (int j = 0; j < period; ++j)
        w[j] = std::polar(1.0, 2.0 * pi * j / period);
    return w;
}

// Conditional CF of the loss law sampled at frequencies 2*pi*m/period,
// m = 0..nfreq-1, via the precomputed root table.
ArrayXc law_cf_vector(const Eigen::VectorXd& pmf, const std::vector<Cplx>& roots, int nfreq) {
    const int period = static_cast<int>(roots.size());
    ArrayXc phi = ArrayXc::Zero(nfreq);
    for (int k = 0; k < pmf.size(); ++k) {
        if (pmf[k] == 0.0) continue;
        for (int m = 0; m < nfreq; ++m)
            phi[m] += pmf[k] * roots[(static_cast<long long>(m) * k) % period];
    }
    return phi;
}

Cplx cpow_int(Cplx z, int n) {
    Cplx r = 1.0;
    while (n > 0) {
        if (n & 1) r *= z;
        z *= z;
        n >>= 1;
    }
    return r;
}

bool law_is_factor_dependent(const LossLaw& law) {
    const auto* bb = std::get_if<BetaBinomialLoss>(&law);
    return bb != nullptr && (bb->m2 != 0.0 || bb->m4 != 0.0);
}

// Conditional CF of the portfolio loss at one node, over all frequencies.
// `cache` holds the per-group law CF for v-independent laws.
ArrayXc conditional_loss_cf(const std::vector<EntityGroup>& groups,
                            const std::vector<ArrayXc>& cache,
                            const std::vector<Cplx>& roots, int nfreq,
                            const Eigen::Ref<const Eigen::VectorXd>& v) {
    ArrayXc prod = ArrayXc::Ones(nfreq);
    for (size_t g = 0; g < groups.size(); ++g) {
        double pv = conditional_default_prob_u(*groups[g].rep, groups[g].p, v);
        ArrayXc phi = cache[g].size() > 0
                          ? cache[g]
                          : law_cf_vector(loss_conditional_pmf(*groups[g].law, v), roots, nfreq);
        const int c = groups[g].count;
        for (int m = 0; m < nfreq; ++m) {
            Cplx f = (1.0 - pv) + pv * phi[m];
            prod[m] *= c == 1 ? f : cpow_int(f, c);
        }
    }
    return prod;
}

std::vector<ArrayXc> build_law_cache(const std::vector<EntityGroup>& groups,
                                     const std::vector<Cplx>& roots, int nfreq) {
    std::vector<ArrayXc> cache(groups.size());
    Eigen::VectorXd origin = Eigen::VectorXd::Constant(1, 0.5);
    for (size_t g = 0; g < groups.size(); ++g)
        if (!law_is_factor_dependent(*groups[g].law))
            cache[g] = law_cf_vector(loss_conditional_pmf(*groups[g].law, origin), roots, nfreq);
    return cache;
}

ArrayXc integrate_cf(const Portfolio& pf, double t, const QuadratureRule& q, int nfreq,
                     const std::vector<Cplx>& roots) {
    auto groups = group_entities(pf, t);
    auto cache = build_law_cache(groups, roots, nfreq);
    QuadratureRule rq = endpoint_regularized(q);
    ArrayXc cf = ArrayXc::Zero(nfreq);
    for (Eigen::Index i = 0; i < rq.size(); ++i)
        cf += rq.weights[i] * conditional_loss_cf(groups, cache, roots, nfreq, rq.nodes.col(i));
    return cf;
}

// Direct inverse DFT: p_k = (1/N) sum_m cf_m conj(W^{km}).
ArrayXc idft_direct(const ArrayXc& cf, const std::vector<Cplx>& roots) {
    const int n = static_cast<int>(cf.size());
    ArrayXc out(n);
    for (int k = 0; k < n; ++k) {
        Cplx s = 0.0;
        for (int m = 0; m < n; ++m)
            s += cf[m] * std::conj(roots[(static_cast<long long>(k) * m) % n]);
        out[k] = s / static_cast<double>(n);
    }
    return out;
}

ArrayXc invert_cf(const ArrayXc& cf, const std::vector<Cplx>& roots, CfInversion method) {
    if (method == CfInversion::Dft) return idft_direct(cf, roots);
    std::vector<Cplx> in(cf.data(), cf.data() + cf.size());
    auto out = idft_bluestein(in);
    return Eigen::Map<const ArrayXc>(out.data(), static_cast<Eigen::Index>(out.size()));
}

// Validate the imaginary residue, clamp roundoff negatives, renormalize.
Eigen::ArrayXd finalize_pmf(const ArrayXc& raw) {
    double max_imag = raw.imag().abs().maxCoeff();
    if (max_imag > 1e-9)
        throw numeric_error("loss pmf: imaginary residue " + std::to_string(max_imag));
    Eigen::ArrayXd pmf = raw.real();
    double most_negative = pmf.minCoeff();
    if (most_negative < -1e-12)
        throw numeric_error("loss pmf: negative probability " + std::to_string(most_negative) +
                            "; increase the quadrature order");
    pmf = pmf.max(0.0);
    double total = pmf.sum();
    if (std::fabs(total - 1.0) > 1e-9)
        throw numeric_error("loss pmf: total mass " + std::to_string(total));
    return pmf / total;
}

// Conditional pmf at a single node: roundoff negatives are clamped without
// the global mass check (the mixture over nodes is validated at the end).
Eigen::ArrayXd conditional_pmf_at_node(const std::vector<EntityGroup>& groups,
                                       const std::vector<ArrayXc>& cache,
                                       const std::vector<Cplx>& roots, int nfreq,
                                       const Eigen::Ref<const Eigen::VectorXd>& v) {
    ArrayXc cf = conditional_loss_cf(groups, cache, roots, nfreq, v);
    std::vector<Cplx> in(cf.data(), cf.data() + cf.size());
    auto inv = idft_bluestein(in);
    Eigen::ArrayXd pmf(nfreq);
    for (int k = 0; k < nfreq; ++k) pmf[k] = std::max(0.0, inv[k].real());
    return pmf;
}

long long units_on_grid(double amount, double delta, const char* what) {
    double r = amount / delta;
    long long k = std::llround(r);
    if (std::fabs(r - k) > 1e-9)
        throw std::domain_error(std::string(what) +
                                " must be a multiple of delta (a_k mod delta = 0)");
    return k;
}

Eigen::ArrayXd tranche_units_vector(const Eigen::ArrayXd& loss_units_pmf, double delta,
                                    const TrancheSpec& tr) {
    LossDistribution ld{delta, loss_units_pmf};
    TrancheDistribution td = tranche_pmf(ld, tr);
    long long k = units_on_grid(tr.width(), delta, "tranche width");
    Eigen::ArrayXd v = Eigen::ArrayXd::Zero(k + 1);
    v[0] = td.p_zero;
    v[k] = td.p_full;
    for (Eigen::Index i = 0; i < td.interior.size(); ++i) v[1 + i] += td.interior[i];
    return v;
}

} // namespace

std::complex<double> loss_cf(const Portfolio& pf, double t, double u, const QuadratureRule& q) {
    pf.validate();
    if (t < 0.0) throw std::domain_error("loss_cf: t must be >= 0");
    if (q.d != pf.model.d) throw config_error("loss_cf: quadrature dimension mismatch");
    auto groups = group_entities(pf, t);
    QuadratureRule rq = endpoint_regularized(q);
    Cplx acc = 0.0;
    for (Eigen::Index i = 0; i < rq.size(); ++i) {
        auto v = rq.nodes.col(i);
        Cplx prod = 1.0;
        for (const auto& g : groups) {
            double pv = conditional_default_prob_u(*g.rep, g.p, v);
            Cplx f = (1.0 - pv) + pv * loss_conditional_cf(*g.law, v, u);
            prod *= cpow_int(f, g.count);
        }
        acc += rq.weights[i] * prod;
    }
    return acc;
}

LossDistribution loss_pmf(const Portfolio& pf, double t, const QuadratureRule& q,
                          CfInversion method) {
    pf.validate();
    if (t < 0.0) throw std::domain_error("loss_pmf: t must be >= 0");
    if (q.d != pf.model.d) throw config_error("loss_pmf: quadrature dimension mismatch");
    const int nfreq = pf.max_units() + 1;
    auto roots = unit_roots(nfreq);
    ArrayXc cf = integrate_cf(pf, t, q, nfreq, roots);
    return {pf.delta, finalize_pmf(invert_cf(cf, roots, method))};
}

JointNLDistribution joint_nl_pmf(const Portfolio& pf, double t, const QuadratureRule& q) {
    pf.validate();
    if (t < 0.0) throw std::domain_error("joint_nl_pmf: t must be >= 0");
    if (q.d != pf.model.d) throw config_error("joint_nl_pmf: quadrature dimension mismatch");
    const int nfN = pf.size() + 1;
    const int nfM = pf.max_units() + 1;
    auto rootsN = unit_roots(nfN);
    auto rootsM = unit_roots(nfM);
    auto groups = group_entities(pf, t);
    auto cache = build_law_cache(groups, rootsM, nfM);

    QuadratureRule rq = endpoint_regularized(q);
    Eigen::MatrixXcd cf = Eigen::MatrixXcd::Zero(nfN, nfM);
    for (Eigen::Index i = 0; i < rq.size(); ++i) {
        auto v = rq.nodes.col(i);
        Eigen::MatrixXcd prod = Eigen::MatrixXcd::Ones(nfN, nfM);
        for (size_t g = 0; g < groups.size(); ++g) {
            double pv = conditional_default_prob_u(*groups[g].rep, groups[g].p, v);
            ArrayXc phi =
                cache[g].size() > 0
                    ? cache[g]
                    : law_cf_vector(loss_conditional_pmf(*groups[g].law, v), rootsM, nfM);
            const int c = groups[g].count;
            for (int x = 0; x < nfN; ++x)
                for (int y = 0; y < nfM; ++y) {
                    Cplx f = (1.0 - pv) + pv * rootsN[x] * phi[y];
                    prod(x, y) *= c == 1 ? f : cpow_int(f, c);
                }
        }
        cf += rq.weights[i] * prod;
    }

    // Separable 2-D inversion: rows (defaults) first, then columns (loss).
    Eigen::MatrixXcd half(nfN, nfM);
    for (int n = 0; n < nfN; ++n)
        for (int y = 0; y < nfM; ++y) {
            Cplx s = 0.0;
            for (int x = 0; x < nfN; ++x)
                s += cf(x, y) * std::conj(rootsN[(static_cast<long long>(n) * x) % nfN]);
            half(n, y) = s / static_cast<double>(nfN);
        }
    Eigen::MatrixXcd full(nfN, nfM);
    for (int n = 0; n < nfN; ++n)
        for (int k = 0; k < nfM; ++k) {
            Cplx s = 0.0;
            for (int y = 0; y < nfM; ++y)
                s += half(n, y) * std::conj(rootsM[(static_cast<long long>(k) * y) % nfM]);
            full(n, k) = s / static_cast<double>(nfM);
        }

    double max_imag = full.imag().cwiseAbs().maxCoeff();
    if (max_imag > 1e-9)
        throw numeric_error("joint pmf: imaginary residue " + std::to_string(max_imag));
    Eigen::MatrixXd pmf = full.real();
    if (pmf.minCoeff() < -1e-12)
        throw numeric_error("joint pmf: negative probability " +
                            std::to_string(pmf.minCoeff()));
    pmf = pmf.cwiseMax(0.0);
    double total = pmf.sum();
    if (std::fabs(total - 1.0) > 1e-9)
        throw numeric_error("joint pmf: total mass " + std::to_string(total));
    return {pf.delta, pmf / total};
}

TrancheDistribution tranche_pmf(const LossDistribution& loss, const TrancheSpec& tr) {
    tr.validate();
    const double delta = loss.delta;
    const Eigen::Index m_max = loss.pmf.size() - 1;

    const double ra = tr.attach / delta;
    const bool a_on_grid = std::fabs(ra - std::llround(ra)) < 1e-9;
    const long long floor_a = a_on_grid ? std::llround(ra) : static_cast<long long>(std::floor(ra));
    const long long ceil_a = a_on_grid ? std::llround(ra) : floor_a + 1;
    const double rb = tr.detach / delta;
    const bool b_on_grid = std::fabs(rb - std::llround(rb)) < 1e-9;
    const long long ceil_b = b_on_grid ? std::llround(rb) : static_cast<long long>(std::ceil(rb));

    TrancheDistribution td;
    td.delta = delta;
    td.width = tr.width();
    td.eps_a = a_on_grid ? delta : delta * (ceil_a - ra);

    for (long long m = 0; m <= std::min<long long>(floor_a, m_max); ++m) td.p_zero += loss.pmf[m];
    for (long long m = ceil_b; m <= m_max; ++m) td.p_full += loss.pmf[m];

    // Interior support: eps_a + k*delta strictly inside (0, width).
    const long long n_int =
        std::max<long long>(0, static_cast<long long>(
                                   std::ceil((td.width - td.eps_a) / delta - 1e-9)));
    td.interior = Eigen::ArrayXd::Zero(n_int);
    for (long long k = 0; k < n_int; ++k) {
        long long l = floor_a + 1 + k;  // first loss level strictly above a
        td.interior[k] = l <= m_max ? loss.pmf[l] : 0.0;
    }
    return td;
}

LossDistribution cdo2_pmf(const std::vector<Cdo2Component>& components, double t,
                          const QuadratureRule& q, bool shared_factor) {
    if (components.empty()) throw config_error("cdo2: needs at least one component");
    const double delta = components.front().portfolio.delta;
    long long total_units = 0;
    std::vector<long long> widths;
    for (const auto& c : components) {
        c.portfolio.validate();
        c.tranche.validate();
        if (c.portfolio.delta != delta)
            throw config_error("cdo2: all portfolios must share the loss unit delta");
        units_on_grid(c.tranche.attach, delta, "tranche attachment");
        units_on_grid(c.tranche.detach, delta, "tranche detachment");
        widths.push_back(units_on_grid(c.tranche.width(), delta, "tranche width"));
        total_units += widths.back();
        if (shared_factor && c.portfolio.model.d != q.d)
            throw config_error("cdo2: shared factor requires a common dimension");
    }
    const int nf = static_cast<int>(total_units) + 1;
    auto roots = unit_roots(nf);

    ArrayXc cf;
    if (shared_factor) {
        // Per component, per node: conditional loss pmf, conditional tranche
        // pmf, then the product of tranche CFs is mixed over the factor grid.
        struct Prep {
            std::vector<EntityGroup> groups;
            std::vector<ArrayXc> cache;
            std::vector<Cplx> roots;
            int nfreq;
        };
        std::vector<Prep> prep;
        for (const auto& c : components) {
            Prep p;
            p.nfreq = c.portfolio.max_units() + 1;
            p.roots = unit_roots(p.nfreq);
            p.groups = group_entities(c.portfolio, t);
            p.cache = build_law_cache(p.groups, p.roots, p.nfreq);
            prep.push_back(std::move(p));
        }
        cf = ArrayXc::Zero(nf);
        QuadratureRule rq = endpoint_regularized(q);
        for (Eigen::Index i = 0; i < rq.size(); ++i) {
            auto v = rq.nodes.col(i);
            ArrayXc prod = ArrayXc::Ones(nf);
            for (size_t c = 0; c < components.size(); ++c) {
                Eigen::ArrayXd cond = conditional_pmf_at_node(prep[c].groups, prep[c].cache,
                                                              prep[c].roots, prep[c].nfreq, v);
                Eigen::ArrayXd tk = tranche_units_vector(cond, delta, components[c].tranche);
                ArrayXc phi = law_cf_vector(tk.matrix(), roots, nf);
                prod *= phi;
            }
            cf += rq.weights[i] * prod;
        }
    } else {
        // Independent factors: the squared-loss CF is the product of the
        // unconditional tranche CFs.
        cf = ArrayXc::Ones(nf);
        for (const auto& c : components) {
            LossDistribution lp = loss_pmf(c.portfolio, t, q);
            Eigen::ArrayXd tk = tranche_units_vector(lp.pmf, delta, c.tranche);
            cf *= law_cf_vector(tk.matrix(), roots, nf);
        }
    }
    return {delta, finalize_pmf(invert_cf(cf, roots, CfInversion::Fft))};
}

} // namespace fcl
