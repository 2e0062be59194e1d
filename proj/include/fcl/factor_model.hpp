#pragma once

// Factor copula models with independent latent factors: conditional default
// probabilities through h-function chains, joint default probabilities by
// quadrature, and conditioning on realized defaults.

#include <Eigen/Dense>
#include <vector>

#include "fcl/copula.hpp"
#include "fcl/marginal.hpp"
#include "fcl/quadrature.hpp"

namespace fcl {

struct Entity {
    std::vector<Copula> links;  // one bivariate copula per factor V_1..V_d
    MarginalCurve marginal;
};

// Latent factors are independent uniforms on (0,1)^d (C_V = product copula);
// dependent factor copulas are an extension point not implemented here.
struct FactorModel {
    int d = 1;
    std::vector<Entity> entities;

    int size() const { return static_cast<int>(entities.size()); }

    void validate() const {
        if (d < 1) throw config_error("factor model: d must be >= 1");
        if (entities.empty()) throw config_error("factor model: needs at least one entity");
        for (const auto& e : entities) {
            if (static_cast<int>(e.links.size()) != d)
                throw config_error("factor model: each entity needs exactly d link copulas");
            fcl::validate(e.marginal);
        }
    }
};

// p_{j,t}(v): composition of the h-function chain, innermost factor last,
// evaluated at the unconditional default probability.
inline double conditional_default_prob_u(const Entity& e, double u,
                                         const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    for (int k = static_cast<int>(e.links.size()) - 1; k >= 0; --k)
        u = copula_hfunc(e.links[k], u, v[k]);
    return u;
}

inline double conditional_default_prob(const FactorModel& m, int j, double t,
                                       const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (j < 0 || j >= m.size()) throw config_error("conditional_default_prob: entity index");
    if (v.size() != m.d) throw config_error("conditional_default_prob: factor dimension mismatch");
    for (Eigen::Index k = 0; k < v.size(); ++k)
        if (!(v[k] > 0.0 && v[k] < 1.0))
            throw std::domain_error("conditional_default_prob: v must be interior");
    double u = marginal_default_prob(m.entities[j].marginal, t);
    return conditional_default_prob_u(m.entities[j], u, v);
}

// Density of (U_j, V) at (u, v) with respect to du dv: the u-derivative of
// the h-function chain, a product of link densities along the chain stages.
inline double link_chain_density(const Entity& e, double u,
                                 const Eigen::Ref<const Eigen::VectorXd>& v) {
    double dens = 1.0;
    double x = u;
    for (int k = static_cast<int>(e.links.size()) - 1; k >= 0; --k) {
        dens *= copula_density(e.links[k], x, v[k]);
        x = copula_hfunc(e.links[k], x, v[k]);
    }
    return dens;
}

inline double joint_default_prob(const FactorModel& m, const Eigen::VectorXd& times,
                                 const QuadratureRule& q) {
    m.validate();
    if (times.size() != m.size()) throw config_error("joint_default_prob: one time per entity");
    if (q.d != m.d) throw config_error("joint_default_prob: quadrature dimension mismatch");
    for (Eigen::Index j = 0; j < times.size(); ++j)
        if (times[j] < 0.0) throw std::domain_error("joint_default_prob: times must be >= 0");
    Eigen::VectorXd p(m.size());
    for (int j = 0; j < m.size(); ++j)
        p[j] = marginal_default_prob(m.entities[j].marginal, times[j]);
    QuadratureRule rq = endpoint_regularized(q);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rq.size(); ++i) {
        double prod = 1.0;
        for (int j = 0; j < m.size() && prod != 0.0; ++j)
            prod *= conditional_default_prob_u(m.entities[j], p[j], rq.nodes.col(i));
        acc += rq.weights[i] * prod;
    }
    return std::min(1.0, std::max(0.0, acc));
}

struct RealizedDefault {
    int entity;
    double time;
};

// P[tau_j <= t_j for surviving j | tau_k = t_k for defaulted k]: ratio of
// quadrature integrals with the defaulted entities contributing their link
// densities in both numerator and denominator.
inline double conditional_given_defaults(const FactorModel& m, const Eigen::VectorXd& times,
                                         const std::vector<RealizedDefault>& defaulted,
                                         const QuadratureRule& q) {
    if (defaulted.empty()) return joint_default_prob(m, times, q);
    m.validate();
    if (times.size() != m.size())
        throw config_error("conditional_given_defaults: one time per entity");
    if (q.d != m.d) throw config_error("conditional_given_defaults: quadrature dimension mismatch");
    std::vector<char> is_def(m.size(), 0);
    std::vector<double> pdef(m.size(), 0.0);
    for (const auto& rd : defaulted) {
        if (rd.entity < 0 || rd.entity >= m.size() || is_def[rd.entity])
            throw config_error("conditional_given_defaults: bad or repeated defaulted entity");
        double pk = marginal_default_prob(m.entities[rd.entity].marginal, rd.time);
        if (!(pk > 0.0 && pk < 1.0))
            throw std::domain_error(
                "conditional_given_defaults: defaulted p_{k,t} must lie in (0,1)");
        is_def[rd.entity] = 1;
        pdef[rd.entity] = pk;
    }
    Eigen::VectorXd psurv(m.size());
    for (int j = 0; j < m.size(); ++j)
        if (!is_def[j]) psurv[j] = marginal_default_prob(m.entities[j].marginal, times[j]);

    QuadratureRule rq = endpoint_regularized(q);
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < rq.size(); ++i) {
        auto v = rq.nodes.col(i);
        double dens = 1.0;
        for (int j = 0; j < m.size(); ++j)
            if (is_def[j]) dens *= link_chain_density(m.entities[j], pdef[j], v);
        double surv = 1.0;
        for (int j = 0; j < m.size(); ++j)
            if (!is_def[j]) surv *= conditional_default_prob_u(m.entities[j], psurv[j], v);
        num += rq.weights[i] * dens * surv;
        den += rq.weights[i] * dens;
    }
    if (den < 1e-300)
        throw numeric_error("conditional_given_defaults: degenerate conditioning event");
    return std::min(1.0, std::max(0.0, num / den));
}

} // namespace fcl
