#pragma once

// Discrete loss-given-default laws on the delta grid: constant, tabulated,
// and factor-dependent Beta-binomial models.

#include <Eigen/Dense>
#include <complex>
#include <variant>

#include "fcl/errors.hpp"
#include "fcl/special.hpp"

namespace fcl {

// Support {b, a+b, ..., n*a+b} loss units, a subset of {0, ..., m} with
// m = n*a + b.
struct LossGrid {
    int a = 1;
    int b = 0;
    int n = 0;

    int max_units() const { return n * a + b; }

    void validate() const {
        if (n < 0 || b < 0 || (n >= 1 && a < 1))
            throw std::domain_error("loss grid: need n >= 0, b >= 0 and a >= 1 when n >= 1");
    }

    bool operator==(const LossGrid&) const = default;
};

struct ConstantLoss {
    int units = 1;
    bool operator==(const ConstantLoss&) const = default;
};

// Number of loss-unit increments is Beta-binomial(alpha(v), beta(v), n) on the
// grid, with alpha(v) = m1 + m2*(1 - v) and beta(v) = m3 + m4*v evaluated at
// the first factor coordinate.
struct BetaBinomialLoss {
    double m1 = 1.0, m2 = 0.0, m3 = 1.0, m4 = 0.0;
    LossGrid grid;

    double alpha(double v) const { return m1 + m2 * (1.0 - v); }
    double beta(double v) const { return m3 + m4 * v; }
    bool operator==(const BetaBinomialLoss&) const = default;
};

// v-independent PMF over units {0, ..., m}.
struct TabulatedLoss {
    Eigen::VectorXd pmf;
    bool operator==(const TabulatedLoss& o) const {
        return pmf.size() == o.pmf.size() && pmf == o.pmf;
    }
};

using LossLaw = std::variant<ConstantLoss, BetaBinomialLoss, TabulatedLoss>;

inline int loss_max_units(const LossLaw& law) {
    if (const auto* c = std::get_if<ConstantLoss>(&law)) return c->units;
    if (const auto* b = std::get_if<BetaBinomialLoss>(&law)) return b->grid.max_units();
    return static_cast<int>(std::get<TabulatedLoss>(law).pmf.size()) - 1;
}

inline void validate(const LossLaw& law) {
    if (const auto* c = std::get_if<ConstantLoss>(&law)) {
        if (c->units < 0) throw std::domain_error("constant loss: units must be >= 0");
    } else if (const auto* bb = std::get_if<BetaBinomialLoss>(&law)) {
        bb->grid.validate();
        // alpha, beta linear in v: positivity on (0,1) follows from the endpoints.
        if (bb->alpha(0.0) < 0.0 || bb->alpha(1.0) < 0.0 || bb->beta(0.0) < 0.0 ||
            bb->beta(1.0) < 0.0)
            throw config_error("beta-binomial loss: alpha(v), beta(v) must be positive");
    } else {
        const auto& t = std::get<TabulatedLoss>(law);
        if (t.pmf.size() < 1) throw std::domain_error("tabulated loss: empty pmf");
        if ((t.pmf.array() < 0.0).any())
            throw std::domain_error("tabulated loss: negative probability");
        if (std::fabs(t.pmf.sum() - 1.0) > 1e-12)
            throw std::domain_error("tabulated loss: pmf must sum to 1");
    }
}

// P[Z = k] for Z Beta-binomial(alpha, beta, n), evaluated in log space.
inline double bb_pmf(double alpha, double beta, int n, int k) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw config_error("bb_pmf: alpha and beta must be positive");
    if (k < 0 || k > n) throw std::domain_error("bb_pmf: k out of range");
    double lchoose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    return std::exp(lchoose + log_beta(alpha + k, beta + n - k) - log_beta(alpha, beta));
}

// Conditional PMF over units {0, ..., m} given the factor value v.
inline Eigen::VectorXd loss_conditional_pmf(const LossLaw& law,
                                            const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (const auto* c = std::get_if<ConstantLoss>(&law)) {
        Eigen::VectorXd pmf = Eigen::VectorXd::Zero(c->units + 1);
        pmf[c->units] = 1.0;
        return pmf;
    }
    if (const auto* bb = std::get_if<BetaBinomialLoss>(&law)) {
        double v1 = v.size() > 0 ? v[0] : 0.0;
        double a = bb->alpha(v1), b = bb->beta(v1);
        if (!(a > 0.0) || !(b > 0.0))
            throw config_error("beta-binomial loss: nonpositive alpha(v) or beta(v)");
        const auto& g = bb->grid;
        Eigen::VectorXd pmf = Eigen::VectorXd::Zero(g.max_units() + 1);
        for (int k = 0; k <= g.n; ++k) pmf[g.a * k + g.b] = bb_pmf(a, b, g.n, k);
        return pmf;
    }
    return std::get<TabulatedLoss>(law).pmf;
}

// Conditional characteristic function of ell/delta at u.
inline std::complex<double> loss_conditional_cf(const LossLaw& law,
                                                const Eigen::Ref<const Eigen::VectorXd>& v,
                                                double u) {
    Eigen::VectorXd pmf = loss_conditional_pmf(law, v);
    std::complex<double> s = 0.0;
    for (int k = 0; k < pmf.size(); ++k)
        if (pmf[k] != 0.0) s += pmf[k] * std::polar(1.0, u * k);
    return s;
}

// Linear Beta-binomial: alpha(v) = m1 + m2*(1 - v), beta(v) = m3 + m4*v.
// With m3 = m1, m4 = m2, a = 1, b = 0 the unconditional mean loss fraction
// is exactly one half.
inline LossLaw linear_bb(double m1, double m2, double m3, double m4, const LossGrid& grid) {
    if (!(m1 > 0.0) || !(m3 > 0.0) || m2 < 0.0 || m4 < 0.0)
        throw std::domain_error("linear_bb: need m1, m3 > 0 and m2, m4 >= 0");
    grid.validate();
    BetaBinomialLoss law{m1, m2, m3, m4, grid};
    return law;
}

} // namespace fcl
