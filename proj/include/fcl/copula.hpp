#pragma once

// Parametric bivariate copula families and mixtures: CDF, conditional
// distribution (h-function), its inverse, and density.

#include <cmath>
#include <string>
#include <vector>
#include <utility>

#include "fcl/errors.hpp"
#include "fcl/special.hpp"

namespace fcl {

enum class Family { Independence, Gaussian, StudentT, Clayton, Gumbel, Frank, Joe };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::Independence: return "independence";
        case Family::Gaussian: return "gaussian";
        case Family::StudentT: return "student_t";
        case Family::Clayton: return "clayton";
        case Family::Gumbel: return "gumbel";
        case Family::Frank: return "frank";
        case Family::Joe: return "joe";
    }
    return "?";
}

struct CopulaParams {
    Family family = Family::Independence;
    double p1 = 0.0;  // rho (Gaussian, StudentT) or theta (Archimedean)
    double p2 = 0.0;  // nu (StudentT only)

    void validate() const {
        switch (family) {
            case Family::Independence:
                break;
            case Family::Gaussian:
                if (!(p1 > -1.0 && p1 < 1.0))
                    throw std::domain_error("gaussian: rho must lie in (-1,1)");
                break;
            case Family::StudentT:
                if (!(p1 > -1.0 && p1 < 1.0))
                    throw std::domain_error("student_t: rho must lie in (-1,1)");
                if (!(p2 > 0.0)) throw std::domain_error("student_t: nu must be positive");
                break;
            case Family::Clayton:
                if (!(p1 > 0.0)) throw std::domain_error("clayton: theta must be positive");
                break;
            case Family::Gumbel:
                if (!(p1 >= 1.0)) throw std::domain_error("gumbel: theta must be >= 1");
                break;
            case Family::Frank:
                if (p1 == 0.0) throw std::domain_error("frank: theta must be nonzero");
                break;
            case Family::Joe:
                if (!(p1 >= 1.0)) throw std::domain_error("joe: theta must be >= 1");
                break;
        }
    }
};

inline CopulaParams gaussian_copula(double rho) { return {Family::Gaussian, rho, 0.0}; }
inline CopulaParams student_t_copula(double rho, double nu) { return {Family::StudentT, rho, nu}; }
inline CopulaParams archimedean_copula(Family f, double theta) { return {f, theta, 0.0}; }
inline CopulaParams independence_copula() { return {Family::Independence, 0.0, 0.0}; }

namespace detail {

inline void check_uv_cdf(double u, double v) {
    if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0))
        throw std::domain_error("copula cdf: u,v must lie in [0,1]");
}

inline double cdf_single(const CopulaParams& c, double u, double v) {
    if (u <= 0.0 || v <= 0.0) return 0.0;
    if (u >= 1.0) return v;
    if (v >= 1.0) return u;
    double th = c.p1;
    switch (c.family) {
        case Family::Independence:
            return u * v;
        case Family::Gaussian:
            return bvn_cdf(normal_quantile(u), normal_quantile(v), c.p1);
        case Family::StudentT:
            return bvt_cdf(t_quantile(u, c.p2), t_quantile(v, c.p2), c.p1, c.p2);
        case Family::Clayton:
            return std::pow(std::pow(u, -th) + std::pow(v, -th) - 1.0, -1.0 / th);
        case Family::Gumbel: {
            double s = std::pow(-std::log(u), th) + std::pow(-std::log(v), th);
            return std::exp(-std::pow(s, 1.0 / th));
        }
        case Family::Frank: {
            double a = -std::expm1(-th * u), b = -std::expm1(-th * v), d = -std::expm1(-th);
            return -std::log1p(-a * b / d) / th;
        }
        case Family::Joe: {
            double x = std::pow(1.0 - u, th), y = std::pow(1.0 - v, th);
            return 1.0 - std::pow(x + y - x * y, 1.0 / th);
        }
    }
    return 0.0;
}

inline double hfunc_single(const CopulaParams& c, double u, double v) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    double th = c.p1;
    switch (c.family) {
        case Family::Independence:
            return u;
        case Family::Gaussian: {
            double x = normal_quantile(u), y = normal_quantile(v);
            return normal_cdf((x - th * y) / std::sqrt((1.0 - th) * (1.0 + th)));
        }
        case Family::StudentT: {
            double nu = c.p2;
            double x = t_quantile(u, nu), y = t_quantile(v, nu);
            double denom = std::sqrt((1.0 - th) * (1.0 + th) * (nu + y * y) / (nu + 1.0));
            return t_cdf((x - th * y) / denom, nu + 1.0);
        }
        case Family::Clayton: {
            double s = (std::pow(u, -th) + std::pow(v, -th) - 1.0) * std::pow(v, th);
            return std::pow(s, -(1.0 + th) / th);
        }
        case Family::Gumbel: {
            double lu = -std::log(u), lv = -std::log(v);
            double s = std::pow(lu, th) + std::pow(lv, th);
            return std::exp(-std::pow(s, 1.0 / th)) * std::pow(s, 1.0 / th - 1.0) *
                   std::pow(lv, th - 1.0) / v;
        }
        case Family::Frank: {
            double a = -std::expm1(-th * u), b = -std::expm1(-th * v), d = -std::expm1(-th);
            return a * std::exp(-th * v) / (d - a * b);
        }
        case Family::Joe: {
            double x = std::pow(1.0 - u, th), y = std::pow(1.0 - v, th);
            double s = x + y - x * y;
            return std::pow(s, 1.0 / th - 1.0) * std::pow(1.0 - v, th - 1.0) * (1.0 - x);
        }
    }
    return u;
}

inline double density_single(const CopulaParams& c, double u, double v) {
    double th = c.p1;
    switch (c.family) {
        case Family::Independence:
            return 1.0;
        case Family::Gaussian: {
            double x = normal_quantile(u), y = normal_quantile(v);
            double r2 = 1.0 - th * th;
            return std::exp(-(th * th * (x * x + y * y) - 2.0 * th * x * y) / (2.0 * r2)) /
                   std::sqrt(r2);
        }
        case Family::StudentT: {
            double nu = c.p2;
            double x = t_quantile(u, nu), y = t_quantile(v, nu);
            double r2 = 1.0 - th * th;
            double lnum = std::lgamma(0.5 * nu + 1.0) - std::lgamma(0.5 * nu) -
                          std::log(nu * pi) - 0.5 * std::log(r2) -
                          (0.5 * nu + 1.0) *
                              std::log1p((x * x - 2.0 * th * x * y + y * y) / (nu * r2));
            return std::exp(lnum) / (t_pdf(x, nu) * t_pdf(y, nu));
        }
        case Family::Clayton:
            return (1.0 + th) * std::pow(u * v, -1.0 - th) *
                   std::pow(std::pow(u, -th) + std::pow(v, -th) - 1.0, -1.0 / th - 2.0);
        case Family::Gumbel: {
            double lu = -std::log(u), lv = -std::log(v);
            double s = std::pow(lu, th) + std::pow(lv, th);
            double s1t = std::pow(s, 1.0 / th);
            return std::exp(-s1t) * std::pow(lu * lv, th - 1.0) / (u * v) *
                   std::pow(s, 2.0 / th - 2.0) * (1.0 + (th - 1.0) / s1t);
        }
        case Family::Frank: {
            double a = -std::expm1(-th * u), b = -std::expm1(-th * v), d = -std::expm1(-th);
            double den = d - a * b;
            return th * d * std::exp(-th * (u + v)) / (den * den);
        }
        case Family::Joe: {
            double x = std::pow(1.0 - u, th), y = std::pow(1.0 - v, th);
            double s = x + y - x * y;
            return std::pow(1.0 - u, th - 1.0) * std::pow(1.0 - v, th - 1.0) *
                   std::pow(s, 1.0 / th - 2.0) *
                   (th * s + (th - 1.0) * (1.0 - x) * (1.0 - y));
        }
    }
    return 1.0;
}

} // namespace detail

// A bivariate copula, possibly a finite mixture. A single parametric family
// is represented as a one-component mixture with weight 1.
class Copula {
  public:
    struct Component {
        double weight;
        CopulaParams params;
    };

    Copula() : components_{{1.0, CopulaParams{}}} {}

    Copula(const CopulaParams& p) : components_{{1.0, p}} { p.validate(); }  // NOLINT(implicit)

    static Copula mixture(std::vector<Component> comps) {
        if (comps.empty()) throw std::domain_error("mixture: needs at least one component");
        double total = 0.0;
        for (const auto& c : comps) {
            if (!(c.weight > 0.0)) throw std::domain_error("mixture: weights must be positive");
            c.params.validate();
            total += c.weight;
        }
        if (std::fabs(total - 1.0) > 1e-12)
            throw std::domain_error("mixture: weights must sum to 1");
        Copula c;
        c.components_ = std::move(comps);
        return c;
    }

    const std::vector<Component>& components() const { return components_; }
    bool is_mixture() const { return components_.size() > 1; }

    bool operator==(const Copula& o) const {
        if (components_.size() != o.components_.size()) return false;
        for (size_t i = 0; i < components_.size(); ++i) {
            const auto& a = components_[i];
            const auto& b = o.components_[i];
            if (a.weight != b.weight || a.params.family != b.params.family ||
                a.params.p1 != b.params.p1 || a.params.p2 != b.params.p2)
                return false;
        }
        return true;
    }

  private:
    std::vector<Component> components_;
};

inline double copula_cdf(const Copula& c, double u, double v) {
    detail::check_uv_cdf(u, v);
    double s = 0.0;
    for (const auto& k : c.components()) s += k.weight * detail::cdf_single(k.params, u, v);
    return s;
}

// h(u|v) = dC(u,v)/dv, the conditional distribution of U given V = v.
inline double copula_hfunc(const Copula& c, double u, double v) {
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("copula hfunc: u must lie in [0,1]");
    if (!(v > 0.0 && v < 1.0))
        throw std::domain_error("copula hfunc: v must lie in the open interval (0,1)");
    double s = 0.0;
    for (const auto& k : c.components()) s += k.weight * detail::hfunc_single(k.params, u, v);
    return std::min(1.0, std::max(0.0, s));
}

namespace detail {

inline double hinv_single(const CopulaParams& c, double p, double v) {
    double th = c.p1;
    switch (c.family) {
        case Family::Independence:
            return p;
        case Family::Gaussian: {
            double x = normal_quantile(p), y = normal_quantile(v);
            return normal_cdf(std::sqrt((1.0 - th) * (1.0 + th)) * x + th * y);
        }
        case Family::StudentT: {
            double nu = c.p2;
            double y = t_quantile(v, nu);
            double x = t_quantile(p, nu + 1.0);
            double scale = std::sqrt((1.0 - th) * (1.0 + th) * (nu + y * y) / (nu + 1.0));
            return t_cdf(x * scale + th * y, nu);
        }
        case Family::Clayton: {
            double w = (std::pow(p, -th / (1.0 + th)) - 1.0) * std::pow(v, -th) + 1.0;
            return std::pow(w, -1.0 / th);
        }
        case Family::Frank: {
            double b = -std::expm1(-th * v), d = -std::expm1(-th);
            double a = p * d / (std::exp(-th * v) + p * b);
            return -std::log1p(-a) / th;
        }
        default:
            break;  // Gumbel, Joe: no closed form, bisection below
    }
    // Monotone bisection; the bracket width halves every step, so the cap
    // guarantees convergence to machine precision.
    double lo = 0.0, hi = 1.0;
    int it = 0;
    for (; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double h = hfunc_single(c, mid, v);
        if (std::isnan(h))
            throw numeric_error(std::string("copula hinv: h-function NaN for family ") +
                                family_name(c.family));
        if (h < p) lo = mid; else hi = mid;
        if (hi - lo <= 1e-15) break;
    }
    if (hi - lo > 1e-12)
        throw numeric_error("copula hinv: no convergence, residual bracket " +
                            std::to_string(hi - lo));
    return 0.5 * (lo + hi);
}

} // namespace detail

// Inverse of the h-function in u: returns u with h(u|v) = p.
inline double copula_hinv(const Copula& c, double p, double v) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("copula hinv: p must lie in [0,1]");
    if (!(v > 0.0 && v < 1.0))
        throw std::domain_error("copula hinv: v must lie in the open interval (0,1)");
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    if (!c.is_mixture()) return detail::hinv_single(c.components()[0].params, p, v);
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (copula_hfunc(c, mid, v) < p) lo = mid; else hi = mid;
        if (hi - lo <= 1e-15) break;
    }
    return 0.5 * (lo + hi);
}

// Copula density d2C/dudv.
inline double copula_density(const Copula& c, double u, double v) {
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
        throw std::domain_error("copula density: u,v must lie in the open unit square");
    double s = 0.0;
    for (const auto& k : c.components()) s += k.weight * detail::density_single(k.params, u, v);
    if (!std::isfinite(s))
        throw numeric_error("copula density: overflow at extreme parameters");
    return s;
}

// Two-component Gaussian mixture b * C(alpha) + (1-b) * C(beta).
inline Copula stochastic_correlation_copula(double alpha, double beta, double b) {
    if (!(b >= 0.0 && b <= 1.0))
        throw std::domain_error("stochastic_correlation_copula: b must lie in [0,1]");
    if (b == 1.0) return Copula(gaussian_copula(alpha));
    if (b == 0.0) return Copula(gaussian_copula(beta));
    return Copula::mixture({{b, gaussian_copula(alpha)}, {1.0 - b, gaussian_copula(beta)}});
}

} // namespace fcl
