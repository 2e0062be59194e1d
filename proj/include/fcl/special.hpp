#pragma once

// Scalar special functions used by the copula layer: normal and Student t
// distributions (univariate and bivariate), regularized incomplete beta,
// and a small adaptive quadrature helper.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <functional>

namespace fcl {

inline constexpr double pi = 3.14159265358979323846;

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi);
}

// Acklam's rational approximation with one Halley refinement; absolute
// accuracy near machine precision on (0,1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::domain_error("normal_quantile: p outside [0,1]");
    }
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley step on Phi(x) - p.
    double e = normal_cdf(x) - p;
    double u = e * std::sqrt(2.0 * pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz).
inline double betacf(double a, double b, double x) {
    const int max_it = 300;
    const double eps = std::numeric_limits<double>::epsilon();
    const double fpmin = std::numeric_limits<double>::min() / eps;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_it; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= eps) break;
    }
    return h;
}

} // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double reg_inc_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw std::domain_error("reg_inc_beta: a,b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double lbt = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    double bt = std::exp(lbt);
    if (x < (a + 1.0) / (a + b + 2.0))
        return bt * detail::betacf(a, b, x) / a;
    return 1.0 - bt * detail::betacf(b, a, 1.0 - x) / b;
}

inline double t_pdf(double x, double nu) {
    double lp = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                0.5 * std::log(nu * pi) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
    return std::exp(lp);
}

inline double t_cdf(double x, double nu) {
    if (nu <= 0.0) throw std::domain_error("t_cdf: nu must be positive");
    if (x == 0.0) return 0.5;
    if (nu >= 1e5) {
        // Edgeworth-type correction to the normal limit; error O(nu^-2).
        double corr = normal_pdf(x) * (x * x * x + x) / (4.0 * nu);
        return std::min(1.0, std::max(0.0, normal_cdf(x) - corr));
    }
    double p = 0.5 * reg_inc_beta(0.5 * nu, 0.5, nu / (nu + x * x));
    return x > 0.0 ? 1.0 - p : p;
}

inline double t_quantile(double p, double nu) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::domain_error("t_quantile: p outside [0,1]");
    }
    if (p == 0.5) return 0.0;
    if (nu == 1.0) return std::tan(pi * (p - 0.5));  // Cauchy
    double q = p < 0.5 ? p : 1.0 - p;  // lower tail

    // Cornish-Fisher expansion around the normal quantile, switching to the
    // power-tail asymptote x ~ -(c/q)^(1/nu) when the expansion is unreliable.
    double u = normal_quantile(q);
    double u2 = u * u;
    double x = u + (u2 + 1.0) * u / (4.0 * nu) +
               ((5.0 * u2 + 16.0) * u2 + 3.0) * u / (96.0 * nu * nu);
    if (nu >= 1e5) return p < 0.5 ? x : -x;  // Cornish-Fisher error O(nu^-3)
    if (nu < 30.0 && q < 1e-3) {
        double tail_c = std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                                 0.5 * std::log(nu * pi)) *
                        std::pow(nu, 0.5 * (nu + 1.0)) / nu;
        x = -std::pow(tail_c / q, 1.0 / nu);
    }

    // Safeguarded Newton: keep a bracket [lo, hi] with F(lo) < q <= F(hi).
    double lo = x, hi = x, step = 1.0 + std::fabs(x);
    while (t_cdf(lo, nu) >= q) { lo -= step; step *= 2.0; }
    step = 1.0 + std::fabs(x);
    while (t_cdf(hi, nu) < q) { hi += step; step *= 2.0; }
    x = std::min(hi, std::max(lo, x));
    for (int it = 0; it < 100; ++it) {
        double f = t_cdf(x, nu) - q;
        if (f < 0.0) lo = x; else hi = x;
        double df = t_pdf(x, nu);
        double xn = df > 0.0 ? x - f / df : x;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);  // bisection fallback
        if (std::fabs(xn - x) <= 1e-14 * (1.0 + std::fabs(x))) { x = xn; break; }
        x = xn;
    }
    return p < 0.5 ? x : -x;
}

// Bivariate standard normal CDF P[X <= x, Y <= y] with correlation rho.
// Genz's modification of the Drezner-Wesolowsky algorithm; absolute error
// below 5e-16.
inline double bvn_cdf(double x, double y, double rho) {
    static const double w6[] = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
    static const double x6[] = {0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
    static const double w12[] = {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                 0.2031674267230659,  0.2334925365383547, 0.2491470458134029};
    static const double x12[] = {0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                                 0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
    static const double w20[] = {0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                                 0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                                 0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
                                 0.1527533871307259};
    static const double x20[] = {0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
                                 0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
                                 0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
                                 0.07652652113349733};
    const double* w;
    const double* xn;
    int ng;
    double ar = std::fabs(rho);
    if (ar < 0.3) { w = w6; xn = x6; ng = 3; }
    else if (ar < 0.75) { w = w12; xn = x12; ng = 6; }
    else { w = w20; xn = x20; ng = 10; }

    double h = -x, k = -y;  // upper-orthant form
    double hk = h * k, bvn = 0.0;
    if (ar < 0.925) {
        double hs = 0.5 * (h * h + k * k);
        double asr = std::asin(rho);
        for (int i = 0; i < ng; ++i) {
            for (int is = -1; is <= 1; is += 2) {
                double sn = std::sin(0.5 * asr * (1.0 + is * xn[i]));
                bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        bvn = bvn * asr / (4.0 * pi) + normal_cdf(-h) * normal_cdf(-k);
    } else {
        if (rho < 0.0) { k = -k; hk = -hk; }
        if (ar < 1.0) {
            double as = (1.0 - rho) * (1.0 + rho);
            double a = std::sqrt(as);
            double bs = (h - k) * (h - k);
            double c = (4.0 - hk) / 8.0;
            double d = (12.0 - hk) / 16.0;
            double asr0 = -(bs / as + hk) / 2.0;
            if (asr0 > -100.0)
                bvn = a * std::exp(asr0) *
                      (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
            if (-hk < 100.0) {
                double b = std::sqrt(bs);
                bvn -= std::exp(-hk / 2.0) * std::sqrt(2.0 * pi) * normal_cdf(-b / a) * b *
                       (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
            }
            a /= 2.0;
            for (int i = 0; i < ng; ++i) {
                for (int is = -1; is <= 1; is += 2) {
                    double xs = a * (1.0 + is * xn[i]);
                    xs = xs * xs;
                    double rs = std::sqrt(1.0 - xs);
                    double asr1 = -(bs / xs + hk) / 2.0;
                    if (asr1 > -100.0)
                        bvn += a * w[i] * std::exp(asr1) *
                               (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                                (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
            bvn = -bvn / (2.0 * pi);
        }
        if (rho > 0.0) bvn += normal_cdf(-std::max(h, k));
        else {
            bvn = -bvn;
            if (k > h) bvn += normal_cdf(k) - normal_cdf(h);
        }
    }
    return std::min(1.0, std::max(0.0, bvn));
}

// Recursive adaptive Simpson quadrature with absolute tolerance.
namespace detail {
inline double simpson_rec(const std::function<double(double)>& f, double a, double b,
                          double fa, double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
} // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int max_depth = 48) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Bivariate Student t CDF P[X <= x, Y <= y], correlation rho, nu > 0 degrees
// of freedom. Integrates the conditional t_{nu+1} distribution over the
// density of Y; the conditioning identity keeps the integrand bounded.
inline double bvt_cdf(double x, double y, double rho, double nu) {
    if (nu <= 0.0) throw std::domain_error("bvt_cdf: nu must be positive");
    if (std::fabs(rho) >= 1.0) throw std::domain_error("bvt_cdf: |rho| must be < 1");
    double py = t_cdf(y, nu);
    if (py <= 1e-15) return 0.0;
    double omr2 = (1.0 - rho) * (1.0 + rho);
    // Substituting p = F_nu(s) bounds the domain; the integrand has finite
    // limits at both endpoints (z -> +-|rho|-dependent constants as s -> -inf).
    auto integrand = [&](double p) {
        if (p <= 0.0) {
            double zlim = rho * std::sqrt((nu + 1.0) / omr2);
            return t_cdf(zlim, nu + 1.0);
        }
        double s = t_quantile(std::min(p, 1.0 - 1e-16), nu);
        double z = (x - rho * s) * std::sqrt((nu + 1.0) / ((nu + s * s) * omr2));
        return t_cdf(z, nu + 1.0);
    };
    return adaptive_simpson(integrand, 0.0, py, 5e-13);
}

} // namespace fcl
