#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fcl/quadrature.hpp"
#include "fcl/special.hpp"

using namespace fcl;

TEST_CASE("normal cdf reference values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
    CHECK(normal_cdf(-1.96) == doctest::Approx(0.024997895148220435).epsilon(1e-12));
    CHECK(normal_cdf(5.0) + normal_cdf(-5.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("normal quantile inverts the cdf") {
    for (double p : {1e-10, 1e-4, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-6}) {
        double x = normal_quantile(p);
        CHECK(normal_cdf(x) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("regularized incomplete beta") {
    // I_x(1,1) = x; I_x(a,b) + I_{1-x}(b,a) = 1.
    CHECK(reg_inc_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(reg_inc_beta(2.5, 3.5, 0.42) + reg_inc_beta(3.5, 2.5, 0.58) ==
          doctest::Approx(1.0).epsilon(1e-13));
    // I_x(2,1) = x^2.
    CHECK(reg_inc_beta(2.0, 1.0, 0.7) == doctest::Approx(0.49).epsilon(1e-13));
}

TEST_CASE("student t cdf and quantile") {
    // nu=1 is Cauchy: F(x) = 1/2 + atan(x)/pi.
    CHECK(t_cdf(1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-13));
    CHECK(t_cdf(0.0, 7.0) == doctest::Approx(0.5).epsilon(1e-14));
    for (double p : {0.01, 0.2, 0.5, 0.9, 0.999})
        CHECK(t_cdf(t_quantile(p, 4.0), 4.0) == doctest::Approx(p).epsilon(1e-11));
    // Large nu approaches the normal law.
    CHECK(t_cdf(1.3, 1e7) == doctest::Approx(normal_cdf(1.3)).epsilon(1e-7));
}

TEST_CASE("bivariate normal cdf") {
    // rho=0 factorizes.
    CHECK(bvn_cdf(0.3, -0.4, 0.0) ==
          doctest::Approx(normal_cdf(0.3) * normal_cdf(-0.4)).epsilon(1e-14));
    // Sheppard's identity at the origin: P = 1/4 + asin(rho)/(2 pi).
    for (double rho : {-0.9, -0.5, 0.25, 0.6, 0.95})
        CHECK(bvn_cdf(0.0, 0.0, rho) ==
              doctest::Approx(0.25 + std::asin(rho) / (2.0 * pi)).epsilon(1e-13));
    // Margin recovery for large second argument.
    CHECK(bvn_cdf(0.7, 8.0, 0.5) == doctest::Approx(normal_cdf(0.7)).epsilon(1e-12));
    // Quadrature oracle: integrate Phi((k - rho x)/sqrt(1-rho^2)) phi(x) up to h.
    double h = 0.4, k = -0.3, rho = 0.65;
    QuadratureRule q = gauss_legendre_rule(200, 1);
    double lo = -9.0, acc = 0.0;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        double x = lo + (h - lo) * q.nodes(0, i);
        acc += q.weights[i] * (h - lo) * normal_pdf(x) *
               normal_cdf((k - rho * x) / std::sqrt(1.0 - rho * rho));
    }
    CHECK(bvn_cdf(h, k, rho) == doctest::Approx(acc).epsilon(1e-11));
}

TEST_CASE("bivariate t cdf") {
    // Elliptical identity at the origin holds for every nu.
    for (double rho : {-0.6, 0.0, 0.3, 0.8})
        CHECK(bvt_cdf(0.0, 0.0, rho, 5.0) ==
              doctest::Approx(0.25 + std::asin(rho) / (2.0 * pi)).epsilon(1e-10));
    // Margin recovery.
    CHECK(bvt_cdf(0.9, 60.0, 0.4, 6.0) == doctest::Approx(t_cdf(0.9, 6.0)).epsilon(1e-9));
    // Large nu approaches the bivariate normal.
    CHECK(bvt_cdf(0.5, -0.2, 0.45, 1e6) ==
          doctest::Approx(bvn_cdf(0.5, -0.2, 0.45)).epsilon(1e-5));
}
