#pragma once

// Gauss-Legendre quadrature on the unit hypercube, product rule for d > 1.

#include <Eigen/Dense>
#include <cmath>

#include "fcl/errors.hpp"

namespace fcl {

struct QuadratureRule {
    int n = 0;  // nodes per dimension
    int d = 0;
    Eigen::MatrixXd nodes;    // d x (n^d), columns are points in (0,1)^d
    Eigen::VectorXd weights;  // n^d, positive, summing to 1

    Eigen::Index size() const { return weights.size(); }
};

namespace detail {

// Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
inline void legendre_nodes(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
    x.resize(n);
    w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double z1 = z;
            z = z1 - p0 / pp;
            if (std::fabs(z - z1) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

} // namespace detail

inline QuadratureRule gauss_legendre_rule(int n, int d) {
    if (n < 1 || d < 1) throw std::domain_error("gauss_legendre_rule: n and d must be >= 1");
    double count_d = std::pow(static_cast<double>(n), d);
    if (count_d > 1e8) throw config_error("gauss_legendre_rule: grid exceeds 1e8 points");
    Eigen::VectorXd x1, w1;
    detail::legendre_nodes(n, x1, w1);
    // Map [-1,1] -> (0,1).
    x1 = (x1.array() + 1.0) / 2.0;
    w1 /= 2.0;

    const Eigen::Index count = static_cast<Eigen::Index>(count_d + 0.5);
    QuadratureRule q;
    q.n = n;
    q.d = d;
    q.nodes.resize(d, count);
    q.weights.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        Eigen::Index rem = i;
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
            Eigen::Index idx = rem % n;
            rem /= n;
            q.nodes(k, i) = x1[idx];
            w *= w1[idx];
        }
        q.weights[i] = w;
    }
    return q;
}

// Endpoint-regularized view of a rule: substitutes v = s(x) with the
// smootherstep map s(x) = x^3 (10 - 15x + 6x^2) in each dimension.  Conditional
// default probabilities of Gaussian-type links behave like v^kappa near the
// endpoints with small kappa, which stalls plain Gauss-Legendre; the cubic
// node clustering restores fast convergence.  The Jacobian s'(x) = 30x^2(1-x)^2
// is a degree-4 polynomial, so weight normalization is preserved exactly for
// n >= 3.
inline QuadratureRule endpoint_regularized(const QuadratureRule& q) {
    QuadratureRule out = q;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        double jac = 1.0;
        for (int k = 0; k < q.d; ++k) {
            double x = q.nodes(k, i);
            out.nodes(k, i) = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
            jac *= 30.0 * x * x * (1.0 - x) * (1.0 - x);
        }
        out.weights[i] = q.weights[i] * jac;
    }
    return out;
}

} // namespace fcl
