#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "fcl/engine.hpp"
#include "fcl/oracle.hpp"
#include "fcl/rng.hpp"

using namespace fcl;

namespace {

using Cplx = std::complex<double>;

Portfolio homogeneous(int n, const Copula& link, double lambda, const LossLaw& law,
                      double delta = 1.0) {
    Portfolio pf;
    pf.delta = delta;
    pf.model.d = 1;
    for (int j = 0; j < n; ++j) {
        pf.model.entities.push_back({{link}, ConstantIntensity{lambda}});
        pf.laws.push_back(law);
    }
    return pf;
}

double max_abs_diff(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
    REQUIRE(a.size() == b.size());
    return (a - b).abs().maxCoeff();
}

Cplx pmf_cf(const Eigen::ArrayXd& pmf, double u) {
    Cplx s = 0.0;
    for (Eigen::Index k = 0; k < pmf.size(); ++k) s += pmf[k] * std::polar(1.0, u * k);
    return s;
}

double binom_pmf(int n, double p, int k) {
    double lchoose =
        std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    return std::exp(lchoose + k * std::log(p) + (n - k) * std::log1p(-p));
}

} // namespace

TEST_CASE("characteristic function basics") {
    Portfolio pf;
    pf.model.d = 1;
    pf.model.entities.push_back({{Copula(independence_copula())}, PiecewiseCurve{{{1.0, 0.5}}}});
    pf.laws.push_back(ConstantLoss{1});
    QuadratureRule q = gauss_legendre_rule(64, 1);

    CHECK(std::abs(loss_cf(pf, 1.0, 0.0, q) - 1.0) < 1e-12);
    for (double u : {0.7, 2.0, 3.1}) {
        Cplx expect = 0.5 + 0.5 * std::polar(1.0, u);
        CHECK(std::abs(loss_cf(pf, 1.0, u, q) - expect) < 1e-12);
        CHECK(std::abs(loss_cf(pf, 1.0, u, q)) <= 1.0 + 1e-10);
    }
}

TEST_CASE("characteristic function matches the brute-force oracle") {
    Portfolio pf = homogeneous(5, Copula(gaussian_copula(0.25)), 0.05, ConstantLoss{1});
    QuadratureRule q = gauss_legendre_rule(64, 1);
    LossDistribution brute = brute_force_pmf(pf, 5.0, q);
    for (double u : {0.3, 1.1, 2.9})
        CHECK(std::abs(loss_cf(pf, 5.0, u, q) - pmf_cf(brute.pmf, u)) < 1e-10);
}

TEST_CASE("single-name Bernoulli pmf") {
    Portfolio pf;
    pf.model.d = 1;
    pf.model.entities.push_back({{Copula(gaussian_copula(0.4))}, PiecewiseCurve{{{1.0, 0.5}}}});
    pf.laws.push_back(ConstantLoss{1});
    QuadratureRule q = gauss_legendre_rule(64, 1);
    LossDistribution ld = loss_pmf(pf, 1.0, q);
    CHECK(ld.pmf.size() == 2);
    CHECK(ld.pmf[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(ld.pmf[1] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("independent defaults recover the binomial distribution") {
    Portfolio pf;
    pf.model.d = 1;
    for (int j = 0; j < 10; ++j) {
        pf.model.entities.push_back(
            {{Copula(independence_copula())}, PiecewiseCurve{{{1.0, 0.1}}}});
        pf.laws.push_back(ConstantLoss{1});
    }
    QuadratureRule q = gauss_legendre_rule(64, 1);
    LossDistribution ld = loss_pmf(pf, 1.0, q);
    for (int k = 0; k <= 10; ++k)
        CHECK(std::abs(ld.pmf[k] - binom_pmf(10, 0.1, k)) < 1e-10);
}

TEST_CASE("benchmark portfolio agrees with the recursion oracle") {
    Portfolio pf = homogeneous(125, Copula(gaussian_copula(0.25)), 0.05, ConstantLoss{1});
    QuadratureRule q = gauss_legendre_rule(64, 1);
    LossDistribution dft = loss_pmf(pf, 5.0, q, CfInversion::Fft);
    LossDistribution rec = recursive_pmf(pf, 5.0, q);
    CHECK(max_abs_diff(dft.pmf, rec.pmf) < 1e-9);
}

TEST_CASE("direct DFT and FFT inversion agree") {
    Portfolio pf = homogeneous(37, Copula(archimedean_copula(Family::Clayton, 3.0)), 0.07,
                               linear_bb(1.0, 1.0, 1.0, 1.0, LossGrid{1, 0, 2}));
    QuadratureRule q = gauss_legendre_rule(32, 1);
    LossDistribution a = loss_pmf(pf, 4.0, q, CfInversion::Dft);
    LossDistribution b = loss_pmf(pf, 4.0, q, CfInversion::Fft);
    CHECK(max_abs_diff(a.pmf, b.pmf) < 1e-10);
}

TEST_CASE("joint law concentrates on the diagonal for unit losses") {
    Portfolio pf = homogeneous(12, Copula(gaussian_copula(0.3)), 0.06, ConstantLoss{1});
    QuadratureRule q = gauss_legendre_rule(64, 1);
    JointNLDistribution joint = joint_nl_pmf(pf, 5.0, q);
    for (int n = 0; n <= 12; ++n)
        for (int k = 0; k <= 12; ++k)
            if (k != n) CHECK(std::abs(joint.pmf(n, k)) < 1e-10);
    LossDistribution ld = loss_pmf(pf, 5.0, q);
    Eigen::VectorXd lm = joint.loss_marginal();
    for (int k = 0; k <= 12; ++k) CHECK(std::abs(lm[k] - ld.pmf[k]) < 1e-10);
}

TEST_CASE("homogeneous v-independent losses match the conditioning shortcut") {
    // P[N=n, L=k delta] = P[N=n] * P[sum of n iid losses = k].
    LossLaw law = TabulatedLoss{Eigen::Vector3d(0.2, 0.5, 0.3)};
    Portfolio pf = homogeneous(6, Copula(gaussian_copula(0.25)), 0.08, law);
    QuadratureRule q = gauss_legendre_rule(64, 1);
    JointNLDistribution joint = joint_nl_pmf(pf, 5.0, q);

    Portfolio counter = homogeneous(6, Copula(gaussian_copula(0.25)), 0.08, ConstantLoss{1});
    LossDistribution npmf = loss_pmf(counter, 5.0, q);

    Eigen::VectorXd base = Eigen::Vector3d(0.2, 0.5, 0.3);
    Eigen::VectorXd conv = Eigen::VectorXd::Ones(1);  // n = 0
    for (int n = 0; n <= 6; ++n) {
        for (Eigen::Index k = 0; k < joint.pmf.cols(); ++k) {
            double expect = k < conv.size() ? npmf.pmf[n] * conv[k] : 0.0;
            CHECK(std::abs(joint.pmf(n, k) - expect) < 1e-9);
        }
        Eigen::VectorXd next = Eigen::VectorXd::Zero(conv.size() + base.size() - 1);
        for (Eigen::Index i = 0; i < conv.size(); ++i)
            for (Eigen::Index j = 0; j < base.size(); ++j) next[i + j] += conv[i] * base[j];
        conv = next;
    }
}

TEST_CASE("tranche pmf trivial cases") {
    LossDistribution degenerate{1.0, Eigen::ArrayXd::Zero(5)};
    degenerate.pmf[0] = 1.0;
    TrancheDistribution td = tranche_pmf(degenerate, {1.0, 3.0});
    CHECK(td.p_zero == doctest::Approx(1.0));
    CHECK(td.p_full == 0.0);
    CHECK(td.interior.sum() == 0.0);

    // Full-width tranche reproduces the loss pmf.
    Eigen::ArrayXd pmf(4);
    pmf << 0.4, 0.3, 0.2, 0.1;
    LossDistribution ld{1.0, pmf};
    TrancheDistribution full = tranche_pmf(ld, {0.0, 3.0});
    CHECK(full.p_zero == doctest::Approx(0.4));
    CHECK(full.interior.size() == 2);
    CHECK(full.interior[0] == doctest::Approx(0.3));
    CHECK(full.interior[1] == doctest::Approx(0.2));
    CHECK(full.p_full == doctest::Approx(0.1));
    CHECK(full.total_mass() == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(tranche_pmf(ld, {2.0, 2.0}), std::domain_error);
    CHECK_THROWS_AS(tranche_pmf(ld, {-1.0, 2.0}), std::domain_error);
}

TEST_CASE("off-grid attachment points") {
    Eigen::ArrayXd pmf(4);
    pmf << 0.4, 0.3, 0.2, 0.1;
    LossDistribution ld{1.0, pmf};
    TrancheDistribution td = tranche_pmf(ld, {0.5, 2.5});
    CHECK(td.eps_a == doctest::Approx(0.5));
    CHECK(td.p_zero == doctest::Approx(0.4));   // L = 0
    CHECK(td.interior.size() == 2);
    CHECK(td.interior[0] == doctest::Approx(0.3));  // L = 1 -> T = 0.5
    CHECK(td.interior[1] == doctest::Approx(0.2));  // L = 2 -> T = 1.5
    CHECK(td.p_full == doctest::Approx(0.1));       // L = 3 -> full 2.0
    double payoff = 0.0;
    for (int k = 0; k < 4; ++k)
        payoff += std::min(std::max(k - 0.5, 0.0), 2.0) * pmf[k];
    CHECK(td.expected_loss() == doctest::Approx(payoff).epsilon(1e-12));
}

TEST_CASE("tranche expected loss matches the payoff-sum oracle on a large book") {
    Portfolio pf = homogeneous(1000, Copula(gaussian_copula(0.25)), 0.01, ConstantLoss{1});
    QuadratureRule q = gauss_legendre_rule(64, 1);
    LossDistribution ld = loss_pmf(pf, 5.0, q, CfInversion::Fft);
    TrancheSpec tr{100.0, 200.0};
    TrancheDistribution td = tranche_pmf(ld, tr);
    double payoff = 0.0;
    for (Eigen::Index k = 0; k < ld.pmf.size(); ++k)
        payoff += std::min(std::max(k - 100.0, 0.0), 100.0) * ld.pmf[k];
    CHECK(td.expected_loss() == doctest::Approx(payoff).epsilon(1e-10));
    CHECK(td.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("cdo-squared with one full-width tranche is the loss pmf") {
    Portfolio pf = homogeneous(20, Copula(gaussian_copula(0.3)), 0.05, ConstantLoss{1});
    QuadratureRule q = gauss_legendre_rule(64, 1);
    LossDistribution direct = loss_pmf(pf, 5.0, q, CfInversion::Fft);
    LossDistribution sq = cdo2_pmf({{pf, {0.0, 20.0}}}, 5.0, q, true);
    CHECK(max_abs_diff(direct.pmf, sq.pmf) < 1e-9);
}

TEST_CASE("independent-factor cdo-squared is a convolution of tranche pmfs") {
    Portfolio p1 = homogeneous(10, Copula(gaussian_copula(0.3)), 0.08, ConstantLoss{1});
    Portfolio p2 = homogeneous(12, Copula(archimedean_copula(Family::Clayton, 2.0)), 0.05,
                               ConstantLoss{1});
    TrancheSpec t1{2.0, 6.0}, t2{3.0, 8.0};
    QuadratureRule q = gauss_legendre_rule(64, 1);
    LossDistribution sq = cdo2_pmf({{p1, t1}, {p2, t2}}, 5.0, q, false);

    auto units_vector = [&](const Portfolio& pf, const TrancheSpec& tr) {
        TrancheDistribution td = tranche_pmf(loss_pmf(pf, 5.0, q, CfInversion::Fft), tr);
        int w = static_cast<int>(std::llround(td.width));
        Eigen::VectorXd u = Eigen::VectorXd::Zero(w + 1);
        u[0] = td.p_zero;
        u[w] = td.p_full;
        for (Eigen::Index k = 0; k < td.interior.size(); ++k) u[1 + k] += td.interior[k];
        return u;
    };
    Eigen::VectorXd a = units_vector(p1, t1), b = units_vector(p2, t2);
    Eigen::VectorXd conv = Eigen::VectorXd::Zero(a.size() + b.size() - 1);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j) conv[i + j] += a[i] * b[j];
    CHECK(sq.pmf.size() == conv.size());
    for (Eigen::Index k = 0; k < conv.size(); ++k) CHECK(std::abs(sq.pmf[k] - conv[k]) < 1e-9);
}

TEST_CASE("ten-tranche shared-factor book has a large zero-loss atom") {
    std::vector<Cdo2Component> comps;
    for (int k = 0; k < 10; ++k)
        comps.push_back({homogeneous(1000, Copula(gaussian_copula(0.25)), 0.01, ConstantLoss{1}),
                         {100.0, 200.0}});
    QuadratureRule q = gauss_legendre_rule(64, 1);
    LossDistribution sq = cdo2_pmf(comps, 5.0, q, true);
    CHECK(sq.pmf[0] == doctest::Approx(0.91).epsilon(0.01));
}

TEST_CASE("off-grid cdo-squared attachments are rejected") {
    Portfolio pf = homogeneous(10, Copula(gaussian_copula(0.3)), 0.05, ConstantLoss{1});
    QuadratureRule q = gauss_legendre_rule(16, 1);
    CHECK_THROWS_WITH_AS(cdo2_pmf({{pf, {1.5, 4.0}}}, 5.0, q, true),
                         doctest::Contains("a_k mod delta = 0"), std::domain_error);
    CHECK_THROWS_AS(cdo2_pmf({}, 5.0, q, true), config_error);
}

TEST_CASE("tail probability is nondecreasing in the correlation") {
    QuadratureRule q = gauss_legendre_rule(64, 1);
    double prev = -1.0;
    for (double rho : {0.0, 0.25, 0.5, 0.75}) {
        Copula link = rho == 0.0 ? Copula(independence_copula()) : Copula(gaussian_copula(rho));
        Portfolio pf = homogeneous(50, link, 0.05, ConstantLoss{1});
        LossDistribution ld = loss_pmf(pf, 5.0, q, CfInversion::Fft);
        double tail = ld.pmf.tail(ld.pmf.size() - 25).sum();  // P[L >= 0.5 M delta]
        CHECK(tail >= prev);
        prev = tail;
    }
}

TEST_CASE("expected loss is linear for v-independent losses") {
    Portfolio pf;
    pf.model.d = 1;
    std::vector<double> lambdas{0.02, 0.05, 0.11};
    std::vector<LossLaw> laws{ConstantLoss{2},
                              TabulatedLoss{Eigen::Vector3d(0.1, 0.6, 0.3)},
                              linear_bb(1.3, 0.0, 0.8, 0.0, LossGrid{1, 1, 2})};
    for (int j = 0; j < 3; ++j) {
        pf.model.entities.push_back({{Copula(gaussian_copula(0.45))},
                                     ConstantIntensity{lambdas[j]}});
        pf.laws.push_back(laws[j]);
    }
    QuadratureRule q = gauss_legendre_rule(64, 1);
    LossDistribution ld = loss_pmf(pf, 5.0, q);
    double expect = 0.0;
    for (int j = 0; j < 3; ++j) {
        Eigen::VectorXd lp = loss_conditional_pmf(laws[j], Eigen::VectorXd::Constant(1, 0.5));
        double mean = 0.0;
        for (Eigen::Index k = 0; k < lp.size(); ++k) mean += k * lp[k];
        expect += (1.0 - std::exp(-lambdas[j] * 5.0)) * mean;
    }
    CHECK(std::abs(ld.expected_loss() - expect) < 1e-9);
}

TEST_CASE("thirty random portfolios match the recursion oracle") {
    SplitMix64 rng(90210);
    QuadratureRule q = gauss_legendre_rule(32, 1);
    for (int rep = 0; rep < 30; ++rep) {
        int n = 1 + static_cast<int>(rng.below(50));
        Portfolio pf;
        pf.model.d = 1;
        for (int j = 0; j < n; ++j) {
            Copula link = Copula(independence_copula());
            switch (rng.below(5)) {
                case 0: link = Copula(gaussian_copula(0.1 + 0.8 * rng.uniform())); break;
                case 1:
                    link = Copula(archimedean_copula(Family::Clayton, 0.5 + 4.0 * rng.uniform()));
                    break;
                case 2:
                    link = Copula(archimedean_copula(Family::Frank, 1.0 + 5.0 * rng.uniform()));
                    break;
                case 3: link = Copula(student_t_copula(0.5 * rng.uniform(), 5.0)); break;
                default: break;
            }
            pf.model.entities.push_back(
                {{link}, ConstantIntensity{0.01 + 0.15 * rng.uniform()}});
            LossGrid grid{1 + static_cast<int>(rng.below(2)),
                          static_cast<int>(rng.below(2)),
                          1 + static_cast<int>(rng.below(3))};
            pf.laws.push_back(linear_bb(0.5 + rng.uniform(), rng.uniform(),
                                        0.5 + rng.uniform(), rng.uniform(), grid));
        }
        LossDistribution dft = loss_pmf(pf, 5.0, q, CfInversion::Fft);
        LossDistribution rec = recursive_pmf(pf, 5.0, q);
        CHECK(max_abs_diff(dft.pmf, rec.pmf) < 1e-9);
    }
}

TEST_CASE("small heterogeneous portfolios match brute-force enumeration") {
    SplitMix64 rng(5150);
    QuadratureRule q = gauss_legendre_rule(32, 1);
    for (int rep = 0; rep < 5; ++rep) {
        int n = 2 + static_cast<int>(rng.below(7));  // N in [2, 8]
        Portfolio pf;
        pf.model.d = 1;
        for (int j = 0; j < n; ++j) {
            pf.model.entities.push_back(
                {{Copula(gaussian_copula(0.2 + 0.5 * rng.uniform()))},
                 ConstantIntensity{0.02 + 0.2 * rng.uniform()}});
            if (rng.below(2) == 0)
                pf.laws.push_back(ConstantLoss{1 + static_cast<int>(rng.below(2))});
            else
                pf.laws.push_back(TabulatedLoss{Eigen::Vector3d(0.3, 0.4, 0.3)});
        }
        LossDistribution dft = loss_pmf(pf, 5.0, q);
        LossDistribution brute = brute_force_pmf(pf, 5.0, q);
        CHECK(max_abs_diff(dft.pmf, brute.pmf) < 1e-10);
    }
}

TEST_CASE("argument validation") {
    Portfolio pf = homogeneous(3, Copula(gaussian_copula(0.3)), 0.05, ConstantLoss{1});
    QuadratureRule q1 = gauss_legendre_rule(16, 1);
    QuadratureRule q2 = gauss_legendre_rule(8, 2);
    CHECK_THROWS_AS(loss_pmf(pf, 5.0, q2), config_error);
    CHECK_THROWS_AS(loss_pmf(pf, -1.0, q1), std::domain_error);
    CHECK_THROWS_AS(loss_cf(pf, 5.0, 1.0, q2), config_error);
    CHECK_THROWS_AS(joint_nl_pmf(pf, 5.0, q2), config_error);
    Portfolio bad = pf;
    bad.laws.pop_back();
    CHECK_THROWS_AS(loss_pmf(bad, 5.0, q1), config_error);
    bad = pf;
    bad.delta = 0.0;
    CHECK_THROWS_AS(loss_pmf(bad, 5.0, q1), config_error);
}
