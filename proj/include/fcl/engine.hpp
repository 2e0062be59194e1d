#pragma once

// Exact portfolio loss distributions: characteristic function, DFT inversion,
// joint (defaults, loss) law, tranche law, and CDO-squared law.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "fcl/factor_model.hpp"
#include "fcl/loss_law.hpp"

namespace fcl {

struct Portfolio {
    FactorModel model;
    std::vector<LossLaw> laws;  // one per entity
    double delta = 1.0;

    int size() const { return model.size(); }

    int max_units() const {
        int m = 0;
        for (const auto& law : laws) m += loss_max_units(law);
        return m;
    }

    void validate() const {
        model.validate();
        if (laws.size() != model.entities.size())
            throw config_error("portfolio: one loss law per entity");
        if (!(delta > 0.0)) throw config_error("portfolio: delta must be positive");
        for (const auto& law : laws) fcl::validate(law);
    }
};

struct LossDistribution {
    double delta = 1.0;
    Eigen::ArrayXd pmf;  // indexed by loss units 0..M

    double expected_loss() const {
        double s = 0.0;
        for (Eigen::Index k = 0; k < pmf.size(); ++k) s += k * pmf[k];
        return s * delta;
    }
};

struct JointNLDistribution {
    double delta = 1.0;
    Eigen::MatrixXd pmf;  // (N+1) x (M+1), rows = number of defaults

    Eigen::VectorXd defaults_marginal() const { return pmf.rowwise().sum(); }
    Eigen::VectorXd loss_marginal() const { return pmf.colwise().sum().transpose(); }
};

struct TrancheSpec {
    double attach = 0.0;
    double detach = 0.0;

    double width() const { return detach - attach; }

    void validate() const {
        if (!(attach >= 0.0 && attach < detach))
            throw std::domain_error("tranche: need 0 <= attach < detach");
    }
};

// Tranche loss distribution: atoms at 0 and at the full width b-a, interior
// support {eps_a + k*delta} with eps_a = delta - (a mod delta).
struct TrancheDistribution {
    double delta = 1.0;
    double width = 0.0;
    double eps_a = 0.0;
    double p_zero = 0.0;
    double p_full = 0.0;
    Eigen::ArrayXd interior;  // mass at eps_a + k*delta, k = 0..interior.size()-1

    double total_mass() const { return p_zero + p_full + interior.sum(); }

    double expected_loss() const {
        double s = p_full * width;
        for (Eigen::Index k = 0; k < interior.size(); ++k)
            s += interior[k] * (eps_a + k * delta);
        return s;
    }
};

enum class CfInversion { Dft, Fft };

// Quadrature value of the portfolio-loss characteristic function at u.
std::complex<double> loss_cf(const Portfolio& p, double t, double u, const QuadratureRule& q);

// Inverse DFT of the characteristic function at the M+1 grid frequencies.
LossDistribution loss_pmf(const Portfolio& p, double t, const QuadratureRule& q,
                          CfInversion method = CfInversion::Dft);

// Joint law of (number of defaults, loss) by 2-D inverse DFT.
JointNLDistribution joint_nl_pmf(const Portfolio& p, double t, const QuadratureRule& q);

TrancheDistribution tranche_pmf(const LossDistribution& loss, const TrancheSpec& tr);

struct Cdo2Component {
    Portfolio portfolio;
    TrancheSpec tranche;
};

// Loss law of a portfolio of tranches. With a shared factor all underlying
// portfolios are driven by the same latent value; with independent factors
// each portfolio integrates separately.
LossDistribution cdo2_pmf(const std::vector<Cdo2Component>& components, double t,
                          const QuadratureRule& q, bool shared_factor);

} // namespace fcl
