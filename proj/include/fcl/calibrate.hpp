#pragma once

// Calibration of copula parameters to tranche upfront quotes (differential
// evolution + Nelder-Mead refinement under a box transform) and maximum
// likelihood fitting of Beta-binomial recovery parameters.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fcl/pricing.hpp"

namespace fcl {

struct TrancheQuote {
    double attach = 0.0;
    double detach = 0.0;
    double spread = 0.0;       // running spread, decimal per year
    double upfront_mid = 0.0;  // fraction of tranche width
    double upfront_bid = std::numeric_limits<double>::quiet_NaN();
    double upfront_ask = std::numeric_limits<double>::quiet_NaN();
};

struct QuoteSet {
    std::vector<TrancheQuote> quotes;
    double maturity = 5.0;
    double index_spread = 0.0;  // decimal per year
    std::string date;

    void validate() const {
        if (quotes.empty()) throw config_error("quotes: empty quote set");
        if (!(maturity > 0.0)) throw config_error("quotes: maturity must be positive");
        for (const auto& tq : quotes) {
            if (!(tq.attach >= 0.0 && tq.attach < tq.detach))
                throw config_error("quotes: need 0 <= attach < detach");
            if (std::isfinite(tq.upfront_bid) && std::isfinite(tq.upfront_ask) &&
                !(tq.upfront_bid <= tq.upfront_mid && tq.upfront_mid <= tq.upfront_ask))
                throw config_error("quotes: need bid <= mid <= ask");
        }
    }
};

struct CalibrationProblem {
    std::function<Portfolio(const Eigen::VectorXd&)> build;  // theta -> portfolio
    Eigen::VectorXd lower, upper;                            // parameter box
    DiscountCurve curve = DiscountCurve::zero();
    double dt = 0.25;             // pricing grid step used during calibration
    bool width_weighting = false; // weight residuals by (b-a)^2

    void validate() const {
        if (!build) throw config_error("calibration: missing model builder");
        if (lower.size() < 1 || lower.size() != upper.size())
            throw config_error("calibration: needs at least one free parameter");
        if (((upper - lower).array() <= 0.0).any())
            throw config_error("calibration: empty parameter box");
    }
};

struct DeConfig {
    int pop_mult = 15;     // population = pop_mult * dim
    int generations = 200;
    double f = 0.8;        // differential weight
    double cr = 0.9;       // crossover probability
    double tol = 1e-14;    // early stop when the best objective falls below
};

struct CalibrationResult {
    Eigen::VectorXd theta;
    double objective = 0.0;
    std::vector<double> per_tranche_error_bp;
    int iterations = 0;
    std::uint64_t seed = 0;
};

// Model upfronts for every quoted tranche at one parameter point, sharing the
// loss distributions across tranches on the pricing time grid.
std::vector<double> model_upfronts(const CalibrationProblem& problem,
                                   const Eigen::VectorXd& theta, const QuoteSet& quotes,
                                   const QuadratureRule& q);

// Sum of squared upfront errors; +inf sentinel when pricing fails at theta.
double objective(const CalibrationProblem& problem, const Eigen::VectorXd& theta,
                 const QuoteSet& quotes, const QuadratureRule& q);

CalibrationResult calibrate(const CalibrationProblem& problem, const QuoteSet& quotes,
                            const QuadratureRule& q, std::uint64_t seed,
                            const DeConfig& de = {});

// One-factor two-Gaussians mixture link shared by all entities:
// w * Gaussian(rho1) + (1-w) * Gaussian(rho2).
Copula gaussian_mixture_template(double w, double rho1, double rho2);

struct RecoveryFit {
    double alpha = 0.0;
    double beta = 0.0;
    double mean = 0.0;  // alpha / (alpha + beta)
    double sd = 0.0;    // standard deviation of the fitted loss fraction Z/n
};

// Bin-index Beta-binomial MLE: recoveries in [0,1] are assigned right-closed
// bins 0..bins-1 and the likelihood of Beta-binomial(alpha, beta, n) at the
// bin indices is maximized over log(alpha), log(beta).
RecoveryFit fit_recovery_mle(const std::vector<double>& recoveries, int bins, int n);

// Generic Nelder-Mead used by both calibration stages; minimizes f from x0.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x0, int max_iter = 800,
                            double ftol = 1e-13, double step = 0.25);

} // namespace fcl
