#include "fcl/calibrate.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

#include "fcl/rng.hpp"

namespace fcl {

namespace {

bool verbose_logging() {
    const char* lvl = std::getenv("COPULA_LOSS_LOG");
    return lvl != nullptr && (std::string(lvl) == "debug" || std::string(lvl) == "info");
}

} // namespace

std::vector<double> model_upfronts(const CalibrationProblem& problem,
                                   const Eigen::VectorXd& theta, const QuoteSet& quotes,
                                   const QuadratureRule& q) {
    problem.validate();
    quotes.validate();
    Portfolio pf = problem.build(theta);
    pf.validate();

    double steps = quotes.maturity / problem.dt;
    int n = static_cast<int>(std::llround(steps));
    if (n < 1 || std::fabs(steps - n) > 1e-6)
        throw config_error("calibration: dt must divide the maturity");

    // The loss distribution per grid time is tranche-independent: compute it
    // once and reuse it for every quoted tranche.
    std::vector<LossDistribution> dists(static_cast<size_t>(n));
    for (int k = 1; k <= n; ++k) dists[k - 1] = loss_pmf(pf, k * problem.dt, q);

    std::vector<double> dates = quarterly_dates(quotes.maturity);
    std::vector<double> out;
    for (const auto& tq : quotes.quotes) {
        TrancheContract c{{tq.attach, tq.detach}, tq.spread, dates, quotes.maturity,
                          problem.dt};
        c.validate();
        TrancheLossCurve etl;
        etl.dt = problem.dt;
        etl.etl.resize(static_cast<size_t>(n) + 1);
        etl.etl[0] = 0.0;
        for (int k = 1; k <= n; ++k)
            etl.etl[k] = tranche_pmf(dists[k - 1], c.tranche).expected_loss();
        out.push_back((protection_leg(c, etl, problem.curve) -
                       premium_leg(c, etl, problem.curve)) /
                      c.tranche.width());
    }
    return out;
}

double objective(const CalibrationProblem& problem, const Eigen::VectorXd& theta,
                 const QuoteSet& quotes, const QuadratureRule& q) {
    try {
        std::vector<double> model = model_upfronts(problem, theta, quotes, q);
        double s = 0.0;
        for (size_t i = 0; i < model.size(); ++i) {
            double diff = quotes.quotes[i].upfront_mid - model[i];
            double w = problem.width_weighting
                           ? std::pow(quotes.quotes[i].detach - quotes.quotes[i].attach, 2)
                           : 1.0;
            s += w * diff * diff;
        }
        return s;
    } catch (const std::exception& e) {
        if (verbose_logging())
            std::fprintf(stderr, "[fcl] objective failed, +inf sentinel: %s\n", e.what());
        return std::numeric_limits<double>::infinity();
    }
}

Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x0, int max_iter, double ftol,
                            double step) {
    const int n = static_cast<int>(x0.size());
    std::vector<Eigen::VectorXd> x(n + 1, x0);
    std::vector<double> fx(n + 1);
    for (int i = 1; i <= n; ++i) x[i][i - 1] += step;
    for (int i = 0; i <= n; ++i) fx[i] = f(x[i]);

    auto order = [&] {
        for (int i = 1; i <= n; ++i)
            for (int j = i; j > 0 && fx[j] < fx[j - 1]; --j) {
                std::swap(fx[j], fx[j - 1]);
                std::swap(x[j], x[j - 1]);
            }
    };
    order();

    for (int it = 0; it < max_iter; ++it) {
        if (std::fabs(fx[n] - fx[0]) <= ftol * (1.0 + std::fabs(fx[0]))) break;
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) centroid += x[i];
        centroid /= n;

        Eigen::VectorXd xr = centroid + (centroid - x[n]);
        double fr = f(xr);
        if (fr < fx[0]) {
            Eigen::VectorXd xe = centroid + 2.0 * (centroid - x[n]);
            double fe = f(xe);
            if (fe < fr) { x[n] = xe; fx[n] = fe; } else { x[n] = xr; fx[n] = fr; }
        } else if (fr < fx[n - 1]) {
            x[n] = xr;
            fx[n] = fr;
        } else {
            Eigen::VectorXd xc = fr < fx[n]
                                     ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                     : Eigen::VectorXd(centroid - 0.5 * (centroid - x[n]));
            double fc = f(xc);
            if (fc < std::min(fr, fx[n])) {
                x[n] = xc;
                fx[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    x[i] = x[0] + 0.5 * (x[i] - x[0]);
                    fx[i] = f(x[i]);
                }
            }
        }
        order();
    }
    return x[0];
}

namespace {

Eigen::VectorXd to_box(const Eigen::VectorXd& y, const Eigen::VectorXd& lo,
                       const Eigen::VectorXd& hi) {
    Eigen::VectorXd x(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
        x[i] = lo[i] + (hi[i] - lo[i]) / (1.0 + std::exp(-y[i]));
    return x;
}

Eigen::VectorXd from_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                         const Eigen::VectorXd& hi) {
    Eigen::VectorXd y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double z = (x[i] - lo[i]) / (hi[i] - lo[i]);
        z = std::min(1.0 - 1e-9, std::max(1e-9, z));
        y[i] = std::log(z / (1.0 - z));
    }
    return y;
}

} // namespace

CalibrationResult calibrate(const CalibrationProblem& problem, const QuoteSet& quotes,
                            const QuadratureRule& q, std::uint64_t seed,
                            const DeConfig& de) {
    problem.validate();
    quotes.validate();
    const int dim = static_cast<int>(problem.lower.size());
    const int np = std::max(4, de.pop_mult * dim);
    auto eval = [&](const Eigen::VectorXd& th) { return objective(problem, th, quotes, q); };

    // Stage 1: differential evolution (rand/1/bin) over the box.
    SplitMix64 rng = split_stream(seed, 0);
    std::vector<Eigen::VectorXd> pop(np);
    std::vector<double> fit(np);
    for (int i = 0; i < np; ++i) {
        pop[i].resize(dim);
        for (int k = 0; k < dim; ++k)
            pop[i][k] = problem.lower[k] +
                        (problem.upper[k] - problem.lower[k]) * rng.uniform();
        fit[i] = eval(pop[i]);
    }
    int iterations = 0;
    Eigen::VectorXd trial(dim);
    for (int gen = 0; gen < de.generations; ++gen) {
        ++iterations;
        for (int i = 0; i < np; ++i) {
            int r1, r2, r3;
            do { r1 = static_cast<int>(rng.below(np)); } while (r1 == i);
            do { r2 = static_cast<int>(rng.below(np)); } while (r2 == i || r2 == r1);
            do { r3 = static_cast<int>(rng.below(np)); } while (r3 == i || r3 == r1 || r3 == r2);
            int jrand = static_cast<int>(rng.below(dim));
            for (int k = 0; k < dim; ++k) {
                if (k == jrand || rng.uniform() < de.cr) {
                    double v = pop[r1][k] + de.f * (pop[r2][k] - pop[r3][k]);
                    trial[k] = std::min(problem.upper[k], std::max(problem.lower[k], v));
                } else {
                    trial[k] = pop[i][k];
                }
            }
            double ft = eval(trial);
            if (ft <= fit[i]) {
                pop[i] = trial;
                fit[i] = ft;
            }
        }
        if (*std::min_element(fit.begin(), fit.end()) < de.tol) break;
    }
    int best = static_cast<int>(std::min_element(fit.begin(), fit.end()) - fit.begin());
    if (!std::isfinite(fit[best]))
        throw numeric_error("calibration: every candidate was infeasible");

    // Stage 2: Nelder-Mead under the logit box transform.
    auto g = [&](const Eigen::VectorXd& y) {
        return eval(to_box(y, problem.lower, problem.upper));
    };
    Eigen::VectorXd y = nelder_mead(g, from_box(pop[best], problem.lower, problem.upper));
    Eigen::VectorXd refined = to_box(y, problem.lower, problem.upper);
    double frefined = eval(refined);

    CalibrationResult res;
    res.seed = seed;
    res.iterations = iterations;
    if (frefined <= fit[best]) {
        res.theta = refined;
        res.objective = frefined;
    } else {
        res.theta = pop[best];
        res.objective = fit[best];
    }
    std::vector<double> model = model_upfronts(problem, res.theta, quotes, q);
    for (size_t i = 0; i < model.size(); ++i)
        res.per_tranche_error_bp.push_back(
            1e4 * std::fabs(quotes.quotes[i].upfront_mid - model[i]));
    return res;
}

Copula gaussian_mixture_template(double w, double rho1, double rho2) {
    if (!(w >= 0.0 && w <= 1.0))
        throw std::domain_error("gaussian_mixture_template: w must lie in [0,1]");
    return stochastic_correlation_copula(rho1, rho2, w);
}

RecoveryFit fit_recovery_mle(const std::vector<double>& recoveries, int bins, int n) {
    if (recoveries.empty()) throw std::domain_error("fit_recovery_mle: empty input");
    if (bins < 2) throw std::domain_error("fit_recovery_mle: need at least 2 bins");
    if (n < bins - 1) throw config_error("fit_recovery_mle: need n >= bins - 1");

    // Right-closed bins ((k)/bins, (k+1)/bins]; zero goes to the bottom bin.
    std::vector<long> counts(static_cast<size_t>(bins), 0);
    for (double r : recoveries) {
        if (!(r >= 0.0 && r <= 1.0))
            throw std::domain_error("fit_recovery_mle: recoveries must lie in [0,1]");
        int k = r <= 0.0 ? 0 : static_cast<int>(std::ceil(r * bins)) - 1;
        ++counts[static_cast<size_t>(std::min(bins - 1, std::max(0, k)))];
    }
    int occupied = 0;
    for (long c : counts)
        if (c > 0) ++occupied;
    if (occupied < 2)
        throw data_error("fit_recovery_mle: degenerate data, all recoveries in one bin");

    auto nll = [&](const Eigen::VectorXd& lp) {
        double a = std::exp(lp[0]), b = std::exp(lp[1]);
        if (!(a > 0.0) || !(b > 0.0) || a > 1e6 || b > 1e6)
            return std::numeric_limits<double>::infinity();
        double s = 0.0;
        for (int k = 0; k < bins; ++k)
            if (counts[static_cast<size_t>(k)] > 0)
                s -= counts[static_cast<size_t>(k)] * std::log(bb_pmf(a, b, n, k));
        return s;
    };
    Eigen::VectorXd lp = nelder_mead(nll, Eigen::VectorXd::Zero(2), 1000, 1e-12, 0.5);

    RecoveryFit fit;
    fit.alpha = std::exp(lp[0]);
    fit.beta = std::exp(lp[1]);
    double ab = fit.alpha + fit.beta;
    fit.mean = fit.alpha / ab;
    double var_z = n * fit.alpha * fit.beta * (ab + n) / (ab * ab * (ab + 1.0));
    fit.sd = std::sqrt(var_z) / n;
    return fit;
}

} // namespace fcl
