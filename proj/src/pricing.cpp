#include "fcl/pricing.hpp"

#include <cmath>

namespace fcl {

double DiscountCurve::discount(double t) const {
    if (t < 0.0) throw std::domain_error("discount: t must be >= 0");
    switch (kind) {
        case Kind::Zero:
            return 1.0;
        case Kind::Flat:
            return std::exp(-rate * t);
        case Kind::Table:
            break;
    }
    if (knots.empty()) return 1.0;
    double t0 = 0.0, lb0 = 0.0;  // previous knot in (t, log B) space
    for (const auto& [tk, bk] : knots) {
        double lbk = std::log(bk);
        if (t <= tk) return std::exp(lb0 + (lbk - lb0) * (t - t0) / (tk - t0));
        t0 = tk;
        lb0 = lbk;
    }
    // Beyond the last knot: extrapolate at the last forward rate.
    const auto& [tn, bn] = knots.back();
    double fwd = knots.size() > 1
                     ? (std::log(knots[knots.size() - 2].second) - std::log(bn)) /
                           (tn - knots[knots.size() - 2].first)
                     : -std::log(bn) / tn;
    return bn * std::exp(-fwd * (t - tn));
}

void TrancheContract::validate() const {
    tranche.validate();
    if (spread < 0.0) throw config_error("contract: spread must be >= 0");
    if (!(dt > 0.0)) throw config_error("contract: dt must be positive");
    if (payment_dates.empty()) throw config_error("contract: needs payment dates");
    double prev = 0.0;
    for (double tj : payment_dates) {
        if (!(tj > prev)) throw config_error("contract: payment dates must be increasing");
        double steps = tj / dt;
        if (std::fabs(steps - std::llround(steps)) > 1e-6)
            throw config_error("contract: payment date " + std::to_string(tj) +
                               " is not on the dt pricing grid");
        prev = tj;
    }
    if (std::fabs(payment_dates.back() - maturity) > 1e-9)
        throw config_error("contract: last payment date must equal the maturity");
}

std::vector<double> quarterly_dates(double maturity) {
    if (!(maturity > 0.0)) throw config_error("contract: maturity must be positive");
    int n = static_cast<int>(std::llround(maturity * 4.0));
    if (n < 1 || std::fabs(n * 0.25 - maturity) > 1e-9)
        throw config_error("contract: maturity must be a whole number of quarters");
    std::vector<double> dates(n);
    for (int j = 0; j < n; ++j) dates[j] = 0.25 * (j + 1);
    dates.back() = maturity;
    return dates;
}

double expected_tranche_loss(const Portfolio& p, const TrancheSpec& tr, double t,
                             const QuadratureRule& q) {
    return tranche_pmf(loss_pmf(p, t, q), tr).expected_loss();
}

TrancheLossCurve expected_tranche_loss_curve(const TrancheContract& c, const Portfolio& p,
                                             const QuadratureRule& q) {
    c.validate();
    double steps = c.maturity / c.dt;
    int n = static_cast<int>(std::llround(steps));
    if (n < 1 || std::fabs(steps - n) > 1e-6)
        throw config_error("contract: dt must divide the maturity");
    TrancheLossCurve out;
    out.dt = c.dt;
    out.etl.resize(static_cast<size_t>(n) + 1);
    out.etl[0] = 0.0;
    for (int k = 1; k <= n; ++k)
        out.etl[k] = expected_tranche_loss(p, c.tranche, k * c.dt, q);
    return out;
}

double premium_leg(const TrancheContract& c, const TrancheLossCurve& etl,
                   const DiscountCurve& curve) {
    if (c.spread == 0.0) return 0.0;
    const double width = c.tranche.width();
    double value = 0.0;
    double prev = 0.0;
    for (double tj : c.payment_dates) {
        // Outstanding notional integrated over (T_{j-1}, T_j] on the dt grid.
        int k0 = static_cast<int>(std::llround(prev / c.dt));
        int k1 = static_cast<int>(std::llround(tj / c.dt));
        double lost = 0.0;
        for (int k = k0 + 1; k <= k1; ++k) lost += c.dt * etl.at_step(k);
        value += curve.discount(tj) * ((tj - prev) * width - lost);
        prev = tj;
    }
    return c.spread * value;
}

double protection_leg(const TrancheContract& c, const TrancheLossCurve& etl,
                      const DiscountCurve& curve) {
    const int n = static_cast<int>(etl.etl.size()) - 1;
    double value = 0.0;
    for (int k = 1; k <= n; ++k)
        value += curve.discount((k - 0.5) * c.dt) * (etl.at_step(k) - etl.at_step(k - 1));
    return value;
}

double premium_leg(const TrancheContract& c, const Portfolio& p, const DiscountCurve& curve,
                   const QuadratureRule& q) {
    return premium_leg(c, expected_tranche_loss_curve(c, p, q), curve);
}

double protection_leg(const TrancheContract& c, const Portfolio& p, const DiscountCurve& curve,
                      const QuadratureRule& q) {
    return protection_leg(c, expected_tranche_loss_curve(c, p, q), curve);
}

double upfront(const TrancheContract& c, const Portfolio& p, const DiscountCurve& curve,
               const QuadratureRule& q) {
    TrancheLossCurve etl = expected_tranche_loss_curve(c, p, q);
    return (protection_leg(c, etl, curve) - premium_leg(c, etl, curve)) / c.tranche.width();
}

} // namespace fcl
