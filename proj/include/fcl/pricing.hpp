#pragma once

// Tranche valuation: discount curves, premium and protection legs, and the
// upfront payment balancing them at a fixed running spread.

#include <vector>

#include "fcl/engine.hpp"

namespace fcl {

// B(t): deterministic risk-free discount factor, B(0) = 1, nonincreasing.
struct DiscountCurve {
    enum class Kind { Zero, Flat, Table };

    Kind kind = Kind::Zero;
    double rate = 0.0;
    std::vector<std::pair<double, double>> knots;  // (t, B(t)), log-linear between

    static DiscountCurve zero() { return {}; }

    static DiscountCurve flat(double r) {
        DiscountCurve c;
        c.kind = Kind::Flat;
        c.rate = r;
        return c;
    }

    static DiscountCurve table(std::vector<std::pair<double, double>> k) {
        DiscountCurve c;
        c.kind = Kind::Table;
        c.knots = std::move(k);
        c.validate();
        return c;
    }

    void validate() const {
        if (kind != Kind::Table) return;
        double pt = 0.0, pb = 1.0;
        for (const auto& [t, b] : knots) {
            if (!(t > pt) || !(b > 0.0 && b <= pb))
                throw config_error("discount curve: knots must be increasing in t with "
                                   "B in (0,1] nonincreasing");
            pt = t;
            pb = b;
        }
    }

    double discount(double t) const;
};

struct TrancheContract {
    TrancheSpec tranche;
    double spread = 0.0;                // running spread, decimal per year
    std::vector<double> payment_dates;  // T_1 < ... < T_n = maturity
    double maturity = 0.0;
    double dt = 1.0 / 48.0;             // pricing grid step

    void validate() const;
};

// Quarterly payment schedule ending at the maturity.
std::vector<double> quarterly_dates(double maturity);

double expected_tranche_loss(const Portfolio& p, const TrancheSpec& tr, double t,
                             const QuadratureRule& q);

// Expected tranche loss precomputed on the contract's pricing grid
// (t = 0, dt, 2*dt, ..., maturity); both legs read from this cache.
struct TrancheLossCurve {
    double dt = 0.0;
    std::vector<double> etl;  // etl[k] = E[T_{k dt}]

    double at_step(int k) const { return etl.at(static_cast<size_t>(k)); }
};

TrancheLossCurve expected_tranche_loss_curve(const TrancheContract& c, const Portfolio& p,
                                             const QuadratureRule& q);

double premium_leg(const TrancheContract& c, const Portfolio& p, const DiscountCurve& curve,
                   const QuadratureRule& q);
double protection_leg(const TrancheContract& c, const Portfolio& p, const DiscountCurve& curve,
                      const QuadratureRule& q);

// (V_prot - V_prem) / (b - a); negative when the running spread overpays.
double upfront(const TrancheContract& c, const Portfolio& p, const DiscountCurve& curve,
               const QuadratureRule& q);

// Leg values from a precomputed loss curve (shared by upfront and calibration).
double premium_leg(const TrancheContract& c, const TrancheLossCurve& etl,
                   const DiscountCurve& curve);
double protection_leg(const TrancheContract& c, const TrancheLossCurve& etl,
                      const DiscountCurve& curve);

} // namespace fcl
