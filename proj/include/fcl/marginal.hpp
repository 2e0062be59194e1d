#pragma once

// Marginal default curves p_{j,t}.

#include <variant>
#include <vector>
#include <utility>
#include <cmath>

#include "fcl/errors.hpp"

namespace fcl {

struct ConstantIntensity {
    double lambda = 0.0;  // 1/year
};

// p_t = 1 - exp(-lambda t / (1 - R)) with R the expected recovery fraction.
struct SpreadImplied {
    double lambda = 0.0;
    double recovery = 0.0;
};

// Piecewise-linear in t through (0,0) and the given knots; constant after the
// last knot. Knots must be increasing in time with nondecreasing values in [0,1).
struct PiecewiseCurve {
    std::vector<std::pair<double, double>> knots;
};

using MarginalCurve = std::variant<ConstantIntensity, SpreadImplied, PiecewiseCurve>;

inline void validate(const MarginalCurve& m) {
    if (const auto* ci = std::get_if<ConstantIntensity>(&m)) {
        if (ci->lambda < 0.0) throw std::domain_error("marginal: lambda must be >= 0");
    } else if (const auto* si = std::get_if<SpreadImplied>(&m)) {
        if (si->lambda < 0.0) throw std::domain_error("marginal: lambda must be >= 0");
        if (!(si->recovery >= 0.0 && si->recovery < 1.0))
            throw std::domain_error("marginal: recovery must lie in [0,1)");
    } else {
        const auto& pw = std::get<PiecewiseCurve>(m);
        double pt = 0.0, pp = 0.0;
        for (const auto& [t, p] : pw.knots) {
            if (t <= pt) throw std::domain_error("marginal: knot times must be positive and increasing");
            if (p < pp || !(p >= 0.0 && p < 1.0))
                throw std::domain_error("marginal: knot values must be nondecreasing in [0,1)");
            pt = t;
            pp = p;
        }
    }
}

inline double marginal_default_prob(const MarginalCurve& m, double t) {
    if (t < 0.0) throw std::domain_error("marginal_default_prob: t must be >= 0");
    if (const auto* ci = std::get_if<ConstantIntensity>(&m))
        return -std::expm1(-ci->lambda * t);
    if (const auto* si = std::get_if<SpreadImplied>(&m))
        return -std::expm1(-si->lambda * t / (1.0 - si->recovery));
    const auto& pw = std::get<PiecewiseCurve>(m);
    double t0 = 0.0, p0 = 0.0;
    for (const auto& [tk, pk] : pw.knots) {
        if (t <= tk) return p0 + (pk - p0) * (t - t0) / (tk - t0);
        t0 = tk;
        p0 = pk;
    }
    return p0;
}

} // namespace fcl
