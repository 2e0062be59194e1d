#pragma once

// Independent cross-checks for the transform engine: recursive conditional
// convolution, brute-force enumeration, Monte Carlo simulation, and a
// DFT-vs-recursion benchmark harness.

#include <cstdint>
#include <string>
#include <vector>

#include "fcl/engine.hpp"

namespace fcl {

struct SimConfig {
    std::int64_t paths = 10000;
    std::uint64_t seed = 0;
    double horizon = 1.0;

    void validate() const {
        if (paths < 1) throw config_error("simulate: paths must be >= 1");
        if (!(horizon >= 0.0)) throw config_error("simulate: horizon must be >= 0");
    }
};

// Aggregated simulation output plus an optional per-path record buffer.
struct SimPath {
    std::int64_t path = 0;
    int defaults = 0;
    int loss_units = 0;
};

struct SimSummary {
    std::int64_t paths = 0;
    double delta = 1.0;
    Eigen::ArrayXd entity_default_freq;   // per-entity empirical P[tau_j <= t]
    double all_default_freq = 0.0;        // empirical P[all entities default by t]
    Eigen::ArrayXd loss_hist;             // empirical pmf of loss units 0..M
    Eigen::ArrayXd defaults_hist;         // empirical pmf of N_t = 0..N
    Eigen::ArrayXd loss_by_defaults;      // empirical E[L_t | N_t = n] (currency), NaN if unseen
    std::vector<SimPath> records;         // filled only when record_paths is set
};

// Conditional convolution P_new(k) = (1-p) P_old(k) + p sum_l P[l units] P_old(k-l),
// entity by entity, mixed over the quadrature nodes.
LossDistribution recursive_pmf(const Portfolio& p, double t, const QuadratureRule& q);

// Exact enumeration over default subsets and loss outcomes; small portfolios only.
LossDistribution brute_force_pmf(const Portfolio& p, double t, const QuadratureRule& q);

// Path simulation. Draw order per path: V (d uniforms), then one W per entity
// in ascending index order, then one loss draw per defaulted entity in
// ascending index order (mixture links consume one extra component draw
// before the conditional-quantile draw). Path streams are splitmix64 with
// state seed + path * golden-gamma, so runs are reproducible and
// order-independent.
SimSummary simulate(const Portfolio& p, const SimConfig& cfg, bool record_paths = false);

struct BenchRow {
    std::string method;
    int m = 0;
    int d = 1;
    double seconds = 0.0;
};

// Homogeneous benchmark portfolios (unit losses) of size M; wall-times for the
// transform method and the recursion at each size.
std::vector<BenchRow> bench_dft_vs_recursion(const std::vector<int>& sizes, int d);

} // namespace fcl
