#pragma once

// JSON/CSV ingestion: portfolio and contract configs, tranche quote files,
// recovery samples. Parse errors throw config_error naming the offending key;
// file problems throw data_error.

#include <string>

#include <json.hpp>

#include "fcl/calibrate.hpp"
#include "fcl/engine.hpp"
#include "fcl/pricing.hpp"

namespace fcl {

Copula copula_from_json(const nlohmann::json& j);
MarginalCurve marginal_from_json(const nlohmann::json& j);
LossLaw loss_law_from_json(const nlohmann::json& j);

// Portfolio schema: {"delta", "dimension", "entities": [{"count", "marginal",
// "links": [copula...], "loss"}]}. "count" replicates an entity block.
Portfolio portfolio_from_json(const nlohmann::json& j);

// Contract schema: {"attach", "detach", "spread_bp", "maturity_years",
// "payment_freq" ("quarterly"), "rate", "dt"}; attach/detach in currency
// (same units as delta times loss units).
TrancheContract contract_from_json(const nlohmann::json& j);
DiscountCurve curve_from_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);

// Quotes CSV: date,attach,detach,spread_bp,upfront_bid,upfront_ask,index_spread_bp
QuoteSet read_quotes_csv(const std::string& path, double maturity);

// Recoveries CSV: one fraction in [0,1] per line.
std::vector<double> read_recoveries_csv(const std::string& path);

// Calibration config: {"template": "gaussian_mixture", "entities", "lambda",
// "maturity_years", "delta", "rate", "dt", "bounds": {...}, "fixed": {...}}.
struct CalibrationSetup {
    CalibrationProblem problem;
    double maturity = 5.0;
    std::vector<std::string> free_names;
};
CalibrationSetup calibration_setup_from_json(const nlohmann::json& j);

} // namespace fcl
