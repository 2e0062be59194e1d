#include "fcl/config_io.hpp"

#include <fstream>
#include <sstream>

namespace fcl {

namespace {

using nlohmann::json;

const json& need(const json& j, const char* key) {
    if (!j.contains(key)) throw config_error(std::string("config: missing key '") + key + "'");
    return j.at(key);
}

double need_num(const json& j, const char* key) {
    const json& v = need(j, key);
    if (!v.is_number()) throw config_error(std::string("config: key '") + key + "' must be a number");
    return v.get<double>();
}

CopulaParams params_from_json(const json& j) {
    std::string fam = need(j, "family").get<std::string>();
    std::vector<double> p = j.value("params", std::vector<double>{});
    auto want = [&](size_t k) {
        if (p.size() != k)
            throw config_error("config: family '" + fam + "' takes " + std::to_string(k) +
                               " entries in 'params'");
    };
    try {
        if (fam == "independence") { want(0); return independence_copula(); }
        if (fam == "gaussian") { want(1); auto c = gaussian_copula(p[0]); c.validate(); return c; }
        if (fam == "student_t") { want(2); auto c = student_t_copula(p[0], p[1]); c.validate(); return c; }
        if (fam == "clayton") { want(1); auto c = archimedean_copula(Family::Clayton, p[0]); c.validate(); return c; }
        if (fam == "gumbel") { want(1); auto c = archimedean_copula(Family::Gumbel, p[0]); c.validate(); return c; }
        if (fam == "frank") { want(1); auto c = archimedean_copula(Family::Frank, p[0]); c.validate(); return c; }
        if (fam == "joe") { want(1); auto c = archimedean_copula(Family::Joe, p[0]); c.validate(); return c; }
    } catch (const std::domain_error& e) {
        throw config_error(std::string("config: key 'params': ") + e.what());
    }
    throw config_error("config: unknown copula family '" + fam + "'");
}

} // namespace

Copula copula_from_json(const json& j) {
    if (j.contains("mixture")) {
        std::vector<Copula::Component> comps;
        for (const auto& c : j.at("mixture"))
            comps.push_back({need_num(c, "weight"), params_from_json(c)});
        try {
            return Copula::mixture(std::move(comps));
        } catch (const std::domain_error& e) {
            throw config_error(std::string("config: key 'mixture': ") + e.what());
        }
    }
    return Copula(params_from_json(j));
}

MarginalCurve marginal_from_json(const json& j) {
    std::string type = need(j, "type").get<std::string>();
    if (type == "constant_intensity") return ConstantIntensity{need_num(j, "lambda")};
    if (type == "spread_implied")
        return SpreadImplied{need_num(j, "lambda"), need_num(j, "recovery")};
    if (type == "piecewise") {
        PiecewiseCurve c;
        for (const auto& k : need(j, "knots")) {
            if (!k.is_array() || k.size() != 2)
                throw config_error("config: key 'knots' entries must be [t, p] pairs");
            c.knots.emplace_back(k[0].get<double>(), k[1].get<double>());
        }
        return c;
    }
    throw config_error("config: unknown marginal type '" + type + "'");
}

LossLaw loss_law_from_json(const json& j) {
    std::string type = need(j, "type").get<std::string>();
    if (type == "constant") return ConstantLoss{static_cast<int>(need_num(j, "units"))};
    if (type == "beta_binomial") {
        const json& g = need(j, "grid");
        LossGrid grid{static_cast<int>(g.value("a", 1.0)), static_cast<int>(g.value("b", 0.0)),
                      static_cast<int>(need_num(g, "n"))};
        return BetaBinomialLoss{need_num(j, "m1"), j.value("m2", 0.0), need_num(j, "m3"),
                                j.value("m4", 0.0), grid};
    }
    if (type == "tabulated") {
        std::vector<double> p = need(j, "pmf").get<std::vector<double>>();
        TabulatedLoss t;
        t.pmf = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
        return t;
    }
    throw config_error("config: unknown loss type '" + type + "'");
}

Portfolio portfolio_from_json(const json& j) {
    Portfolio pf;
    pf.delta = j.value("delta", 1.0);
    pf.model.d = static_cast<int>(j.value("dimension", 1.0));
    for (const auto& ej : need(j, "entities")) {
        int count = static_cast<int>(ej.value("count", 1.0));
        if (count < 1) throw config_error("config: key 'count' must be >= 1");
        Entity e;
        e.marginal = marginal_from_json(need(ej, "marginal"));
        for (const auto& lj : need(ej, "links")) e.links.push_back(copula_from_json(lj));
        LossLaw law = loss_law_from_json(need(ej, "loss"));
        for (int c = 0; c < count; ++c) {
            pf.model.entities.push_back(e);
            pf.laws.push_back(law);
        }
    }
    try {
        pf.validate();
    } catch (const std::exception& e) {
        throw config_error(std::string("config: key 'entities': ") + e.what());
    }
    return pf;
}

TrancheContract contract_from_json(const json& j) {
    TrancheContract c;
    c.tranche = {need_num(j, "attach"), need_num(j, "detach")};
    c.spread = need_num(j, "spread_bp") * 1e-4;
    c.maturity = need_num(j, "maturity_years");
    std::string freq = j.value("payment_freq", std::string("quarterly"));
    if (freq != "quarterly")
        throw config_error("config: key 'payment_freq' supports only 'quarterly'");
    c.payment_dates = quarterly_dates(c.maturity);
    c.dt = j.value("dt", 1.0 / 48.0);
    try {
        c.validate();
    } catch (const std::exception& e) {
        throw config_error(std::string("config: contract: ") + e.what());
    }
    return c;
}

DiscountCurve curve_from_json(const json& j) {
    double r = j.value("rate", 0.0);
    return r == 0.0 ? DiscountCurve::zero() : DiscountCurve::flat(r);
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error("config: invalid JSON in " + path + ": " + e.what());
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

} // namespace

QuoteSet read_quotes_csv(const std::string& path, double maturity) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open quotes file: " + path);
    QuoteSet qs;
    qs.maturity = maturity;
    std::string line;
    if (!std::getline(in, line)) throw data_error("quotes file is empty: " + path);
    if (split_csv_line(line) !=
        std::vector<std::string>{"date", "attach", "detach", "spread_bp", "upfront_bid",
                                 "upfront_ask", "index_spread_bp"})
        throw data_error("quotes file header mismatch: " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 7) throw data_error("quotes row needs 7 columns: " + line);
        try {
            TrancheQuote tq;
            qs.date = cells[0];
            tq.attach = std::stod(cells[1]);
            tq.detach = std::stod(cells[2]);
            tq.spread = std::stod(cells[3]) * 1e-4;
            tq.upfront_bid = std::stod(cells[4]);
            tq.upfront_ask = std::stod(cells[5]);
            tq.upfront_mid = 0.5 * (tq.upfront_bid + tq.upfront_ask);
            qs.index_spread = std::stod(cells[6]) * 1e-4;
            qs.quotes.push_back(tq);
        } catch (const std::invalid_argument&) {
            throw data_error("quotes row has a non-numeric field: " + line);
        }
    }
    try {
        qs.validate();
    } catch (const std::exception& e) {
        throw data_error(std::string("quotes file invalid: ") + e.what());
    }
    return qs;
}

std::vector<double> read_recoveries_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open recoveries file: " + path);
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(std::stod(line));
        } catch (const std::invalid_argument&) {
            throw data_error("recoveries row has a non-numeric field: " + line);
        }
    }
    if (out.empty()) throw data_error("recoveries file is empty: " + path);
    return out;
}

CalibrationSetup calibration_setup_from_json(const json& j) {
    std::string tmpl = need(j, "template").get<std::string>();
    if (tmpl != "gaussian_mixture")
        throw config_error("config: unknown template '" + tmpl + "'");
    const int n_entities = static_cast<int>(need_num(j, "entities"));
    const double lambda = need_num(j, "lambda");
    const double delta = j.value("delta", 1.0);
    if (n_entities < 1) throw config_error("config: key 'entities' must be >= 1");

    // Template parameters in fixed order; free ones take bounds from the
    // config, fixed ones take a pinned value.
    const std::vector<std::string> names = {"w", "rho1", "rho2"};
    const json fixed = j.value("fixed", json::object());
    const json& bounds = need(j, "bounds");
    CalibrationSetup setup;
    std::vector<double> lo, hi;
    std::vector<int> free_index(3, -1);
    Eigen::Vector3d pinned;
    for (int k = 0; k < 3; ++k) {
        if (fixed.contains(names[k])) {
            pinned[k] = fixed.at(names[k]).get<double>();
        } else {
            const json& b = need(bounds, names[k].c_str());
            if (!b.is_array() || b.size() != 2)
                throw config_error("config: bounds for '" + names[k] + "' must be [lo, hi]");
            free_index[k] = static_cast<int>(lo.size());
            lo.push_back(b[0].get<double>());
            hi.push_back(b[1].get<double>());
            setup.free_names.push_back(names[k]);
        }
    }
    if (lo.empty()) throw config_error("config: no free parameters");

    setup.problem.lower = Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
    setup.problem.upper = Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
    setup.problem.curve = curve_from_json(j);
    setup.problem.dt = j.value("dt", 0.25);
    setup.problem.width_weighting = j.value("width_weighting", false);
    setup.maturity = j.value("maturity_years", 5.0);
    setup.problem.build = [n_entities, lambda, delta, free_index, pinned](
                              const Eigen::VectorXd& theta) {
        auto pick = [&](int k) { return free_index[k] >= 0 ? theta[free_index[k]] : pinned[k]; };
        Entity e;
        e.links.push_back(gaussian_mixture_template(pick(0), pick(1), pick(2)));
        e.marginal = ConstantIntensity{lambda};
        Portfolio pf;
        pf.delta = delta;
        pf.model.d = 1;
        pf.model.entities.assign(n_entities, e);
        pf.laws.assign(n_entities, ConstantLoss{1});
        return pf;
    };
    return setup;
}

} // namespace fcl
