#include "fleetplan/instance.hpp"

#include "grubhub18_data.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace fleetplan {

using json = nlohmann::json;

double ZoneMatrix::row_sum(int i) const {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += (*this)(i, j);
    return s;
}

double DemandCurve::total(int t, int horizon) const {
    double v = level / std::pow(growth, horizon - t);
    if (kind == Kind::peak) v *= 1.0 + peak_height * std::exp(-peak_width * (t - peak_center) * (t - peak_center));
    return v;
}

const char* to_string(DemandCurve::Kind kind) {
    switch (kind) {
        case DemandCurve::Kind::constant: return "constant";
        case DemandCurve::Kind::geometric: return "geometric";
        case DemandCurve::Kind::peak: return "peak";
    }
    return "?";
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw ValidationError(what); }

template <class T>
T field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ParseError("missing field '" + std::string(key) + "' in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError("field '" + std::string(key) + "' in " + where + ": " + e.what());
    }
}

ZoneMatrix read_matrix(const json& j, const char* key, int n, const std::string& where) {
    auto rows = field<std::vector<std::vector<double>>>(j, key, where);
    if (static_cast<int>(rows.size()) != n)
        invalid(std::string(key) + ": expected " + std::to_string(n) + " rows, got " + std::to_string(rows.size()));
    ZoneMatrix m(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n)
            invalid(std::string(key) + " row " + std::to_string(i) + ": expected " + std::to_string(n) + " entries");
        for (int k = 0; k < n; ++k) m(i, k) = rows[i][k];
    }
    return m;
}

std::vector<double> read_vector(const json& j, const char* key, int n, const std::string& where) {
    auto v = field<std::vector<double>>(j, key, where);
    if (static_cast<int>(v.size()) != n)
        invalid(std::string(key) + ": expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
    return v;
}

// Printed data is rounded to two decimals; rows close to 1 are rescaled.
void renormalize(std::vector<double>& v, double tol) {
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    if (tol > 0.0 && s > 0.0 && std::abs(s - 1.0) <= tol)
        for (auto& x : v) x /= s;
}

void renormalize(ZoneMatrix& m, double tol) {
    for (int i = 0; i < m.n; ++i) {
        const double s = m.row_sum(i);
        if (tol > 0.0 && s > 0.0 && std::abs(s - 1.0) <= tol)
            for (int k = 0; k < m.n; ++k) m(i, k) /= s;
    }
}

void check_stochastic_vector(const std::vector<double>& v, const std::string& name) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!(v[i] >= 0.0 && v[i] <= 1.0)) invalid(name + "[" + std::to_string(i) + "] outside [0,1]");
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    if (std::abs(s - 1.0) > 1e-9) invalid(name + " sums to " + std::to_string(s) + ", expected 1");
}

void check_stochastic_rows(const ZoneMatrix& m, const std::string& name) {
    for (int i = 0; i < m.n; ++i) {
        for (int k = 0; k < m.n; ++k)
            if (!(m(i, k) >= 0.0 && m(i, k) <= 1.0))
                invalid(name + "(" + std::to_string(i) + "," + std::to_string(k) + ") outside [0,1]");
        const double s = m.row_sum(i);
        if (std::abs(s - 1.0) > 1e-9)
            invalid(name + " row " + std::to_string(i) + " sums to " + std::to_string(s) + ", expected 1");
    }
}

void check_probability(double p, const std::string& name) {
    if (!(p >= 0.0 && p <= 1.0)) invalid(name + " = " + std::to_string(p) + " outside [0,1]");
}

DemandCurve::Kind curve_kind(const std::string& s) {
    if (s == "constant") return DemandCurve::Kind::constant;
    if (s == "geometric") return DemandCurve::Kind::geometric;
    if (s == "peak") return DemandCurve::Kind::peak;
    throw ParseError("unknown demand curve type '" + s + "'");
}

Instance from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("instance document must be an object");
    if (doc.value("format", std::string{}) != "fleetplan-instance")
        throw ParseError("not a fleetplan-instance document");
    if (doc.value("version", 0) != 1) throw ParseError("unsupported instance version");

    Instance inst;
    inst.name = doc.value("name", std::string{"unnamed"});
    inst.zones = field<int>(doc, "zones", "instance");
    if (inst.zones < 1) invalid("zones must be >= 1");
    const int n = inst.zones;
    const double tol = doc.value("rounding_tolerance", 0.0);

    inst.speed_kmh = field<double>(doc, "speed_kmh", "instance");
    inst.distance_km = read_matrix(doc, "distance_km", n, "instance");
    inst.request_pattern = read_matrix(doc, "request_pattern", n, "instance");
    inst.demand_weights = read_vector(doc, "demand_weights", n, "instance");
    renormalize(inst.request_pattern, tol);
    renormalize(inst.demand_weights, tol);

    const auto& dc = doc.at("demand_curve");
    inst.demand.kind = curve_kind(field<std::string>(dc, "type", "demand_curve"));
    inst.demand.level = field<double>(dc, "total_at_horizon", "demand_curve");
    inst.demand.growth = dc.value("growth", 1.0);
    inst.demand.peak_height = dc.value("peak_height", 0.5);
    inst.demand.peak_width = dc.value("peak_width", 0.1);
    inst.demand.peak_center = dc.value("peak_center", 13.0);

    auto read_profile = [&](const char* key, CdProfile& p) {
        if (!doc.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
        const auto& j = doc.at(key);
        if (j.contains("intensity") && j.at("intensity").is_string()) {
            if (j.at("intensity").get<std::string>() != "demand_weights")
                throw ParseError(std::string(key) + ".intensity: only \"demand_weights\" may be named");
            p.intensity = inst.demand_weights;
        } else {
            p.intensity = read_vector(j, "intensity", n, key);
            renormalize(p.intensity, tol);
        }
        p.active_share = field<double>(j, "active_share", key);
        if (j.contains("route_pattern")) {
            p.route_pattern = read_matrix(j, "route_pattern", n, key);
            renormalize(p.route_pattern, tol);
        } else {
            p.route_pattern = inst.request_pattern;
        }
    };
    read_profile("gw", inst.gw);
    read_profile("od", inst.od);

    const auto& c = doc.at("costs");
    inst.costs.fd_per_km = field<double>(c, "fd_per_km", "costs");
    inst.costs.gw_per_km = field<double>(c, "gw_per_km", "costs");
    inst.costs.od_per_request = field<double>(c, "od_per_request", "costs");
    inst.costs.penalty_per_request = field<double>(c, "penalty_per_request", "costs");
    inst.costs.relocation_per_hour = c.value("relocation_per_hour", true);

    const auto& tm = doc.at("turnover");
    inst.turnover.p_fd = field<double>(tm, "p_fd", "turnover");
    inst.turnover.p_gw = field<double>(tm, "p_gw", "turnover");
    inst.turnover.p_od = field<double>(tm, "p_od", "turnover");
    inst.turnover.q_gw = field<double>(tm, "q_gw", "turnover");
    inst.turnover.q_od = field<double>(tm, "q_od", "turnover");
    inst.turnover.matching_sensitive = tm.value("matching_sensitive", false);
    inst.turnover.p_high = tm.value("p_high", 1.0);
    inst.turnover.p_low = tm.value("p_low", 0.01);

    const auto& sc = doc.at("strategic");
    auto& s = inst.strategic;
    s.horizon = field<int>(sc, "horizon", "strategic");
    s.gamma = sc.value("gamma", 1.0);
    s.c_fix_per_hour = field<double>(sc, "c_fix_per_hour", "strategic");
    s.hours_per_ops_horizon = field<double>(sc, "hours_per_ops_horizon", "strategic");
    s.k_horizons = sc.value("k_horizons", 1);
    s.no_firing = sc.value("no_firing", false);
    s.c_sev = sc.value("c_sev", 0.0);
    const auto& caps = sc.at("caps");
    s.cap_fd = field<int>(caps, "fd", "strategic.caps");
    s.cap_gw = field<int>(caps, "gw", "strategic.caps");
    s.cap_od = field<int>(caps, "od", "strategic.caps");

    if (doc.contains("initial_state")) {
        const auto& is = doc.at("initial_state");
        inst.initial = {is.value("fd", 0), is.value("gw", 0), is.value("od", 0), 0};
    }
    validate(inst);
    return inst;
}

json matrix_json(const ZoneMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.n; ++i) {
        json row = json::array();
        for (int k = 0; k < m.n; ++k) row.push_back(m(i, k));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

void validate(const Instance& inst) {
    const int n = inst.zones;
    if (n < 1) invalid("zones must be >= 1");
    if (inst.distance_km.n != n || inst.request_pattern.n != n || inst.gw.route_pattern.n != n ||
        inst.od.route_pattern.n != n)
        invalid("matrix dimensions differ from zones");
    if (static_cast<int>(inst.demand_weights.size()) != n || static_cast<int>(inst.gw.intensity.size()) != n ||
        static_cast<int>(inst.od.intensity.size()) != n)
        invalid("vector lengths differ from zones");
    if (!(inst.speed_kmh > 0.0 && std::isfinite(inst.speed_kmh))) invalid("speed_kmh must be positive");
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            if (!(inst.distance_km(i, k) > 0.0 && std::isfinite(inst.distance_km(i, k))))
                invalid("distance_km(" + std::to_string(i) + "," + std::to_string(k) + ") must be positive");
    check_stochastic_rows(inst.request_pattern, "request_pattern");
    check_stochastic_vector(inst.demand_weights, "demand_weights");
    check_stochastic_vector(inst.gw.intensity, "gw.intensity");
    check_stochastic_vector(inst.od.intensity, "od.intensity");
    check_stochastic_rows(inst.gw.route_pattern, "gw.route_pattern");
    check_stochastic_rows(inst.od.route_pattern, "od.route_pattern");
    for (const auto* p : {&inst.gw, &inst.od})
        if (!(p->active_share > 0.0 && p->active_share <= 1.0)) invalid("active_share outside (0,1]");

    const auto& c = inst.costs;
    if (!(c.fd_per_km >= 0.0 && c.gw_per_km >= 0.0 && c.od_per_request >= 0.0 && c.penalty_per_request >= 0.0))
        invalid("costs must be non-negative");
    const double rmax = *std::max_element(inst.distance_km.data.begin(), inst.distance_km.data.end());
    if (!(c.fd_per_km < c.gw_per_km)) invalid("cost ordering: fd_per_km must be below gw_per_km");
    if (!(c.fd_per_km * rmax < c.od_per_request))
        invalid("cost ordering: fd_per_km * max distance must be below od_per_request");
    if (!(c.fd_per_km * rmax < c.penalty_per_request))
        invalid("cost ordering: fd_per_km * max distance must be below penalty_per_request");

    const auto& tm = inst.turnover;
    check_probability(tm.p_fd, "p_fd");
    check_probability(tm.p_gw, "p_gw");
    check_probability(tm.p_od, "p_od");
    check_probability(tm.q_gw, "q_gw");
    check_probability(tm.q_od, "q_od");
    check_probability(tm.p_high, "p_high");
    check_probability(tm.p_low, "p_low");
    if (tm.p_low > tm.p_high) invalid("p_low must not exceed p_high");

    const auto& s = inst.strategic;
    if (s.horizon < 0) invalid("horizon must be >= 0");
    if (!(s.gamma >= 0.0 && s.gamma <= 1.0)) invalid("gamma outside [0,1]");
    if (!(s.c_fix_per_hour >= 0.0)) invalid("c_fix_per_hour must be non-negative");
    if (!(s.hours_per_ops_horizon > 0.0)) invalid("hours_per_ops_horizon must be positive");
    if (s.k_horizons < 1) invalid("k_horizons must be >= 1");
    if (!(s.c_sev >= 0.0 && std::isfinite(s.c_sev))) invalid("c_sev must be finite and non-negative");
    if (s.cap_fd < 0 || s.cap_gw < 0 || s.cap_od < 0) invalid("caps must be non-negative");

    const auto& d = inst.demand;
    if (!(d.level >= 0.0 && std::isfinite(d.level))) invalid("demand level must be non-negative");
    if (!(d.growth > 0.0)) invalid("demand growth must be positive");
    if (d.kind == DemandCurve::Kind::constant && d.growth != 1.0) invalid("constant demand needs growth 1");

    const auto& s0 = inst.initial;
    if (s0.n_fd < 0 || s0.n_fd > s.cap_fd || s0.n_gw < 0 || s0.n_gw > s.cap_gw || s0.n_od < 0 || s0.n_od > s.cap_od)
        invalid("initial_state outside caps");
}

Instance load_instance(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed instance document: ") + e.what());
    }
    try {
        return from_json(doc);
    } catch (const json::exception& e) {
        throw ParseError(std::string("instance document: ") + e.what());
    }
}

Instance load_instance_text(const std::string& text) {
    std::istringstream in(text);
    return load_instance(in);
}

Instance load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open instance file " + path);
    return load_instance(in);
}

Instance resolve_instance(const std::string& spec) {
    if (spec == "builtin:grubhub18") return builtin_grubhub_instance();
    if (spec == "builtin:desk-constant") return desk_instance(DemandCurve::Kind::constant);
    if (spec == "builtin:desk-growth") return desk_instance(DemandCurve::Kind::geometric);
    if (spec == "builtin:desk-peak") return desk_instance(DemandCurve::Kind::peak);
    if (spec.starts_with("builtin:")) throw ParseError("unknown builtin instance " + spec);
    return load_instance_file(spec);
}

void write_instance(const Instance& inst, std::ostream& out) {
    json doc;
    doc["format"] = "fleetplan-instance";
    doc["version"] = 1;
    doc["name"] = inst.name;
    doc["zones"] = inst.zones;
    doc["speed_kmh"] = inst.speed_kmh;
    doc["distance_km"] = matrix_json(inst.distance_km);
    doc["request_pattern"] = matrix_json(inst.request_pattern);
    doc["demand_weights"] = inst.demand_weights;
    doc["demand_curve"] = {{"type", to_string(inst.demand.kind)},
                           {"total_at_horizon", inst.demand.level},
                           {"growth", inst.demand.growth},
                           {"peak_height", inst.demand.peak_height},
                           {"peak_width", inst.demand.peak_width},
                           {"peak_center", inst.demand.peak_center}};
    for (const auto& [key, p] : {std::pair{"gw", &inst.gw}, std::pair{"od", &inst.od}})
        doc[key] = {{"intensity", p->intensity},
                    {"active_share", p->active_share},
                    {"route_pattern", matrix_json(p->route_pattern)}};
    const auto& c = inst.costs;
    doc["costs"] = {{"fd_per_km", c.fd_per_km},
                    {"gw_per_km", c.gw_per_km},
                    {"od_per_request", c.od_per_request},
                    {"penalty_per_request", c.penalty_per_request},
                    {"relocation_per_hour", c.relocation_per_hour}};
    const auto& tm = inst.turnover;
    doc["turnover"] = {{"p_fd", tm.p_fd},     {"p_gw", tm.p_gw},
                       {"p_od", tm.p_od},     {"q_gw", tm.q_gw},
                       {"q_od", tm.q_od},     {"matching_sensitive", tm.matching_sensitive},
                       {"p_high", tm.p_high}, {"p_low", tm.p_low}};
    const auto& s = inst.strategic;
    doc["strategic"] = {{"horizon", s.horizon},
                        {"gamma", s.gamma},
                        {"c_fix_per_hour", s.c_fix_per_hour},
                        {"hours_per_ops_horizon", s.hours_per_ops_horizon},
                        {"k_horizons", s.k_horizons},
                        {"no_firing", s.no_firing},
                        {"c_sev", s.c_sev},
                        {"caps", {{"fd", s.cap_fd}, {"gw", s.cap_gw}, {"od", s.cap_od}}}};
    doc["initial_state"] = {{"fd", inst.initial.n_fd}, {"gw", inst.initial.n_gw}, {"od", inst.initial.n_od}};
    out << std::setw(2) << doc << '\n';
}

Instance builtin_grubhub_instance() {
    static const Instance inst = load_instance_text(kGrubhub18Text);
    return inst;
}

Instance desk_instance(DemandCurve::Kind scenario) {
    Instance inst = builtin_grubhub_instance();
    inst.name = std::string("desk-") + to_string(scenario);
    inst.demand.kind = scenario;
    inst.demand.level = 75.0;
    inst.demand.growth = scenario == DemandCurve::Kind::geometric ? 1.003 : 1.0;
    inst.turnover.q_gw = 0.3;
    inst.turnover.q_od = 0.0;
    inst.strategic.cap_fd = 30;
    inst.strategic.cap_gw = 30;
    inst.strategic.cap_od = 0;
    inst.initial = {0, 9, 0, 0};
    validate(inst);
    return inst;
}

std::vector<double> demand_rates(const Instance& inst, int t) {
    if (t < 0 || t > inst.strategic.horizon)
        throw OutOfHorizon("step " + std::to_string(t) + " outside [0, " + std::to_string(inst.strategic.horizon) + "]");
    const double total = inst.demand.total(t, inst.strategic.horizon);
    std::vector<double> rates(inst.zones);
    for (int i = 0; i < inst.zones; ++i) rates[i] = total * inst.demand_weights[i];
    return rates;
}

std::pair<std::vector<double>, std::vector<double>> cd_arrival_rates(const Instance& inst, int n_gw, int n_od) {
    std::vector<double> gw(inst.zones), od(inst.zones);
    for (int i = 0; i < inst.zones; ++i) {
        gw[i] = n_gw * inst.gw.active_share * inst.gw.intensity[i];
        od[i] = n_od * inst.od.active_share * inst.od.intensity[i];
    }
    return {gw, od};
}

CostMatrices cost_matrices(const Instance& inst) {
    const int n = inst.zones;
    CostMatrices c{ZoneMatrix(n), ZoneMatrix(n), ZoneMatrix(n, inst.costs.od_per_request),
                   ZoneMatrix(n, inst.costs.penalty_per_request)};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            c.fd(i, j) = inst.costs.fd_per_km * inst.distance_km(i, j);
            c.gw(i, j) = inst.costs.gw_per_km * inst.distance_km(i, j);
        }
    return c;
}

ZoneMatrix service_rates(const Instance& inst) {
    ZoneMatrix mu(inst.zones);
    for (int i = 0; i < inst.zones; ++i)
        for (int j = 0; j < inst.zones; ++j) mu(i, j) = inst.speed_kmh / inst.distance_km(i, j);
    return mu;
}

}  // namespace fleetplan
