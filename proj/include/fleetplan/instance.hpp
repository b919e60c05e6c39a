#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fleetplan {

/// Dense |M|x|M| matrix indexed by (origin, destination).
struct ZoneMatrix {
    int n = 0;
    std::vector<double> data;

    ZoneMatrix() = default;
    explicit ZoneMatrix(int size, double fill = 0.0) : n(size), data(static_cast<std::size_t>(size) * size, fill) {}

    double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * n + j]; }
    double row_sum(int i) const;
    bool operator==(const ZoneMatrix&) const = default;
};

/// Total requests per hour over the strategic horizon.
/// total(t) = level / growth^(T - t) * (1 + peak_height * exp(-peak_width * (t - peak_center)^2))
struct DemandCurve {
    enum class Kind { constant, geometric, peak };
    Kind kind = Kind::geometric;
    double level = 0.0;  // total at t = T
    double growth = 1.0;
    double peak_height = 0.5;
    double peak_width = 0.1;
    double peak_center = 13.0;

    double total(int t, int horizon) const;
    bool operator==(const DemandCurve&) const = default;
};

struct CostModel {
    double fd_per_km = 0.34;
    double gw_per_km = 0.7;
    double od_per_request = 5.0;
    double penalty_per_request = 10.0;
    // Relocating drivers are charged per km driven (rate * speed); false charges the bare per-km rate.
    bool relocation_per_hour = true;
    bool operator==(const CostModel&) const = default;
};

struct CdProfile {
    std::vector<double> intensity;
    double active_share = 1.0;
    ZoneMatrix route_pattern;
    bool operator==(const CdProfile&) const = default;
};

struct TurnoverModel {
    double p_fd = 0.01, p_gw = 0.01, p_od = 0.01;
    double q_gw = 0.09, q_od = 0.09;
    bool matching_sensitive = false;
    double p_high = 1.0, p_low = 0.01;
    bool operator==(const TurnoverModel&) const = default;
};

struct StrategicConfig {
    int horizon = 26;
    double gamma = 1.0;
    double c_fix_per_hour = 20.0;
    double hours_per_ops_horizon = 50.0 / 60.0;
    int k_horizons = 1;
    bool no_firing = true;
    double c_sev = 0.0;  // ignored when no_firing
    int cap_fd = 0, cap_gw = 0, cap_od = 0;

    double c_fix_per_horizon() const { return c_fix_per_hour * hours_per_ops_horizon; }
    bool operator==(const StrategicConfig&) const = default;
};

struct FleetState {
    int n_fd = 0, n_gw = 0, n_od = 0;
    int t = 0;
    auto operator<=>(const FleetState&) const = default;
};

struct Instance {
    std::string name;
    int zones = 0;
    ZoneMatrix distance_km;
    double speed_kmh = 19.0;
    ZoneMatrix request_pattern;
    std::vector<double> demand_weights;
    DemandCurve demand;
    CostModel costs;
    CdProfile gw, od;
    TurnoverModel turnover;
    StrategicConfig strategic;
    FleetState initial;
    bool operator==(const Instance&) const = default;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutOfHorizon : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

Instance load_instance(std::istream& in);
Instance load_instance_text(const std::string& text);
Instance load_instance_file(const std::string& path);
/// A file path or "builtin:grubhub18".
Instance resolve_instance(const std::string& spec);
void write_instance(const Instance& inst, std::ostream& out);

/// Throws ValidationError naming the broken invariant.
void validate(const Instance& inst);

Instance builtin_grubhub_instance();

/// GW-only 18-zone variant used for comparing against exact DP.
Instance desk_instance(DemandCurve::Kind scenario);

std::vector<double> demand_rates(const Instance& inst, int t);
std::pair<std::vector<double>, std::vector<double>> cd_arrival_rates(const Instance& inst, int n_gw, int n_od);

struct CostMatrices {
    ZoneMatrix fd, gw, od, null;
};
CostMatrices cost_matrices(const Instance& inst);

/// mu_ij = v / r_ij, trips per hour.
ZoneMatrix service_rates(const Instance& inst);

const char* to_string(DemandCurve::Kind kind);

}  // namespace fleetplan
