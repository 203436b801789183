#include "inject_sim/units_params.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "inject_sim/errors.hpp"

namespace inject {

using nlohmann::json;

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string(name) + " must be finite and > 0");
    }
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Reads an object and rejects keys outside `allowed`.
const json& object_at(const json& parent, const char* key, const std::string& path) {
    const json& j = parent.at(key);
    if (!j.is_object()) {
        throw ConfigError(path + " must be an object");
    }
    return j;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError("unknown key " + path + "." + it.key());
        }
    }
}

template <class T>
void read_opt(const json& obj, const char* key, T& out, const std::string& path) {
    if (!obj.contains(key)) {
        return;
    }
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + "." + key + ": " + e.what());
    }
}

std::string demand_kind_name(DemandKind k) {
    switch (k) {
        case DemandKind::Constant: return "constant";
        case DemandKind::Square: return "square";
        case DemandKind::Schedule: return "schedule";
    }
    return "constant";
}

DemandKind parse_demand_kind(const std::string& s) {
    if (s == "constant") return DemandKind::Constant;
    if (s == "square") return DemandKind::Square;
    if (s == "schedule") return DemandKind::Schedule;
    throw ConfigError("scenario.demand.kind: expected constant|square|schedule, got '" + s + "'");
}

}  // namespace

void ReservoirParams::validate() const {
    require_positive(c_hy, "reservoir.c_hy");
    require_positive(beta, "reservoir.beta");
    require_positive(f, "reservoir.f");
    require_positive(tau_dot0, "reservoir.tau_dot0");
    require_positive(t_a, "reservoir.t_a");
    require_positive(d_x, "reservoir.d_xy_km");
    require_positive(d_y, "reservoir.d_xy_km");
    require_positive(d_z, "reservoir.d_z_km");
    if (d_x != d_y) {
        throw ConfigError("reservoir: only square domains are supported (d_x == d_y)");
    }
}

ReservoirParams nominal_params(const ReservoirParams& p, double inflation) {
    if (!(inflation > 0.0) || !std::isfinite(inflation)) {
        throw ConfigError("nominal.inflation must be finite and > 0");
    }
    ReservoirParams q = p;
    q.c_hy *= inflation;
    q.beta *= inflation;
    q.f *= inflation;
    q.tau_dot0 *= inflation;
    q.t_a *= inflation;
    return q;
}

SimulationConfig::SimulationConfig() {
    wells = {
        {"w1", 1.0, 2.45},
        {"w2", 2.3, 2.45},
        {"w3", 2.7, 2.45},
        {"w4", 4.0, 2.45},
    };
    regions = {
        {"V1", {0.0, 0.0, 5.0, 5.0}, std::string("V2")},
        {"V2", {2.0, 2.0, 3.0, 3.0}, std::nullopt},
    };
}

void SimulationConfig::validate() const {
    reservoir.validate();
    if (grid_n < 16 || !is_power_of_two(grid_n)) {
        throw ConfigError("grid.n must be a power of two >= 16 (got " + std::to_string(grid_n) + ")");
    }
    require_positive(dt_max_hr, "grid.dt_max_hr");
    require_positive(t_end_hr, "run.t_end_hr");
    require_positive(snapshot_hr, "run.snapshot_hr");
    if (!(init_pressure_kpa >= 0.0) || !std::isfinite(init_pressure_kpa)) {
        throw ConfigError("run.init_pressure_kpa must be >= 0");
    }
    require_positive(nominal_inflation, "nominal.inflation");

    const auto& d = scenario.demand;
    if (!std::isfinite(d.qs_m3_hr)) throw ConfigError("scenario.demand.qs_m3_hr must be finite");
    require_positive(d.period_hr, "scenario.demand.period_hr");
    if (!(d.duty >= 0.0 && d.duty <= 1.0)) throw ConfigError("scenario.demand.duty must be in [0,1]");
    for (std::size_t i = 1; i < d.schedule.size(); ++i) {
        if (!(d.schedule[i][0] > d.schedule[i - 1][0])) {
            throw ConfigError("scenario.demand.schedule breakpoints must be strictly increasing");
        }
    }
    if (d.kind == DemandKind::Schedule && d.schedule.empty()) {
        throw ConfigError("scenario.demand.schedule must be non-empty for kind 'schedule'");
    }
    require_positive(scenario.reference.ramp_hr, "scenario.reference.ramp_hr");

    const auto& W = scenario.W;
    if (W.empty()) throw ConfigError("scenario.W must have at least one row");
    const std::size_t m = W.front().size();
    for (const auto& row : W) {
        if (row.size() != m) throw ConfigError("scenario.W rows must have equal length");
    }
    if (W.size() >= m) throw ConfigError("scenario.W must have fewer rows than columns");
    if (d.pattern.size() != W.size()) {
        throw ConfigError("scenario.demand.pattern length must equal the number of rows of scenario.W");
    }
    if (wells.size() != m) {
        throw ConfigError("wells: expected " + std::to_string(m) + " wells (columns of scenario.W), got " +
                          std::to_string(wells.size()));
    }
    if (regions.size() != m - W.size()) {
        throw ConfigError("regions: expected " + std::to_string(m - W.size()) +
                          " controlled regions (wells minus flux restrictions), got " +
                          std::to_string(regions.size()));
    }
    if (scenario.reference.final_log_sr.size() != regions.size()) {
        throw ConfigError("scenario.reference.final_log_sr length must equal the number of regions");
    }
    for (const auto& w : wells) {
        if (!(w.x_km > 0.0 && w.x_km < reservoir.d_x && w.y_km > 0.0 && w.y_km < reservoir.d_y)) {
            throw ConfigError("wells: '" + w.label + "' lies outside the open domain");
        }
    }
    for (const auto& r : regions) {
        const auto& q = r.rect_km;
        if (!(q[2] > q[0] && q[3] > q[1])) {
            throw ConfigError("regions: '" + r.label + "' has non-positive extent");
        }
        if (q[0] < 0.0 || q[1] < 0.0 || q[2] > reservoir.d_x || q[3] > reservoir.d_y) {
            throw ConfigError("regions: '" + r.label + "' extends outside the domain");
        }
    }
    if (!(controller.k1 >= 0.0 && controller.k1 <= 5e-4)) throw ConfigError("controller.k1 must be in [0, 5e-4]");
    if (!(controller.k2 >= 0.0 && controller.k2 <= 5e-4)) throw ConfigError("controller.k2 must be in [0, 5e-4]");
    if (!(controller.l >= -1.0 && controller.l <= 0.0)) throw ConfigError("controller.l must be in [-1, 0]");
    if (env.decisions < 1) throw ConfigError("env.decisions must be >= 1");
    require_positive(env.episode_hr, "env.episode_hr");
    if (!(env.alpha >= 0.0 && env.alpha <= 1.0)) throw ConfigError("env.alpha must be in [0,1]");
    require_positive(env.y_ref, "env.y_ref");
    require_positive(env.q_ref, "env.q_ref");
    if (env.episode_hr / env.decisions < std::min(dt_max_hr, env.episode_hr)) {
        throw ConfigError("env: decision interval shorter than one inner time step");
    }
}

SimulationConfig config_from_json(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("config root must be a JSON object");
    }
    reject_unknown(j, {"reservoir", "grid", "run", "nominal", "scenario", "wells", "regions", "controller", "env"}, "");

    SimulationConfig c;
    if (j.contains("reservoir")) {
        const auto& r = object_at(j, "reservoir", "reservoir");
        reject_unknown(r, {"c_hy", "beta", "f", "tau_dot0", "t_a", "d_xy_km", "d_z_km"}, "reservoir");
        read_opt(r, "c_hy", c.reservoir.c_hy, "reservoir");
        read_opt(r, "beta", c.reservoir.beta, "reservoir");
        read_opt(r, "f", c.reservoir.f, "reservoir");
        read_opt(r, "tau_dot0", c.reservoir.tau_dot0, "reservoir");
        read_opt(r, "t_a", c.reservoir.t_a, "reservoir");
        if (r.contains("d_xy_km")) {
            read_opt(r, "d_xy_km", c.reservoir.d_x, "reservoir");
            c.reservoir.d_y = c.reservoir.d_x;
        }
        read_opt(r, "d_z_km", c.reservoir.d_z, "reservoir");
    }
    if (j.contains("grid")) {
        const auto& g = object_at(j, "grid", "grid");
        reject_unknown(g, {"n", "dt_max_hr"}, "grid");
        read_opt(g, "n", c.grid_n, "grid");
        read_opt(g, "dt_max_hr", c.dt_max_hr, "grid");
    }
    if (j.contains("run")) {
        const auto& r = object_at(j, "run", "run");
        reject_unknown(r, {"t_end_hr", "seed", "init_pressure_kpa", "snapshot_hr"}, "run");
        read_opt(r, "t_end_hr", c.t_end_hr, "run");
        read_opt(r, "seed", c.seed, "run");
        read_opt(r, "init_pressure_kpa", c.init_pressure_kpa, "run");
        read_opt(r, "snapshot_hr", c.snapshot_hr, "run");
    }
    if (j.contains("nominal")) {
        const auto& n = object_at(j, "nominal", "nominal");
        reject_unknown(n, {"inflation"}, "nominal");
        read_opt(n, "inflation", c.nominal_inflation, "nominal");
    }
    if (j.contains("scenario")) {
        const auto& s = object_at(j, "scenario", "scenario");
        reject_unknown(s, {"demand", "reference", "W", "nocontrol_well_km"}, "scenario");
        if (s.contains("demand")) {
            const auto& d = object_at(s, "demand", "scenario.demand");
            reject_unknown(d, {"kind", "qs_m3_hr", "period_hr", "duty", "schedule", "pattern"}, "scenario.demand");
            std::string kind = demand_kind_name(c.scenario.demand.kind);
            read_opt(d, "kind", kind, "scenario.demand");
            c.scenario.demand.kind = parse_demand_kind(kind);
            read_opt(d, "qs_m3_hr", c.scenario.demand.qs_m3_hr, "scenario.demand");
            read_opt(d, "period_hr", c.scenario.demand.period_hr, "scenario.demand");
            read_opt(d, "duty", c.scenario.demand.duty, "scenario.demand");
            read_opt(d, "schedule", c.scenario.demand.schedule, "scenario.demand");
            read_opt(d, "pattern", c.scenario.demand.pattern, "scenario.demand");
        }
        if (s.contains("reference")) {
            const auto& r = object_at(s, "reference", "scenario.reference");
            reject_unknown(r, {"final_log_sr", "ramp_hr"}, "scenario.reference");
            read_opt(r, "final_log_sr", c.scenario.reference.final_log_sr, "scenario.reference");
            read_opt(r, "ramp_hr", c.scenario.reference.ramp_hr, "scenario.reference");
        }
        read_opt(s, "W", c.scenario.W, "scenario");
        read_opt(s, "nocontrol_well_km", c.scenario.nocontrol_well_km, "scenario");
    }
    if (j.contains("wells")) {
        const auto& ws = j.at("wells");
        if (!ws.is_array()) throw ConfigError("wells must be an array");
        c.wells.clear();
        for (std::size_t i = 0; i < ws.size(); ++i) {
            const std::string path = "wells[" + std::to_string(i) + "]";
            const auto& w = ws[i];
            if (!w.is_object()) throw ConfigError(path + " must be an object");
            reject_unknown(w, {"label", "x_km", "y_km"}, path);
            WellSpec spec;
            spec.label = "w" + std::to_string(i + 1);
            read_opt(w, "label", spec.label, path);
            if (!w.contains("x_km") || !w.contains("y_km")) throw ConfigError(path + ": x_km and y_km are required");
            read_opt(w, "x_km", spec.x_km, path);
            read_opt(w, "y_km", spec.y_km, path);
            c.wells.push_back(spec);
        }
    }
    if (j.contains("regions")) {
        const auto& rs = j.at("regions");
        if (!rs.is_array()) throw ConfigError("regions must be an array");
        c.regions.clear();
        for (std::size_t i = 0; i < rs.size(); ++i) {
            const std::string path = "regions[" + std::to_string(i) + "]";
            const auto& r = rs[i];
            if (!r.is_object()) throw ConfigError(path + " must be an object");
            reject_unknown(r, {"label", "rect_km", "complement_of"}, path);
            RegionSpec spec;
            spec.label = "V" + std::to_string(i + 1);
            read_opt(r, "label", spec.label, path);
            if (!r.contains("rect_km")) throw ConfigError(path + ": rect_km is required");
            read_opt(r, "rect_km", spec.rect_km, path);
            if (r.contains("complement_of")) {
                std::string other;
                read_opt(r, "complement_of", other, path);
                spec.complement_of = other;
            }
            c.regions.push_back(spec);
        }
    }
    if (j.contains("controller")) {
        const auto& k = object_at(j, "controller", "controller");
        reject_unknown(k, {"k1", "k2", "l", "fixed_gains"}, "controller");
        read_opt(k, "k1", c.controller.k1, "controller");
        read_opt(k, "k2", c.controller.k2, "controller");
        read_opt(k, "l", c.controller.l, "controller");
        read_opt(k, "fixed_gains", c.controller.fixed_gains, "controller");
    }
    if (j.contains("env")) {
        const auto& e = object_at(j, "env", "env");
        reject_unknown(e, {"decisions", "episode_hr", "alpha", "y_ref", "q_ref", "extended_obs"}, "env");
        read_opt(e, "decisions", c.env.decisions, "env");
        read_opt(e, "episode_hr", c.env.episode_hr, "env");
        read_opt(e, "alpha", c.env.alpha, "env");
        read_opt(e, "y_ref", c.env.y_ref, "env");
        read_opt(e, "q_ref", c.env.q_ref, "env");
        read_opt(e, "extended_obs", c.env.extended_obs, "env");
    }
    c.validate();
    return c;
}

SimulationConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const SimulationConfig& c) {
    json j;
    j["reservoir"] = {{"c_hy", c.reservoir.c_hy}, {"beta", c.reservoir.beta},     {"f", c.reservoir.f},
                      {"tau_dot0", c.reservoir.tau_dot0}, {"t_a", c.reservoir.t_a}, {"d_xy_km", c.reservoir.d_x},
                      {"d_z_km", c.reservoir.d_z}};
    j["grid"] = {{"n", c.grid_n}, {"dt_max_hr", c.dt_max_hr}};
    j["run"] = {{"t_end_hr", c.t_end_hr},
                {"seed", c.seed},
                {"init_pressure_kpa", c.init_pressure_kpa},
                {"snapshot_hr", c.snapshot_hr}};
    j["nominal"] = {{"inflation", c.nominal_inflation}};
    const auto& d = c.scenario.demand;
    j["scenario"] = {
        {"demand",
         {{"kind", demand_kind_name(d.kind)},
          {"qs_m3_hr", d.qs_m3_hr},
          {"period_hr", d.period_hr},
          {"duty", d.duty},
          {"schedule", d.schedule},
          {"pattern", d.pattern}}},
        {"reference", {{"final_log_sr", c.scenario.reference.final_log_sr}, {"ramp_hr", c.scenario.reference.ramp_hr}}},
        {"W", c.scenario.W},
        {"nocontrol_well_km", c.scenario.nocontrol_well_km}};
    j["wells"] = json::array();
    for (const auto& w : c.wells) {
        j["wells"].push_back({{"label", w.label}, {"x_km", w.x_km}, {"y_km", w.y_km}});
    }
    j["regions"] = json::array();
    for (const auto& r : c.regions) {
        json rj = {{"label", r.label}, {"rect_km", r.rect_km}};
        if (r.complement_of) rj["complement_of"] = *r.complement_of;
        j["regions"].push_back(rj);
    }
    j["controller"] = {{"k1", c.controller.k1},
                       {"k2", c.controller.k2},
                       {"l", c.controller.l},
                       {"fixed_gains", c.controller.fixed_gains}};
    j["env"] = {{"decisions", c.env.decisions}, {"episode_hr", c.env.episode_hr}, {"alpha", c.env.alpha},
                {"y_ref", c.env.y_ref},         {"q_ref", c.env.q_ref},           {"extended_obs", c.env.extended_obs}};
    return j;
}

}  // namespace inject
