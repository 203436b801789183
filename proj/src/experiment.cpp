#include "inject_sim/experiment.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "inject_sim/errors.hpp"

namespace inject {

namespace fs = std::filesystem;

namespace {

constexpr char kFieldMagic[8] = {'I', 'S', 'F', 'L', 'D', '0', '0', '1'};

void append_values(std::string& line, const std::vector<double>& v) {
    for (double x : v) {
        line += ',';
        line += format_double(x);
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << text;
    if (!f) throw ConfigError("write failed for " + path.string());
}

double parse_number(const std::string& s, const std::string& where) {
    const char* begin = s.c_str();
    while (*begin == ' ' || *begin == '\t') ++begin;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
    if (end == begin || *end != '\0' || errno == ERANGE) {
        throw ConfigError(fmt::format("{}: '{}' is not a number", where, s));
    }
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool is_snapshot_time(double t, double snap) {
    const double k = std::round(t / snap);
    return std::abs(t - k * snap) <= 1e-9 * std::max(1.0, t);
}

class RunMarker {
public:
    explicit RunMarker(const fs::path& dir) : path_(dir / "INCOMPLETE") { write_text(path_, "run in progress or failed\n"); }
    void finish() { fs::remove(path_); }

private:
    fs::path path_;
};

fs::path prepare_dir(const fs::path& dir) {
    if (dir.empty()) throw ConfigError("an output directory is required");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
    return dir;
}

ExperimentResult run_no_control(const SimulationConfig& cfg, double t_end, std::uint64_t seed, const fs::path& dir) {
    ClosedLoopModel model = ClosedLoopModel::open_loop(cfg);
    const std::size_t mc = model.regions().size();
    const std::size_t well = model.layout().wells.front().node;
    CoupledState s = model.initial_state(seed);
    FieldWriter fields(dir / "fields.bin", model.grid());

    std::string csv = "t_hr";
    for (std::size_t i = 1; i <= mc; ++i) csv += fmt::format(",h{}", i);
    for (std::size_t i = 1; i <= mc; ++i) csv += fmt::format(",R{}", i);
    csv += ",Qbar1_m3hr,u_well_mpa\n";

    ExperimentResult res;
    res.peak_R.assign(mc, 0.0);
    res.peak_t_hr.assign(mc, 0.0);
    const ControllerGains none{};
    auto record = [&](const CoupledState& x) {
        const LoopSample smp = model.sample(x, none);
        std::string line = format_double(smp.t);
        append_values(line, smp.y);
        append_values(line, smp.R);
        line += ',' + format_double(km3hr_to_m3hr(smp.Q_bar(0)));
        line += ',' + format_double(x.u.values()[well]);
        csv += line + '\n';
        for (std::size_t i = 0; i < mc; ++i) {
            if (smp.R[i] > res.peak_R[i]) {
                res.peak_R[i] = smp.R[i];
                res.peak_t_hr[i] = smp.t;
            }
        }
        if (is_snapshot_time(x.t, cfg.snapshot_hr)) fields.write(x.t, x.u);
        res.summary.t_max_hr = x.t;
    };
    record(s);
    try {
        model.advance(s, t_end, none, record);
    } catch (const BlowUpError& e) {
        res.summary.aborted = true;
        res.summary.error = e.what();
    }
    write_text(dir / "trace.csv", csv);

    nlohmann::json m;
    m["mise"] = nullptr;
    m["rms"] = nullptr;
    m["accumulated_reward"] = nullptr;
    m["t_max_hr"] = res.summary.t_max_hr;
    m["peak_R"] = res.peak_R;
    m["peak_t_hr"] = res.peak_t_hr;
    if (res.summary.aborted) m["error"] = res.summary.error;
    write_text(dir / "metrics.json", m.dump(2) + "\n");
    return res;
}

ExperimentResult run_controlled(const SimulationConfig& cfg, const ExperimentOptions& opts,
                                const std::vector<ActionRow>& schedule, double t_end, std::uint64_t seed,
                                const fs::path& dir) {
    Environment env(cfg, episode_for_horizon(cfg, t_end));
    env.set_recording(true);
    FieldWriter fields(dir / "fields.bin", env.model().grid());
    env.set_state_observer([&](const CoupledState& x) {
        if (is_snapshot_time(x.t, cfg.snapshot_hr)) fields.write(x.t, x.u);
    });

    ExperimentResult res;
    res.decisions = env.episode().decisions;
    if (opts.kind == ExperimentKind::Replay && schedule.size() > static_cast<std::size_t>(res.decisions)) {
        spdlog::warn("action trace has {} rows; only the first {} are used", schedule.size(), res.decisions);
    }
    env.reset(seed);
    for (int k = 0; k < res.decisions && !env.done(); ++k) {
        const std::size_t idx = std::min(static_cast<std::size_t>(k), schedule.size() - 1);
        if (idx != static_cast<std::size_t>(k)) ++res.held_actions;
        env.step(schedule[idx]);
    }
    if (opts.kind == ExperimentKind::Replay && res.held_actions > 0) {
        spdlog::warn("action trace shorter than {} decisions; last row held for {}", res.decisions, res.held_actions);
    }
    res.summary = env.summary();

    write_trace_csv(dir / "trace.csv", env.trace());
    write_actions_csv(dir / "actions.csv", env.actions());
    write_metrics_json(dir / "metrics.json", res.summary);
    return res;
}

}  // namespace

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string trace_header(std::size_t regions, std::size_t wells) {
    std::string h = "t_hr";
    for (const char* p : {"h", "r", "ye", "R"}) {
        for (std::size_t i = 1; i <= regions; ++i) h += fmt::format(",{}{}", p, i);
    }
    for (std::size_t j = 1; j <= wells; ++j) h += fmt::format(",Qbar{}_m3hr", j);
    for (std::size_t i = 1; i <= regions; ++i) h += fmt::format(",Qc{}", i);
    h += ",k1,k2,l,reward,constraint_residual";
    return h;
}

void write_trace_csv(const fs::path& path, const std::vector<TraceRow>& rows) {
    const std::size_t mc = rows.empty() ? 2 : rows.front().h.size();
    const std::size_t m = rows.empty() ? 4 : rows.front().q_bar_m3hr.size();
    std::string out = trace_header(mc, m) + '\n';
    for (const TraceRow& r : rows) {
        std::string line = format_double(r.t);
        append_values(line, r.h);
        append_values(line, r.r);
        append_values(line, r.y_e);
        append_values(line, r.R);
        append_values(line, r.q_bar_m3hr);
        append_values(line, r.q_c);
        append_values(line, {r.gains.k1, r.gains.k2, r.gains.l, r.reward, r.residual_m3hr});
        out += line + '\n';
    }
    write_text(path, out);
}

void write_metrics_json(const fs::path& path, const EpisodeSummary& s) {
    nlohmann::json m;
    m["mise"] = s.mise;
    m["rms"] = s.rms;
    m["accumulated_reward"] = s.accumulated_reward;
    m["t_max_hr"] = s.t_max_hr;
    if (s.aborted) m["error"] = s.error;
    write_text(path, m.dump(2) + "\n");
}

std::vector<ActionRow> read_actions_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read action trace " + path.string());
    std::vector<ActionRow> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (lineno == 1 && line.rfind("decision_index", 0) == 0) continue;
        const auto cells = split_csv(line);
        const std::string where = fmt::format("{}:{}", path.string(), lineno);
        if (cells.size() != 4) throw ConfigError(where + ": expected decision_index,a1,a2,a3");
        const double idx = parse_number(cells[0], where);
        if (idx != static_cast<double>(rows.size())) {
            throw ConfigError(fmt::format("{}: decision_index {} out of sequence (expected {})", where, cells[0],
                                          rows.size()));
        }
        ActionRow a{};
        for (int i = 0; i < kActionDim; ++i) {
            a[static_cast<std::size_t>(i)] = parse_number(cells[static_cast<std::size_t>(i + 1)], where);
            if (!std::isfinite(a[static_cast<std::size_t>(i)])) throw ConfigError(where + ": non-finite action");
        }
        rows.push_back(a);
    }
    if (rows.empty()) throw ConfigError("action trace " + path.string() + " has no rows");
    return rows;
}

void write_actions_csv(const fs::path& path, const std::vector<ActionRow>& actions) {
    std::string out = "decision_index,a1,a2,a3\n";
    for (std::size_t k = 0; k < actions.size(); ++k) {
        out += fmt::format("{},{},{},{}\n", k, format_double(actions[k][0]), format_double(actions[k][1]),
                           format_double(actions[k][2]));
    }
    write_text(path, out);
}

FieldWriter::FieldWriter(const fs::path& path, const Grid2D& grid) : path_(path), n_(grid.n) {
    std::ofstream f(path_, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + path_.string());
    const auto n = static_cast<std::int32_t>(grid.n);
    const double dx = grid.dx();
    f.write(kFieldMagic, sizeof kFieldMagic);
    f.write(reinterpret_cast<const char*>(&n), sizeof n);
    f.write(reinterpret_cast<const char*>(&dx), sizeof dx);
    f.write(reinterpret_cast<const char*>(&grid.length), sizeof grid.length);
}

void FieldWriter::write(double t_hr, const ScalarField2D& u) {
    std::ofstream f(path_, std::ios::binary | std::ios::app);
    const auto v = u.values();
    f.write(reinterpret_cast<const char*>(&t_hr), sizeof t_hr);
    f.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!f) throw ConfigError("write failed for " + path_.string());
}

FieldFile read_fields(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + path.string());
    char magic[8];
    FieldFile out;
    std::int32_t n = 0;
    f.read(magic, sizeof magic);
    f.read(reinterpret_cast<char*>(&n), sizeof n);
    f.read(reinterpret_cast<char*>(&out.dx_km), sizeof out.dx_km);
    f.read(reinterpret_cast<char*>(&out.length_km), sizeof out.length_km);
    if (!f || std::memcmp(magic, kFieldMagic, sizeof magic) != 0 || n < 1) {
        throw ConfigError(path.string() + " is not a field snapshot file");
    }
    out.n = n;
    const auto count = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    while (true) {
        FieldSnapshot s;
        if (!f.read(reinterpret_cast<char*>(&s.t_hr), sizeof s.t_hr)) break;
        s.values.resize(count);
        if (!f.read(reinterpret_cast<char*>(s.values.data()), static_cast<std::streamsize>(count * sizeof(double)))) {
            throw ConfigError(path.string() + " ends inside a snapshot record");
        }
        out.snapshots.push_back(std::move(s));
    }
    return out;
}

std::vector<fs::path> export_fields(const fs::path& run_dir, const std::vector<double>& times_hr,
                                    const fs::path& out_dir) {
    if (times_hr.empty()) throw ConfigError("export-fields: no times given");
    const FieldFile ff = read_fields(run_dir / "fields.bin");
    prepare_dir(out_dir);
    std::vector<fs::path> written;
    for (double t : times_hr) {
        auto it = std::find_if(ff.snapshots.begin(), ff.snapshots.end(), [t](const FieldSnapshot& s) {
            return std::abs(s.t_hr - t) <= 1e-6 * std::max(1.0, std::abs(t));
        });
        if (it == ff.snapshots.end()) {
            std::string avail;
            for (const auto& s : ff.snapshots) avail += (avail.empty() ? "" : ",") + fmt::format("{:g}", s.t_hr);
            throw ConfigError(fmt::format("export-fields: no snapshot at t = {} hr (available: {})", t, avail));
        }
        std::string out = "t_hr,n,dx_km,units\n";
        out += fmt::format("{},{},{},MPa\n", format_double(it->t_hr), ff.n, format_double(ff.dx_km));
        const auto n = static_cast<std::size_t>(ff.n);
        for (std::size_t iy = 0; iy < n; ++iy) {
            std::string line;
            for (std::size_t ix = 0; ix < n; ++ix) {
                if (ix) line += ',';
                line += format_double(it->values[iy * n + ix]);
            }
            out += line + '\n';
        }
        const fs::path p = out_dir / fmt::format("field_t{:g}.csv", t);
        write_text(p, out);
        written.push_back(p);
    }
    return written;
}

ExperimentResult run_experiment(const SimulationConfig& cfg, const ExperimentOptions& opts) {
    cfg.validate();
    const double t_end = opts.t_end_hr.value_or(cfg.t_end_hr);
    if (!(t_end > 0.0)) throw ConfigError("t_end_hr must be > 0");
    const std::uint64_t seed = opts.seed.value_or(cfg.seed);
    std::vector<ActionRow> schedule;
    if (opts.kind == ExperimentKind::Replay) {
        if (!opts.actions) throw ConfigError("replay requires an action trace (--actions)");
        if (!fs::exists(*opts.actions)) throw ConfigError("action trace " + opts.actions->string() + " not found");
        schedule = read_actions_csv(*opts.actions);
    } else if (opts.kind == ExperimentKind::FixedGain) {
        schedule.push_back(gains_to_action({cfg.controller.k1, cfg.controller.k2, cfg.controller.l}));
    }
    const fs::path dir = prepare_dir(opts.out_dir);
    RunMarker marker(dir);
    {
        SimulationConfig resolved = cfg;
        resolved.t_end_hr = t_end;
        resolved.seed = seed;
        write_text(dir / "config.json", config_to_json(resolved).dump(2) + "\n");
    }
    ExperimentResult res = opts.kind == ExperimentKind::NoControl ? run_no_control(cfg, t_end, seed, dir)
                                                                  : run_controlled(cfg, opts, schedule, t_end, seed, dir);
    if (!res.summary.aborted) marker.finish();
    return res;
}

}  // namespace inject
