#pragma once

/**
 * @file experiment.hpp
 * @brief Batch runs (no-control, fixed-gain, replay) and their file formats.
 *
 * Output directory layout:
 *   trace.csv     one row per inner step (plus t = 0)
 *   metrics.json  {mise, rms, accumulated_reward, t_max_hr}
 *   actions.csv   decision_index,a1,a2,a3 (controlled runs)
 *   fields.bin    pressure snapshots at t = 0 and every snapshot_hr
 *   config.json   the resolved configuration
 * An INCOMPLETE marker file exists while a run is in progress and stays
 * behind if it fails.
 */

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "inject_sim/environment.hpp"

namespace inject {

enum class ExperimentKind { NoControl, FixedGain, Replay };

struct ExperimentOptions {
    ExperimentKind kind = ExperimentKind::FixedGain;
    std::filesystem::path out_dir;
    std::optional<std::filesystem::path> actions;  ///< replay only
    std::optional<double> t_end_hr;                ///< overrides run.t_end_hr
    std::optional<std::uint64_t> seed;             ///< overrides run.seed
};

struct ExperimentResult {
    EpisodeSummary summary;
    std::vector<double> peak_R;       ///< no-control only
    std::vector<double> peak_t_hr;    ///< no-control only
    int decisions = 0;
    int held_actions = 0;             ///< replay: decisions that reused the last row
};

/// Runs the experiment and writes its files. A blow-up still writes the
/// partial trace and a metrics file carrying "error"; the result reports
/// summary.aborted.
ExperimentResult run_experiment(const SimulationConfig& cfg, const ExperimentOptions& opts);

using ActionRow = std::array<double, kActionDim>;

/// Reads decision_index,a1,a2,a3 rows; indices must run 0, 1, 2, ...
std::vector<ActionRow> read_actions_csv(const std::filesystem::path& path);
void write_actions_csv(const std::filesystem::path& path, const std::vector<ActionRow>& actions);

/// Header for m_c regions and m wells.
std::string trace_header(std::size_t regions, std::size_t wells);
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows);
void write_metrics_json(const std::filesystem::path& path, const EpisodeSummary& s);

/// 17 significant digits, round-trip exact.
std::string format_double(double v);

struct FieldSnapshot {
    double t_hr = 0.0;
    std::vector<double> values;  ///< row-major, index iy*n + ix
};

struct FieldFile {
    int n = 0;
    double dx_km = 0.0;
    double length_km = 0.0;
    std::vector<FieldSnapshot> snapshots;
};

/// Binary snapshot stream: "ISFLD001", int32 n, f64 dx, f64 length, then
/// records of f64 t followed by n*n f64 values. Native byte order.
class FieldWriter {
public:
    FieldWriter(const std::filesystem::path& path, const Grid2D& grid);
    void write(double t_hr, const ScalarField2D& u);

private:
    std::filesystem::path path_;
    int n_;
};

FieldFile read_fields(const std::filesystem::path& path);

/// Writes field_t<t>.csv for each requested time into out_dir. Each file has
/// the header line t_hr,n,dx_km,units, one line of those values, then n rows
/// of n values. Throws ConfigError for a time with no snapshot.
std::vector<std::filesystem::path> export_fields(const std::filesystem::path& run_dir,
                                                 const std::vector<double>& times_hr,
                                                 const std::filesystem::path& out_dir);

}  // namespace inject
