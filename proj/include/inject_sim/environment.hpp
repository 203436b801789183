#pragma once

/**
 * @file environment.hpp
 * @brief Gym-style episode wrapper around the closed loop: normalized
 *        actions in, log seismicity rates and rewards out.
 */

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "inject_sim/closed_loop.hpp"

namespace inject {

/// Misuse of the episode API (step before reset, step after done, bad action).
class EpisodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kActionDim = 3;

struct MappedAction {
    ControllerGains gains;
    std::array<double, kActionDim> applied{};  ///< action after clamping to [0,1]
    bool clamped = false;
};

/// a1, a2 -> k1, k2 in [0, 5e-4]; a3 -> l = a3 - 1 in [-1, 0].
/// Components are clamped to [0,1] first; NaN is rejected.
MappedAction map_action(std::span<const double> action);

/// Inverse of map_action for gains already inside their ranges.
std::array<double, kActionDim> gains_to_action(const ControllerGains& g);

/// (1/n) [(1 - alpha) exp(-y_ref |y_e|) + alpha exp(-q_ref |Q_c|)], Euclidean
/// norms, Q_c in km^3/hr.
double reward(std::span<const double> y_e, std::span<const double> q_c_km3hr, int n, double alpha, double y_ref,
              double q_ref);

struct EpisodeSpec {
    double duration_hr = 4380.0;
    int decisions = 100;
    double interval_hr() const { return duration_hr / decisions; }
    /// End time of decision k (1-based), exact for k = decisions.
    double boundary_hr(int k) const;
};

/// Episode from the env section of a config.
EpisodeSpec episode_from_env(const SimulationConfig& cfg);
/// Experiment horizon run.t_end_hr split into decisions of (about) the
/// episode decision interval.
EpisodeSpec episode_for_horizon(const SimulationConfig& cfg, double t_end_hr);

/// One inner-step row of the closed-loop trace.
struct TraceRow {
    double t = 0.0;
    std::vector<double> h, r, y_e, R;
    std::vector<double> q_bar_m3hr;
    std::vector<double> q_c;  ///< km^3/hr
    ControllerGains gains;
    double reward = 0.0;  ///< instantaneous reward formula at this row
    double residual_m3hr = 0.0;
};

struct StepInfo {
    double t = 0.0;
    int decision_index = 0;  ///< decisions completed
    std::vector<double> y_e;
    std::vector<double> q_c;         ///< km^3/hr
    std::vector<double> q_bar_m3hr;
    std::vector<double> R;
    ControllerGains gains;
    double constraint_residual_m3hr = 0.0;
    bool clamped = false;
    std::array<double, kActionDim> applied_action{};
    std::optional<std::string> blowup;  ///< message when the run aborted
};

struct StepResult {
    std::vector<double> obs;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

struct EpisodeSummary {
    double mise = 0.0;
    double rms = 0.0;  ///< of Q_c in km^3/hr
    double accumulated_reward = 0.0;
    double t_max_hr = 0.0;
    bool aborted = false;
    std::string error;
};

class Environment {
public:
    Environment(const SimulationConfig& cfg, EpisodeSpec episode);

    /// Start an episode: R = 1, nu = 0, t = 0, random u from the seed.
    std::vector<double> reset(std::uint64_t seed);
    /// Apply one action for one decision interval. Throws EpisodeError when
    /// no episode is active.
    StepResult step(std::span<const double> action);

    bool active() const { return active_; }
    bool done() const { return done_; }
    int decision_index() const { return k_; }
    int obs_dim() const;
    const EpisodeSpec& episode() const { return episode_; }
    const ClosedLoopModel& model() const { return model_; }
    const CoupledState& state() const { return state_; }

    /// Keep every inner-step row (off by default).
    void set_recording(bool on) { recording_ = on; }
    const std::vector<TraceRow>& trace() const { return rows_; }
    const std::vector<std::array<double, kActionDim>>& actions() const { return actions_; }
    EpisodeSummary summary() const;

    /// Called after every inner step and once at t = 0 (for field snapshots).
    void set_state_observer(ClosedLoopModel::StepObserver obs) { observer_ = std::move(obs); }

private:
    std::vector<double> observation(const LoopSample& s) const;
    TraceRow make_row(const LoopSample& s, const ControllerGains& g) const;

    SimulationConfig cfg_;
    EpisodeSpec episode_;
    ClosedLoopModel model_;
    CoupledState state_;
    bool active_ = false;
    bool done_ = false;
    int k_ = 0;
    bool recording_ = false;
    std::vector<TraceRow> rows_;
    std::vector<std::array<double, kActionDim>> actions_;
    double accumulated_ = 0.0;
    std::optional<std::string> abort_;
    ClosedLoopModel::StepObserver observer_;
    // metrics accumulate on every inner step, recorded or not
    std::vector<double> m_t_;
    std::vector<std::vector<double>> m_ye_, m_qc_;
};

}  // namespace inject
