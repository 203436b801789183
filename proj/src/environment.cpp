#include "inject_sim/environment.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "inject_sim/errors.hpp"

namespace inject {

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

MappedAction map_action(std::span<const double> action) {
    if (action.size() != kActionDim) {
        throw EpisodeError(fmt::format("action must have {} components (got {})", kActionDim, action.size()));
    }
    MappedAction out;
    for (int i = 0; i < kActionDim; ++i) {
        const double a = action[static_cast<std::size_t>(i)];
        if (std::isnan(a)) throw EpisodeError("action component is NaN");
        const double c = std::clamp(a, 0.0, 1.0);
        out.clamped = out.clamped || c != a;
        out.applied[static_cast<std::size_t>(i)] = c;
    }
    out.gains.k1 = kGainMax * out.applied[0];
    out.gains.k2 = kGainMax * out.applied[1];
    out.gains.l = out.applied[2] - 1.0;
    return out;
}

std::array<double, kActionDim> gains_to_action(const ControllerGains& g) {
    g.validate();
    return {g.k1 / kGainMax, g.k2 / kGainMax, g.l + 1.0};
}

double reward(std::span<const double> y_e, std::span<const double> q_c_km3hr, int n, double alpha, double y_ref,
              double q_ref) {
    if (n < 1) throw ConfigError("reward: n must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("reward: alpha must be in [0,1]");
    return ((1.0 - alpha) * std::exp(-y_ref * norm2(y_e)) + alpha * std::exp(-q_ref * norm2(q_c_km3hr))) / n;
}

double EpisodeSpec::boundary_hr(int k) const {
    if (k >= decisions) return duration_hr;
    return static_cast<double>(k) * interval_hr();
}

EpisodeSpec episode_from_env(const SimulationConfig& cfg) { return {cfg.env.episode_hr, cfg.env.decisions}; }

EpisodeSpec episode_for_horizon(const SimulationConfig& cfg, double t_end_hr) {
    if (!(t_end_hr > 0.0)) throw ConfigError("horizon must be > 0");
    const double interval = cfg.env.episode_hr / cfg.env.decisions;
    const auto n = std::max<long>(1, std::lround(t_end_hr / interval));
    return {t_end_hr, static_cast<int>(n)};
}

Environment::Environment(const SimulationConfig& cfg, EpisodeSpec episode)
    : cfg_(cfg), episode_(episode), model_(ClosedLoopModel::controlled(cfg)) {
    if (episode_.decisions < 1) throw ConfigError("env: decisions must be >= 1");
    if (!(episode_.duration_hr > 0.0)) throw ConfigError("env: episode duration must be > 0");
    if (episode_.interval_hr() < model_.step_size()) {
        throw ConfigError(fmt::format("env: decision interval {} hr is shorter than the inner step {} hr",
                                      episode_.interval_hr(), model_.step_size()));
    }
}

int Environment::obs_dim() const {
    const auto m = static_cast<int>(model_.regions().size());
    return cfg_.env.extended_obs ? 2 * m : m;
}

std::vector<double> Environment::observation(const LoopSample& s) const {
    std::vector<double> obs = s.y;
    if (cfg_.env.extended_obs) obs.insert(obs.end(), s.r.begin(), s.r.end());
    return obs;
}

TraceRow Environment::make_row(const LoopSample& s, const ControllerGains& g) const {
    TraceRow row;
    row.t = s.t;
    row.h = s.y;
    row.r = s.r;
    row.y_e = s.y_e;
    row.R = s.R;
    row.q_bar_m3hr.resize(static_cast<std::size_t>(s.Q_bar.size()));
    for (Eigen::Index j = 0; j < s.Q_bar.size(); ++j) row.q_bar_m3hr[static_cast<std::size_t>(j)] = km3hr_to_m3hr(s.Q_bar(j));
    row.q_c = to_std(s.Q_c);
    row.gains = g;
    row.reward = reward(row.y_e, row.q_c, episode_.decisions, cfg_.env.alpha, cfg_.env.y_ref, cfg_.env.q_ref);
    row.residual_m3hr = s.residual_m3hr;
    return row;
}

std::vector<double> Environment::reset(std::uint64_t seed) {
    state_ = model_.initial_state(seed);
    active_ = true;
    done_ = false;
    k_ = 0;
    rows_.clear();
    actions_.clear();
    accumulated_ = 0.0;
    abort_.reset();
    m_t_.clear();
    m_ye_.clear();
    m_qc_.clear();
    const LoopSample s = model_.sample(state_, ControllerGains{});
    spdlog::debug("reset seed={} decisions={} interval={} hr", seed, episode_.decisions, episode_.interval_hr());
    return observation(s);
}

StepResult Environment::step(std::span<const double> action) {
    if (!active_) throw EpisodeError("not reset");
    if (done_) throw EpisodeError("episode is done; reset first");

    MappedAction mapped = map_action(action);
    if (cfg_.controller.fixed_gains) {
        mapped.gains = {cfg_.controller.k1, cfg_.controller.k2, cfg_.controller.l};
        mapped.applied = gains_to_action(mapped.gains);
    }
    const ControllerGains gains = mapped.gains;
    actions_.push_back(mapped.applied);

    auto record = [&](const CoupledState& x) {
        const LoopSample s = model_.sample(x, gains);
        m_t_.push_back(s.t);
        m_ye_.push_back(s.y_e);
        m_qc_.push_back(to_std(s.Q_c));
        if (recording_) rows_.push_back(make_row(s, gains));
        if (observer_) observer_(x);
    };
    if (k_ == 0) record(state_);

    StepResult out;
    const double t1 = episode_.boundary_hr(k_ + 1);
    try {
        model_.advance(state_, t1, gains, record);
    } catch (const BlowUpError& e) {
        spdlog::warn("blow-up at decision {}: {}", k_, e.what());
        abort_ = e.what();
        done_ = true;
        ++k_;
        out.reward = 0.0;
        out.done = true;
        out.info.t = e.t_hr();
        out.info.decision_index = k_;
        out.info.gains = gains;
        out.info.clamped = mapped.clamped;
        out.info.applied_action = mapped.applied;
        out.info.blowup = e.what();
        out.info.R = state_.R;
        out.obs.assign(static_cast<std::size_t>(obs_dim()), 0.0);
        for (std::size_t i = 0; i < state_.R.size() && i < out.obs.size(); ++i) {
            if (state_.R[i] > 0.0) out.obs[i] = std::log(state_.R[i]);
        }
        return out;
    }

    const LoopSample s = model_.sample(state_, gains);
    ++k_;
    out.obs = observation(s);
    out.info.t = s.t;
    out.info.decision_index = k_;
    out.info.y_e = s.y_e;
    out.info.q_c = to_std(s.Q_c);
    for (Eigen::Index j = 0; j < s.Q_bar.size(); ++j) out.info.q_bar_m3hr.push_back(km3hr_to_m3hr(s.Q_bar(j)));
    out.info.R = s.R;
    out.info.gains = gains;
    out.info.constraint_residual_m3hr = s.residual_m3hr;
    out.info.clamped = mapped.clamped;
    out.info.applied_action = mapped.applied;
    out.reward = reward(s.y_e, out.info.q_c, episode_.decisions, cfg_.env.alpha, cfg_.env.y_ref, cfg_.env.q_ref);
    accumulated_ += out.reward;
    done_ = k_ >= episode_.decisions;
    out.done = done_;
    return out;
}

EpisodeSummary Environment::summary() const {
    EpisodeSummary s;
    s.accumulated_reward = accumulated_;
    if (!m_t_.empty()) {
        const TrackingMetrics m = metrics_mise_rms(m_t_, m_ye_, m_qc_);
        s.mise = m.mise;
        s.rms = m.rms;
        s.t_max_hr = m_t_.back();
    }
    if (abort_) {
        s.aborted = true;
        s.error = *abort_;
    }
    return s;
}

}  // namespace inject
