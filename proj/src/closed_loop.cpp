#include "inject_sim/closed_loop.hpp"

#include <algorithm>
#include <cmath>

#include "inject_sim/errors.hpp"
#include "inject_sim/seismicity.hpp"

namespace inject {

namespace {

constexpr double kTimeTol = 1e-9;

Eigen::MatrixXd matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return M;
}

void insert_unless_near(std::vector<double>& pts, double t) {
    for (double p : pts) {
        if (std::abs(p - t) <= kTimeTol * std::max(1.0, std::abs(t))) return;
    }
    pts.push_back(t);
}

}  // namespace

struct ClosedLoopModel::Impl {
    SimulationConfig cfg;
    bool controlled = true;
    Grid2D grid;
    SpectralWorkspace ws;
    WellLayout layout;
    std::vector<Region> regions;
    FluxConstraint constraint;
    NominalInputMatrix b0;
    DemandProfile demand;
    ReferenceProfile reference;
    double dt = 1.0;
    ScalarField2D open_loop_sources;
    Eigen::VectorXd open_loop_flux;

    explicit Impl(const SimulationConfig& c)
        : cfg(c),
          grid(c.grid_n, c.reservoir.d_x),
          ws(grid),
          regions(build_regions(c.regions, grid, c.reservoir.d_z)),
          demand(c.scenario.demand),
          reference(c.scenario.reference),
          dt(stable_dt(c.reservoir, grid, c.dt_max_hr)) {}
};

ClosedLoopModel::ClosedLoopModel(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
ClosedLoopModel::ClosedLoopModel(ClosedLoopModel&&) noexcept = default;
ClosedLoopModel& ClosedLoopModel::operator=(ClosedLoopModel&&) noexcept = default;
ClosedLoopModel::~ClosedLoopModel() = default;

ClosedLoopModel ClosedLoopModel::controlled(const SimulationConfig& cfg) {
    cfg.validate();
    auto impl = std::make_unique<Impl>(cfg);
    impl->controlled = true;
    impl->layout = build_layout(cfg.wells, impl->grid);
    impl->constraint = FluxConstraint::make(matrix_from_rows(cfg.scenario.W));
    impl->b0 = build_b0(impl->layout, impl->regions, nominal_params(cfg.reservoir, cfg.nominal_inflation),
                        impl->constraint);
    return ClosedLoopModel(std::move(impl));
}

ClosedLoopModel ClosedLoopModel::open_loop(const SimulationConfig& cfg) {
    cfg.validate();
    auto impl = std::make_unique<Impl>(cfg);
    impl->controlled = false;
    const auto& xy = cfg.scenario.nocontrol_well_km;
    impl->layout = build_layout({WellSpec{"q_s1", xy[0], xy[1]}}, impl->grid);
    impl->open_loop_flux = Eigen::VectorXd::Constant(1, m3hr_to_km3hr(cfg.scenario.demand.qs_m3_hr));
    impl->open_loop_sources = assemble_sources(
        impl->layout, std::span<const double>(impl->open_loop_flux.data(), 1), cfg.reservoir, impl->grid);
    return ClosedLoopModel(std::move(impl));
}

bool ClosedLoopModel::is_controlled() const { return impl_->controlled; }
const SimulationConfig& ClosedLoopModel::config() const { return impl_->cfg; }
const Grid2D& ClosedLoopModel::grid() const { return impl_->grid; }
const WellLayout& ClosedLoopModel::layout() const { return impl_->layout; }
const std::vector<Region>& ClosedLoopModel::regions() const { return impl_->regions; }
const FluxConstraint& ClosedLoopModel::constraint() const { return impl_->constraint; }
const NominalInputMatrix& ClosedLoopModel::nominal_b0() const { return impl_->b0; }
const DemandProfile& ClosedLoopModel::demand() const { return impl_->demand; }
const ReferenceProfile& ClosedLoopModel::reference() const { return impl_->reference; }
double ClosedLoopModel::step_size() const { return impl_->dt; }

CoupledState ClosedLoopModel::initial_state(std::uint64_t seed) const {
    CoupledState s;
    s.u = init_random_pressure(impl_->grid, seed, impl_->cfg.init_pressure_amp());
    s.R.assign(impl_->regions.size(), 1.0);
    s.nu.assign(impl_->controlled ? impl_->regions.size() : 0, 0.0);
    s.t = 0.0;
    return s;
}

CoupledState ClosedLoopModel::derivative(const CoupledState& s, double t, const ControllerGains& gains) {
    auto& m = *impl_;
    CoupledState d;
    d.t = t;
    d.nu.assign(s.nu.size(), 0.0);

    ScalarField2D sources;
    if (m.controlled) {
        const std::vector<double> y = output_y(s.R);
        const ReferenceSample ref = m.reference.reference_at(t);
        std::vector<double> y_e(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) y_e[i] = y[i] - ref.r[i];
        const Eigen::VectorXd D = m.demand.demand_at(t);
        const ControllerOutput out = control_flux(y_e, s.nu, ref.r_dot, gains, m.b0, m.constraint, D);
        sources = assemble_sources(m.layout, std::span<const double>(out.Q_bar.data(), out.Q_bar.size()),
                                   m.cfg.reservoir, m.grid);
        for (std::size_t i = 0; i < d.nu.size(); ++i) d.nu[i] = out.nu_dot(static_cast<Eigen::Index>(i));
    } else {
        output_y(s.R);  // positivity check
        sources = m.open_loop_sources;
    }

    d.u = pressure_rhs(s.u, sources, m.cfg.reservoir, m.ws);
    d.R.resize(s.R.size());
    for (std::size_t i = 0; i < s.R.size(); ++i) {
        const double ut_integral = region_volume_integral(d.u, m.regions[i], m.cfg.reservoir.d_z);
        d.R[i] = sr_rhs(s.R[i], ut_integral, m.regions[i], m.cfg.reservoir);
    }
    return d;
}

LoopSample ClosedLoopModel::sample(const CoupledState& s, const ControllerGains& gains) const {
    const auto& m = *impl_;
    LoopSample out;
    out.t = s.t;
    out.R = s.R;
    out.y = output_y(s.R);
    const ReferenceSample ref = m.reference.reference_at(s.t);
    out.r = ref.r;
    out.r_dot = ref.r_dot;
    out.y_e.resize(out.y.size());
    for (std::size_t i = 0; i < out.y.size(); ++i) out.y_e[i] = out.y[i] - out.r[i];
    if (m.controlled) {
        out.demand = m.demand.demand_at(s.t);
        const ControllerOutput c = control_flux(out.y_e, s.nu, ref.r_dot, gains, m.b0, m.constraint, out.demand);
        out.Q_c = c.Q_c;
        out.Q_bar = c.Q_bar;
        out.residual_m3hr = km3hr_to_m3hr(constraint_residual(m.constraint, c.Q_bar, out.demand));
    } else {
        out.Q_bar = m.open_loop_flux;
    }
    return out;
}

std::vector<double> ClosedLoopModel::step_plan(double t0, double t1) const {
    const auto& m = *impl_;
    std::vector<double> breaks{t1};
    for (double ts : m.demand.switch_times(t0, t1)) {
        insert_unless_near(breaks, ts);
    }
    const double snap = m.cfg.snapshot_hr;
    for (auto k = static_cast<long>(std::floor(t0 / snap)) + 1;; ++k) {
        const double ts = static_cast<double>(k) * snap;
        if (ts >= t1) break;
        if (ts > t0) insert_unless_near(breaks, ts);
    }
    std::sort(breaks.begin(), breaks.end());

    std::vector<double> plan;
    double a = t0;
    for (double b : breaks) {
        const double len = b - a;
        if (!(len > 0.0)) continue;
        const auto k = std::max<long>(1, static_cast<long>(std::ceil(len / m.dt * (1.0 - 1e-12))));
        const double h = len / static_cast<double>(k);
        for (long i = 1; i < k; ++i) plan.push_back(a + static_cast<double>(i) * h);
        plan.push_back(b);
        a = b;
    }
    return plan;
}

void ClosedLoopModel::advance(CoupledState& s, double t1, const ControllerGains& gains, const StepObserver& observer) {
    const CoupledRhs rhs = [this, &gains](const CoupledState& x, double t) { return derivative(x, t, gains); };
    for (double t_next : step_plan(s.t, t1)) {
        CoupledState next = rk3_step(s, t_next - s.t, rhs);
        next.t = t_next;
        s = std::move(next);
        if (observer) observer(s);
    }
}

}  // namespace inject
