#include "aerobeam/closed_loop.hpp"

#include <cmath>

#include "aerobeam/errors.hpp"

namespace aerobeam {

SampledController make_sampled_controller(const StateSpace& k) {
  if (k.domain != Domain::discrete)
    throw ConfigError("sampled controller must be a discrete realization");
  if (k.n_inputs() != 1 || k.n_outputs() != 1)
    throw ConfigError("sampled controller must be single-input single-output");
  if (k.D(0, 0) != 0.0)
    throw ConfigError("sampled controller must be strictly proper");
  SampledController ctrl;
  ctrl.A = k.A;
  ctrl.B = k.B;
  ctrl.C = k.C;
  ctrl.x = Eigen::VectorXd::Zero(k.n_states());
  ctrl.ts = k.sample_period;
  return ctrl;
}

double controller_step(SampledController& ctrl, double y_k) {
  const double u = ctrl.x.size() > 0 ? (ctrl.C * ctrl.x)(0) : 0.0;
  if (ctrl.x.size() > 0) ctrl.x = ctrl.A * ctrl.x + ctrl.B * y_k;
  return u;
}

double disturbance_sample(const DisturbanceSpec& dist, int k) {
  if (dist.kind != DisturbanceKind::harmonic) return 0.0;
  return dist.amplitude * std::sin(dist.frequency * k);
}

RunRecord run_closed_loop(const FemSystem& sys, const AeroParams* aero,
                          SampledController* ctrl, const DisturbanceSpec& dist,
                          const RunOptions& opt) {
  if (!(opt.t_end > 0.0) || !(opt.ts > 0.0))
    throw ConfigError("run horizon and controller period must be positive");
  opt.integ.validate();
  const double ratio = opt.ts / opt.integ.dt;
  const auto substeps = static_cast<long>(std::llround(ratio));
  if (substeps < 1 || std::abs(ratio - double(substeps)) > 1e-9 * ratio)
    throw ConfigError(
        "controller period must be an exact integer multiple of the "
        "integrator step");

  FemSystem plant = sys;
  if (opt.x_c) {
    if (!(*opt.x_c > 0.0) || *opt.x_c > sys.props.length)
      throw ConfigError("actuator location must lie in (0, L]");
    plant.x_control = *opt.x_c;
    plant.f_c = interpolation_row(sys, *opt.x_c);
  }

  const double dt = opt.ts / double(substeps);
  const auto ticks = static_cast<long>(std::floor(opt.t_end / opt.ts + 1e-9));
  GenAlphaConfig cfg = opt.integ;
  cfg.dt = dt;

  RunRecord rec;
  rec.k.reserve(ticks);
  rec.t.reserve(ticks);
  rec.w.reserve(ticks);
  rec.y.reserve(ticks);
  rec.u.reserve(ticks);

  BeamState state = make_rest_state(plant);
  const bool impulse = dist.kind == DisturbanceKind::impulse;
  StepDiagnostics diag;

  for (long k = 0; k < ticks; ++k) {
    const double t_tick = k * opt.ts;
    const double y_k = measure_tip(plant, state.u, plant.props.length);
    const bool active =
        ctrl != nullptr &&
        (!opt.drop_controller_at || t_tick < *opt.drop_controller_at);
    const double u_k = active ? controller_step(*ctrl, y_k) : 0.0;
    const double w_k = disturbance_sample(dist, static_cast<int>(k));

    // The impulse is spread over exactly one substep; its held height is
    // logged at the tick that contains it so the record reflects the hit.
    double w_logged = w_k;

    for (long s = 0; s < substeps; ++s) {
      const double t_sub = t_tick + s * dt;
      double p_c = u_k;
      if (impulse && dist.impulse_time >= t_sub &&
          dist.impulse_time < t_sub + dt) {
        p_c += dist.impulse_magnitude / dt;
        w_logged = dist.impulse_magnitude / dt;
      }
      if (k == 0 && s == 0)
        init_acceleration(plant, aero, state, w_k, p_c);
      state = step(plant, aero, state, w_k, p_c, cfg, &diag);
      rec.max_newton_iters = std::max(rec.max_newton_iters, diag.newton_iters);
      if (opt.record_fine) {
        rec.t_fine.push_back(t_sub + dt);
        rec.w_fine.push_back(w_k);
        rec.u_fine.push_back(u_k);
        rec.y_fine.push_back(
            measure_tip(plant, state.u, plant.props.length));
      }
    }

    rec.k.push_back(static_cast<int>(k));
    rec.t.push_back(t_tick);
    rec.w.push_back(w_logged);
    rec.y.push_back(y_k);
    rec.u.push_back(u_k);
  }
  return rec;
}

AmplitudeMetric amplitude_metric(const RunRecord& record, double window) {
  const size_t n = record.y.size();
  const auto take = static_cast<size_t>(std::floor(n * window));
  if (take == 0)
    throw ConfigError("amplitude window selects no samples");
  AmplitudeMetric m;
  double sq = 0.0;
  for (size_t i = n - take; i < n; ++i) {
    m.peak = std::max(m.peak, std::abs(record.y[i]));
    sq += record.y[i] * record.y[i];
  }
  m.rms = std::sqrt(sq / double(take));
  return m;
}

}  // namespace aerobeam
