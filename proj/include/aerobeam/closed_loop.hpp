#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "aerobeam/beam.hpp"
#include "aerobeam/integrator.hpp"
#include "aerobeam/lti.hpp"

namespace aerobeam {

// Discrete control law with its running state. The command is read from
// the pre-update state, so a measurement reaches the input one sample
// later: the latency a strictly proper law implies.
struct SampledController {
  Eigen::MatrixXd A, B, C;
  Eigen::VectorXd x;
  double ts = 0.0;
};

// Wraps a strictly proper discrete SISO realization with zeroed state;
// throws ConfigError on domain, width, or feedthrough violations.
SampledController make_sampled_controller(const StateSpace& k);

// u_k = C x, then x <- A x + B y_k.
double controller_step(SampledController& ctrl, double y_k);

enum class DisturbanceKind { none, harmonic, impulse };

// Exogenous excitation. The harmonic pressure acts on the patch and is
// held over each controller interval: w_k = amplitude sin(frequency k).
// The impulse is a point hit through the control influence vector, spread
// over the one integrator step containing `impulse_time` (held height
// magnitude/dt, so the time integral is the configured magnitude).
struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::none;
  double amplitude = 1e-3;
  double frequency = 1.0471975511965976;  // pi/3 rad per sample
  // Patch bounds consumed when the hosting system is assembled.
  double patch_lo = 0.7;
  double patch_hi = 0.8;
  double impulse_magnitude = 1e-2;  // N*s
  double impulse_time = 0.0;
};

// Held patch pressure for tick k (zero for none and impulse kinds).
double disturbance_sample(const DisturbanceSpec& dist, int k);

struct RunOptions {
  double t_end = 10.0;
  double ts = 5e-3;      // controller period; must be integ.dt times an integer
  GenAlphaConfig integ;  // integ.dt is the substep
  std::optional<double> x_c;                 // actuator relocation
  std::optional<double> drop_controller_at;  // open the loop at this time
  bool record_fine = false;                  // also log every substep
};

struct RunRecord {
  std::vector<int> k;
  std::vector<double> t, w, y, u;  // one row per controller tick
  std::vector<double> t_fine, w_fine, y_fine, u_fine;  // when record_fine
  int max_newton_iters = 0;
};

// Sampled-data co-simulation: sample the tip, step the control law, hold
// pressure and command over the next interval, substep the continuous
// system. ctrl may be null (open loop); the held command is then zero.
// Throws ConfigError when ts is not an exact integer multiple of integ.dt
// or the actuator relocation leaves the span.
RunRecord run_closed_loop(const FemSystem& sys, const AeroParams* aero,
                          SampledController* ctrl, const DisturbanceSpec& dist,
                          const RunOptions& opt);

struct AmplitudeMetric {
  double peak = 0.0;
  double rms = 0.0;
};

// Peak and RMS of |y| over the final `window` fraction of the record.
// Throws ConfigError when the window selects no samples.
AmplitudeMetric amplitude_metric(const RunRecord& record, double window = 0.3);

}  // namespace aerobeam
