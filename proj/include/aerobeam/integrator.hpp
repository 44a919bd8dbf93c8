#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "aerobeam/beam.hpp"

namespace aerobeam {

// Generalized-alpha parameters derived from the spectral radius at infinite
// frequency. rho = 1 is the undamped trapezoidal limit, rho = 0 annihilates
// the highest frequencies in one step.
struct GenAlphaConfig {
  double rho_inf = 0.8;
  double dt = 1e-3;
  double newton_tol = 1e-10;  // relative to the force scale of the step
  int newton_max_iter = 25;

  double alpha_m() const { return (2.0 * rho_inf - 1.0) / (rho_inf + 1.0); }
  double alpha_f() const { return rho_inf / (rho_inf + 1.0); }
  double gamma() const { return 0.5 - alpha_m() + alpha_f(); }
  double beta() const {
    const double s = 1.0 - alpha_m() + alpha_f();
    return 0.25 * s * s;
  }
  void validate() const;
};

struct BeamState {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  Eigen::VectorXd a;
  double t = 0.0;
};

BeamState make_rest_state(const FemSystem& sys);

// Consistent acceleration for the current displacement/velocity and held
// forcing: a = M^{-1}(f_total - K u - f_membrane).
void init_acceleration(const FemSystem& sys, const AeroParams* aero,
                       BeamState& state, double p_e, double p_c);

struct StepDiagnostics {
  int newton_iters = 0;
  double residual = 0.0;
};

// One generalized-alpha step with (p_e, p_c) held constant over [t, t+dt].
// The balance is enforced at the alpha-midpoints; Newton iterates on the
// end-of-step displacement with the analytic membrane and aero tangents.
BeamState step(const FemSystem& sys, const AeroParams* aero,
               const BeamState& state, double p_e, double p_c,
               const GenAlphaConfig& cfg, StepDiagnostics* diag = nullptr);

// Forcing held over step k spanning [t_k, t_k + dt): returns (p_e, p_c).
using ForcingSchedule = std::function<std::pair<double, double>(double t, int k)>;

struct Trajectory {
  std::vector<double> t;    // step times, starting at the initial state
  std::vector<double> tip;  // tip displacement at each time
  std::vector<BeamState> states;  // populated only when requested
  int max_newton_iters = 0;
};

Trajectory simulate(const FemSystem& sys, const AeroParams* aero,
                    const BeamState& initial, const ForcingSchedule& forcing,
                    double t_end, const GenAlphaConfig& cfg,
                    bool record_states = false);

}  // namespace aerobeam
