#pragma once

#include <optional>

#include "aerobeam/lti.hpp"

namespace aerobeam {

// Frequency weights applied to the measured output (wy) and the control
// signal (wu) when the synthesis plant is assembled. Both must be proper
// and stable and share the model's sample period.
struct WeightPair {
  DiscreteTf wy;
  DiscreteTf wu;
};

// Filter pairs used by the two bench campaigns. The harmonic pair peaks the
// output weight at the disturbance line (phase advance pi/3 per sample) and
// keeps a mild first-order lag on the control channel; the flutter pair is
// a narrow resonator near the dominant aeroelastic mode with a biproper
// control weight that keeps authority away from high frequencies.
WeightPair harmonic_weights(double ts);
WeightPair flutter_weights(double ts);

// Generic resonant output weight: a second-order band-pass with poles just
// inside the unit circle at peak_rad_s, a zero at q = 1 to block DC, and
// magnitude peak_gain at the peak. The control weight is a first-order lag
// of gain control_gain. Throws ConfigError when peak_rad_s reaches the
// Nyquist rate or the bandwidth or gains are not positive.
WeightPair design_weights(double peak_rad_s, double bandwidth_rad_s,
                          double peak_gain, double control_gain, double ts);

// Weighted two-port synthesis plant around a shared realization of G:
//   z   = G (w + wu u)          (performance channel)
//   y_f = wy G (w + wu u)       (controller measurement)
// States are ordered [x_G; x_wy; x_wu], so n_states is the sum of the
// three orders and no dynamics of G are duplicated between channels.
struct GeneralizedPlant {
  PartitionedPlant p;  // discrete, exactly as assembled (no regularization)
  int n_model = 0;
  int n_output_weight = 0;
  int n_control_weight = 0;
};

// Throws ConfigError on a sample-period mismatch or an unstable weight.
GeneralizedPlant build_generalized_plant(const DiscreteTf& model,
                                         const WeightPair& weights);

struct SynthesisDiagnostics {
  double gamma_infimum = 0.0;    // feasibility boundary found by bisection
  double gamma_synthesis = 0.0;  // level the returned controller targets
  double x_residual = 0.0;
  double y_residual = 0.0;
  double coupling_ratio = 0.0;   // rho(XY)/gamma^2 at gamma_synthesis
  double epsilon = 0.0;          // feedthrough regularization actually used
  // Disturbance feedthrough of the bilinear image, removed exactly inside
  // the Riccati stage by a gamma-dependent loop shift.
  double disturbance_feedthrough = 0.0;
  // Magnitude of the design feedthrough folded into the controller's
  // one-sample delay state.
  double controller_feedthrough = 0.0;
  int bisection_steps = 0;
  int relax_steps = 0;
};

struct SynthesisResult {
  // Discrete, strictly proper by construction (the design acts through a
  // one-sample delay, so no feedthrough is truncated).
  StateSpace controller;
  // Certified H-infinity norm of the closed weighted loop, recomputed on
  // the unmodified plant with the delivered controller.
  double gamma_inf = 0.0;
  // Squared H2 norm of the same closed loop.
  double h2 = 0.0;
  SynthesisDiagnostics diag;
};

// Output-feedback H-infinity design producing a strictly proper discrete
// controller. The control channel is augmented with a one-sample delay (so
// the delivered law, design composed with the delay, is strictly proper
// with nothing truncated), the plant is mapped through the bilinear
// transform with near-vanishing design feedthroughs floored (the floor
// escalates over a small ladder whenever no level certifies), and at each
// level a coupled-Riccati feasibility test produces a central controller
// that is mapped back and certified on the original discrete plant.
// Bisection runs on that full certified predicate between zero and the
// first certifying level (starting at twice the open-loop weighted norm
// plus one and relaxed by 1.25x until one certifies), terminating at a 1%
// relative gap. When the weighted open loop is stable, its norm is an
// admissible level with no controller at all, and the result never loses
// to it. With gamma_target given, bisection is skipped and that level must
// certify or a NumericalError reports that no controller was found at the
// bound.
SynthesisResult hinf_synthesize(const GeneralizedPlant& plant,
                                std::optional<double> gamma_target = {});

// The per-gamma feasibility test the bisection runs: both Riccati solutions
// exist, are positive semidefinite, and satisfy the spectral-radius
// coupling bound.
bool hinf_feasible(const GeneralizedPlant& plant, double gamma);

// Squared H2 norm of the closed loop of plant and controller; throws
// NumericalError when the loop is unstable.
double h2_cost(const GeneralizedPlant& plant, const StateSpace& controller);

}  // namespace aerobeam
