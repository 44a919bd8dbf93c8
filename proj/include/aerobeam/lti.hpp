#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace aerobeam {

enum class Domain { continuous, discrete };

// SISO rational transfer function in the forward shift operator q.
// Coefficients are stored in descending powers. The denominator is monic
// (den[0] == 1) with degree >= 1, and the numerator degree never exceeds
// the denominator degree (proper). sample_period > 0.
struct DiscreteTf {
  std::vector<double> num;
  std::vector<double> den;
  double sample_period = 0.0;

  // Normalizes the denominator to monic form; throws std::invalid_argument
  // on a zero leading denominator coefficient, degree-zero denominator,
  // improper numerator, or non-positive sample period.
  DiscreteTf(std::vector<double> numerator, std::vector<double> denominator,
             double ts);

  int order() const { return static_cast<int>(den.size()) - 1; }
  std::complex<double> eval(const std::complex<double>& z) const;
};

// Builds b(q) / (q^n - a_{n-1} q^{n-1} - ... - a_0) from difference-equation
// coefficients y[k+n] = sum_i a_i y[k+i] + sum_i b_i u[k+i]. a and b are
// ordered [x_{n-1}, ..., x_0] and must have equal length n >= 1.
DiscreteTf tf_from_arx(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       double ts);

// Dense state-space system x' = Ax + Bu, y = Cx + Du in either domain.
// Continuous systems carry sample_period == 0. Zero-state systems (n == 0)
// represent static gains.
struct StateSpace {
  Eigen::MatrixXd A, B, C, D;
  Domain domain = Domain::discrete;
  double sample_period = 0.0;

  StateSpace() = default;
  StateSpace(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c,
             Eigen::MatrixXd d, Domain dom, double ts);

  static StateSpace gain(const Eigen::MatrixXd& d, Domain dom, double ts);

  int n_states() const { return static_cast<int>(A.rows()); }
  int n_inputs() const { return static_cast<int>(B.cols()); }
  int n_outputs() const { return static_cast<int>(C.rows()); }
};

// Two-port plant partitioned for lower linear-fractional interconnection:
//   x' = A x + B1 w + B2 u
//   z  = C1 x + D11 w + D12 u
//   y  = C2 x + D21 w + D22 u
struct PartitionedPlant {
  Eigen::MatrixXd A, B1, B2, C1, C2, D11, D12, D21, D22;
  Domain domain = Domain::discrete;
  double sample_period = 0.0;

  int n_states() const { return static_cast<int>(A.rows()); }
  // Extracts one open-loop channel as a StateSpace (shared A).
  StateSpace channel_zw() const;
  StateSpace channel_yu() const;
  // Stacked system with inputs [w; u] and outputs [z; y].
  StateSpace joint() const;
};

// Closed loop of a partitioned plant with a controller u = K y under the
// positive-feedback convention u = Cc xc + Dc y, xc' = Ac xc + Bc y.
// system.A/B/C/D hold the closed-loop blocks; for a strictly proper
// controller they reduce to
//   A_cl = [A, B2 Cc; Bc C2, Ac + Bc D22 Cc],  B_cl = [B1; Bc D21],
//   C_cl = [C1, D12 Cc],                       D_cl = D11.
struct ClosedLoop {
  StateSpace system;
  bool stable = false;
  // Spectral radius (discrete) or spectral abscissa (continuous).
  double spectral_extent = 0.0;
  double stability_margin = 0.0;
};

struct StabilityReport {
  bool stable = false;
  // 1 - rho(A) for discrete, -max Re(eig A) for continuous. Boundary
  // eigenvalues count as unstable.
  double margin = 0.0;
  double spectral_extent = 0.0;
};

struct NormResult {
  double value = 0.0;
  double peak_frequency = 0.0;  // rad/s
};

// Controllable-companion realization of a proper SISO transfer function.
StateSpace tf_to_ss(const DiscreteTf& tf);

// Cascade: signal flows through first, then second. Dimensions, domain,
// and sample period must agree.
StateSpace series(const StateSpace& first, const StateSpace& second);

// Lower LFT closure; throws NumericalError when I - Dc D22 is singular
// (ill-posed algebraic loop).
ClosedLoop feedback_lower(const PartitionedPlant& plant,
                          const StateSpace& controller);

// Frequency response at the given frequencies in rad/s: discrete systems
// are evaluated at z = exp(i w Ts) with w in [0, pi/Ts]; continuous at
// s = i w, w >= 0. Out-of-range frequencies throw std::invalid_argument.
std::vector<Eigen::MatrixXcd> freq_response(const StateSpace& sys,
                                            const std::vector<double>& omega);

StabilityReport is_stable(const StateSpace& sys);
StabilityReport is_stable(const Eigen::MatrixXd& a, Domain domain);

// H-infinity norm of a stable system to 1e-6 relative accuracy, computed
// by bisection certified with a structured eigenvalue test (symplectic
// pencil in discrete time, Hamiltonian matrix in continuous time) seeded
// by a 1024-point log-spaced frequency grid. Unstable systems throw
// NumericalError.
NormResult hinf_norm(const StateSpace& sys);

// H2 norm via the controllability Gramian: discrete systems may carry a
// feedthrough (trace D^T D term); continuous systems require D == 0.
double h2_norm(const StateSpace& sys);

enum class C2dMethod { zoh, tustin };

// Continuous -> discrete. ZOH uses the matrix exponential of the stacked
// [A B; 0 0] block; Tustin uses the bilinear map s = (2/Ts)(z-1)/(z+1)
// and throws NumericalError when A has an eigenvalue at 2/Ts.
StateSpace c2d(const StateSpace& sys, double ts, C2dMethod method);

// Inverse bilinear map. Exact round trip with c2d(..., tustin); requires
// no pole at z = -1. Frequencies warp as w_c = (2/Ts) tan(w_d Ts / 2).
StateSpace d2c_bilinear(const StateSpace& sys);

}  // namespace aerobeam
