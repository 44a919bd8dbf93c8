#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace aerobeam {

enum class BendingModel { plate, beam };

// Material and geometry of the cantilever. Per-unit-width quantities: the
// section is a plate strip of thickness h, so m = rho h and I = h^3/12.
struct BeamProperties {
  double youngs_modulus = 1e9;  // Pa
  double poisson_ratio = 0.3;
  double density = 1.0;         // kg/m^3
  double damping_ratio = 0.05;  // imposed on the first mode, see build_fem
  double thickness = 2e-3;      // m
  double length = 1.0;          // m
  int n_elements = 20;
  BendingModel bending_model = BendingModel::plate;
  // Membrane coefficient in the in-plane force: E h^3/12 by default (the
  // printed form N = int EI w_x^2 dx), E h/2 with the von Karman option.
  bool von_karman_membrane = false;

  double bending_stiffness() const;     // D
  double mass_per_length() const;       // m
  double membrane_coefficient() const;  // EI or EA/2
  void validate() const;                // throws ConfigError
};

// Piston-theory freestream. rho_inf and a_inf close the nondimensional
// (lambda, mu) pair: rho_inf = mu m / L, a_inf = sqrt(lambda D / (rho_inf
// Minf L^3)), both overridable.
struct AeroParams {
  bool enabled = false;
  double mach = 8.0;
  double lambda = 600.0;
  double mu = 0.1;
  double gamma = 1.4;
  double p_inf = 1.88;  // Pa
  std::optional<double> a_inf_override;

  double rho_inf(const BeamProperties& props) const;
  double a_inf(const BeamProperties& props) const;
  void validate() const;  // throws ConfigError
};

// Assembled cantilever: 2 DOF per node (w, w'), clamped end enforced by
// penalty. Immutable after build_fem.
struct FemSystem {
  BeamProperties props;
  int n_dof = 0;
  double element_length = 0.0;
  double x_control = 0.0;
  double patch_lo = 0.0, patch_hi = 0.0;

  Eigen::MatrixXd mass;       // M
  Eigen::MatrixXd k_lin;      // K_L (no boundary terms)
  Eigen::MatrixXd k_penalty;  // K_b: kappa on w(0), w'(0)
  Eigen::MatrixXd damping;    // C_d = 2 zeta omega_1 M
  Eigen::MatrixXd s_mem;      // S = int phi' phi'^T dx, so N = c (u'S u)
  Eigen::VectorXd f_e;        // patch influence int_{l1}^{l2} phi dx
  Eigen::VectorXd f_c;        // point influence phi(x_c)
  double omega1 = 0.0;        // first natural frequency of (K_L + K_b, M)

  Eigen::MatrixXd k_total_linear() const { return k_lin + k_penalty; }
};

// pre: 0 <= l1 <= l2 <= L, 0 < x_c <= L; throws ConfigError otherwise.
FemSystem build_fem(const BeamProperties& props, double x_c, double l1,
                    double l2);

// K_N(u) = c_mem (u^T S u) S: rank-preserving PSD, quadratic in u.
Eigen::MatrixXd nonlinear_stiffness(const FemSystem& sys,
                                    const Eigen::VectorXd& u);

// Internal membrane force K_N(u) u and its exact tangent
// c_mem [(u^T S u) S + 2 (S u)(S u)^T].
Eigen::VectorXd membrane_force(const FemSystem& sys, const Eigen::VectorXd& u);
Eigen::MatrixXd membrane_tangent(const FemSystem& sys,
                                 const Eigen::VectorXd& u);

// Consistent piston-theory load (7-point Gauss per element). Positive
// normal Mach (upward slope or velocity) compresses the stream side, so
// the returned load opposes positive w. Throws NumericalError when the
// isentropic base 1 + (gamma-1)/2 M_n turns nonpositive at a quadrature
// point (piston formula leaves its domain).
Eigen::VectorXd aero_load(const FemSystem& sys, const AeroParams& aero,
                          const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// Exact Jacobians of aero_load for the Newton solver; either output may be
// null. Same domain check as aero_load.
void aero_jacobians(const FemSystem& sys, const AeroParams& aero,
                    const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                    Eigen::MatrixXd* d_du, Eigen::MatrixXd* d_dv);

// f = f_1 + f_e p_e + f_c p_c with f_1 = -C_d v + aero_load. Pass aero as
// null (or disabled) to drop the aero channel.
Eigen::VectorXd total_force(const FemSystem& sys, const AeroParams* aero,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                            double p_e, double p_c);

// Hermite interpolation row: w(x) = interpolation_row(sys, x) . u.
Eigen::VectorXd interpolation_row(const FemSystem& sys, double x);
double measure_tip(const FemSystem& sys, const Eigen::VectorXd& u, double x);

struct ModeSummary {
  double frequency_hz = 0.0;
  double damping_ratio = 0.0;  // negative = growing (flutter)
};

// Modes of the linearization about u = 0, aero terms included when given;
// sorted by frequency, one entry per conjugate pair (plus any real modes).
std::vector<ModeSummary> linearized_modes(const FemSystem& sys,
                                          const AeroParams* aero);

}  // namespace aerobeam
