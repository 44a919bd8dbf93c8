#include "aerobeam/beam.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aerobeam/errors.hpp"

namespace aerobeam {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 7-point Gauss-Legendre on [0, 1]; exact through polynomial degree 13,
// comfortably covering the degree-6 Hermite products.
constexpr int kQuad = 7;
constexpr double kQuadNode[kQuad] = {
    0.5 - 0.5 * 0.9491079123427585245, 0.5 - 0.5 * 0.7415311855993944398,
    0.5 - 0.5 * 0.4058451513773971716, 0.5,
    0.5 + 0.5 * 0.4058451513773971716, 0.5 + 0.5 * 0.7415311855993944398,
    0.5 + 0.5 * 0.9491079123427585245};
constexpr double kQuadWeight[kQuad] = {
    0.5 * 0.1294849661688696933, 0.5 * 0.2797053914892766679,
    0.5 * 0.3818300505051189449, 0.5 * 0.4179591836734693878,
    0.5 * 0.3818300505051189449, 0.5 * 0.2797053914892766679,
    0.5 * 0.1294849661688696933};

using Vec4 = Eigen::Vector4d;

Vec4 shape(double s, double le) {
  return Vec4(1.0 - 3.0 * s * s + 2.0 * s * s * s,
              le * (s - 2.0 * s * s + s * s * s),
              3.0 * s * s - 2.0 * s * s * s, le * (-s * s + s * s * s));
}

Vec4 shape_dx(double s, double le) {
  return Vec4((-6.0 * s + 6.0 * s * s) / le, 1.0 - 4.0 * s + 3.0 * s * s,
              (6.0 * s - 6.0 * s * s) / le, -2.0 * s + 3.0 * s * s);
}

Vec4 shape_dxx(double s, double le) {
  return Vec4((-6.0 + 12.0 * s) / (le * le), (-4.0 + 6.0 * s) / le,
              (6.0 - 12.0 * s) / (le * le), (-2.0 + 6.0 * s) / le);
}

struct PistonLaw {
  double mach, a_inf, gamma, p_inf;

  double base(double mn) const { return 1.0 + 0.5 * (gamma - 1.0) * mn; }
  double pressure(double mn) const {
    return p_inf * (std::pow(base(mn), 2.0 * gamma / (gamma - 1.0)) - 1.0);
  }
  double pressure_slope(double mn) const {
    return gamma * p_inf *
           std::pow(base(mn), (gamma + 1.0) / (gamma - 1.0));
  }
};

[[noreturn]] void piston_domain_error(double x, double mn, double base) {
  std::ostringstream os;
  os << "aero_load: piston pressure base " << base << " <= 0 at x = " << x
     << " (normal Mach " << mn
     << "); slope or velocity too large for the isentropic formula";
  throw NumericalError(os.str());
}

}  // namespace

double BeamProperties::bending_stiffness() const {
  const double eh3 = youngs_modulus * thickness * thickness * thickness;
  return bending_model == BendingModel::plate
             ? eh3 / (12.0 * (1.0 - poisson_ratio * poisson_ratio))
             : eh3 / 12.0;
}

double BeamProperties::mass_per_length() const { return density * thickness; }

double BeamProperties::membrane_coefficient() const {
  return von_karman_membrane
             ? 0.5 * youngs_modulus * thickness
             : youngs_modulus * thickness * thickness * thickness / 12.0;
}

void BeamProperties::validate() const {
  if (!(youngs_modulus > 0.0) || !(density > 0.0) || !(thickness > 0.0) ||
      !(length > 0.0))
    throw ConfigError("beam: E, rho, h, L must be positive");
  if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5))
    throw ConfigError("beam: Poisson ratio must lie in [0, 0.5)");
  if (n_elements < 2) throw ConfigError("beam: need at least 2 elements");
  if (!(damping_ratio >= 0.0))
    throw ConfigError("beam: damping ratio must be nonnegative");
}

double AeroParams::rho_inf(const BeamProperties& props) const {
  return mu * props.mass_per_length() / props.length;
}

double AeroParams::a_inf(const BeamProperties& props) const {
  if (a_inf_override) return *a_inf_override;
  const double rho = rho_inf(props);
  const double l3 = props.length * props.length * props.length;
  return std::sqrt(lambda * props.bending_stiffness() / (rho * mach * l3));
}

void AeroParams::validate() const {
  if (!(gamma > 1.0)) throw ConfigError("aero: gamma must exceed 1");
  if (!(mach > 1.0))
    throw ConfigError("aero: piston theory needs supersonic Mach");
  if (!(p_inf > 0.0)) throw ConfigError("aero: p_inf must be positive");
  if (!(lambda > 0.0) || !(mu > 0.0))
    throw ConfigError("aero: lambda and mu must be positive");
  if (a_inf_override && !(*a_inf_override > 0.0))
    throw ConfigError("aero: a_inf override must be positive");
}

FemSystem build_fem(const BeamProperties& props, double x_c, double l1,
                    double l2) {
  props.validate();
  const double L = props.length;
  if (!(l1 >= 0.0 && l1 <= l2 && l2 <= L))
    throw ConfigError("beam: excitation patch must satisfy 0 <= l1 <= l2 <= L");
  if (!(x_c > 0.0 && x_c <= L))
    throw ConfigError("beam: control point must lie in (0, L]");

  FemSystem sys;
  sys.props = props;
  const int ne = props.n_elements;
  const int n = 2 * (ne + 1);
  sys.n_dof = n;
  sys.element_length = L / ne;
  sys.x_control = x_c;
  sys.patch_lo = l1;
  sys.patch_hi = l2;

  const double le = sys.element_length;
  const double m = props.mass_per_length();
  const double d = props.bending_stiffness();

  sys.mass = Eigen::MatrixXd::Zero(n, n);
  sys.k_lin = Eigen::MatrixXd::Zero(n, n);
  sys.s_mem = Eigen::MatrixXd::Zero(n, n);
  sys.f_e = Eigen::VectorXd::Zero(n);
  sys.f_c = Eigen::VectorXd::Zero(n);

  for (int e = 0; e < ne; ++e) {
    Eigen::Matrix4d me = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d ke = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d se = Eigen::Matrix4d::Zero();
    for (int q = 0; q < kQuad; ++q) {
      const double s = kQuadNode[q];
      const double wj = kQuadWeight[q] * le;  // d x = le d s
      const Vec4 p = shape(s, le);
      const Vec4 px = shape_dx(s, le);
      const Vec4 pxx = shape_dxx(s, le);
      me += wj * m * p * p.transpose();
      ke += wj * d * pxx * pxx.transpose();
      se += wj * px * px.transpose();
    }
    const int base = 2 * e;
    sys.mass.block<4, 4>(base, base) += me;
    sys.k_lin.block<4, 4>(base, base) += ke;
    sys.s_mem.block<4, 4>(base, base) += se;

    // patch load: integrate phi over the overlap of (l1, l2) with this
    // element; Gauss on the sub-interval stays exact for cubics
    const double xa = e * le, xb = xa + le;
    const double a = std::max(xa, l1), b = std::min(xb, l2);
    if (b > a) {
      Vec4 fe = Vec4::Zero();
      for (int q = 0; q < kQuad; ++q) {
        const double x = a + (b - a) * kQuadNode[q];
        fe += kQuadWeight[q] * (b - a) * shape((x - xa) / le, le);
      }
      sys.f_e.segment<4>(base) += fe;
    }
  }

  const double kappa = 1e7 * sys.k_lin.diagonal().maxCoeff();
  sys.k_penalty = Eigen::MatrixXd::Zero(n, n);
  sys.k_penalty(0, 0) = kappa;
  sys.k_penalty(1, 1) = kappa;

  sys.f_c = Eigen::VectorXd::Zero(n);
  {
    // interpolation_row needs the assembled sys, fill in place instead
    const int e = std::min(static_cast<int>(x_c / le), ne - 1);
    const double s = (x_c - e * le) / le;
    sys.f_c.segment<4>(2 * e) = shape(s, le);
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
      sys.k_total_linear(), sys.mass);
  if (ges.info() != Eigen::Success)
    throw NumericalError("beam: generalized eigensolve for omega_1 failed");
  sys.omega1 = std::sqrt(std::max(ges.eigenvalues()(0), 0.0));
  sys.damping = 2.0 * props.damping_ratio * sys.omega1 * sys.mass;
  return sys;
}

Eigen::MatrixXd nonlinear_stiffness(const FemSystem& sys,
                                    const Eigen::VectorXd& u) {
  const double n_force =
      sys.props.membrane_coefficient() * u.dot(sys.s_mem * u);
  return n_force * sys.s_mem;
}

Eigen::VectorXd membrane_force(const FemSystem& sys, const Eigen::VectorXd& u) {
  const Eigen::VectorXd su = sys.s_mem * u;
  return (sys.props.membrane_coefficient() * u.dot(su)) * su;
}

Eigen::MatrixXd membrane_tangent(const FemSystem& sys,
                                 const Eigen::VectorXd& u) {
  const Eigen::VectorXd su = sys.s_mem * u;
  const double c = sys.props.membrane_coefficient();
  return c * (u.dot(su) * sys.s_mem + 2.0 * su * su.transpose());
}

Eigen::VectorXd aero_load(const FemSystem& sys, const AeroParams& aero,
                          const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  aero.validate();
  const int ne = sys.props.n_elements;
  const double le = sys.element_length;
  const PistonLaw law{aero.mach, aero.a_inf(sys.props), aero.gamma,
                      aero.p_inf};
  Eigen::VectorXd f = Eigen::VectorXd::Zero(sys.n_dof);
  for (int e = 0; e < ne; ++e) {
    const int base = 2 * e;
    const Vec4 ue = u.segment<4>(base);
    const Vec4 ve = v.segment<4>(base);
    Vec4 fe = Vec4::Zero();
    for (int q = 0; q < kQuad; ++q) {
      const double s = kQuadNode[q];
      const Vec4 p = shape(s, le);
      const Vec4 px = shape_dx(s, le);
      const double mn = aero.mach * px.dot(ue) + p.dot(ve) / law.a_inf;
      if (!(law.base(mn) > 0.0))
        piston_domain_error((e + s) * le, mn, law.base(mn));
      // positive pressure pushes against positive w
      fe -= kQuadWeight[q] * le * law.pressure(mn) * p;
    }
    f.segment<4>(base) += fe;
  }
  return f;
}

void aero_jacobians(const FemSystem& sys, const AeroParams& aero,
                    const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                    Eigen::MatrixXd* d_du, Eigen::MatrixXd* d_dv) {
  aero.validate();
  const int ne = sys.props.n_elements;
  const double le = sys.element_length;
  const PistonLaw law{aero.mach, aero.a_inf(sys.props), aero.gamma,
                      aero.p_inf};
  if (d_du) d_du->setZero(sys.n_dof, sys.n_dof);
  if (d_dv) d_dv->setZero(sys.n_dof, sys.n_dof);
  for (int e = 0; e < ne; ++e) {
    const int base = 2 * e;
    const Vec4 ue = u.segment<4>(base);
    const Vec4 ve = v.segment<4>(base);
    for (int q = 0; q < kQuad; ++q) {
      const double s = kQuadNode[q];
      const Vec4 p = shape(s, le);
      const Vec4 px = shape_dx(s, le);
      const double mn = aero.mach * px.dot(ue) + p.dot(ve) / law.a_inf;
      if (!(law.base(mn) > 0.0))
        piston_domain_error((e + s) * le, mn, law.base(mn));
      const double slope = law.pressure_slope(mn) * kQuadWeight[q] * le;
      if (d_du)
        d_du->block<4, 4>(base, base) -=
            slope * aero.mach * p * px.transpose();
      if (d_dv)
        d_dv->block<4, 4>(base, base) -=
            slope / law.a_inf * p * p.transpose();
    }
  }
}

Eigen::VectorXd total_force(const FemSystem& sys, const AeroParams* aero,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                            double p_e, double p_c) {
  Eigen::VectorXd f = -(sys.damping * v);
  if (aero && aero->enabled) f += aero_load(sys, *aero, u, v);
  f += sys.f_e * p_e + sys.f_c * p_c;
  return f;
}

Eigen::VectorXd interpolation_row(const FemSystem& sys, double x) {
  if (!(x >= 0.0 && x <= sys.props.length))
    throw ConfigError("beam: measurement point outside [0, L]");
  const double le = sys.element_length;
  const int e = std::min(static_cast<int>(x / le), sys.props.n_elements - 1);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(sys.n_dof);
  row.segment<4>(2 * e) = shape((x - e * le) / le, le);
  return row;
}

double measure_tip(const FemSystem& sys, const Eigen::VectorXd& u, double x) {
  return interpolation_row(sys, x).dot(u);
}

std::vector<ModeSummary> linearized_modes(const FemSystem& sys,
                                          const AeroParams* aero) {
  const int n = sys.n_dof;
  Eigen::MatrixXd k = sys.k_total_linear();
  Eigen::MatrixXd c = sys.damping;
  if (aero && aero->enabled) {
    Eigen::MatrixXd ju, jv;
    aero_jacobians(sys, *aero, Eigen::VectorXd::Zero(n),
                   Eigen::VectorXd::Zero(n), &ju, &jv);
    k -= ju;
    c -= jv;
  }
  // Quadratic eigenproblem (M s^2 + C s + K) x = 0 as a QZ pencil; forming
  // M^-1 K directly would mix the 1e7 penalty scale into every row and
  // wreck the mid-spectrum modes.
  Eigen::MatrixXd pa = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::MatrixXd pb = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  pa.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  pa.bottomLeftCorner(n, n) = -k;
  pa.bottomRightCorner(n, n) = -c;
  pb.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  pb.bottomRightCorner(n, n) = sys.mass;
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> qz(pa, pb, false);
  if (qz.info() != Eigen::Success)
    throw NumericalError("linearized_modes: QZ iteration failed");

  std::vector<ModeSummary> modes;
  for (int i = 0; i < 2 * n; ++i) {
    const double beta = qz.betas()(i);
    const std::complex<double> alpha = qz.alphas()(i);
    if (std::abs(beta) < 1e-300 * std::abs(alpha)) continue;
    const std::complex<double> lambda = alpha / beta;
    if (lambda.imag() < 0.0) continue;  // one entry per conjugate pair
    const double mag = std::abs(lambda);
    if (mag < 1e-12) continue;
    ModeSummary mode;
    mode.frequency_hz = mag / (2.0 * kPi);
    mode.damping_ratio = -lambda.real() / mag;
    modes.push_back(mode);
  }
  std::sort(modes.begin(), modes.end(),
            [](const ModeSummary& a, const ModeSummary& b) {
              return a.frequency_hz < b.frequency_hz;
            });
  return modes;
}

}  // namespace aerobeam
