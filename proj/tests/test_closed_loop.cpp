#include "aerobeam/closed_loop.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "aerobeam/errors.hpp"
#include "aerobeam/lti.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace aerobeam;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kPi = 3.14159265358979323846;

FemSystem small_fem(int elements = 6, double x_c = 1.0) {
  BeamProperties props;
  props.n_elements = elements;
  return build_fem(props, x_c, 0.7, 0.8);
}

SampledController tiny_controller(double ts, double gain = 1.0) {
  MatrixXd a(1, 1), b(1, 1), c(1, 1);
  a << 0.5;
  b << 1.0;
  c << gain;
  return make_sampled_controller(
      StateSpace(a, b, c, MatrixXd::Zero(1, 1), Domain::discrete, ts));
}

// Continuous linear model of the assembled beam: x = [u; v], inputs
// (patch pressure, control force), output tip deflection.
StateSpace linear_beam_model(const FemSystem& sys) {
  const int n = sys.n_dof;
  const Eigen::LLT<MatrixXd> mass(sys.mass);
  MatrixXd a = MatrixXd::Zero(2 * n, 2 * n);
  a.topRightCorner(n, n).setIdentity();
  a.bottomLeftCorner(n, n) = -mass.solve(sys.k_total_linear());
  a.bottomRightCorner(n, n) = -mass.solve(sys.damping);
  MatrixXd b = MatrixXd::Zero(2 * n, 2);
  b.bottomLeftCorner(n, 1) = mass.solve(sys.f_e);
  b.bottomRightCorner(n, 1) = mass.solve(sys.f_c);
  MatrixXd c = MatrixXd::Zero(1, 2 * n);
  c.leftCols(n) = interpolation_row(sys, sys.props.length).transpose();
  return StateSpace(a, b, c, MatrixXd::Zero(1, 2), Domain::continuous, 0.0);
}

}  // namespace

TEST_CASE("controller output precedes the state update") {
  SampledController ctrl = tiny_controller(0.01);
  CHECK(controller_step(ctrl, 1.0) == 0.0);
  CHECK(controller_step(ctrl, 0.0) == 1.0);
  CHECK(controller_step(ctrl, 0.0) == 0.5);

  SampledController fresh = tiny_controller(0.01);
  CHECK(controller_step(fresh, -17.3) == 0.0);
}

TEST_CASE("hundred-step recursion matches the matrix-power impulse response") {
  auto rng = make_rng(71);
  const StateSpace k =
      random_stable_ss(rng, 4, 1, 1, Domain::discrete, 0.01, false);
  SampledController ctrl = make_sampled_controller(k);

  std::vector<double> response;
  for (int i = 0; i < 100; ++i)
    response.push_back(controller_step(ctrl, i == 0 ? 1.0 : 0.0));

  CHECK(response[0] == 0.0);
  MatrixXd power = MatrixXd::Identity(4, 4);
  for (int i = 1; i < 100; ++i) {
    const double expected = (k.C * power * k.B)(0, 0);
    CHECK(response[i] == doctest::Approx(expected).epsilon(1e-12));
    power = k.A * power;
  }
}

TEST_CASE("controller wrapper rejects improper realizations") {
  MatrixXd a(1, 1), b(1, 1), c(1, 1), d(1, 1);
  a << 0.5;
  b << 1.0;
  c << 1.0;
  d << 0.25;
  CHECK_THROWS_AS(make_sampled_controller(
                      StateSpace(a, b, c, d, Domain::discrete, 0.01)),
                  ConfigError);
  CHECK_THROWS_AS(make_sampled_controller(StateSpace(
                      a, b, c, MatrixXd::Zero(1, 1), Domain::continuous, 0.0)),
                  ConfigError);
  auto rng = make_rng(5);
  CHECK_THROWS_AS(make_sampled_controller(random_stable_ss(
                      rng, 2, 2, 1, Domain::discrete, 0.01, false)),
                  ConfigError);
}

TEST_CASE("undisturbed loop stays exactly at rest") {
  const FemSystem sys = small_fem();
  SampledController ctrl = tiny_controller(5e-3);
  DisturbanceSpec dist;
  dist.kind = DisturbanceKind::none;
  RunOptions opt;
  opt.t_end = 0.1;
  opt.ts = 5e-3;
  opt.integ.dt = 1e-3;

  const RunRecord rec = run_closed_loop(sys, nullptr, &ctrl, dist, opt);
  REQUIRE(rec.y.size() == 20);
  for (size_t i = 0; i < rec.y.size(); ++i) {
    CHECK(rec.y[i] == 0.0);
    CHECK(rec.u[i] == 0.0);
    CHECK(rec.w[i] == 0.0);
  }
}

TEST_CASE("held commands are bit-equal between controller ticks") {
  const FemSystem sys = small_fem();
  SampledController ctrl = tiny_controller(5e-3, 2.0);
  DisturbanceSpec dist;
  dist.kind = DisturbanceKind::harmonic;
  RunOptions opt;
  opt.t_end = 0.25;
  opt.ts = 5e-3;
  opt.integ.dt = 1e-3;
  opt.record_fine = true;

  const RunRecord rec = run_closed_loop(sys, nullptr, &ctrl, dist, opt);
  const size_t substeps = 5;
  REQUIRE(rec.u_fine.size() == rec.u.size() * substeps);
  for (size_t k = 0; k < rec.u.size(); ++k) {
    for (size_t s = 0; s < substeps; ++s) {
      CHECK(rec.u_fine[k * substeps + s] == rec.u[k]);
      CHECK(rec.w_fine[k * substeps + s] == rec.w[k]);
    }
  }
}

TEST_CASE("harmonic schedule follows the configured line") {
  DisturbanceSpec dist;
  dist.kind = DisturbanceKind::harmonic;
  dist.amplitude = 2.5e-3;
  for (int k = 0; k < 12; ++k)
    CHECK(disturbance_sample(dist, k) ==
          doctest::Approx(2.5e-3 * std::sin(kPi * k / 3.0)).epsilon(1e-15));
  // Regenerating the sequence gives identical samples.
  for (int k = 0; k < 12; ++k)
    CHECK(disturbance_sample(dist, k) == disturbance_sample(dist, k));
}

TEST_CASE("open-loop linear-regime response matches a sampled linear model") {
  const FemSystem sys = small_fem(8);
  DisturbanceSpec dist;
  dist.kind = DisturbanceKind::harmonic;
  dist.amplitude = 1e-6;  // small enough that the membrane term is inert
  RunOptions opt;
  opt.t_end = 0.5;
  opt.ts = 5e-3;
  opt.integ.dt = 2.5e-4;
  opt.integ.rho_inf = 0.95;

  const RunRecord rec = run_closed_loop(sys, nullptr, nullptr, dist, opt);

  // Exact zero-order-hold discretization at the controller rate: the held
  // pressure is constant over each tick, so the discrete model reproduces
  // the continuous linear response exactly at the tick instants.
  const StateSpace dz = c2d(linear_beam_model(sys), opt.ts, C2dMethod::zoh);
  VectorXd x = VectorXd::Zero(dz.n_states());
  double peak = 0.0, err = 0.0;
  for (size_t k = 0; k < rec.y.size(); ++k) {
    const double y_ref = (dz.C * x)(0);
    peak = std::max(peak, std::abs(y_ref));
    err = std::max(err, std::abs(y_ref - rec.y[k]));
    Eigen::Vector2d in(disturbance_sample(dist, static_cast<int>(k)), 0.0);
    x = dz.A * x + dz.B * in;
  }
  CHECK(peak > 1e-9);  // the window actually excites the beam
  CHECK(err < 1e-2 * peak);
}

TEST_CASE("impulse fires once at its configured tick") {
  const FemSystem sys = small_fem();
  DisturbanceSpec dist;
  dist.kind = DisturbanceKind::impulse;
  dist.impulse_magnitude = 1e-5;
  dist.impulse_time = 0.0;
  RunOptions opt;
  opt.t_end = 1.0;
  opt.ts = 5e-3;
  opt.integ.dt = 1e-3;

  const RunRecord rec = run_closed_loop(sys, nullptr, nullptr, dist, opt);
  CHECK(rec.w[0] == doctest::Approx(1e-5 / 1e-3).epsilon(1e-15));
  for (size_t k = 1; k < rec.w.size(); ++k) CHECK(rec.w[k] == 0.0);
  CHECK(rec.y[0] == 0.0);
  CHECK(std::abs(rec.y[1]) > 0.0);

  // Structural damping pulls the hit back down: the closing stretch stays
  // below the early peak.
  double early = 0.0, late = 0.0;
  for (size_t k = 0; k < rec.y.size() / 2; ++k)
    early = std::max(early, std::abs(rec.y[k]));
  for (size_t k = rec.y.size() * 4 / 5; k < rec.y.size(); ++k)
    late = std::max(late, std::abs(rec.y[k]));
  CHECK(late < 0.5 * early);
}

TEST_CASE("dropping the controller mid-run keeps the response bounded") {
  const FemSystem sys = small_fem();
  SampledController ctrl = tiny_controller(5e-3, 0.5);
  DisturbanceSpec dist;
  dist.kind = DisturbanceKind::harmonic;
  RunOptions opt;
  opt.t_end = 1.0;
  opt.ts = 5e-3;
  opt.integ.dt = 1e-3;
  opt.drop_controller_at = 0.5;

  const RunRecord rec = run_closed_loop(sys, nullptr, &ctrl, dist, opt);
  bool saw_active = false;
  double bound = 0.0;
  for (size_t k = 0; k < rec.y.size(); ++k) {
    CHECK(std::isfinite(rec.y[k]));
    bound = std::max(bound, std::abs(rec.y[k]));
    if (rec.t[k] < 0.5 && rec.u[k] != 0.0) saw_active = true;
    if (rec.t[k] >= 0.5) CHECK(rec.u[k] == 0.0);
  }
  CHECK(saw_active);
  CHECK(bound < 0.1 * sys.props.length);
}

TEST_CASE("actuator relocation changes the applied influence") {
  const FemSystem sys = small_fem();
  SampledController a = tiny_controller(5e-3, 5.0);
  SampledController b = tiny_controller(5e-3, 5.0);
  DisturbanceSpec dist;
  dist.kind = DisturbanceKind::harmonic;
  RunOptions opt;
  opt.t_end = 0.5;
  opt.ts = 5e-3;
  opt.integ.dt = 1e-3;

  const RunRecord at_tip = run_closed_loop(sys, nullptr, &a, dist, opt);
  opt.x_c = 0.5;
  const RunRecord mid = run_closed_loop(sys, nullptr, &b, dist, opt);
  bool differs = false;
  for (size_t k = 0; k < at_tip.y.size(); ++k)
    if (at_tip.y[k] != mid.y[k]) differs = true;
  CHECK(differs);

  opt.x_c = -0.1;
  SampledController c = tiny_controller(5e-3);
  CHECK_THROWS_AS(run_closed_loop(sys, nullptr, &c, dist, opt), ConfigError);
}

TEST_CASE("controller period must be an integer multiple of the step") {
  const FemSystem sys = small_fem();
  DisturbanceSpec dist;
  RunOptions opt;
  opt.t_end = 0.1;
  opt.ts = 5e-3;
  opt.integ.dt = 2e-3;
  CHECK_THROWS_AS(run_closed_loop(sys, nullptr, nullptr, dist, opt),
                  ConfigError);
}

TEST_CASE("repeated runs are bit-identical") {
  const FemSystem sys = small_fem();
  SampledController a = tiny_controller(5e-3, 2.0);
  SampledController b = tiny_controller(5e-3, 2.0);
  DisturbanceSpec dist;
  dist.kind = DisturbanceKind::harmonic;
  RunOptions opt;
  opt.t_end = 0.5;
  opt.ts = 5e-3;
  opt.integ.dt = 1e-3;

  const RunRecord r1 = run_closed_loop(sys, nullptr, &a, dist, opt);
  const RunRecord r2 = run_closed_loop(sys, nullptr, &b, dist, opt);
  REQUIRE(r1.y.size() == r2.y.size());
  for (size_t k = 0; k < r1.y.size(); ++k) {
    CHECK(r1.y[k] == r2.y[k]);
    CHECK(r1.u[k] == r2.u[k]);
    CHECK(r1.w[k] == r2.w[k]);
  }
}

TEST_CASE("amplitude metric reads the tail window") {
  RunRecord rec;
  const double ts = 1e-3;
  for (int k = 0; k < 1000; ++k) {
    rec.k.push_back(k);
    rec.t.push_back(k * ts);
    rec.w.push_back(0.0);
    rec.u.push_back(0.0);
    rec.y.push_back(2e-3 * std::sin(2.0 * kPi * 40.0 * k * ts));
  }
  const AmplitudeMetric m = amplitude_metric(rec, 0.3);
  CHECK(m.peak == doctest::Approx(2e-3).epsilon(1e-2));
  CHECK(m.rms == doctest::Approx(2e-3 / std::sqrt(2.0)).epsilon(2e-2));

  RunRecord decay;
  for (int k = 0; k < 1000; ++k) {
    decay.k.push_back(k);
    decay.t.push_back(k * ts);
    decay.w.push_back(0.0);
    decay.u.push_back(0.0);
    decay.y.push_back(std::exp(-5.0 * k * ts));
  }
  const AmplitudeMetric tail = amplitude_metric(decay, 0.3);
  CHECK(tail.peak == doctest::Approx(std::exp(-5.0 * 0.7)).epsilon(1e-2));

  RunRecord empty;
  CHECK_THROWS_AS(amplitude_metric(empty, 0.3), ConfigError);
  CHECK_THROWS_AS(amplitude_metric(rec, 0.0), ConfigError);
}
