#include "aerobeam/lti.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "aerobeam/errors.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace aerobeam;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Impulse response of a discrete state space, first n samples.
std::vector<double> impulse(const StateSpace& sys, int count) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.n_states());
  std::vector<double> h(count);
  double u = 1.0;
  for (int k = 0; k < count; ++k) {
    h[k] = (sys.C * x + sys.D * Eigen::VectorXd::Constant(1, u))(0);
    x = sys.A * x + sys.B * Eigen::VectorXd::Constant(1, u);
    u = 0.0;
  }
  return h;
}

}  // namespace

TEST_CASE("transfer function normalizes to monic denominator") {
  DiscreteTf tf({2.0, 1.0}, {4.0, 2.0}, 0.1);
  CHECK(tf.den[0] == doctest::Approx(1.0));
  CHECK(tf.den[1] == doctest::Approx(0.5));
  CHECK(tf.num[0] == doctest::Approx(0.5));
  // value is invariant under the normalization
  CHECK(std::abs(tf.eval({2.0, 0.0}) - std::complex<double>(0.5, 0.0)) < 1e-15);
}

TEST_CASE("transfer function rejects degenerate input") {
  CHECK_THROWS_AS(DiscreteTf({1.0, 0.0, 0.0}, {1.0, -0.5}, 0.1),
                  std::invalid_argument);  // improper
  CHECK_THROWS_AS(DiscreteTf({1.0}, {0.0, 1.0}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteTf({1.0}, {1.0, -0.5}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteTf({1.0}, {1.0}, 0.1), std::invalid_argument);
}

TEST_CASE("companion realization reproduces long-division impulse response") {
  // h for (2q + 1)/(q^2 - 0.9q + 0.2), expanded by hand:
  // 0, 2, 2.8, 2.12, 1.348, 0.7892, 0.44068
  DiscreteTf tf({2.0, 1.0}, {1.0, -0.9, 0.2}, 0.01);
  StateSpace ss = tf_to_ss(tf);
  REQUIRE(ss.n_states() == 2);
  const std::vector<double> expected = {0.0,   2.0,    2.8,    2.12,
                                        1.348, 0.7892, 0.44068};
  const std::vector<double> h = impulse(ss, 7);
  for (size_t k = 0; k < expected.size(); ++k)
    CHECK(h[k] == doctest::Approx(expected[k]).epsilon(1e-12));
  // eval agrees at z = 1: (2 + 1)/(1 - 0.9 + 0.2) = 10
  CHECK(std::abs(tf.eval({1.0, 0.0}) - std::complex<double>(10.0, 0.0)) <
        1e-12);
}

TEST_CASE("biproper numerator splits into feedthrough plus remainder") {
  DiscreteTf tf({3.0, 1.0, -0.5}, {1.0, -0.4, 0.03}, 0.1);
  StateSpace ss = tf_to_ss(tf);
  CHECK(ss.D(0, 0) == doctest::Approx(3.0));
  // response must still match eval on the unit circle
  for (double theta : {0.1, 0.8, 2.0, 3.0}) {
    const std::complex<double> z = std::polar(1.0, theta);
    const auto g = freq_response(ss, {theta / 0.1})[0](0, 0);
    CHECK(std::abs(g - tf.eval(z)) < 1e-12);
  }
}

TEST_CASE("arx coefficients map to the shift-operator transfer function") {
  Eigen::VectorXd a(2), b(2);
  a << 1.4, -0.45;  // poles 0.9 and 0.5
  b << 1.0, 0.0;
  DiscreteTf tf = tf_from_arx(a, b, 0.02);
  REQUIRE(tf.den.size() == 3);
  CHECK(tf.den[1] == doctest::Approx(-1.4));
  CHECK(tf.den[2] == doctest::Approx(0.45));
  const std::vector<double> h = impulse(tf_to_ss(tf), 4);
  CHECK(h[0] == doctest::Approx(0.0));
  CHECK(h[1] == doctest::Approx(1.0));
  CHECK(h[2] == doctest::Approx(1.4));
  CHECK(h[3] == doctest::Approx(1.51));
}

TEST_CASE("series cascade multiplies responses") {
  auto rng = make_rng(42);
  StateSpace g1 = random_stable_ss(rng, 4, 1, 1, Domain::discrete, 0.05);
  StateSpace g2 = random_stable_ss(rng, 3, 1, 1, Domain::discrete, 0.05);
  StateSpace cascade = series(g1, g2);
  CHECK(cascade.n_states() == 7);
  std::vector<double> omega = {0.0, 1.0, 7.0, 20.0, kPi / 0.05};
  const auto r1 = freq_response(g1, omega);
  const auto r2 = freq_response(g2, omega);
  const auto rc = freq_response(cascade, omega);
  for (size_t i = 0; i < omega.size(); ++i)
    CHECK(std::abs(rc[i](0, 0) - r2[i](0, 0) * r1[i](0, 0)) < 1e-10);
}

TEST_CASE("series dc value for two first-order sections") {
  // 1/(q - 0.5) and (q - 0.2)/(q - 0.6) at z = 1: 2 * 2 = 4
  StateSpace g1 = tf_to_ss(DiscreteTf({1.0}, {1.0, -0.5}, 0.1));
  StateSpace g2 = tf_to_ss(DiscreteTf({1.0, -0.2}, {1.0, -0.6}, 0.1));
  const auto r = freq_response(series(g1, g2), {0.0});
  CHECK(r[0](0, 0).real() == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(r[0](0, 0).imag() == doctest::Approx(0.0));
}

TEST_CASE("stability verdicts use the open region") {
  Eigen::MatrixXd a(1, 1);
  a << 1.0;
  StabilityReport rep = is_stable(a, Domain::discrete);
  CHECK_FALSE(rep.stable);
  CHECK(rep.margin == doctest::Approx(0.0));
  a << 0.0;
  rep = is_stable(a, Domain::continuous);
  CHECK_FALSE(rep.stable);
  CHECK(rep.margin == doctest::Approx(0.0));
  a << -2.0;
  rep = is_stable(a, Domain::continuous);
  CHECK(rep.stable);
  CHECK(rep.margin == doctest::Approx(2.0));
  CHECK(rep.spectral_extent == doctest::Approx(-2.0));
}

TEST_CASE("freq_response rejects frequencies beyond Nyquist") {
  StateSpace g = tf_to_ss(DiscreteTf({1.0}, {1.0, -0.5}, 0.1));
  CHECK_THROWS_AS(freq_response(g, {kPi / 0.1 * 1.01}), std::invalid_argument);
  CHECK_NOTHROW(freq_response(g, {kPi / 0.1}));
}

TEST_CASE("lower fractional closure with zero controller returns the open plant") {
  auto rng = make_rng(7);
  PartitionedPlant plant;
  plant.A = random_stable_a(rng, 5, Domain::discrete);
  plant.B1 = random_matrix(rng, 5, 2);
  plant.B2 = random_matrix(rng, 5, 1);
  plant.C1 = random_matrix(rng, 2, 5);
  plant.C2 = random_matrix(rng, 1, 5);
  plant.D11 = random_matrix(rng, 2, 2);
  plant.D12 = random_matrix(rng, 2, 1);
  plant.D21 = random_matrix(rng, 1, 2);
  plant.D22 = random_matrix(rng, 1, 1);
  plant.domain = Domain::discrete;
  plant.sample_period = 0.1;
  StateSpace zero = StateSpace::gain(Eigen::MatrixXd::Zero(1, 1),
                                     Domain::discrete, 0.1);
  ClosedLoop cl = feedback_lower(plant, zero);
  CHECK((cl.system.A - plant.A).norm() == doctest::Approx(0.0));
  CHECK((cl.system.B - plant.B1).norm() == doctest::Approx(0.0));
  CHECK((cl.system.C - plant.C1).norm() == doctest::Approx(0.0));
  CHECK((cl.system.D - plant.D11).norm() == doctest::Approx(0.0));
}

TEST_CASE("static positive feedback shifts the pole as 1/(z - a - k)") {
  PartitionedPlant plant;
  plant.A = Eigen::MatrixXd::Constant(1, 1, 0.5);
  plant.B1 = Eigen::MatrixXd::Ones(1, 1);
  plant.B2 = Eigen::MatrixXd::Ones(1, 1);
  plant.C1 = Eigen::MatrixXd::Ones(1, 1);
  plant.C2 = Eigen::MatrixXd::Ones(1, 1);
  plant.D11 = Eigen::MatrixXd::Zero(1, 1);
  plant.D12 = Eigen::MatrixXd::Zero(1, 1);
  plant.D21 = Eigen::MatrixXd::Zero(1, 1);
  plant.D22 = Eigen::MatrixXd::Zero(1, 1);
  plant.domain = Domain::discrete;
  plant.sample_period = 1.0;

  StateSpace k1 = StateSpace::gain(Eigen::MatrixXd::Constant(1, 1, 0.3),
                                   Domain::discrete, 1.0);
  ClosedLoop cl = feedback_lower(plant, k1);
  CHECK(cl.stable);
  CHECK(cl.spectral_extent == doctest::Approx(0.8));
  CHECK(cl.stability_margin == doctest::Approx(0.2));

  StateSpace k2 = StateSpace::gain(Eigen::MatrixXd::Constant(1, 1, 0.6),
                                   Domain::discrete, 1.0);
  cl = feedback_lower(plant, k2);
  CHECK_FALSE(cl.stable);
  CHECK(cl.spectral_extent == doctest::Approx(1.1));
  CHECK(cl.stability_margin == doctest::Approx(-0.1));
}

TEST_CASE("lower fractional closure matches the frequency-domain formula") {
  auto rng = make_rng(1234);
  for (int trial = 0; trial < 4; ++trial) {
    PartitionedPlant plant;
    plant.A = random_stable_a(rng, 4, Domain::discrete);
    plant.B1 = random_matrix(rng, 4, 2);
    plant.B2 = random_matrix(rng, 4, 1);
    plant.C1 = random_matrix(rng, 3, 4);
    plant.C2 = random_matrix(rng, 1, 4);
    plant.D11 = random_matrix(rng, 3, 2);
    plant.D12 = random_matrix(rng, 3, 1);
    plant.D21 = random_matrix(rng, 1, 2);
    plant.D22 = 0.3 * random_matrix(rng, 1, 1);
    plant.domain = Domain::discrete;
    plant.sample_period = 0.05;
    StateSpace ctrl = random_stable_ss(rng, 3, 1, 1, Domain::discrete, 0.05);
    ctrl.D *= 0.3;  // keep the algebraic loop comfortably well posed

    ClosedLoop cl = feedback_lower(plant, ctrl);
    for (double w : {0.0, 3.0, 17.0, 40.0}) {
      const auto p = freq_response(plant.joint(), {w})[0];
      const auto kf = freq_response(ctrl, {w})[0];
      const auto p11 = p.block(0, 0, 3, 2), p12 = p.block(0, 2, 3, 1);
      const auto p21 = p.block(3, 0, 1, 2), p22 = p.block(3, 2, 1, 1);
      const Eigen::MatrixXcd t =
          p11 + p12 * kf *
                    (Eigen::MatrixXcd::Identity(1, 1) - p22 * kf).inverse() *
                    p21;
      const auto tcl = freq_response(cl.system, {w})[0];
      CHECK((t - tcl).norm() < 1e-9 * std::max(1.0, t.norm()));
    }
  }
}

TEST_CASE("singular algebraic loop is rejected") {
  PartitionedPlant plant;
  plant.A = Eigen::MatrixXd::Constant(1, 1, 0.5);
  plant.B1 = plant.B2 = Eigen::MatrixXd::Ones(1, 1);
  plant.C1 = plant.C2 = Eigen::MatrixXd::Ones(1, 1);
  plant.D11 = plant.D12 = plant.D21 = Eigen::MatrixXd::Zero(1, 1);
  plant.D22 = Eigen::MatrixXd::Ones(1, 1);
  plant.domain = Domain::discrete;
  plant.sample_period = 1.0;
  StateSpace unity = StateSpace::gain(Eigen::MatrixXd::Ones(1, 1),
                                      Domain::discrete, 1.0);
  CHECK_THROWS_AS(feedback_lower(plant, unity), NumericalError);
}

TEST_CASE("peak gain of 1/(z - 0.5) is 2 at zero frequency") {
  StateSpace g = tf_to_ss(DiscreteTf({1.0}, {1.0, -0.5}, 0.1));
  NormResult r = hinf_norm(g);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(r.peak_frequency < 1e-3);
}

TEST_CASE("peak gain of a lightly damped resonator") {
  // 1/(s^2 + 0.2 s + 1): peak 1/(2 z sqrt(1-z^2)) at w = sqrt(1 - 2 z^2)
  Eigen::MatrixXd a(2, 2), b(2, 1), c(1, 2), d(1, 1);
  a << 0.0, 1.0, -1.0, -0.2;
  b << 0.0, 1.0;
  c << 1.0, 0.0;
  d << 0.0;
  StateSpace g(a, b, c, d, Domain::continuous, 0.0);
  NormResult r = hinf_norm(g);
  const double zeta = 0.1;
  const double peak = 1.0 / (2.0 * zeta * std::sqrt(1.0 - zeta * zeta));
  CHECK(r.value == doctest::Approx(peak).epsilon(1e-6));
  CHECK(r.peak_frequency ==
        doctest::Approx(std::sqrt(1.0 - 2.0 * zeta * zeta)).epsilon(1e-4));
}

TEST_CASE("peak gain never falls below any sampled response point") {
  auto rng = make_rng(99);
  for (int trial = 0; trial < 6; ++trial) {
    StateSpace g = random_stable_ss(rng, 6, 2, 2, Domain::discrete, 0.01);
    NormResult r = hinf_norm(g);
    for (int i = 0; i <= 200; ++i) {
      const double w = kPi / 0.01 * i / 200.0;
      const auto resp = freq_response(g, {w})[0];
      const double s = resp.jacobiSvd().singularValues()(0);
      CHECK(r.value >= s * (1.0 - 1e-6));
    }
    // the reported peak is where the maximum is (approximately) attained
    const auto at_peak = freq_response(g, {r.peak_frequency})[0];
    CHECK(at_peak.jacobiSvd().singularValues()(0) ==
          doctest::Approx(r.value).epsilon(1e-6));
  }
}

TEST_CASE("peak gain of an unstable system is rejected") {
  StateSpace g = tf_to_ss(DiscreteTf({1.0}, {1.0, -1.5}, 0.1));
  CHECK_THROWS_AS(hinf_norm(g), NumericalError);
}

TEST_CASE("energy norm of 1/(z - 0.5) is sqrt(4/3)") {
  StateSpace g = tf_to_ss(DiscreteTf({1.0}, {1.0, -0.5}, 0.1));
  CHECK(h2_norm(g) == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("energy norm of 1/(s + a) is 1/sqrt(2a)") {
  for (double av : {1.0, 3.5}) {
    Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1), d(1, 1);
    a << -av;
    b << 1.0;
    c << 1.0;
    d << 0.0;
    StateSpace g(a, b, c, d, Domain::continuous, 0.0);
    CHECK(h2_norm(g) ==
          doctest::Approx(1.0 / std::sqrt(2.0 * av)).epsilon(1e-12));
  }
}

TEST_CASE("energy norm matches the frequency-domain quadrature") {
  auto rng = make_rng(2024);
  StateSpace g = random_stable_ss(rng, 5, 2, 3, Domain::discrete, 0.02);
  // midpoint rule on the circle converges geometrically for rational G
  const int npts = 8192;
  double acc = 0.0;
  for (int i = 0; i < npts; ++i) {
    const double theta = 2.0 * kPi * (i + 0.5) / npts;
    const double w = (theta <= kPi ? theta : 2.0 * kPi - theta) / 0.02;
    Eigen::MatrixXcd resp = freq_response(g, {w})[0];
    if (theta > kPi) resp = resp.conjugate();
    acc += resp.squaredNorm();
  }
  acc /= npts;
  CHECK(h2_norm(g) == doctest::Approx(std::sqrt(acc)).epsilon(1e-8));
}

TEST_CASE("continuous energy norm requires zero feedthrough") {
  Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1), d(1, 1);
  a << -1.0;
  b << 1.0;
  c << 1.0;
  d << 0.5;
  StateSpace g(a, b, c, d, Domain::continuous, 0.0);
  CHECK_THROWS_AS(h2_norm(g), NumericalError);
}

TEST_CASE("zero-order hold of a scalar lag matches the exponential") {
  Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1), d(1, 1);
  a << -1.0;
  b << 1.0;
  c << 1.0;
  d << 0.0;
  StateSpace g(a, b, c, d, Domain::continuous, 0.0);
  StateSpace gd = c2d(g, 1.0, C2dMethod::zoh);
  CHECK(gd.A(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(gd.B(0, 0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("zero-order hold of a rotation advances by the sample angle") {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  StateSpace g(a, Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Identity(2, 2),
               Eigen::MatrixXd::Zero(2, 1), Domain::continuous, 0.0);
  StateSpace gd = c2d(g, kPi / 2.0, C2dMethod::zoh);
  Eigen::MatrixXd expected(2, 2);
  expected << 0.0, 1.0, -1.0, 0.0;
  CHECK((gd.A - expected).norm() < 1e-14);
}

TEST_CASE("bilinear map preserves dc gain and warps frequency") {
  Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1), d(1, 1);
  a << -1.0;
  b << 1.0;
  c << 1.0;
  d << 0.0;
  StateSpace g(a, b, c, d, Domain::continuous, 0.0);
  const double ts = 0.5;
  StateSpace gd = c2d(g, ts, C2dMethod::tustin);
  // exact values for Ts = 0.5: alpha = 4
  CHECK(gd.A(0, 0) == doctest::Approx(3.0 / 5.0).epsilon(1e-14));
  const auto dc = freq_response(gd, {0.0})[0](0, 0);
  CHECK(std::abs(dc - std::complex<double>(1.0, 0.0)) < 1e-13);
  // G_d(e^{jwTs}) = G_c(j (2/Ts) tan(w Ts / 2))
  for (double w : {0.3, 1.2, 3.0}) {
    const auto zd = freq_response(gd, {w})[0](0, 0);
    const double warped = 2.0 / ts * std::tan(w * ts / 2.0);
    const auto zc = freq_response(g, {warped})[0](0, 0);
    CHECK(std::abs(zd - zc) < 1e-12);
  }
}

TEST_CASE("bilinear map preserves the peak gain exactly") {
  auto rng = make_rng(5150);
  StateSpace g = random_stable_ss(rng, 5, 2, 2, Domain::continuous);
  g.D.setZero();
  const double n_c = hinf_norm(g).value;
  const double n_d = hinf_norm(c2d(g, 0.1, C2dMethod::tustin)).value;
  CHECK(n_d == doctest::Approx(n_c).epsilon(1e-5));
}

TEST_CASE("bilinear map round trips to the same realization") {
  auto rng = make_rng(31);
  StateSpace g = random_stable_ss(rng, 4, 2, 2, Domain::continuous);
  StateSpace back = d2c_bilinear(c2d(g, 0.05, C2dMethod::tustin));
  CHECK((back.A - g.A).norm() < 1e-10 * g.A.norm());
  CHECK((back.B - g.B).norm() < 1e-10 * g.B.norm());
  CHECK((back.C - g.C).norm() < 1e-10 * g.C.norm());
  CHECK((back.D - g.D).norm() < 1e-10 * std::max(1.0, g.D.norm()));

  StateSpace gd = random_stable_ss(rng, 4, 1, 1, Domain::discrete, 0.05);
  StateSpace fwd = c2d(d2c_bilinear(gd), 0.05, C2dMethod::tustin);
  CHECK((fwd.A - gd.A).norm() < 1e-10 * gd.A.norm());
  CHECK((fwd.D - gd.D).norm() < 1e-10 * std::max(1.0, gd.D.norm()));
}

TEST_CASE("partitioned plant assembles its channels consistently") {
  auto rng = make_rng(8);
  PartitionedPlant plant;
  plant.A = random_stable_a(rng, 3, Domain::discrete);
  plant.B1 = random_matrix(rng, 3, 2);
  plant.B2 = random_matrix(rng, 3, 1);
  plant.C1 = random_matrix(rng, 1, 3);
  plant.C2 = random_matrix(rng, 2, 3);
  plant.D11 = random_matrix(rng, 1, 2);
  plant.D12 = random_matrix(rng, 1, 1);
  plant.D21 = random_matrix(rng, 2, 2);
  plant.D22 = random_matrix(rng, 2, 1);
  plant.domain = Domain::discrete;
  plant.sample_period = 0.25;
  StateSpace joint = plant.joint();
  CHECK(joint.n_inputs() == 3);
  CHECK(joint.n_outputs() == 3);
  StateSpace zw = plant.channel_zw();
  const auto rj = freq_response(joint, {2.0})[0];
  const auto rz = freq_response(zw, {2.0})[0];
  CHECK((rj.block(0, 0, 1, 2) - rz).norm() < 1e-12);
}
