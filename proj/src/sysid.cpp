#include "aerobeam/sysid.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <limits>

#include "aerobeam/errors.hpp"

namespace aerobeam {

using Eigen::MatrixXd;
using Eigen::VectorXd;

DiscreteTf ArxModel::tf() const {
  return tf_from_arx(theta.head(order), theta.tail(order), ts);
}

std::pair<MatrixXd, VectorXd> build_regression(const IoDataset& data, int n,
                                               int n_rows) {
  if (n < 1) throw ConfigError("arx order must be at least 1");
  if (n_rows < 2 * n)
    throw ConfigError("regression needs at least 2n rows for 2n unknowns");
  if (data.u.size() != data.y.size())
    throw ConfigError("dataset input/output lengths differ");
  if (data.u.size() < n + n_rows) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "dataset too short: %ld samples, need %d for order %d with "
                  "%d rows",
                  static_cast<long>(data.u.size()), n + n_rows, n, n_rows);
    throw ConfigError(buf);
  }
  if (!data.u.allFinite() || !data.y.allFinite())
    throw ConfigError("dataset contains non-finite samples");

  MatrixXd phi(n_rows, 2 * n);
  VectorXd rhs(n_rows);
  for (int i = 0; i < n_rows; ++i) {
    for (int j = 0; j < n; ++j) {
      phi(i, j) = data.y(n - 1 + i - j);
      phi(i, n + j) = data.u(n - 1 + i - j);
    }
    rhs(i) = data.y(n + i);
  }
  return {phi, rhs};
}

ArxModel fit_arx(const IoDataset& data, int n, int n_rows) {
  auto [phi, rhs] = build_regression(data, n, n_rows);

  ArxModel model;
  model.order = n;
  model.ts = data.ts;

  if (data.y.isZero(0.0) && !data.u.isZero(0.0)) {
    // Quiescent output under nonzero input: the zero model reproduces it
    // exactly, and the regressor's output block is identically zero so no
    // coefficients are observable anyway.
    model.theta = VectorXd::Zero(2 * n);
    model.rmse = 0.0;
    model.stable = true;
    return model;
  }

  Eigen::ColPivHouseholderQR<MatrixXd> qr(phi);
  model.theta = qr.solve(rhs);
  const double ss = (rhs - phi * model.theta).squaredNorm();
  model.rmse = std::sqrt(ss / n_rows);
  if (qr.rank() < 2 * n) {
    // Noise-free data from a lower-order system makes the regressor
    // structurally rank deficient for every over-parameterized fit while an
    // exact solution still exists; only an unexplained residual marks the
    // data as genuinely unidentifiable.
    const double y_rms = rhs.norm() / std::sqrt(static_cast<double>(n_rows));
    if (!(model.rmse <= 1e-9 * y_rms)) {
      char buf[96];
      std::snprintf(buf, sizeof(buf),
                    "regressor is rank deficient: numerical rank %ld of %d",
                    static_cast<long>(qr.rank()), 2 * n);
      throw NumericalError(buf);
    }
  }
  model.stable = is_stable(tf_to_ss(model.tf())).stable;
  return model;
}

OrderSweepResult order_sweep(const IoDataset& data, int n_min, int n_max,
                             int n_rows) {
  if (n_min < 1 || n_max < n_min) throw ConfigError("empty arx order range");

  OrderSweepResult out;
  std::vector<ArxModel> fits;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (int n = n_min; n <= n_max; ++n) {
    ArxModel m = fit_arx(data, n, n_rows);
    OrderSweepRow row{n, m.stable ? m.rmse
                                  : std::numeric_limits<double>::infinity(),
                      m.stable};
    out.table.push_back(row);
    fits.push_back(std::move(m));
    if (row.stable) best_rmse = std::min(best_rmse, row.rmse);
  }
  if (!std::isfinite(best_rmse))
    throw NumericalError("every candidate arx model is unstable");

  // Smallest order within 1% of the best stable fit. Fits whose residual is
  // pure least-squares roundoff compare as exact, otherwise the winner among
  // several numerically-zero RMSEs would be whichever roundoff happened to
  // land lowest.
  const double y_rms = std::sqrt(data.y.squaredNorm() /
                                 static_cast<double>(data.y.size()));
  const double exact_floor = 1e-9 * y_rms;
  const double cutoff = std::max(1.01 * best_rmse, exact_floor);
  for (size_t i = 0; i < fits.size(); ++i) {
    if (out.table[i].stable && out.table[i].rmse <= cutoff) {
      out.best = fits[i];
      break;
    }
  }
  return out;
}

double GaussianStream::uniform01() {
  // 53-bit mantissa in [0, 1)
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double GaussianStream::next() {
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

IoDataset excite_and_record(const FemSystem& sys, const AeroParams* aero,
                            double ts, int n_samples, double amplitude,
                            std::uint64_t seed, int substeps,
                            double rho_inf_int) {
  if (!(ts > 0.0)) throw ConfigError("sample period must be positive");
  if (n_samples < 1) throw ConfigError("need at least one sample");
  if (substeps < 1) throw ConfigError("substep ratio must be at least 1");

  GenAlphaConfig cfg;
  cfg.rho_inf = rho_inf_int;
  cfg.dt = ts / substeps;

  IoDataset data;
  data.ts = ts;
  data.seed = seed;
  data.amplitude = amplitude;
  data.aero_on = aero != nullptr && aero->enabled;
  data.u.resize(n_samples);
  data.y.resize(n_samples);

  GaussianStream gauss(seed);
  BeamState state = make_rest_state(sys);
  init_acceleration(sys, aero, state, 0.0, 0.0);
  for (int k = 0; k < n_samples; ++k) {
    data.y(k) = measure_tip(sys, state.u, sys.props.length);
    const double u_k = amplitude * gauss.next();
    data.u(k) = u_k;
    for (int s = 0; s < substeps; ++s)
      state = step(sys, aero, state, 0.0, u_k, cfg);
  }
  return data;
}

}  // namespace aerobeam
