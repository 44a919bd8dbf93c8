#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "aerobeam/integrator.hpp"
#include "aerobeam/lti.hpp"

namespace aerobeam {

struct IoDataset {
  Eigen::VectorXd u;
  Eigen::VectorXd y;
  double ts = 0.0;
  // excitation provenance
  std::uint64_t seed = 0;
  double amplitude = 0.0;
  bool aero_on = false;
};

struct ArxModel {
  int order = 0;
  // theta = [a_{n-1} ... a_0, b_{n-1} ... b_0] for
  // y_{k+n} = sum_i a_i y_{k+i} + sum_i b_i u_{k+i}
  Eigen::VectorXd theta;
  double ts = 0.0;
  double rmse = 0.0;
  bool stable = false;

  DiscreteTf tf() const;
};

// Regressor rows [y_{n-1+i} .. y_i, u_{n-1+i} .. u_i] against Y_i = y_{n+i}.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_regression(
    const IoDataset& data, int n, int n_rows);

ArxModel fit_arx(const IoDataset& data, int n, int n_rows);

struct OrderSweepRow {
  int order = 0;
  double rmse = 0.0;  // infinite when the fitted model is unstable
  bool stable = false;
};

struct OrderSweepResult {
  ArxModel best;
  std::vector<OrderSweepRow> table;
};

// Fits every order in [n_min, n_max], prices unstable fits at infinity, and
// returns the smallest order within 1% of the best stable RMSE.
OrderSweepResult order_sweep(const IoDataset& data, int n_min, int n_max,
                             int n_rows);

// Standard normal stream: mt19937_64 bits (engine output is pinned by the
// standard) through the cosine branch of Box-Muller. std::normal_distribution
// is implementation-defined, so the transform is spelled out here to keep
// recorded datasets byte-identical across platforms.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  double uniform01();
  std::mt19937_64 engine_;
};

// Drives p_c with a zero-mean Gaussian sequence held over each Ts, sampling
// the tip synchronously at the tick instants (y_0 is the rest state, so the
// recorded map is strictly proper). dt = Ts / substeps.
IoDataset excite_and_record(const FemSystem& sys, const AeroParams* aero,
                            double ts, int n_samples, double amplitude,
                            std::uint64_t seed, int substeps,
                            double rho_inf_int = 0.8);

}  // namespace aerobeam
