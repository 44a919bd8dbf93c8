#include "aerobeam/riccati.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

#include "aerobeam/errors.hpp"

namespace aerobeam {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

MatrixXd symmetrized(const MatrixXd& x) {
  return 0.5 * (x + x.transpose());
}

// Triangular solve (T + shift I) y = rhs with an explicit singularity guard;
// T upper triangular.
VectorXcd shifted_tri_solve(const MatrixXcd& t, const std::complex<double>& shift,
                            const VectorXcd& rhs, double scale,
                            const char* who) {
  MatrixXcd m = t;
  m.diagonal().array() += shift;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (std::abs(m(i, i)) <= 1e-14 * scale)
      throw NumericalError(std::string(who) +
                           ": resonant eigenvalue pair, equation is singular");
  }
  return m.triangularView<Eigen::Upper>().solve(rhs);
}

}  // namespace

MatrixXd solve_lyapunov_continuous(const MatrixXd& a, const MatrixXd& q) {
  const Eigen::Index n = a.rows();
  if (n == 0) return MatrixXd(0, 0);
  Eigen::ComplexSchur<MatrixXd> schur(a, true);
  if (schur.info() != Eigen::Success)
    throw NumericalError("lyapunov: Schur decomposition failed");
  const MatrixXcd t = schur.matrixT();
  const MatrixXcd u = schur.matrixU();
  const MatrixXcd qt = u.adjoint() * q.cast<std::complex<double>>() * u;
  const double scale = std::max(t.norm(), 1.0);

  // T Y + Y T^* + Qt = 0. Column j of Y T^* couples to columns i >= j of Y
  // (T upper triangular), so sweep right to left:
  //   (T + conj(t_jj) I) y_j = -qt_j - sum_{i>j} conj(T(j,i)) y_i
  MatrixXcd y = MatrixXcd::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    VectorXcd rhs = -qt.col(j);
    for (Eigen::Index i = j + 1; i < n; ++i)
      rhs -= std::conj(t(j, i)) * y.col(i);
    y.col(j) = shifted_tri_solve(t, std::conj(t(j, j)), rhs, scale, "lyapunov");
  }
  return symmetrized((u * y * u.adjoint()).real());
}

MatrixXd solve_stein_discrete(const MatrixXd& a, const MatrixXd& q) {
  const Eigen::Index n = a.rows();
  if (n == 0) return MatrixXd(0, 0);
  Eigen::ComplexSchur<MatrixXd> schur(a, true);
  if (schur.info() != Eigen::Success)
    throw NumericalError("stein: Schur decomposition failed");
  const MatrixXcd t = schur.matrixT();
  const MatrixXcd u = schur.matrixU();
  const MatrixXcd qt = u.adjoint() * q.cast<std::complex<double>>() * u;
  const double scale = std::max(t.norm() * t.norm(), 1.0);

  // T Y T^* - Y + Qt = 0, right-to-left sweep as in the continuous case:
  //   (conj(t_jj) T - I) y_j = -qt_j - T sum_{i>j} conj(T(j,i)) y_i
  MatrixXcd y = MatrixXcd::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    VectorXcd acc = VectorXcd::Zero(n);
    for (Eigen::Index i = j + 1; i < n; ++i)
      acc += std::conj(t(j, i)) * y.col(i);
    VectorXcd rhs = -qt.col(j) - t.triangularView<Eigen::Upper>() * acc;
    MatrixXcd m = std::conj(t(j, j)) * t;
    m.diagonal().array() -= 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(m(i, i)) <= 1e-14 * scale)
        throw NumericalError(
            "stein: reciprocal eigenvalue pair, equation is singular");
    }
    y.col(j) = m.triangularView<Eigen::Upper>().solve(rhs);
  }
  return symmetrized((u * y * u.adjoint()).real());
}

namespace {

// Newton polish plus the validity gates shared by the invariant-subspace
// route and warm starts. Any symmetric fixed point with a Hurwitz closed
// loop is the stabilizing solution, so the gates alone decide acceptance.
std::optional<CareSolution> polish_care(const MatrixXd& a, const MatrixXd& w,
                                        const MatrixXd& q, MatrixXd x,
                                        int max_steps) {
  auto residual_of = [&](const MatrixXd& xx) {
    return (a.transpose() * xx + xx * a + xx * w * xx + q).eval();
  };
  for (int it = 0; it < max_steps; ++it) {
    const MatrixXd res = residual_of(x);
    if (res.norm() <=
        1e-13 * std::max(1.0, x.norm()) * std::max(1.0, a.norm()))
      break;
    const MatrixXd acl = a + w * x;
    MatrixXd delta;
    try {
      delta = solve_lyapunov_continuous(acl.transpose(), res);
    } catch (const NumericalError&) {
      break;
    }
    x = symmetrized(x + delta);
    if (!x.allFinite()) return std::nullopt;
  }

  CareSolution sol;
  sol.x = x;
  sol.residual = residual_of(x).norm() / std::max(1.0, x.norm());
  const MatrixXd acl = a + w * x;
  sol.closed_loop_abscissa =
      Eigen::EigenSolver<MatrixXd>(acl, false).eigenvalues().real().maxCoeff();
  sol.min_eigenvalue =
      Eigen::SelfAdjointEigenSolver<MatrixXd>(x).eigenvalues().minCoeff();
  if (!(sol.closed_loop_abscissa < 0.0)) return std::nullopt;
  if (!(sol.residual <= 1e-9)) return std::nullopt;
  return sol;
}

}  // namespace

namespace {

// Exchanges the adjacent diagonal eigenvalues (i, i+1) of a complex Schur
// form with one unitary rotation; u absorbs the rotation. The first column
// of the rotation is the unit eigenvector of the 2x2 diagonal block for
// its second eigenvalue. Fails only when the pair is numerically defective,
// which cannot happen for a swap across the stability boundary.
bool swap_schur_pair(MatrixXcd& t, MatrixXcd& u, Eigen::Index i) {
  const std::complex<double> b = t(i, i + 1);
  const std::complex<double> delta = t(i + 1, i + 1) - t(i, i);
  const double nrm = std::hypot(std::abs(b), std::abs(delta));
  if (!(std::abs(delta) > 1e-14 * nrm)) return false;
  MatrixXcd rot(2, 2);
  rot << b / nrm, -std::conj(delta) / nrm, delta / nrm, std::conj(b) / nrm;
  t.middleRows(i, 2) = rot.adjoint() * t.middleRows(i, 2);
  t.middleCols(i, 2) = t.middleCols(i, 2) * rot;
  t(i + 1, i) = 0.0;
  u.middleCols(i, 2) = u.middleCols(i, 2) * rot;
  return true;
}

}  // namespace

std::optional<CareSolution> solve_care_stabilizing(
    const MatrixXd& a, const MatrixXd& w, const MatrixXd& q,
    const MatrixXd* warm_start) {
  const Eigen::Index n = a.rows();
  if (n == 0)
    return CareSolution{MatrixXd(0, 0), 0.0, -1e300, 0.0};

  if (warm_start != nullptr && warm_start->rows() == n &&
      warm_start->cols() == n && warm_start->allFinite()) {
    if (auto sol = polish_care(a, w, q, symmetrized(*warm_start), 30))
      return sol;
  }

  MatrixXd h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = a;
  h.topRightCorner(n, n) = symmetrized(w);
  h.bottomLeftCorner(n, n) = -symmetrized(q);
  h.bottomRightCorner(n, n) = -a.transpose();

  // Ordered Schur basis of the stable invariant subspace. An orthonormal
  // basis stays well conditioned even when clustered eigenvalues make the
  // individual eigenvectors nearly collinear, e.g. channel zeros bunched
  // near the sampling horizon after the bilinear map.
  Eigen::ComplexSchur<MatrixXcd> schur(h.cast<std::complex<double>>(), true);
  if (schur.info() != Eigen::Success) return std::nullopt;
  MatrixXcd t = schur.matrixT();
  MatrixXcd u = schur.matrixU();

  std::vector<char> stable(2 * n);
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const std::complex<double> lambda = t(i, i);
    stable[i] = lambda.real() < -1e-9 * std::max(1.0, std::abs(lambda));
    count += stable[i];
  }
  if (count != n) return std::nullopt;  // eigenvalue on the imaginary axis

  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index j = k;
    while (!stable[j]) ++j;
    for (; j > k; --j) {
      if (!swap_schur_pair(t, u, j - 1)) return std::nullopt;
      std::swap(stable[j - 1], stable[j]);
    }
  }

  const MatrixXcd u1 = u.topLeftCorner(n, n);
  const MatrixXcd u2 = u.bottomLeftCorner(n, n);
  Eigen::JacobiSVD<MatrixXcd> svd(u1);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(n - 1);
  if (!(smin > 1e-13 * smax)) return std::nullopt;

  const MatrixXd x = symmetrized(
      u1.adjoint().fullPivLu().solve(u2.adjoint()).transpose().real());

  // Newton polish through the Lyapunov solver recovers accuracy the
  // Schur route loses near the stability boundary.
  return polish_care(a, w, q, x, 6);
}

namespace {

std::string dare_pencil_diagnostics(const MatrixXd& a, const MatrixXd& g,
                                    const MatrixXd& q) {
  const Eigen::Index n = a.rows();
  MatrixXd mm = MatrixXd::Zero(2 * n, 2 * n);
  MatrixXd nn = MatrixXd::Zero(2 * n, 2 * n);
  mm.topLeftCorner(n, n) = a;
  mm.bottomLeftCorner(n, n) = -q;
  mm.bottomRightCorner(n, n) = MatrixXd::Identity(n, n);
  nn.topLeftCorner(n, n) = MatrixXd::Identity(n, n);
  nn.topRightCorner(n, n) = g;
  nn.bottomRightCorner(n, n) = a.transpose();
  Eigen::GeneralizedEigenSolver<MatrixXd> qz(mm, nn, false);
  int inside = 0, on = 0, outside = 0, infinite = 0;
  if (qz.info() == Eigen::Success) {
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
      const double beta = std::abs(qz.betas()(i));
      const double alpha = std::abs(qz.alphas()(i));
      if (beta < 1e-300 * alpha) {
        ++infinite;
        continue;
      }
      const double mag = alpha / beta;
      if (std::abs(mag - 1.0) < 1e-9)
        ++on;
      else if (mag < 1.0)
        ++inside;
      else
        ++outside;
    }
  }
  std::ostringstream os;
  os << "symplectic pencil eigenvalues: " << inside << " inside, " << on
     << " on, " << outside << " outside the unit circle, " << infinite
     << " at infinity";
  return os.str();
}

}  // namespace

MatrixXd solve_dare(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q,
                    const MatrixXd& r, const DareOptions& opts) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n ||
      r.rows() != m || r.cols() != m)
    throw std::invalid_argument("dare: inconsistent dimensions");
  Eigen::LLT<MatrixXd> rllt(symmetrized(r));
  if (rllt.info() != Eigen::Success)
    throw std::invalid_argument("dare: R must be positive definite");

  // Cross term S folds into a shifted pair (Abar, Qbar).
  MatrixXd abar = a;
  MatrixXd qbar = symmetrized(q);
  if (opts.s) {
    if (opts.s->rows() != n || opts.s->cols() != m)
      throw std::invalid_argument("dare: S must be n x m");
    const MatrixXd rs = rllt.solve(opts.s->transpose());
    abar -= b * rs;
    qbar = symmetrized(qbar - *opts.s * rs);
  }

  // Structure-preserving doubling on (A_k, G_k, H_k); H_k -> X.
  const MatrixXd g0 = b * rllt.solve(b.transpose());
  MatrixXd ak = abar;
  MatrixXd gk = g0;
  MatrixXd hk = qbar;
  for (int it = 0; it < 120; ++it) {
    const MatrixXd w = MatrixXd::Identity(n, n) + gk * hk;
    Eigen::PartialPivLU<MatrixXd> lu(w);
    const MatrixXd wia = lu.solve(ak);
    const MatrixXd wig = lu.solve(gk);
    const MatrixXd a_next = ak * wia;
    const MatrixXd g_next = symmetrized(gk + ak * wig * ak.transpose());
    const MatrixXd h_next =
        symmetrized(hk + ak.transpose() * hk * wia);
    const double step = (h_next - hk).norm();
    if (!h_next.allFinite() || !a_next.allFinite()) {
      throw NumericalError("dare: doubling iteration diverged (" +
                           dare_pencil_diagnostics(abar, g0, qbar) + ")");
    }
    ak = a_next;
    gk = g_next;
    hk = h_next;
    if (step <= 1e-14 * std::max(1.0, hk.norm())) break;
  }

  MatrixXd x = symmetrized(hk);
  auto residual_of = [&](const MatrixXd& xx) {
    const MatrixXd btx = b.transpose() * xx;
    const Eigen::LLT<MatrixXd> inner(symmetrized(r + btx * b));
    if (inner.info() != Eigen::Success)
      throw NumericalError("dare: R + B'XB lost positive definiteness");
    const MatrixXd k = inner.solve(btx * abar);
    return std::make_pair(
        symmetrized(abar.transpose() * xx * abar - xx -
                    (abar.transpose() * xx * b) * k + qbar)
            .eval(),
        k);
  };

  for (int it = 0; it < opts.max_refine_steps; ++it) {
    const auto [res, k] = residual_of(x);
    if (res.norm() <= 0.1 * opts.residual_tol * std::max(1.0, x.norm())) break;
    const MatrixXd acl = abar - b * k;
    MatrixXd delta;
    try {
      delta = solve_stein_discrete(acl.transpose(), res);
    } catch (const NumericalError&) {
      break;
    }
    x = symmetrized(x + delta);
  }

  const auto [res, k] = residual_of(x);
  const double rel = res.norm() / std::max(1.0, x.norm());
  const MatrixXd acl = abar - b * k;
  const double rho = Eigen::EigenSolver<MatrixXd>(acl, false)
                         .eigenvalues()
                         .cwiseAbs()
                         .maxCoeff();
  if (rel > opts.residual_tol || !(rho < 1.0)) {
    std::ostringstream os;
    os << "dare: no stabilizing solution (residual " << rel
       << ", closed-loop spectral radius " << rho << "; "
       << dare_pencil_diagnostics(abar, g0, qbar) << ")";
    throw NumericalError(os.str());
  }
  return x;
}

MatrixXd dare_gain(const MatrixXd& a, const MatrixXd& b, const MatrixXd& r,
                   const MatrixXd& x, const std::optional<MatrixXd>& s) {
  MatrixXd rhs = b.transpose() * x * a;
  if (s) rhs += s->transpose();
  Eigen::LLT<MatrixXd> llt(symmetrized(r + b.transpose() * x * b));
  if (llt.info() != Eigen::Success)
    throw NumericalError("dare_gain: R + B'XB not positive definite");
  return llt.solve(rhs);
}

}  // namespace aerobeam
