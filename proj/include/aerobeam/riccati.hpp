#pragma once

#include <Eigen/Dense>
#include <optional>

namespace aerobeam {

// Solves A X + X A^T + Q = 0 (controllability orientation) by complex
// Schur reduction and triangular back-substitution. Requires that A and
// -A^T share no eigenvalues; A Hurwitz suffices.
Eigen::MatrixXd solve_lyapunov_continuous(const Eigen::MatrixXd& a,
                                          const Eigen::MatrixXd& q);

// Solves A X A^T - X + Q = 0 (discrete controllability orientation).
// Requires lambda_i(A) * conj(lambda_j(A)) != 1; Schur stability suffices.
Eigen::MatrixXd solve_stein_discrete(const Eigen::MatrixXd& a,
                                     const Eigen::MatrixXd& q);

struct CareSolution {
  Eigen::MatrixXd x;
  double residual = 0.0;             // Frobenius norm of the equation residual
  double closed_loop_abscissa = 0.0; // max Re eig(A + W X), negative when valid
  double min_eigenvalue = 0.0;       // smallest eigenvalue of X
};

// Stabilizing solution of A^T X + X A + X W X + Q = 0 with possibly
// indefinite W (sign convention: the LQR equation has W = -B R^{-1} B^T).
// Computed from the stable invariant subspace of the Hamiltonian
// [A, W; -Q, -A^T], refined by Newton steps with Lyapunov inner solves.
// Returns nullopt when the Hamiltonian has imaginary-axis eigenvalues or
// the subspace does not define a symmetric stabilizing solution; callers
// treat that as infeasibility of the corresponding gamma level.
// A warm start (e.g. the solution at a nearby gamma) is tried with Newton
// iteration alone before falling back to the eigenvector route; a wrong
// guess costs time, never correctness.
std::optional<CareSolution> solve_care_stabilizing(
    const Eigen::MatrixXd& a, const Eigen::MatrixXd& w,
    const Eigen::MatrixXd& q, const Eigen::MatrixXd* warm_start = nullptr);

struct DareOptions {
  // Optional cross-weighting term S in
  //   X = A^T X A - (A^T X B + S)(R + B^T X B)^{-1}(B^T X A + S^T) + Q.
  std::optional<Eigen::MatrixXd> s;
  double residual_tol = 1e-9;  // relative to ||X||_F
  int max_refine_steps = 10;
};

// Stabilizing solution of the discrete algebraic Riccati equation via
// structure-preserving doubling, polished by Newton steps with Stein
// inner solves. Throws NumericalError (with symplectic-pencil diagnostics)
// when no stabilizing solution is found, when the residual stays above
// tolerance, or when the closed loop A - B K fails Schur stability.
Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                           const DareOptions& opts = {});

// Gain K = (R + B^T X B)^{-1} (B^T X A + S^T) for a DARE solution X.
Eigen::MatrixXd dare_gain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                          const Eigen::MatrixXd& r, const Eigen::MatrixXd& x,
                          const std::optional<Eigen::MatrixXd>& s = {});

}  // namespace aerobeam
