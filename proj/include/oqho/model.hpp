#pragma once

#include <Eigen/Dense>

namespace oqho {

// One-mode oscillator description. R is the energy matrix, M the field
// coupling (m x 2, m even). Drift A, dispersion B and the rates (mu, nu)
// are derived once at construction; treat instances as immutable.
struct OqhoModel {
    Eigen::Matrix2d R;
    Eigen::MatrixXd M;   // m x 2
    int channels = 0;    // m
    Eigen::Matrix2d A;
    Eigen::MatrixXd B;   // 2 x m
    double mu = 0.0;     // decay rate, from M^T J M
    double nu = 0.0;     // oscillation frequency, sqrt(det R)
    double transient_time = 0.0;  // 1/mu
};

// Same oscillator after the symplectic change of variables that makes the
// energy matrix scalar. A carries the exact [[-mu, nu], [-nu, -mu]] form.
struct CanonicalModel {
    Eigen::Matrix2d S;   // symplectic transform, det S = 1
    Eigen::Matrix2d A;
    Eigen::MatrixXd B;   // 2 x m
    int channels = 0;
    double mu = 0.0;
    double nu = 0.0;
};

// Validates R (symmetric positive definite), M (even channel count) and
// derives A = J(R + M^T J_m M), B = J M^T along with mu, nu.
// Throws NotPositiveDefinite, OddChannelCount, NotStable (mu <= 0).
OqhoModel build_model(const Eigen::Matrix2d& R, const Eigen::MatrixXd& M);

CanonicalModel canonicalize(const OqhoModel& model);

// Shortcut construction equivalent to R = nu*I and M = diag(sqrt(mu)) on
// two channels; S = I.
CanonicalModel canonical_from_rates(double mu, double nu);

// Physical-realizability residual A*Theta + Theta*A^T + B*J_m*B^T.
// Zero (to rounding) for any model produced by build_model.
Eigen::Matrix2d pr_residual(const Eigen::Matrix2d& A, const Eigen::MatrixXd& B);
Eigen::Matrix2d pr_residual(const OqhoModel& model);

// Principal square root of a symmetric positive definite 2x2 matrix,
// in closed form via Cayley-Hamilton.
Eigen::Matrix2d sqrt_spd(const Eigen::Matrix2d& R);

// Scalar covariance factor e^{-mu|tau|}.
double kernel_C(double mu, double tau);

// Planar rotation U(tau) = exp(tau*nu*J); one-parameter orthogonal group.
Eigen::Matrix2d rotation_U(double nu, double tau);

// Two-point commutator kernel Lambda(tau) = C(tau) U(tau) J / 2.
// Lambda(0) equals the CCR matrix; Lambda(-tau) = -Lambda(tau)^T.
Eigen::Matrix2d commutator_kernel(const CanonicalModel& model, double tau);

// Real part of the two-point covariance kernel for invariant covariance P:
// Sigma(tau) = C(tau) * (U(tau) P for tau >= 0, P U(tau) for tau < 0).
Eigen::Matrix2d two_point_sigma(const Eigen::Matrix2d& P, const CanonicalModel& model, double tau);

} // namespace oqho
