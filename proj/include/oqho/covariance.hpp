#pragma once

#include "oqho/model.hpp"
#include "oqho/quadrature.hpp"
#include "oqho/spectral.hpp"

#include <Eigen/Dense>
#include <vector>

namespace oqho {

// Coefficients of a symmetric 2x2 matrix over the basis {I, sigma1, sigma3}.
struct PauliCoefficients {
    double b0 = 0.0;
    double b1 = 0.0;
    double b3 = 0.0;
};

PauliCoefficients pauli_decompose(const Eigen::Matrix2d& sym);  // throws NotSymmetric
Eigen::Matrix2d pauli_compose(const PauliCoefficients& c);

// Invariant covariance from the Lyapunov balance -2*mu*P + nu*[J,P] + BB^T = 0,
// solved in closed form over the Pauli basis.
Eigen::Matrix2d solve_lyapunov(double mu, double nu, const Eigen::Matrix2d& BBt);
Eigen::Matrix2d solve_lyapunov(const CanonicalModel& model);

Eigen::Matrix2d lyapunov_residual(double mu, double nu, const Eigen::Matrix2d& P,
                                  const Eigen::Matrix2d& BBt);

// Cross-covariance of QKL coefficient pairs j, k (1-based):
//   P_jk = (lambda_j lambda_k)^{-1/2} *
//          iint f_j(s) f_k(t) C(s-t) U(min(s,t))^T P U(min(s,t)) ds dt
// over [0,T]^2, with the domain split along the diagonal kink of C.
Eigen::Matrix2d qkl_cross_covariance(const SpectralBasis& basis, const Eigen::Matrix2d& P,
                                     const CanonicalModel& model, int j, int k,
                                     const QuadratureConfig& quad);

// Full grid of blocks plus the assembled 2N x 2N real covariance. The
// complex quantum covariance adds the fixed imaginary part (i/2) I ox J.
struct CovarianceSet {
    Eigen::Matrix2d P;
    int count = 0;
    double nu = 0.0;  // rotation rate, kept for kernel reconstruction
    std::vector<Eigen::Matrix2d> blocks;  // row-major (j, k)
    Eigen::MatrixXd P_N;
    QuadratureConfig quad;

    const Eigen::Matrix2d& block(int j, int k) const;  // 1-based
    Eigen::MatrixXcd complex_covariance() const;       // K_N
};

// Assembles from blocks computed for j <= k (transpose symmetry fills the
// rest) and verifies quantum admissibility: the smallest eigenvalue of
// K_N = P_N + (i/2) I ox J must be >= -1e-9, else AdmissibilityViolation.
CovarianceSet assemble_covariance_set(const SpectralBasis& basis, const Eigen::Matrix2d& P,
                                      const CanonicalModel& model, int N,
                                      const QuadratureConfig& quad);

// Smallest eigenvalue of P_N + (i/2) I ox J.
double admissibility_floor(const Eigen::MatrixXd& P_N);

// Truncated reconstruction of the two-point covariance kernel:
//   U(s) [ sum_{j,k<=N} sqrt(lambda_j lambda_k) f_j(s) f_k(t) P_jk ] U(t)^T.
Eigen::Matrix2d reconstruct_real_covariance(const SpectralBasis& basis, const CovarianceSet& set,
                                            double s, double t, int N);

} // namespace oqho
