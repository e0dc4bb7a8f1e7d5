#pragma once

#include "oqho/quadrature.hpp"
#include "oqho/spectral.hpp"

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace oqho {

// Per-mode factorization scalars alpha = tanh(theta*lambda),
// beta = sinh(2*theta*lambda); beta*(1 - alpha^2) = 2*alpha.
struct ExponentialParams {
    double alpha = 0.0;
    double beta = 0.0;
};
ExponentialParams exponential_params(double theta, double lambda);

// Phi_N = I_N ox [[1,0],[0,1],[1,0]], Psi_N = diag_k(alpha_k, beta_k, alpha_k)
// held as its diagonal, and the 3x3 coupling pattern Upsilon.
struct StructuralMatrices {
    Eigen::MatrixXd Phi;       // 3N x 2N
    Eigen::VectorXd Psi_diag;  // 3N
    Eigen::Matrix3d Upsilon;
};
StructuralMatrices build_structural_matrices(std::span<const double> alphas,
                                             std::span<const double> betas);

// Symmetrizes a square matrix from its upper triangle (diagonal included).
Eigen::MatrixXd diamond_map(const Eigen::MatrixXd& D);
Eigen::MatrixXcd diamond_map(const Eigen::MatrixXcd& D);

// Spectral radius of P_N * diag_k(2*alpha_k, beta_k); the determinant
// formula is valid while this stays below 1. Nondecreasing in theta and N.
double admissibility_radius(double theta, std::span<const double> lambdas,
                            const Eigen::MatrixXd& P_N);

// Mean-square cost  sum_k lambda_k * tr(P_kk); the theta -> 0 slope of the
// log functional.
double mean_square_cost(std::span<const double> lambdas, const Eigen::MatrixXd& P_N);

// Complex 3N x 3N matrix whose determinant gives the truncated functional:
// Gamma_N = I - (Phi P_N Phi^T + (i/2) I ox Upsilon) Psi_N.
Eigen::MatrixXcd build_gamma(double theta, std::span<const double> lambdas,
                             const Eigen::MatrixXd& P_N);

struct QefEvaluation {
    double theta = 0.0;
    int count = 0;
    std::vector<double> alphas;
    std::vector<double> betas;
    Eigen::MatrixXcd Gamma;
    double radius = 0.0;         // r_N at this theta
    double log_xi = 0.0;         // -1/2 * Re log det Gamma
    double logdet_phase = 0.0;   // net phase of det Gamma; ~0 when admissible
    std::vector<double> schur_increments;  // filled by qef_series
};

// Evaluates log Xi_N by pivoted LU with running log-magnitude and phase
// accumulation. Throws RadiusExceeded when r_N >= 1 - 1e-12 and
// SingularGamma on an exactly zero pivot.
QefEvaluation qef_truncated(double theta, std::span<const double> lambdas,
                            const Eigen::MatrixXd& P_N);

struct QefSeriesResult {
    double log_xi = 0.0;
    std::vector<double> increments;  // Re ln det of successive Schur complements
    bool converged = false;
    int used = 0;  // truncation orders actually evaluated
};

// Incremental evaluation of ln Xi via the Schur-complement factorization
// det Gamma_{N+1} = det Gamma_N * det Gamma_{N+1|N}. Stops early once
// |increment| < tol three times in a row; converged=false when the budget
// of modes runs out first (partial sum still returned).
QefSeriesResult qef_series(double theta, std::span<const double> lambdas,
                           const Eigen::MatrixXd& P_N, double tol);

// Weighting matrices G_jk = int_0^T f_j f_k U^T Pi U dt for a symmetric
// weight Pi. A scalar weight short-circuits to delta_jk * c * I exactly.
std::vector<Eigen::Matrix2d> weighting_matrices(const SpectralBasis& basis,
                                                const Eigen::Matrix2d& Pi, double nu,
                                                const QuadratureConfig& quad);

// Boundary of the admissible range: theta with |r_N(theta) - 1| <= 1e-10,
// located by bisection of the monotone radius map. Throws BracketInvalid
// unless r(lo) < 1 < r(hi).
double critical_theta(std::span<const double> lambdas, const Eigen::MatrixXd& P_N,
                      double lo, double hi);

} // namespace oqho
