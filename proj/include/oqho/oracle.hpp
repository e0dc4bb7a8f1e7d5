#pragma once

#include "oqho/spectral.hpp"

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace oqho {

// Brute-force spectrum of the covariance operator by quadrature-weighted
// discretization: eigen-decomposition of [w_i^{1/2} C(t_i - t_j) w_j^{1/2}]
// on a uniform grid with trapezoidal weights. Deliberately independent of
// the analytic spectrum code path.
struct NystromResult {
    int n = 0;         // grid size
    double dt = 0.0;   // grid spacing
    std::vector<double> grid;
    std::vector<double> weights;
    std::vector<double> eigenvalues;   // leading count, descending
    Eigen::MatrixXd eigenfunctions;    // n x count, de-weighted, unit L2 norm
    // filled by compare_with_basis:
    std::vector<double> eigenvalue_rel_error;
    std::vector<double> eigenfunction_l2_dist;
};

// Throws GridTooSmall when n < 50 * count.
NystromResult nystrom_spectrum(double mu, double T, int n, int count);

// Fills the residual fields against the analytic basis; eigenvector sign is
// aligned by the weighted inner product with the analytic eigenfunction.
void compare_with_basis(NystromResult& result, const SpectralBasis& basis);

// First two moments of the truncated quadratic cost under the zero-mean
// Gaussian state with covariance K = P_N + (i/2) I ox J, by the ordered
// fourth-moment pairing rule. m1 is summed in the same diagonal order as
// the mean-square path so the two agree bit-for-bit.
struct WickMoments {
    double m1 = 0.0;      // E Q_N
    double m2 = 0.0;      // E Q_N^2
    double kappa1 = 0.0;  // = m1
    double kappa2 = 0.0;  // m2 - m1^2
};
WickMoments wick_moments(std::span<const double> lambdas, const Eigen::MatrixXd& P_N);

// Compares log Xi_N(theta) with its quadratic model theta*k1 + theta^2*k2/2
// at theta and theta/2; the residual ratio sits near 8 when the expansion
// is correct to second order.
struct TaylorMatchReport {
    double theta = 0.0;
    double log_xi = 0.0;
    double quadratic = 0.0;
    double residual = 0.0;
    double residual_half = 0.0;
    double ratio = 0.0;
};
TaylorMatchReport taylor_match(double theta, std::span<const double> lambdas,
                               const Eigen::MatrixXd& P_N);

} // namespace oqho
