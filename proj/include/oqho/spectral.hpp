#pragma once

#include "oqho/quadrature.hpp"

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

namespace oqho {

// Spectrum of the exponential covariance operator on [0, T]: dimensionless
// roots u_k of r*u + 2*arctan(u) = pi*k with r = mu*T, frequencies
// omega_k = mu*u_k, eigenvalues lambda_k = 2*mu/(mu^2 + omega_k^2) and
// eigenfunction normalizations gamma_k. Immutable once solved.
struct SpectralBasis {
    double mu = 0.0;
    double T = 0.0;
    double r = 0.0;          // mu * T
    int count = 0;
    std::vector<double> u;
    std::vector<double> omega;
    std::vector<double> lambda;
    std::vector<double> gamma;

    // |r*u_k + 2*arctan(u_k) - pi*k| at the accepted root (1-based k).
    double residual_root_equation(int k) const;
    // Residual of the original frequency equation, normalized by mu^2 + omega_k^2.
    double residual_frequency_equation(int k) const;
};

// Solves the N leading roots. Each root is bracketed in
// (pi*(k-1)/r, pi*k/r), bisected, then Newton-polished; the left side of the
// root equation is strictly increasing so the bracket guarantees existence.
SpectralBasis solve_roots(double mu, double T, int N);

// Orthonormal eigenfunction f_k(t) = (omega_k cos(omega_k t) + mu sin(omega_k t)) / gamma_k.
// k is 1-based. Throws IndexOutOfRange / TimeOutOfDomain.
double eigenfunction(const SpectralBasis& basis, int k, double t);

// N x N matrix of pairwise L2 inner products of eigenfunctions; identity up
// to quadrature error.
Eigen::MatrixXd gram_matrix(const SpectralBasis& basis, const QuadratureConfig& quad);

struct TabulatedFunction {
    std::vector<double> t;
    std::vector<double> y;
};

// Action of the covariance operator: g(s) = int_0^T e^{-mu|s-t|} f(t) dt.
// The inner integral is split at t = s where the kernel has a kink.
// band is the top angular frequency declared for f; GridTooCoarse is thrown
// when the quadrature config resolves fewer than 4 nodes per period of it.
double covariance_operator_at(double mu, double T, const std::function<double(double)>& f,
                              double s, double band, const QuadratureConfig& quad);
TabulatedFunction apply_covariance_operator(double mu, double T,
                                            const std::function<double(double)>& f, double band,
                                            const QuadratureConfig& quad,
                                            std::span<const double> out_grid);

// Partial Mercer sum  sum_{k<=N} lambda_k f_k(s) f_k(t); N = 0 gives 0.
double mercer_partial_sum(const SpectralBasis& basis, double s, double t, int N);

} // namespace oqho
