#include "oqho/qef.hpp"
#include "oqho/constants.hpp"
#include "oqho/errors.hpp"
#include "oqho/model.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

namespace oqho {

namespace {

Eigen::Matrix3d upsilon() {
    Eigen::Matrix3d u;
    u << 0, 1, 0, 1, 0, -1, 0, -1, 0;
    return u;
}

void check_sizes(std::span<const double> lambdas, const Eigen::MatrixXd& P_N) {
    const int N = static_cast<int>(lambdas.size());
    if (N < 1) throw IndexOutOfRange("at least one mode required");
    if (P_N.rows() != 2 * N || P_N.cols() != 2 * N)
        throw IndexOutOfRange("covariance matrix must be 2N x 2N for N = " + std::to_string(N));
}

// log det of a complex matrix through pivoted LU: magnitudes accumulate in
// log space, phases accumulate separately (one pi per row swap). The net
// phase must come back to ~0 for an admissible Gamma, which doubles as a
// correctness check on the caller's side.
struct LogDet {
    double log_magnitude;
    double phase;  // wrapped to (-pi, pi]
};

LogDet complex_logdet(const Eigen::MatrixXcd& A) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    const auto& U = lu.matrixLU();
    double logmag = 0.0;
    double phase = 0.0;
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
        const std::complex<double> d = U(i, i);
        const double a = std::abs(d);
        if (a == 0.0) throw SingularGamma("zero pivot in LU factorization");
        logmag += std::log(a);
        phase += std::arg(d);
    }
    const int sign = lu.permutationP().determinant();  // +1 or -1
    if (sign < 0) phase += std::numbers::pi;
    return {logmag, std::remainder(phase, 2.0 * std::numbers::pi)};
}

} // namespace

ExponentialParams exponential_params(double theta, double lambda) {
    const double x = theta * lambda;
    return {std::tanh(x), std::sinh(2.0 * x)};
}

StructuralMatrices build_structural_matrices(std::span<const double> alphas,
                                             std::span<const double> betas) {
    if (alphas.size() != betas.size() || alphas.empty())
        throw IndexOutOfRange("alpha/beta lists must be non-empty and equally long");
    const int N = static_cast<int>(alphas.size());
    StructuralMatrices s;
    s.Phi = Eigen::MatrixXd::Zero(3 * N, 2 * N);
    s.Psi_diag.resize(3 * N);
    for (int k = 0; k < N; ++k) {
        s.Phi(3 * k + 0, 2 * k + 0) = 1.0;
        s.Phi(3 * k + 1, 2 * k + 1) = 1.0;
        s.Phi(3 * k + 2, 2 * k + 0) = 1.0;
        s.Psi_diag(3 * k + 0) = alphas[k];
        s.Psi_diag(3 * k + 1) = betas[k];
        s.Psi_diag(3 * k + 2) = alphas[k];
    }
    s.Upsilon = upsilon();
    return s;
}

Eigen::MatrixXd diamond_map(const Eigen::MatrixXd& D) {
    if (D.rows() != D.cols()) throw IndexOutOfRange("diamond map expects a square matrix");
    Eigen::MatrixXd out(D.rows(), D.cols());
    for (Eigen::Index j = 0; j < D.rows(); ++j)
        for (Eigen::Index k = 0; k < D.cols(); ++k) out(j, k) = (j <= k) ? D(j, k) : D(k, j);
    return out;
}

Eigen::MatrixXcd diamond_map(const Eigen::MatrixXcd& D) {
    if (D.rows() != D.cols()) throw IndexOutOfRange("diamond map expects a square matrix");
    Eigen::MatrixXcd out(D.rows(), D.cols());
    for (Eigen::Index j = 0; j < D.rows(); ++j)
        for (Eigen::Index k = 0; k < D.cols(); ++k) out(j, k) = (j <= k) ? D(j, k) : D(k, j);
    return out;
}

double admissibility_radius(double theta, std::span<const double> lambdas,
                            const Eigen::MatrixXd& P_N) {
    check_sizes(lambdas, P_N);
    const int N = static_cast<int>(lambdas.size());
    Eigen::MatrixXd scaled = P_N;
    for (int k = 0; k < N; ++k) {
        const auto p = exponential_params(theta, lambdas[k]);
        if (!std::isfinite(p.beta)) return std::numeric_limits<double>::infinity();
        scaled.col(2 * k) *= 2.0 * p.alpha;
        scaled.col(2 * k + 1) *= p.beta;
    }
    // Full dense eigensolve; power iteration can stall on conjugate pairs.
    Eigen::EigenSolver<Eigen::MatrixXd> es(scaled, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double mean_square_cost(std::span<const double> lambdas, const Eigen::MatrixXd& P_N) {
    check_sizes(lambdas, P_N);
    double acc = 0.0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        acc += lambdas[k] * P_N(2 * k, 2 * k);
        acc += lambdas[k] * P_N(2 * k + 1, 2 * k + 1);
    }
    return acc;
}

Eigen::MatrixXcd build_gamma(double theta, std::span<const double> lambdas,
                             const Eigen::MatrixXd& P_N) {
    check_sizes(lambdas, P_N);
    const int N = static_cast<int>(lambdas.size());
    std::vector<double> al(N), be(N);
    for (int k = 0; k < N; ++k) {
        const auto p = exponential_params(theta, lambdas[k]);
        al[k] = p.alpha;
        be[k] = p.beta;
    }
    const StructuralMatrices s = build_structural_matrices(al, be);
    Eigen::MatrixXcd core = (s.Phi * P_N * s.Phi.transpose()).cast<std::complex<double>>();
    const std::complex<double> ih(0.0, 0.5);
    for (int k = 0; k < N; ++k)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) core(3 * k + a, 3 * k + b) += ih * s.Upsilon(a, b);
    Eigen::MatrixXcd gamma = -core;
    for (int i = 0; i < 3 * N; ++i) gamma.col(i) *= s.Psi_diag(i);
    gamma += Eigen::MatrixXcd::Identity(3 * N, 3 * N);
    return gamma;
}

QefEvaluation qef_truncated(double theta, std::span<const double> lambdas,
                            const Eigen::MatrixXd& P_N) {
    check_sizes(lambdas, P_N);
    if (theta < 0.0) throw ConfigError("theta must be nonnegative");
    QefEvaluation ev;
    ev.theta = theta;
    ev.count = static_cast<int>(lambdas.size());
    ev.alphas.resize(ev.count);
    ev.betas.resize(ev.count);
    for (int k = 0; k < ev.count; ++k) {
        const auto p = exponential_params(theta, lambdas[k]);
        ev.alphas[k] = p.alpha;
        ev.betas[k] = p.beta;
    }
    if (theta == 0.0) {
        ev.Gamma = Eigen::MatrixXcd::Identity(3 * ev.count, 3 * ev.count);
        ev.radius = 0.0;
        ev.log_xi = 0.0;
        ev.logdet_phase = 0.0;
        return ev;
    }
    ev.radius = admissibility_radius(theta, lambdas, P_N);
    if (ev.radius >= 1.0 - 1e-12)
        throw RadiusExceeded("spectral radius " + std::to_string(ev.radius) +
                             " at theta = " + std::to_string(theta) +
                             " is outside the admissible range");
    ev.Gamma = build_gamma(theta, lambdas, P_N);
    const LogDet ld = complex_logdet(ev.Gamma);
    ev.log_xi = -0.5 * ld.log_magnitude;
    ev.logdet_phase = ld.phase;
    return ev;
}

QefSeriesResult qef_series(double theta, std::span<const double> lambdas,
                           const Eigen::MatrixXd& P_N, double tol) {
    check_sizes(lambdas, P_N);
    const int N_max = static_cast<int>(lambdas.size());
    // admissibility at the deepest truncation covers all shallower ones
    const double r = admissibility_radius(theta, lambdas, P_N);
    if (theta > 0.0 && r >= 1.0 - 1e-12)
        throw RadiusExceeded("spectral radius " + std::to_string(r) + " at theta = " +
                             std::to_string(theta) + " is outside the admissible range");

    QefSeriesResult res;
    const Eigen::MatrixXcd gamma_full = build_gamma(theta, lambdas, P_N);

    const LogDet first = complex_logdet(gamma_full.topLeftCorner(3, 3));
    double acc = first.log_magnitude;
    res.used = 1;
    int quiet = 0;
    for (int n = 1; n < N_max; ++n) {
        // Schur complement of the leading 3n x 3n block in the 3(n+1) frame
        const auto A = gamma_full.topLeftCorner(3 * n, 3 * n);
        const auto B = gamma_full.block(0, 3 * n, 3 * n, 3);
        const auto C = gamma_full.block(3 * n, 0, 3, 3 * n);
        const auto D = gamma_full.block(3 * n, 3 * n, 3, 3);
        const Eigen::MatrixXcd schur =
            D - C * Eigen::PartialPivLU<Eigen::MatrixXcd>(A).solve(B);
        const LogDet ld = complex_logdet(schur);
        res.increments.push_back(ld.log_magnitude);
        acc += ld.log_magnitude;
        res.used = n + 1;
        quiet = (std::abs(ld.log_magnitude) < tol) ? quiet + 1 : 0;
        if (quiet >= 3) {
            res.converged = true;
            break;
        }
    }
    res.log_xi = -0.5 * acc;
    return res;
}

std::vector<Eigen::Matrix2d> weighting_matrices(const SpectralBasis& basis,
                                                const Eigen::Matrix2d& Pi, double nu,
                                                const QuadratureConfig& quad) {
    const double scale = std::max(1.0, Pi.cwiseAbs().maxCoeff());
    if (std::abs(Pi(0, 1) - Pi(1, 0)) > 1e-12 * scale)
        throw NotSymmetric("weighting matrix must be symmetric");
    const int N = basis.count;
    std::vector<Eigen::Matrix2d> G(static_cast<std::size_t>(N) * N);

    // Scalar weight: U^T (c I) U = c I, so orthonormality gives the answer
    // without quadrature.
    if (Pi(0, 1) == 0.0 && Pi(1, 0) == 0.0 && Pi(0, 0) == Pi(1, 1)) {
        const double c = Pi(0, 0);
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k)
                G[static_cast<std::size_t>(j) * N + k] =
                    (j == k) ? Eigen::Matrix2d(c * Eigen::Matrix2d::Identity())
                             : Eigen::Matrix2d(Eigen::Matrix2d::Zero());
        return G;
    }

    for (int j = 1; j <= N; ++j) {
        for (int k = j; k <= N; ++k) {
            const double band = basis.omega[j - 1] + basis.omega[k - 1] + 2.0 * nu;
            const auto rule =
                composite_rule(0.0, basis.T, panel_count(quad, band, basis.T), quad.nodes_per_panel);
            Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double t = rule.nodes[i];
                const Eigen::Matrix2d Ut = rotation_U(nu, t);
                acc += rule.weights[i] * eigenfunction(basis, j, t) * eigenfunction(basis, k, t) *
                       (Ut.transpose() * Pi * Ut);
            }
            G[static_cast<std::size_t>(j - 1) * N + (k - 1)] = acc;
            if (j != k) G[static_cast<std::size_t>(k - 1) * N + (j - 1)] = acc.transpose();
        }
    }
    return G;
}

double critical_theta(std::span<const double> lambdas, const Eigen::MatrixXd& P_N,
                      double lo, double hi) {
    check_sizes(lambdas, P_N);
    if (!(lo > 0.0) || !(hi > lo)) throw BracketInvalid("need 0 < lo < hi");
    if (admissibility_radius(lo, lambdas, P_N) >= 1.0)
        throw BracketInvalid("radius at the lower bracket end is already >= 1");
    if (admissibility_radius(hi, lambdas, P_N) <= 1.0)
        throw BracketInvalid("radius at the upper bracket end is still <= 1");
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double r = admissibility_radius(mid, lambdas, P_N);
        if (std::abs(r - 1.0) <= 1e-10) return mid;
        (r < 1.0 ? lo : hi) = mid;
    }
    return mid;
}

} // namespace oqho
