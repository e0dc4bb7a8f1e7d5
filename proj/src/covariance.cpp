#include "oqho/covariance.hpp"
#include "oqho/constants.hpp"
#include "oqho/errors.hpp"

#include <cmath>
#include <complex>
#include <string>

namespace oqho {

PauliCoefficients pauli_decompose(const Eigen::Matrix2d& sym) {
    const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
    if (std::abs(sym(0, 1) - sym(1, 0)) > 1e-12 * scale)
        throw NotSymmetric("pauli_decompose expects a symmetric matrix");
    PauliCoefficients c;
    c.b0 = 0.5 * (sym(0, 0) + sym(1, 1));
    c.b3 = 0.5 * (sym(0, 0) - sym(1, 1));
    c.b1 = sym(0, 1);
    return c;
}

Eigen::Matrix2d pauli_compose(const PauliCoefficients& c) {
    return c.b0 * Eigen::Matrix2d::Identity() + c.b1 * pauli1() + c.b3 * pauli3();
}

Eigen::Matrix2d solve_lyapunov(double mu, double nu, const Eigen::Matrix2d& BBt) {
    if (mu <= 0.0) throw NotStable("Lyapunov solution requires mu > 0");
    const PauliCoefficients b = pauli_decompose(BBt);
    const double denom = mu * mu + nu * nu;
    const double p1 = (mu * b.b1 - nu * b.b3) / denom;
    const double p3 = (nu * b.b1 + mu * b.b3) / denom;
    return 0.5 * (b.b0 / mu * Eigen::Matrix2d::Identity() + p1 * pauli1() + p3 * pauli3());
}

Eigen::Matrix2d solve_lyapunov(const CanonicalModel& model) {
    return solve_lyapunov(model.mu, model.nu, model.B * model.B.transpose());
}

Eigen::Matrix2d lyapunov_residual(double mu, double nu, const Eigen::Matrix2d& P,
                                  const Eigen::Matrix2d& BBt) {
    const Eigen::Matrix2d bJ = symplectic_unit();
    return -2.0 * mu * P + nu * (bJ * P - P * bJ) + BBt;
}

Eigen::Matrix2d qkl_cross_covariance(const SpectralBasis& basis, const Eigen::Matrix2d& P,
                                     const CanonicalModel& model, int j, int k,
                                     const QuadratureConfig& quad) {
    const int N = basis.count;
    if (j < 1 || j > N || k < 1 || k > N) throw IndexOutOfRange("block index outside 1..count");
    const double mu = basis.mu;
    const double nu = model.nu;
    const double T = basis.T;

    // Panel density follows the fastest oscillation present: f_j, f_k and the
    // 2*nu rotation inside U^T P U.
    const double band = basis.omega[j - 1] + basis.omega[k - 1] + 2.0 * nu;
    const int panels_T = panel_count(quad, band, T);
    const int nodes = quad.nodes_per_panel;
    auto sub_panels = [&](double len) {
        return std::max(4, static_cast<int>(std::ceil(panels_T * len / T)));
    };

    const auto outer = composite_rule(0.0, T, panels_T, nodes);
    Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
    for (std::size_t is = 0; is < outer.nodes.size(); ++is) {
        const double s = outer.nodes[is];
        const double fj = eigenfunction(basis, j, s);

        // lower triangle {t <= s}: matrix factor depends on t
        Eigen::Matrix2d inner_lo = Eigen::Matrix2d::Zero();
        if (s > 0.0) {
            const auto rule = composite_rule(0.0, s, sub_panels(s), nodes);
            for (std::size_t it = 0; it < rule.nodes.size(); ++it) {
                const double t = rule.nodes[it];
                const Eigen::Matrix2d Ut = rotation_U(nu, t);
                inner_lo += rule.weights[it] * eigenfunction(basis, k, t) *
                            std::exp(-mu * (s - t)) * (Ut.transpose() * P * Ut);
            }
        }

        // upper triangle {t > s}: matrix factor depends on s only
        double inner_hi = 0.0;
        if (s < T) {
            const auto rule = composite_rule(s, T, sub_panels(T - s), nodes);
            for (std::size_t it = 0; it < rule.nodes.size(); ++it) {
                const double t = rule.nodes[it];
                inner_hi += rule.weights[it] * eigenfunction(basis, k, t) * std::exp(-mu * (t - s));
            }
        }
        const Eigen::Matrix2d Us = rotation_U(nu, s);
        acc += outer.weights[is] * fj * (inner_lo + inner_hi * (Us.transpose() * P * Us));
    }
    return acc / std::sqrt(basis.lambda[j - 1] * basis.lambda[k - 1]);
}

const Eigen::Matrix2d& CovarianceSet::block(int j, int k) const {
    if (j < 1 || j > count || k < 1 || k > count)
        throw IndexOutOfRange("block index outside 1..count");
    return blocks[static_cast<std::size_t>(j - 1) * count + (k - 1)];
}

Eigen::MatrixXcd CovarianceSet::complex_covariance() const {
    Eigen::MatrixXcd K = P_N.cast<std::complex<double>>();
    const std::complex<double> ih(0.0, 0.5);
    for (int b = 0; b < count; ++b) {
        K(2 * b, 2 * b + 1) += ih;
        K(2 * b + 1, 2 * b) -= ih;
    }
    return K;
}

double admissibility_floor(const Eigen::MatrixXd& P_N) {
    const int n = static_cast<int>(P_N.rows());
    Eigen::MatrixXcd K = P_N.cast<std::complex<double>>();
    const std::complex<double> ih(0.0, 0.5);
    for (int b = 0; b + 1 < n; b += 2) {
        K(b, b + 1) += ih;
        K(b + 1, b) -= ih;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(K, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

CovarianceSet assemble_covariance_set(const SpectralBasis& basis, const Eigen::Matrix2d& P,
                                      const CanonicalModel& model, int N,
                                      const QuadratureConfig& quad) {
    if (N < 1 || N > basis.count) throw IndexOutOfRange("truncation order outside 1..count");
    CovarianceSet set;
    set.P = P;
    set.count = N;
    set.nu = model.nu;
    set.quad = quad;
    set.blocks.assign(static_cast<std::size_t>(N) * N, Eigen::Matrix2d::Zero());
    // compute j <= k, transpose symmetry fills the lower triangle exactly
    for (int j = 1; j <= N; ++j) {
        for (int k = j; k <= N; ++k) {
            const Eigen::Matrix2d b = qkl_cross_covariance(basis, P, model, j, k, quad);
            set.blocks[static_cast<std::size_t>(j - 1) * N + (k - 1)] = b;
            if (j != k) set.blocks[static_cast<std::size_t>(k - 1) * N + (j - 1)] = b.transpose();
        }
    }
    set.P_N.resize(2 * N, 2 * N);
    for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k)
            set.P_N.block<2, 2>(2 * j, 2 * k) = set.blocks[static_cast<std::size_t>(j) * N + k];

    const double floor = admissibility_floor(set.P_N);
    if (floor < -1e-9)
        throw AdmissibilityViolation("K_N eigenvalue floor " + std::to_string(floor) +
                                     " below -1e-9; quadrature error too large");
    return set;
}

Eigen::Matrix2d reconstruct_real_covariance(const SpectralBasis& basis, const CovarianceSet& set,
                                            double s, double t, int N) {
    if (N < 0 || N > set.count) throw IndexOutOfRange("truncation order outside 0..count");
    Eigen::Matrix2d core = Eigen::Matrix2d::Zero();
    for (int j = 1; j <= N; ++j) {
        const double fj = eigenfunction(basis, j, s);
        for (int k = 1; k <= N; ++k) {
            const double fk = eigenfunction(basis, k, t);
            core += std::sqrt(basis.lambda[j - 1] * basis.lambda[k - 1]) * fj * fk * set.block(j, k);
        }
    }
    return rotation_U(set.nu, s) * core * rotation_U(set.nu, t).transpose();
}

} // namespace oqho
