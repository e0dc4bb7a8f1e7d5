#include "oqho/oracle.hpp"
#include "oqho/errors.hpp"
#include "oqho/qef.hpp"

#include <lapacke.h>

#include <cmath>
#include <complex>
#include <string>

namespace oqho {

NystromResult nystrom_spectrum(double mu, double T, int n, int count) {
    if (count < 1) throw IndexOutOfRange("eigenpair count must be >= 1");
    if (n < 50 * count)
        throw GridTooSmall("grid size " + std::to_string(n) + " below 50 * count = " +
                           std::to_string(50 * count));

    NystromResult res;
    res.n = n;
    res.dt = T / (n - 1);
    res.grid.resize(n);
    res.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        res.grid[i] = i * res.dt;
        res.weights[i] = (i == 0 || i == n - 1) ? 0.5 * res.dt : res.dt;
    }

    // symmetric similarity form sqrt(w_i) C(t_i - t_j) sqrt(w_j)
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    std::vector<double> sqw(n);
    for (int i = 0; i < n; ++i) sqw[i] = std::sqrt(res.weights[i]);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a[static_cast<std::size_t>(i) * n + j] =
                sqw[i] * std::exp(-mu * std::abs(res.grid[i] - res.grid[j])) * sqw[j];

    // top eigenpairs only; the matrix is dense symmetric
    int found = 0;
    std::vector<double> w(n);
    std::vector<double> z(static_cast<std::size_t>(n) * count);
    std::vector<int> isuppz(2 * static_cast<std::size_t>(count));
    const int info = LAPACKE_dsyevr(LAPACK_ROW_MAJOR, 'V', 'I', 'U', n, a.data(), n, 0.0, 0.0,
                                    n - count + 1, n, 0.0, &found, w.data(), z.data(), count,
                                    isuppz.data());
    if (info != 0 || found != count)
        throw ConvergenceFailure("dense symmetric eigensolve failed, info = " + std::to_string(info));

    // reorder descending, de-weight the eigenvectors back to function values
    res.eigenvalues.resize(count);
    res.eigenfunctions.resize(n, count);
    for (int k = 0; k < count; ++k) {
        const int src = count - 1 - k;  // dsyevr returns ascending
        res.eigenvalues[k] = w[src];
        for (int i = 0; i < n; ++i)
            res.eigenfunctions(i, k) = z[static_cast<std::size_t>(i) * count + src] / sqw[i];
    }
    return res;
}

void compare_with_basis(NystromResult& result, const SpectralBasis& basis) {
    const int count = static_cast<int>(result.eigenvalues.size());
    if (basis.count < count) throw IndexOutOfRange("basis holds fewer modes than the grid result");
    result.eigenvalue_rel_error.resize(count);
    result.eigenfunction_l2_dist.resize(count);
    for (int k = 0; k < count; ++k) {
        const double exact = basis.lambda[k];
        result.eigenvalue_rel_error[k] = std::abs(result.eigenvalues[k] - exact) / exact;

        double dot = 0.0;
        for (int i = 0; i < result.n; ++i)
            dot += result.weights[i] * result.eigenfunctions(i, k) *
                   eigenfunction(basis, k + 1, result.grid[i]);
        const double sign = dot >= 0.0 ? 1.0 : -1.0;
        double dist2 = 0.0;
        for (int i = 0; i < result.n; ++i) {
            const double d =
                sign * result.eigenfunctions(i, k) - eigenfunction(basis, k + 1, result.grid[i]);
            dist2 += result.weights[i] * d * d;
        }
        result.eigenfunction_l2_dist[k] = std::sqrt(dist2);
    }
}

WickMoments wick_moments(std::span<const double> lambdas, const Eigen::MatrixXd& P_N) {
    const int N = static_cast<int>(lambdas.size());
    if (P_N.rows() != 2 * N || P_N.cols() != 2 * N)
        throw IndexOutOfRange("covariance matrix must be 2N x 2N");

    WickMoments wm;
    // m1 = Re tr(W K) over the diagonal; imaginary blocks are traceless.
    // Summation order matches mean_square_cost term for term.
    for (int k = 0; k < N; ++k) {
        wm.m1 += lambdas[k] * P_N(2 * k, 2 * k);
        wm.m1 += lambdas[k] * P_N(2 * k + 1, 2 * k + 1);
    }

    Eigen::MatrixXcd K = P_N.cast<std::complex<double>>();
    const std::complex<double> ih(0.0, 0.5);
    for (int b = 0; b < N; ++b) {
        K(2 * b, 2 * b + 1) += ih;
        K(2 * b + 1, 2 * b) -= ih;
    }
    Eigen::VectorXd wdiag(2 * N);
    for (int k = 0; k < N; ++k) wdiag(2 * k) = wdiag(2 * k + 1) = lambdas[k];

    // Q_N = sum_a w_a z_a^2; the ordered pairing rule for E(z_a z_a z_b z_b)
    // gives K_aa K_bb + 2 K_ab^2, so the second cumulant is
    // 2 * sum_ab w_a w_b K_ab^2 = 2 Re tr(W K W K^T) (plain transpose).
    const Eigen::MatrixXcd WK = wdiag.asDiagonal() * K;
    wm.kappa2 = 2.0 * (WK * wdiag.asDiagonal() * K.transpose()).trace().real();
    wm.kappa1 = wm.m1;
    wm.m2 = wm.m1 * wm.m1 + wm.kappa2;
    return wm;
}

TaylorMatchReport taylor_match(double theta, std::span<const double> lambdas,
                               const Eigen::MatrixXd& P_N) {
    const WickMoments wm = wick_moments(lambdas, P_N);
    TaylorMatchReport rep;
    rep.theta = theta;
    if (theta == 0.0) return rep;  // 0 = 0 exactly

    rep.log_xi = qef_truncated(theta, lambdas, P_N).log_xi;
    rep.quadratic = theta * wm.kappa1 + 0.5 * theta * theta * wm.kappa2;
    rep.residual = std::abs(rep.log_xi - rep.quadratic);

    const double th2 = 0.5 * theta;
    const double lx2 = qef_truncated(th2, lambdas, P_N).log_xi;
    rep.residual_half = std::abs(lx2 - (th2 * wm.kappa1 + 0.5 * th2 * th2 * wm.kappa2));
    rep.ratio = rep.residual_half > 0.0 ? rep.residual / rep.residual_half : 0.0;
    return rep;
}

} // namespace oqho
