#include "oqho/constants.hpp"
#include "oqho/covariance.hpp"
#include "oqho/errors.hpp"
#include "oqho/qef.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

using namespace oqho;

namespace {

// direct 3x3 complex determinant, independent of the LU path
std::complex<double> det3(const Eigen::Matrix3cd& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

CanonicalModel random_canonical(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (;;) {
        Eigen::MatrixXd M(4, 2);
        for (int i = 0; i < 4; ++i) {
            M(i, 0) = gauss(rng);
            M(i, 1) = gauss(rng);
        }
        if ((M.transpose() * field_form(4) * M)(0, 1) < 0.0) M.col(0) *= -1.0;
        if ((M.transpose() * field_form(4) * M)(0, 1) < 0.3) continue;
        Eigen::Matrix2d G;
        G << gauss(rng), gauss(rng), gauss(rng), gauss(rng);
        return canonicalize(build_model(G.transpose() * G + 0.3 * Eigen::Matrix2d::Identity(), M));
    }
}

struct Pipeline {
    SpectralBasis basis;
    Eigen::MatrixXd P_N;
};

Pipeline run_pipeline(const CanonicalModel& c, double T, int N) {
    const QuadratureConfig quad;
    Pipeline p{solve_roots(c.mu, T, N), {}};
    const CovarianceSet set = assemble_covariance_set(p.basis, solve_lyapunov(c), c, N, quad);
    p.P_N = set.P_N;
    return p;
}

} // namespace

TEST_SUITE("qef") {

TEST_CASE("factorization scalars") {
    // small-argument linearization
    const auto tiny = exponential_params(1e-8, 1.0);
    CHECK(std::abs(tiny.alpha - 1e-8) <= 1e-15);
    CHECK(std::abs(tiny.beta - 2e-8) <= 1e-15);

    // theta*lambda = ln 2: alpha = 3/5, beta = 15/8
    const auto ln2 = exponential_params(std::log(2.0), 1.0);
    CHECK(ln2.alpha == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(ln2.beta == doctest::Approx(1.875).epsilon(1e-15));

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unif(0.05, 1.1);
    for (int rep = 0; rep < 20; ++rep) {
        const auto p = exponential_params(unif(rng), unif(rng));
        CHECK(p.beta * (1.0 - p.alpha * p.alpha) ==
              doctest::Approx(2.0 * p.alpha).epsilon(1e-14));
        CHECK(p.beta >= 2.0 * p.alpha);  // used by the identity-case radius
    }
    // larger arguments: 1 - alpha^2 loses digits to cancellation, so the
    // identity only holds to a correspondingly looser relative tolerance
    std::uniform_real_distribution<double> wide(1.1, 6.0);
    for (int rep = 0; rep < 20; ++rep) {
        const auto p = exponential_params(wide(rng), 1.0);
        CHECK(p.beta * (1.0 - p.alpha * p.alpha) ==
              doctest::Approx(2.0 * p.alpha).epsilon(1e-9));
    }
}

TEST_CASE("structural matrices") {
    const std::vector<double> al{0.3, 0.1};
    const std::vector<double> be{0.8, 0.25};
    const StructuralMatrices s = build_structural_matrices(al, be);
    REQUIRE(s.Phi.rows() == 6);
    REQUIRE(s.Phi.cols() == 4);
    Eigen::MatrixXd phi1(3, 2);
    phi1 << 1, 0, 0, 1, 1, 0;
    CHECK((s.Phi.topLeftCorner(3, 2) - phi1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.Phi.topRightCorner(3, 2).cwiseAbs().maxCoeff() == 0.0);

    // Phi^T Psi Phi = diag_k(2 alpha_k, beta_k)
    const Eigen::MatrixXd m = s.Phi.transpose() * s.Psi_diag.asDiagonal() * s.Phi;
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(4, 4);
    expect.diagonal() << 2 * al[0], be[0], 2 * al[1], be[1];
    CHECK((m - expect).cwiseAbs().maxCoeff() <= 1e-15);

    CHECK((s.Upsilon - s.Upsilon.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.Upsilon.diagonal().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("diamond map") {
    Eigen::MatrixXd sym(2, 2);
    sym << 1.0, 2.0, 2.0, 5.0;
    CHECK((diamond_map(sym) - sym).cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd d(2, 2);
    d << 1.0, 2.0, 3.0, 4.0;
    Eigen::MatrixXd expect(2, 2);
    expect << 1.0, 2.0, 2.0, 4.0;
    CHECK((diamond_map(d) - expect).cwiseAbs().maxCoeff() == 0.0);

    // conjugating I ox J by Phi and symmetrizing gives I ox Upsilon
    const int N = 3;
    const std::vector<double> al(N, 0.1), be(N, 0.2);
    const StructuralMatrices s = build_structural_matrices(al, be);
    Eigen::MatrixXd IJ = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    for (int k = 0; k < N; ++k) IJ.block<2, 2>(2 * k, 2 * k) = symplectic_unit();
    const Eigen::MatrixXd mapped = diamond_map(Eigen::MatrixXd(s.Phi * IJ * s.Phi.transpose()));
    Eigen::MatrixXd expect2 = Eigen::MatrixXd::Zero(3 * N, 3 * N);
    for (int k = 0; k < N; ++k) expect2.block<3, 3>(3 * k, 3 * k) = s.Upsilon;
    CHECK((mapped - expect2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("admissibility radius") {
    const SpectralBasis basis = solve_roots(1.0, 1.0, 6);
    const Eigen::MatrixXd I12 = Eigen::MatrixXd::Identity(12, 12);

    CHECK(admissibility_radius(0.0, basis.lambda, I12) == 0.0);
    CHECK(admissibility_radius(1e-9, basis.lambda, I12) <= 1e-8);

    // identity case: radius is beta_1 = sinh(2 theta lambda_1)
    for (double theta : {0.05, 0.2, 0.5}) {
        const double expect = std::sinh(2.0 * theta * basis.lambda[0]);
        CHECK(admissibility_radius(theta, basis.lambda, I12) ==
              doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("radius monotone in truncation order and theta") {
    std::mt19937_64 rng(19);
    for (int rep = 0; rep < 3; ++rep) {
        const CanonicalModel c = random_canonical(rng);
        const auto pipe = run_pipeline(c, 1.0, 5);
        const double theta = 0.1 / pipe.basis.lambda[0];
        double prev = 0.0;
        for (int n = 1; n <= 5; ++n) {
            const std::vector<double> lam(pipe.basis.lambda.begin(), pipe.basis.lambda.begin() + n);
            const double r = admissibility_radius(theta, lam, pipe.P_N.topLeftCorner(2 * n, 2 * n));
            CHECK(r >= prev - 1e-12);
            prev = r;
        }
        CHECK(admissibility_radius(1.5 * theta, pipe.basis.lambda, pipe.P_N) >= prev - 1e-12);
    }
}

TEST_CASE("truncated functional: zero risk sensitivity") {
    const SpectralBasis basis = solve_roots(1.0, 1.0, 4);
    const Eigen::MatrixXd I8 = Eigen::MatrixXd::Identity(8, 8);
    const QefEvaluation ev = qef_truncated(0.0, basis.lambda, I8);
    CHECK(ev.log_xi == 0.0);
    CHECK(ev.radius == 0.0);
    CHECK((ev.Gamma - Eigen::MatrixXcd::Identity(12, 12)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-mode determinant against a hand expansion") {
    const SpectralBasis basis = solve_roots(1.0, 1.0, 1);
    const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
    const double theta = 0.3;
    const auto p = exponential_params(theta, basis.lambda[0]);

    // build the 3x3 by hand: Gamma = I - (Phi*Phi^T + (i/2)Ups) Psi for P = I
    Eigen::Matrix3cd m;
    const std::complex<double> ih(0.0, 0.5);
    Eigen::Matrix3d phiphit;
    phiphit << 1, 0, 1, 0, 1, 0, 1, 0, 1;
    Eigen::Matrix3d ups;
    ups << 0, 1, 0, 1, 0, -1, 0, -1, 0;
    Eigen::Vector3d psi(p.alpha, p.beta, p.alpha);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            m(a, b) = (a == b ? 1.0 : 0.0) - (phiphit(a, b) + ih * ups(a, b)) * psi(b);

    const QefEvaluation ev = qef_truncated(theta, basis.lambda, I2);
    CHECK((ev.Gamma - m).cwiseAbs().maxCoeff() <= 1e-15);

    const std::complex<double> d = det3(m);
    CHECK(std::abs(d.imag()) <= 1e-12 * std::abs(d));
    CHECK(ev.log_xi == doctest::Approx(-0.5 * std::log(d.real())).epsilon(1e-12));
    CHECK(std::abs(ev.logdet_phase) <= 1e-9);
}

TEST_CASE("determinant in (0, 1] and the Jensen lower bound") {
    std::mt19937_64 rng(29);
    const CanonicalModel c = random_canonical(rng);
    const auto pipe = run_pipeline(c, 1.0, 5);
    const double ms = mean_square_cost(pipe.basis.lambda, pipe.P_N);
    const double theta_star = critical_theta(pipe.basis.lambda, pipe.P_N, 1e-6, 50.0);
    for (double f : {0.1, 0.4, 0.8}) {
        const QefEvaluation ev = qef_truncated(f * theta_star, pipe.basis.lambda, pipe.P_N);
        const double det = std::exp(-2.0 * ev.log_xi);
        CHECK(det > 0.0);
        CHECK(det <= 1.0);
        CHECK(std::abs(ev.logdet_phase) <= 1e-9);
        CHECK(ev.log_xi >= f * theta_star * ms - 1e-12);
    }
}

TEST_CASE("pure vacuum state: exact exponential law") {
    // P = I/2 makes each mode an eigenstate of its quadratic form, so
    // log Xi_N = theta * sum(lambda) exactly across the admissible range.
    const SpectralBasis basis = solve_roots(1.0, 1.0, 8);
    const Eigen::MatrixXd Pv = 0.5 * Eigen::MatrixXd::Identity(16, 16);
    double lamsum = 0.0;
    for (double l : basis.lambda) lamsum += l;
    for (double theta : {0.1, 0.4, 0.9}) {
        const QefEvaluation ev = qef_truncated(theta, basis.lambda, Pv);
        CHECK(ev.log_xi == doctest::Approx(theta * lamsum).epsilon(1e-13));
    }
}

TEST_CASE("derivative at zero equals the mean-square cost") {
    const SpectralBasis basis = solve_roots(1.0, 1.0, 10);
    const Eigen::MatrixXd I20 = Eigen::MatrixXd::Identity(20, 20);
    const double ms = mean_square_cost(basis.lambda, I20);
    const double h = 1e-6;
    const double fd = qef_truncated(h, basis.lambda, I20).log_xi / h;
    CHECK(std::abs(fd - ms) / ms <= 1e-5);
}

TEST_CASE("radius gate") {
    const SpectralBasis basis = solve_roots(1.0, 1.0, 4);
    const Eigen::MatrixXd I8 = Eigen::MatrixXd::Identity(8, 8);
    const double theta_star = std::asinh(1.0) / (2.0 * basis.lambda[0]);
    CHECK_THROWS_AS(qef_truncated(1.01 * theta_star, basis.lambda, I8), RadiusExceeded);
    CHECK_THROWS_AS(qef_series(1.01 * theta_star, basis.lambda, I8, 1e-12), RadiusExceeded);
    CHECK_NOTHROW(qef_truncated(0.99 * theta_star, basis.lambda, I8));
}

TEST_CASE("series telescopes against direct determinants") {
    const SpectralBasis basis = solve_roots(1.0, 1.0, 12);
    std::mt19937_64 rng(31);
    const CanonicalModel c = random_canonical(rng);
    const auto pipe = run_pipeline(c, 1.0, 6);

    SUBCASE("identity case: increments match per-mode determinants") {
        const Eigen::MatrixXd I24 = Eigen::MatrixXd::Identity(24, 24);
        const double theta = 0.2;
        const QefSeriesResult series = qef_series(theta, basis.lambda, I24, 0.0);
        REQUIRE(series.used == 12);
        double partial = -2.0 * qef_truncated(theta, {basis.lambda.begin(), basis.lambda.begin() + 1},
                                              Eigen::MatrixXd::Identity(2, 2))
                                    .log_xi;
        for (int n = 2; n <= 12; ++n) {
            partial += series.increments[n - 2];
            const std::vector<double> lam(basis.lambda.begin(), basis.lambda.begin() + n);
            const double direct =
                -2.0 * qef_truncated(theta, lam, Eigen::MatrixXd::Identity(2 * n, 2 * n)).log_xi;
            CHECK(std::abs(partial - direct) <= 1e-10);

            // block-diagonal structure: each increment is a single-mode log det
            const double single =
                -2.0 *
                qef_truncated(theta, {basis.lambda.begin() + (n - 1), basis.lambda.begin() + n},
                              Eigen::MatrixXd::Identity(2, 2))
                    .log_xi;
            CHECK(std::abs(series.increments[n - 2] - single) <= 1e-12);
        }
    }

    SUBCASE("general model: telescoping within 1e-10") {
        const double theta = 0.5 * critical_theta(pipe.basis.lambda, pipe.P_N, 1e-6, 50.0);
        const QefSeriesResult series = qef_series(theta, pipe.basis.lambda, pipe.P_N, 0.0);
        double partial =
            -2.0 * qef_truncated(theta, {pipe.basis.lambda.begin(), pipe.basis.lambda.begin() + 1},
                                 pipe.P_N.topLeftCorner(2, 2))
                       .log_xi;
        for (int n = 2; n <= 6; ++n) {
            partial += series.increments[n - 2];
            const std::vector<double> lam(pipe.basis.lambda.begin(), pipe.basis.lambda.begin() + n);
            const double direct =
                -2.0 * qef_truncated(theta, lam, pipe.P_N.topLeftCorner(2 * n, 2 * n)).log_xi;
            CHECK(std::abs(partial - direct) <= 1e-10);
        }
        CHECK(series.log_xi ==
              doctest::Approx(qef_truncated(theta, pipe.basis.lambda, pipe.P_N).log_xi)
                  .epsilon(1e-10));
    }

    SUBCASE("early stop on decaying increments") {
        // identity case: the n-th increment is ~2*theta*lambda_n with
        // lambda_n ~ 1/n^2, so a 1e-6 tolerance trips around n = 23
        const SpectralBasis wide = solve_roots(1.0, 1.0, 40);
        const Eigen::MatrixXd I80 = Eigen::MatrixXd::Identity(80, 80);
        const QefSeriesResult series = qef_series(1e-3, wide.lambda, I80, 1e-6);
        CHECK(series.converged);
        CHECK(series.used < 40);
        CHECK(series.used > 5);
    }
}

TEST_CASE("monotonicity and convexity in theta") {
    std::mt19937_64 rng(37);
    const CanonicalModel c = random_canonical(rng);
    const auto pipe = run_pipeline(c, 1.0, 6);
    const double theta_star = critical_theta(pipe.basis.lambda, pipe.P_N, 1e-6, 50.0);

    // Xi_{N+1} >= Xi_N at fixed theta
    const double theta = 0.6 * theta_star;
    double prev = -1.0;
    for (int n = 1; n <= 6; ++n) {
        const std::vector<double> lam(pipe.basis.lambda.begin(), pipe.basis.lambda.begin() + n);
        const double lx = qef_truncated(theta, lam, pipe.P_N.topLeftCorner(2 * n, 2 * n)).log_xi;
        CHECK(lx >= prev - 1e-12);
        prev = lx;
    }

    // increasing and convex on a theta grid
    std::vector<double> lx;
    for (int i = 1; i <= 20; ++i)
        lx.push_back(qef_truncated(0.9 * theta_star * i / 20.0, pipe.basis.lambda, pipe.P_N).log_xi);
    for (std::size_t i = 1; i < lx.size(); ++i) CHECK(lx[i] > lx[i - 1]);
    for (std::size_t i = 1; i + 1 < lx.size(); ++i)
        CHECK(lx[i + 1] - lx[i] >= lx[i] - lx[i - 1] - 1e-12);
}

TEST_CASE("weighting matrices") {
    const QuadratureConfig quad;
    const SpectralBasis basis = solve_roots(1.0, 1.0, 4);
    const double nu = 1.0;

    const auto G_id = weighting_matrices(basis, Eigen::Matrix2d::Identity(), nu, quad);
    const auto G_sc = weighting_matrices(basis, 2.5 * Eigen::Matrix2d::Identity(), nu, quad);
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
            const Eigen::Matrix2d expect =
                j == k ? Eigen::Matrix2d(Eigen::Matrix2d::Identity()) : Eigen::Matrix2d(Eigen::Matrix2d::Zero());
            CHECK((G_id[j * 4 + k] - expect).cwiseAbs().maxCoeff() == 0.0);
            CHECK((G_sc[j * 4 + k] - 2.5 * expect).cwiseAbs().maxCoeff() == 0.0);
        }

    // non-scalar weight goes through quadrature; transpose symmetry holds
    const auto G = weighting_matrices(basis, pauli3(), nu, quad);
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
            CHECK((G[j * 4 + k] - G[k * 4 + j].transpose()).cwiseAbs().maxCoeff() <= 1e-9);

    Eigen::Matrix2d asym;
    asym << 1.0, 0.3, -0.3, 1.0;
    CHECK_THROWS_AS(weighting_matrices(basis, asym, nu, quad), NotSymmetric);
}

TEST_CASE("critical theta") {
    const SpectralBasis basis = solve_roots(1.0, 1.0, 10);
    const Eigen::MatrixXd I20 = Eigen::MatrixXd::Identity(20, 20);
    const double expect = std::asinh(1.0) / (2.0 * basis.lambda[0]);
    const double got = critical_theta(basis.lambda, I20, 1e-4, 10.0);
    CHECK(std::abs(got - expect) <= 1e-9);
    CHECK(admissibility_radius(0.99 * got, basis.lambda, I20) < 1.0);
    CHECK(admissibility_radius(1.01 * got, basis.lambda, I20) > 1.0);

    CHECK_THROWS_AS(critical_theta(basis.lambda, I20, 1e-4, 0.5 * expect), BracketInvalid);

    // theta* decreasing in truncation order for general models
    std::mt19937_64 rng(41);
    const CanonicalModel c = random_canonical(rng);
    const auto pipe = run_pipeline(c, 1.0, 5);
    double prev = 1e300;
    for (int n = 1; n <= 5; ++n) {
        const std::vector<double> lam(pipe.basis.lambda.begin(), pipe.basis.lambda.begin() + n);
        const double ts = critical_theta(lam, pipe.P_N.topLeftCorner(2 * n, 2 * n), 1e-6, 100.0);
        CHECK(ts <= prev + 1e-9);
        prev = ts;
    }
}

} // TEST_SUITE

