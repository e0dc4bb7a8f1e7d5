#include "oqho/model.hpp"
#include "oqho/constants.hpp"
#include "oqho/errors.hpp"

#include <cmath>
#include <string>

namespace oqho {

namespace {

constexpr double kSymTol = 1e-12;

void require_symmetric(const Eigen::Matrix2d& R) {
    const double scale = R.cwiseAbs().maxCoeff();
    if (std::abs(R(0, 1) - R(1, 0)) > kSymTol * std::max(1.0, scale))
        throw NotSymmetric("energy matrix is not symmetric");
}

} // namespace

Eigen::Matrix2d sqrt_spd(const Eigen::Matrix2d& R) {
    // For SPD 2x2: sqrt(R) = (R + sqrt(det R) I) / sqrt(trace R + 2 sqrt(det R))
    const double s = std::sqrt(R.determinant());
    const double t = std::sqrt(R.trace() + 2.0 * s);
    return (R + s * Eigen::Matrix2d::Identity()) / t;
}

OqhoModel build_model(const Eigen::Matrix2d& R, const Eigen::MatrixXd& M) {
    require_symmetric(R);
    const int m = static_cast<int>(M.rows());
    if (M.cols() != 2) throw ConfigError("coupling matrix must have 2 columns");
    if (m <= 0 || m % 2 != 0)
        throw OddChannelCount("channel count must be a positive even integer, got " + std::to_string(m));

    // Scale-aware positive definiteness: both principal minors strictly positive.
    const double tr = R.trace();
    if (R(0, 0) <= 0.0 || R.determinant() <= kSymTol * tr * tr)
        throw NotPositiveDefinite("energy matrix is not positive definite");

    OqhoModel model;
    model.R = 0.5 * (R + R.transpose());
    model.M = M;
    model.channels = m;
    model.nu = std::sqrt(model.R.determinant());

    const Eigen::MatrixXd Jm = field_form(m);
    const Eigen::Matrix2d MJM = M.transpose() * Jm * M;
    model.mu = MJM(0, 1);

    const Eigen::Matrix2d bJ = symplectic_unit();
    model.A = bJ * (model.R + MJM);
    model.B = bJ * M.transpose();

    // M^T J M must be an exact multiple of the antisymmetric unit; any
    // deviation means the input was corrupted, not merely inaccurate.
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    const Eigen::Matrix2d dev = MJM - model.mu * bJ;
    if (dev.cwiseAbs().maxCoeff() > 1e-12 * scale * scale)
        throw NotSymmetric("M^T J M is not an antisymmetric multiple of the symplectic unit");

    if (model.mu <= 0.0)
        throw NotStable("coupling gives mu = " + std::to_string(model.mu) +
                        " <= 0; drift matrix is not Hurwitz");

    model.transient_time = 1.0 / model.mu;
    return model;
}

CanonicalModel canonicalize(const OqhoModel& model) {
    if (model.mu <= 0.0) throw NotStable("cannot canonicalize an unstable model");
    CanonicalModel c;
    c.S = sqrt_spd(model.R / model.nu);
    c.mu = model.mu;
    c.nu = model.nu;
    c.channels = model.channels;
    c.A << -model.mu, model.nu, -model.nu, -model.mu;
    c.B = c.S * model.B;
    return c;
}

CanonicalModel canonical_from_rates(double mu, double nu) {
    if (mu <= 0.0) throw NotStable("mu must be positive, got " + std::to_string(mu));
    if (nu <= 0.0) throw ConfigError("nu must be positive, got " + std::to_string(nu));
    CanonicalModel c;
    c.S = Eigen::Matrix2d::Identity();
    c.mu = mu;
    c.nu = nu;
    c.channels = 2;
    c.A << -mu, nu, -nu, -mu;
    const double sm = std::sqrt(mu);
    c.B.resize(2, 2);
    c.B << 0.0, sm, -sm, 0.0;  // J * diag(sqrt(mu))^T
    return c;
}

Eigen::Matrix2d pr_residual(const Eigen::Matrix2d& A, const Eigen::MatrixXd& B) {
    const Eigen::Matrix2d theta = ccr_matrix();
    const Eigen::MatrixXd Jm = field_form(static_cast<int>(B.cols()));
    return A * theta + theta * A.transpose() + B * Jm * B.transpose();
}

Eigen::Matrix2d pr_residual(const OqhoModel& model) { return pr_residual(model.A, model.B); }

double kernel_C(double mu, double tau) { return std::exp(-mu * std::abs(tau)); }

Eigen::Matrix2d rotation_U(double nu, double tau) {
    const double c = std::cos(nu * tau);
    const double s = std::sin(nu * tau);
    Eigen::Matrix2d u;
    u << c, s, -s, c;
    return u;
}

Eigen::Matrix2d commutator_kernel(const CanonicalModel& model, double tau) {
    return 0.5 * kernel_C(model.mu, tau) * rotation_U(model.nu, tau) * symplectic_unit();
}

Eigen::Matrix2d two_point_sigma(const Eigen::Matrix2d& P, const CanonicalModel& model, double tau) {
    const Eigen::Matrix2d U = rotation_U(model.nu, tau);
    if (tau >= 0.0) return kernel_C(model.mu, tau) * (U * P);
    return kernel_C(model.mu, tau) * (P * U);
}

} // namespace oqho
