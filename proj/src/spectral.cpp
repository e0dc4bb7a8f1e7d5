#include "oqho/spectral.hpp"
#include "oqho/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace oqho {

namespace {

// Root equation evaluated in extended precision: near large roots the pi*k
// term dominates and double cancellation would swamp the 1e-13 polish target.
long double root_equation(long double r, long double u, int k) {
    const long double pi_l = 3.14159265358979323846264338327950288L;
    return r * u + 2.0L * std::atan(u) - pi_l * k;
}

double solve_single_root(double r, int k) {
    const double pi = std::numbers::pi;
    double lo = pi * (k - 1) / r;
    double hi = pi * k / r;

    // bisection to a narrow bracket
    for (int it = 0; it < 200 && hi - lo > 1e-8 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (root_equation(r, mid, k) < 0.0L)
            lo = mid;
        else
            hi = mid;
    }

    // Newton polish; h'(u) = r + 2/(1+u^2) >= r > 0
    double u = 0.5 * (lo + hi);
    const long double target = std::max(1e-13L, 4.0L * 1.1e-19L * pi * k);
    for (int it = 0; it < 60; ++it) {
        const long double h = root_equation(r, u, k);
        if (std::abs(static_cast<double>(h)) <= static_cast<double>(target)) return u;
        const double hp = r + 2.0 / (1.0 + u * u);
        double next = u - static_cast<double>(h) / hp;
        if (next <= lo || next >= hi) next = 0.5 * (lo + hi);  // keep inside the bracket
        if (root_equation(r, next, k) < 0.0L)
            lo = next;
        else
            hi = next;
        u = next;
    }
    if (std::abs(static_cast<double>(root_equation(r, u, k))) <= static_cast<double>(target)) return u;
    throw ConvergenceFailure("root polish did not reach tolerance for k = " + std::to_string(k));
}

} // namespace

SpectralBasis solve_roots(double mu, double T, int N) {
    if (mu <= 0.0) throw NotStable("spectral basis requires mu > 0");
    if (T <= 0.0) throw ConfigError("time horizon must be positive");
    if (N < 1) throw ConfigError("root count must be >= 1");

    SpectralBasis basis;
    basis.mu = mu;
    basis.T = T;
    basis.r = mu * T;
    basis.count = N;
    basis.u.resize(N);
    basis.omega.resize(N);
    basis.lambda.resize(N);
    basis.gamma.resize(N);
    for (int k = 1; k <= N; ++k) {
        const double u = solve_single_root(basis.r, k);
        const double om = mu * u;
        basis.u[k - 1] = u;
        basis.omega[k - 1] = om;
        basis.lambda[k - 1] = 2.0 * mu / (mu * mu + om * om);
        basis.gamma[k - 1] = std::sqrt(0.5 * T * (om * om + mu * mu) + mu);
    }
    return basis;
}

double SpectralBasis::residual_root_equation(int k) const {
    if (k < 1 || k > count) throw IndexOutOfRange("mode index out of range");
    return std::abs(static_cast<double>(root_equation(r, u[k - 1], k)));
}

double SpectralBasis::residual_frequency_equation(int k) const {
    if (k < 1 || k > count) throw IndexOutOfRange("mode index out of range");
    const double om = omega[k - 1];
    const double raw = 2.0 * mu * om * std::cos(om * T) + (mu * mu - om * om) * std::sin(om * T);
    return std::abs(raw) / (mu * mu + om * om);
}

double eigenfunction(const SpectralBasis& basis, int k, double t) {
    if (k < 1 || k > basis.count)
        throw IndexOutOfRange("mode index " + std::to_string(k) + " outside 1.." + std::to_string(basis.count));
    if (t < 0.0 || t > basis.T)
        throw TimeOutOfDomain("t = " + std::to_string(t) + " outside [0, " + std::to_string(basis.T) + "]");
    const double om = basis.omega[k - 1];
    return (om * std::cos(om * t) + basis.mu * std::sin(om * t)) / basis.gamma[k - 1];
}

Eigen::MatrixXd gram_matrix(const SpectralBasis& basis, const QuadratureConfig& quad) {
    const int N = basis.count;
    Eigen::MatrixXd G(N, N);
    for (int j = 1; j <= N; ++j) {
        for (int k = j; k <= N; ++k) {
            const double om = basis.omega[j - 1] + basis.omega[k - 1];
            const double v = integrate(
                [&](double t) { return eigenfunction(basis, j, t) * eigenfunction(basis, k, t); }, 0.0,
                basis.T, quad, om);
            G(j - 1, k - 1) = v;
            G(k - 1, j - 1) = v;
        }
    }
    return G;
}

double covariance_operator_at(double mu, double T, const std::function<double(double)>& f, double s,
                              double band, const QuadratureConfig& quad) {
    if (s < 0.0 || s > T) throw TimeOutOfDomain("evaluation point outside [0, T]");
    const int panels_T = panel_count(quad, band, T);
    const double nodes_total = static_cast<double>(panels_T) * quad.nodes_per_panel;
    const double periods = band * T / (2.0 * std::numbers::pi);
    if (periods > 0.0 && nodes_total < 4.0 * periods)
        throw GridTooCoarse("fewer than 4 quadrature nodes per period of the declared band");

    auto sub_panels = [&](double len) {
        return std::max(4, static_cast<int>(std::ceil(panels_T * len / T)));
    };
    double acc = 0.0;
    if (s > 0.0) {
        const auto rule = composite_rule(0.0, s, sub_panels(s), quad.nodes_per_panel);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            acc += rule.weights[i] * std::exp(-mu * (s - rule.nodes[i])) * f(rule.nodes[i]);
    }
    if (s < T) {
        const auto rule = composite_rule(s, T, sub_panels(T - s), quad.nodes_per_panel);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            acc += rule.weights[i] * std::exp(-mu * (rule.nodes[i] - s)) * f(rule.nodes[i]);
    }
    return acc;
}

TabulatedFunction apply_covariance_operator(double mu, double T,
                                            const std::function<double(double)>& f, double band,
                                            const QuadratureConfig& quad,
                                            std::span<const double> out_grid) {
    TabulatedFunction g;
    g.t.assign(out_grid.begin(), out_grid.end());
    g.y.resize(g.t.size());
    for (std::size_t i = 0; i < g.t.size(); ++i)
        g.y[i] = covariance_operator_at(mu, T, f, g.t[i], band, quad);
    return g;
}

double mercer_partial_sum(const SpectralBasis& basis, double s, double t, int N) {
    if (N < 0 || N > basis.count) throw IndexOutOfRange("partial sum order outside 0..count");
    double acc = 0.0;
    for (int k = 1; k <= N; ++k)
        acc += basis.lambda[k - 1] * eigenfunction(basis, k, s) * eigenfunction(basis, k, t);
    return acc;
}

} // namespace oqho
