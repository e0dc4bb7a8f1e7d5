#include "oqho/quadrature.hpp"
#include "oqho/errors.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <string>

namespace oqho {

namespace {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Legendre nodes by Newton iteration on P_n, seeded with the Chebyshev-like
// asymptotic estimate; converges in a handful of steps for any practical n.
Rule make_rule(int n) {
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            // recurrence for P_n(x) and P_{n-1}(x)
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[n - 1 - i] = x;
        r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

const Rule& cached_rule(int n) {
    if (n < 1) throw ConfigError("gauss_legendre: order must be >= 1, got " + std::to_string(n));
    static std::map<int, Rule> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
    return it->second;
}

} // namespace

const std::vector<double>& gauss_legendre_nodes(int n) { return cached_rule(n).nodes; }
const std::vector<double>& gauss_legendre_weights(int n) { return cached_rule(n).weights; }

int panel_count(const QuadratureConfig& quad, double omega, double length) {
    const double halfperiods = std::abs(omega) * length / std::numbers::pi;
    int p = static_cast<int>(std::ceil(quad.panels_per_halfperiod * halfperiods));
    p = std::max(p, quad.min_panels);
    if (p > quad.max_panels)
        throw QuadratureBudgetExceeded("panel_count: " + std::to_string(p) + " panels needed, budget is " +
                                       std::to_string(quad.max_panels));
    return p;
}

CompositeRule composite_rule(double a, double b, int panels, int nodes_per_panel) {
    const auto& x = gauss_legendre_nodes(nodes_per_panel);
    const auto& w = gauss_legendre_weights(nodes_per_panel);
    CompositeRule r;
    r.nodes.reserve(static_cast<std::size_t>(panels) * nodes_per_panel);
    r.weights.reserve(static_cast<std::size_t>(panels) * nodes_per_panel);
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double c = lo + 0.5 * h;
        for (int i = 0; i < nodes_per_panel; ++i) {
            r.nodes.push_back(c + 0.5 * h * x[i]);
            r.weights.push_back(0.5 * h * w[i]);
        }
    }
    return r;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureConfig& quad, double omega) {
    if (b <= a) return 0.0;
    const auto rule = composite_rule(a, b, panel_count(quad, omega, b - a), quad.nodes_per_panel);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * f(rule.nodes[i]);
    return acc;
}

} // namespace oqho
