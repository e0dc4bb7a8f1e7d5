#pragma once

#include <functional>
#include <span>
#include <vector>

namespace oqho {

// Composite Gauss-Legendre controls. Panel counts are derived from the
// fastest oscillation present in the integrand: panels_per_halfperiod panels
// for every half-period omega*L/pi, floored at min_panels.
struct QuadratureConfig {
    double panels_per_halfperiod = 4.0;
    int nodes_per_panel = 8;
    int min_panels = 16;
    int max_panels = 20000;
};

// Gauss-Legendre rule on [-1, 1]; nodes/weights cached per order.
const std::vector<double>& gauss_legendre_nodes(int n);
const std::vector<double>& gauss_legendre_weights(int n);

// Panel count for an integrand with top angular frequency omega over a
// span of given length. Throws QuadratureBudgetExceeded past max_panels.
int panel_count(const QuadratureConfig& quad, double omega, double length);

// Composite rule over [a, b]; nodes ordered left to right.
struct CompositeRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
CompositeRule composite_rule(double a, double b, int panels, int nodes_per_panel);

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureConfig& quad, double omega);

} // namespace oqho
