#pragma once

#include "oqho/model.hpp"
#include "oqho/quadrature.hpp"

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace oqho {

// Verification thresholds; defaults match the engine's contract, each can
// be overridden from the [tolerances] config section.
struct ToleranceSet {
    double pr_residual = 1e-12;
    double lyapunov_residual = 1e-12;
    double gram_identity = 1e-10;
    double identity_blocks = 1e-7;
    double operator_eigenrelation = 1e-8;
    double nystrom_eigenvalue_rel = 5e-3;
    double nystrom_eigenfunction_l2 = 1e-2;
    double taylor_relative = 1e-5;
    double admissibility_floor = 1e-9;
    int nystrom_grid = 4000;
};

struct RunConfig {
    // model: either (mu, nu) shortcut or explicit (R, M)
    std::optional<double> mu;
    std::optional<double> nu;
    std::optional<Eigen::Matrix2d> R;
    std::optional<Eigen::MatrixXd> M;

    double T = 1.0;
    int N = 10;
    std::vector<double> thetas;
    double series_tol = 1e-12;

    QuadratureConfig quad;
    ToleranceSet tol;
    std::string out_dir = ".";

    CanonicalModel canonical() const;  // resolves whichever model form is present
};

// Key-value configuration with [section] headers, '#'/';' comments.
// Throws ConfigError with the offending line number and key.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// "0.1,0.2,0.3" or "start:stop:count:linear|log" -> expanded list.
std::vector<double> parse_theta_spec(const std::string& spec);

} // namespace oqho
