// oqho — spectral engine for one-mode open quantum harmonic oscillators:
// commutator-kernel eigenbasis, QKL coefficient statistics, and the
// quadratic-exponential functional via the determinant formula.

#include "oqho/config.hpp"
#include "oqho/covariance.hpp"
#include "oqho/errors.hpp"
#include "oqho/model.hpp"
#include "oqho/oracle.hpp"
#include "oqho/qef.hpp"
#include "oqho/report.hpp"
#include "oqho/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerification = 4;

struct CliOverrides {
    std::string config_path;
    std::string out_dir;
    std::string theta_spec;
    int N = 0;
    bool verbose = false;
};

oqho::RunConfig resolve_config(const CliOverrides& cli) {
    oqho::RunConfig cfg = oqho::load_config(cli.config_path);
    if (!cli.out_dir.empty()) cfg.out_dir = cli.out_dir;
    if (!cli.theta_spec.empty()) cfg.thetas = oqho::parse_theta_spec(cli.theta_spec);
    if (cli.N > 0) cfg.N = cli.N;
    return cfg;
}

std::string out_path(const oqho::RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

int cmd_spectrum(const oqho::RunConfig& cfg, bool verbose) {
    const oqho::CanonicalModel model = cfg.canonical();
    const oqho::SpectralBasis basis = oqho::solve_roots(model.mu, cfg.T, cfg.N);

    std::ostringstream csv;
    csv << "k,u_k,omega_k,lambda_k,gamma_k,residual_pik,residual_trans\n";
    double trace_sum = 0.0;
    for (int k = 1; k <= basis.count; ++k) {
        trace_sum += basis.lambda[k - 1];
        csv << k << ',' << oqho::format_full(basis.u[k - 1]) << ','
            << oqho::format_full(basis.omega[k - 1]) << ','
            << oqho::format_full(basis.lambda[k - 1]) << ','
            << oqho::format_full(basis.gamma[k - 1]) << ','
            << oqho::format_full(basis.residual_root_equation(k)) << ','
            << oqho::format_full(basis.residual_frequency_equation(k)) << '\n';
    }
    oqho::write_text_atomic(out_path(cfg, "spectrum.csv"), csv.str());
    std::cout << "trace deficit T - sum(lambda_k) = " << oqho::format_full(cfg.T - trace_sum)
              << "\n";
    if (verbose)
        std::cout << "wrote " << out_path(cfg, "spectrum.csv") << " (" << basis.count << " modes)\n";
    return kExitOk;
}

int cmd_covariance(const oqho::RunConfig& cfg, bool verbose) {
    const oqho::CanonicalModel model = cfg.canonical();
    const oqho::SpectralBasis basis = oqho::solve_roots(model.mu, cfg.T, cfg.N);
    const Eigen::Matrix2d P = oqho::solve_lyapunov(model);
    const oqho::CovarianceSet set =
        oqho::assemble_covariance_set(basis, P, model, cfg.N, cfg.quad);

    oqho::write_text_atomic(out_path(cfg, "invariant_covariance.txt"), oqho::matrix_dump(P));
    oqho::write_text_atomic(out_path(cfg, "covariance_PN.txt"), oqho::matrix_dump(set.P_N));

    std::ostringstream csv;
    csv << "j,k,max_abs,frobenius\n";
    for (int j = 1; j <= cfg.N; ++j)
        for (int k = 1; k <= cfg.N; ++k) {
            const Eigen::Matrix2d& b = set.block(j, k);
            csv << j << ',' << k << ',' << oqho::format_full(b.cwiseAbs().maxCoeff()) << ','
                << oqho::format_full(b.norm()) << '\n';
        }
    oqho::write_text_atomic(out_path(cfg, "covariance_blocks.csv"), csv.str());
    if (verbose)
        std::cout << "admissibility floor: "
                  << oqho::format_full(oqho::admissibility_floor(set.P_N)) << "\n";
    return kExitOk;
}

// Shared by qef and sweep: one row per theta; inadmissible values are
// reported in the row rather than aborting the run.
int run_qef(const oqho::RunConfig& cfg, bool verbose, bool with_json) {
    if (cfg.thetas.empty())
        throw oqho::ConfigError("qef requires a theta list or range in the [theta] section");
    const oqho::CanonicalModel model = cfg.canonical();
    const oqho::SpectralBasis basis = oqho::solve_roots(model.mu, cfg.T, cfg.N);
    const Eigen::Matrix2d P = oqho::solve_lyapunov(model);
    const oqho::CovarianceSet set =
        oqho::assemble_covariance_set(basis, P, model, cfg.N, cfg.quad);

    std::ostringstream csv;
    csv << "theta,N,r_N,log_Xi_N,converged\n";
    json report;
    report["N"] = cfg.N;
    report["rows"] = json::array();
    double theta_max_ok = 0.0;
    oqho::QefSeriesResult series_max;

    for (double theta : cfg.thetas) {
        const double r = oqho::admissibility_radius(theta, basis.lambda, set.P_N);
        std::string converged = "no";
        std::string logxi = "nan";
        if (r >= 1.0 - 1e-12) {
            converged = "radius_exceeded";
        } else {
            const oqho::QefSeriesResult series =
                oqho::qef_series(theta, basis.lambda, set.P_N, cfg.series_tol);
            logxi = oqho::format_full(series.log_xi);
            converged = series.converged ? "yes" : "no";
            if (theta > theta_max_ok) {
                theta_max_ok = theta;
                series_max = series;
            }
        }
        csv << oqho::format_full(theta) << ',' << cfg.N << ',' << oqho::format_full(r) << ','
            << logxi << ',' << converged << '\n';
        json row;
        row["theta"] = theta;
        row["r_N"] = r;
        row["status"] = converged;
        if (converged != "radius_exceeded") row["log_Xi_N"] = std::stod(logxi);
        report["rows"].push_back(row);
        if (verbose) std::cout << "theta " << theta << ": r_N = " << r << " [" << converged << "]\n";
    }
    oqho::write_text_atomic(out_path(cfg, with_json ? "qef.csv" : "sweep.csv"), csv.str());

    if (with_json) {
        if (theta_max_ok > 0.0) {
            json inc;
            inc["theta"] = theta_max_ok;
            inc["increments"] = series_max.increments;
            inc["log_xi"] = series_max.log_xi;
            inc["converged"] = series_max.converged;
            inc["orders_used"] = series_max.used;
            report["schur_recursion_at_theta_max"] = inc;
        }
        oqho::write_text_atomic(out_path(cfg, "qef_report.json"), report.dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_verify(const oqho::RunConfig& cfg, bool verbose) {
    const oqho::CanonicalModel model = cfg.canonical();
    const oqho::SpectralBasis basis = oqho::solve_roots(model.mu, cfg.T, cfg.N);
    const oqho::ToleranceSet& tol = cfg.tol;

    json checks = json::array();
    bool all_pass = true;
    auto push = [&](const std::string& name, double computed, double reference, double tolerance,
                    bool pass) {
        json c;
        c["name"] = name;
        c["computed"] = computed;
        c["reference"] = reference;
        c["tolerance"] = tolerance;
        c["pass"] = pass;
        checks.push_back(c);
        all_pass = all_pass && pass;
        if (verbose)
            std::cout << (pass ? "[ok]   " : "[FAIL] ") << name << " computed=" << computed
                      << " tol=" << tolerance << "\n";
    };

    // structural identities for the configured model
    {
        const Eigen::Matrix2d pr = oqho::pr_residual(model.A, model.B);
        push("pr_residual", pr.cwiseAbs().maxCoeff(), 0.0, tol.pr_residual,
             pr.cwiseAbs().maxCoeff() <= tol.pr_residual);
        const Eigen::Matrix2d P = oqho::solve_lyapunov(model);
        const Eigen::Matrix2d lr = oqho::lyapunov_residual(
            model.mu, model.nu, P, model.B * model.B.transpose());
        push("lyapunov_residual", lr.cwiseAbs().maxCoeff(), 0.0, tol.lyapunov_residual,
             lr.cwiseAbs().maxCoeff() <= tol.lyapunov_residual);
    }

    // orthonormality under the configured quadrature
    {
        const Eigen::MatrixXd G = oqho::gram_matrix(basis, cfg.quad);
        const double dev =
            (G - Eigen::MatrixXd::Identity(cfg.N, cfg.N)).cwiseAbs().maxCoeff();
        push("gram_identity_deviation", dev, 0.0, tol.gram_identity, dev <= tol.gram_identity);
    }

    // operator eigenrelation ||C f_k - lambda_k f_k|| / lambda_k
    {
        double worst = 0.0;
        const int kmax = std::min(basis.count, 5);
        const auto grid = oqho::composite_rule(0.0, cfg.T, 64, 4);
        for (int k = 1; k <= kmax; ++k) {
            auto fk = [&](double t) { return oqho::eigenfunction(basis, k, t); };
            double num = 0.0;
            for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
                const double g = oqho::covariance_operator_at(
                    basis.mu, cfg.T, fk, grid.nodes[i], basis.omega[k - 1], cfg.quad);
                const double d = g - basis.lambda[k - 1] * fk(grid.nodes[i]);
                num += grid.weights[i] * d * d;
            }
            worst = std::max(worst, std::sqrt(num) / basis.lambda[k - 1]);
        }
        push("operator_eigenrelation", worst, 0.0, tol.operator_eigenrelation,
             worst <= tol.operator_eigenrelation);
    }

    // identity-case blocks: quadrature + eigenfunctions + orthogonality
    {
        const oqho::CovarianceSet set = oqho::assemble_covariance_set(
            basis, Eigen::Matrix2d::Identity(), model, cfg.N, cfg.quad);
        double dev = 0.0;
        for (int j = 1; j <= cfg.N; ++j)
            for (int k = 1; k <= cfg.N; ++k) {
                const Eigen::Matrix2d expect =
                    j == k ? Eigen::Matrix2d(Eigen::Matrix2d::Identity()) : Eigen::Matrix2d(Eigen::Matrix2d::Zero());
                dev = std::max(dev, (set.block(j, k) - expect).cwiseAbs().maxCoeff());
            }
        push("identity_blocks_deviation", dev, 0.0, tol.identity_blocks,
             dev <= tol.identity_blocks);

        const double floor = oqho::admissibility_floor(set.P_N);
        push("covariance_admissibility_floor", floor, 0.0, tol.admissibility_floor,
             floor >= -tol.admissibility_floor);

        // Wick moments against the mean-square path and Theorem-2 Taylor
        const oqho::WickMoments wm = oqho::wick_moments(basis.lambda, set.P_N);
        const double ms = oqho::mean_square_cost(basis.lambda, set.P_N);
        push("wick_m1_equals_mean_square", std::abs(wm.m1 - ms), 0.0, 0.0, wm.m1 == ms);

        const double theta_probe = 1e-3 / basis.lambda[0];
        const oqho::TaylorMatchReport rep =
            oqho::taylor_match(theta_probe, basis.lambda, set.P_N);
        const double rel = rep.residual / std::abs(rep.log_xi);
        push("taylor_relative_residual", rel, 0.0, tol.taylor_relative,
             rel <= tol.taylor_relative);
        push("taylor_halving_ratio", rep.ratio, 8.0, 2.0,
             rep.ratio >= 6.0 && rep.ratio <= 10.0);
    }

    // grid oracle vs analytic spectrum
    {
        const int n = tol.nystrom_grid;
        const int count = std::min(10, basis.count);
        oqho::NystromResult nys = oqho::nystrom_spectrum(basis.mu, cfg.T, n, count);
        oqho::compare_with_basis(nys, basis);
        double ev = 0.0;
        for (double e : nys.eigenvalue_rel_error) ev = std::max(ev, e);
        push("nystrom_eigenvalue_rel_error", ev, 0.0, tol.nystrom_eigenvalue_rel,
             ev <= tol.nystrom_eigenvalue_rel);
        double fl = 0.0;
        for (int k = 0; k < std::min(5, count); ++k)
            fl = std::max(fl, nys.eigenfunction_l2_dist[k]);
        push("nystrom_eigenfunction_l2", fl, 0.0, tol.nystrom_eigenfunction_l2,
             fl <= tol.nystrom_eigenfunction_l2);
    }

    json report;
    report["model"] = {{"mu", model.mu}, {"nu", model.nu}, {"T", cfg.T}, {"N", cfg.N}};
    report["checks"] = checks;
    report["all_pass"] = all_pass;
    oqho::write_text_atomic(out_path(cfg, "verify_report.json"), report.dump(2) + "\n");
    std::cout << (all_pass ? "verification passed" : "verification FAILED") << " ("
              << checks.size() << " checks)\n";
    return all_pass ? kExitOk : kExitVerification;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral engine for one-mode open quantum harmonic oscillators"};
    app.require_subcommand(1);

    CliOverrides cli;
    app.add_option("--config", cli.config_path, "Path to the run configuration")->required();
    app.add_option("--out", cli.out_dir, "Output directory (overrides [output] dir)");
    app.add_option("--theta", cli.theta_spec,
                   "Theta list 'a,b,c' or range 'start:stop:count:linear|log'");
    app.add_option("--n", cli.N, "Truncation order (overrides [run] N)");
    app.add_flag("--verbose", cli.verbose, "Chatty progress output");

    auto* sub_spectrum = app.add_subcommand("spectrum", "Solve the eigenbasis and export the spectrum CSV");
    auto* sub_cov = app.add_subcommand("covariance", "Assemble QKL cross-covariance blocks");
    auto* sub_qef = app.add_subcommand("qef", "Evaluate the exponential cost over the theta set");
    auto* sub_sweep = app.add_subcommand("sweep", "Theta sweep, CSV only");
    auto* sub_verify = app.add_subcommand("verify", "Run the built-in oracle checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        const oqho::RunConfig cfg = resolve_config(cli);
        if (sub_spectrum->parsed()) return cmd_spectrum(cfg, cli.verbose);
        if (sub_cov->parsed()) return cmd_covariance(cfg, cli.verbose);
        if (sub_qef->parsed()) return run_qef(cfg, cli.verbose, /*with_json=*/true);
        if (sub_sweep->parsed()) return run_qef(cfg, cli.verbose, /*with_json=*/false);
        if (sub_verify->parsed()) return cmd_verify(cfg, cli.verbose);
        return kExitConfig;
    } catch (const oqho::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const oqho::ConvergenceFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const oqho::SingularGamma& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
