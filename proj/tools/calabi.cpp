// calabi: conic Calabi-ansatz profile toolkit.
//
// Subcommands: solve, expand, metric, glue, obstruct, sweep, verify, regimes.
// Outputs are deterministic for a fixed configuration: CSV with 17
// significant digits, RFC-4180, LF line endings; JSON reports with ordered
// keys. Exit codes: 0 ok, 1 verification failure, 2 input error,
// 3 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "calabi/asymptotics.hpp"
#include "calabi/branch_oracle.hpp"
#include "calabi/errors.hpp"
#include "calabi/gluing.hpp"
#include "calabi/io.hpp"
#include "calabi/metric.hpp"
#include "calabi/obstruction.hpp"
#include "calabi/params.hpp"
#include "calabi/profile.hpp"
#include "calabi/verify.hpp"

namespace fs = std::filesystem;
using namespace calabi;

namespace {

constexpr const char* kVersion = "calabi 1.0.0";

struct RunConfig {
    GeometryParams geom;
    std::optional<Rational> beta;
    std::vector<Rational> beta_list;
    double theta = 0.6;
    double eta = 0.0;
    double margin = 10.0;
    Normalization normalization = Normalization::Raw;
    GridSpec grid;
    std::string out_dir = ".";
    std::string format = "both";  // csv | json | both
};

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot read config file " + path);
    Json j = Json::parse(in);
    if (j.contains("geometry")) cfg.geom = geometry_from_json(j["geometry"]);
    if (j.contains("beta")) cfg.beta = rational_from_json(j["beta"]);
    if (j.contains("beta_list"))
        for (const auto& b : j["beta_list"]) cfg.beta_list.push_back(rational_from_json(b));
    if (j.contains("theta")) cfg.theta = j["theta"].get<double>();
    if (j.contains("eta")) cfg.eta = j["eta"].get<double>();
    if (j.contains("margin")) cfg.margin = j["margin"].get<double>();
    if (j.contains("normalization"))
        cfg.normalization = j["normalization"].get<std::string>() == "a1"
                                ? Normalization::A1Normalized
                                : Normalization::Raw;
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        if (g.contains("points_per_decade"))
            cfg.grid.points_per_decade = g["points_per_decade"].get<int>();
        if (g.contains("decades_to_divisor"))
            cfg.grid.decades_to_divisor = g["decades_to_divisor"].get<int>();
        if (g.contains("decades_to_apex"))
            cfg.grid.decades_to_apex = g["decades_to_apex"].get<int>();
    }
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
    if (j.contains("format")) cfg.format = j["format"].get<std::string>();
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

bool emit_csv(const RunConfig& cfg) { return cfg.format == "csv" || cfg.format == "both"; }
bool emit_json(const RunConfig& cfg) { return cfg.format == "json" || cfg.format == "both"; }

Rational require_beta(const RunConfig& cfg) {
    if (!cfg.beta.has_value()) throw DomainError("this command requires --beta");
    return *cfg.beta;
}

Json profile_meta(const RunConfig& cfg, const ProfileSolution& sol) {
    Json j;
    j["version"] = kVersion;
    j["geometry"] = geometry_json(cfg.geom);
    j["constants"] = constants_json(sol.consts);
    j["normalization"] = to_string(sol.normalization);
    j["grid"] = Json{{"points_per_decade", cfg.grid.points_per_decade},
                     {"decades_to_divisor", cfg.grid.decades_to_divisor},
                     {"decades_to_apex", cfg.grid.decades_to_apex}};
    j["t_min"] = sol.t_min;
    j["u_shift"] = sol.u_shift;
    j["u_nexus"] = sol.u_nexus;
    j["psi_nexus"] = sol.psi_nexus;
    if (sol.u_extinct) j["u_extinct"] = *sol.u_extinct;
    j["samples"] = sol.t.size();
    j["quadrature_rel_tol"] = 1e-11;
    return j;
}

int cmd_solve(const RunConfig& cfg) {
    auto c = derive(cfg.geom, require_beta(cfg));
    auto sol = solve_profile(c, cfg.grid, cfg.normalization);
    if (emit_csv(cfg)) {
        CsvWriter csv(out_path(cfg, "profile.csv"), {"t", "u", "phi", "psi", "V"});
        for (std::size_t i = 0; i < sol.t.size(); ++i)
            csv.write({sol.t[i], sol.u[i], sol.phi[i], sol.psi[i], sol.V[i]});
    }
    if (emit_json(cfg)) write_json(out_path(cfg, "profile_meta.json"), profile_meta(cfg, sol));
    std::printf("solved %s profile at beta = %s (%zu samples) -> %s\n",
                to_string(sol.regime), require_beta(cfg).str().c_str(), sol.t.size(),
                cfg.out_dir.c_str());
    return 0;
}

int cmd_expand(const RunConfig& cfg) {
    const Rational beta = require_beta(cfg);
    auto c = derive(cfg.geom, beta);
    if (c.regime() != AngleRegime::Supercritical)
        throw RegimeError("expand requires beta > beta_* (the Green term needs a separation)");
    auto crit = solve_profile(derive(cfg.geom, c.beta_star_q), cfg.grid,
                              Normalization::A1Normalized);
    auto solb = solve_profile(c, cfg.grid, Normalization::A1Normalized);
    auto rep = fit_expansion(solb, crit, 4);
    auto drep = fit_derivative_expansions(solb, crit, rep.gauge_offset);

    if (emit_json(cfg)) {
        Json j;
        j["version"] = kVersion;
        j["geometry"] = geometry_json(cfg.geom);
        j["beta"] = rational_json(beta);
        j["gauge"] = to_string(rep.gauge);
        Json formula;
        formula["a1"] = rep.a1_formula;
        formula["a2"] = rep.a2_formula;
        formula["a_L"] = rep.a_L;
        Json ak = Json::array();
        for (double v : rep.a) ak.push_back(v);
        formula["a_k"] = ak;
        j["formula"] = formula;
        Json fitted;
        fitted["a1"] = rep.fitted_a1;
        fitted["a2"] = rep.fitted_a2;
        fitted["a_L"] = rep.fitted_a_L;
        fitted["gauge_offset"] = rep.gauge_offset;
        fitted["residual"] = rep.fit_residual;
        j["fitted"] = fitted;
        j["window"] = Json{{"rho_lo", rep.window_rho_lo}, {"rho_hi", rep.window_rho_hi}};
        Json deriv;
        deriv["slope_2a1_ratio"] = drep.slope_2a1_ratio;
        deriv["green_exponent"] = drep.green_exponent;
        deriv["green_sign_measured"] = drep.green_sign;
        deriv["green_second_ratio"] = drep.green_second_ratio;
        deriv["metric_ratio_K"] = drep.metric_ratio_K;
        j["derivatives"] = deriv;
        write_json(out_path(cfg, "expansion_report.json"), j);
    }
    if (emit_csv(cfg)) {
        // (r, phi_beta - phi_crit, Green model) for plotting
        CsvWriter csv(out_path(cfg, "expansion_fit.csv"), {"r", "dphi", "green_model"});
        const double d = c.beta - c.beta_star;
        auto grid = geometric_grid(rep.window_rho_lo, rep.window_rho_hi, 64);
        for (double rho : grid) {
            const double uu = u_of_rho(c, rho);
            const double dphi = solb.at_u(uu).phi - crit.at_u(uu).phi;
            const double model = rep.fitted_a_L * d / std::pow(rho, 2 * cfg.geom.n - 2);
            csv.write({2.0 * rho, dphi, model});
        }
    }
    std::printf("expansion: fitted a_L = %s (formula %s)\n",
                format_double(rep.fitted_a_L).c_str(), format_double(rep.a_L).c_str());
    return 0;
}

int cmd_metric(const RunConfig& cfg) {
    const Rational beta = require_beta(cfg);
    auto c = derive(cfg.geom, beta);
    auto sol = solve_profile(c, cfg.grid);

    if (emit_csv(cfg)) {
        CsvWriter csv(out_path(cfg, "metric.csv"),
                      {"s", "V", "ds2_coeff", "eta2_coeff", "gD_coeff"});
        const double s_lo = (c.regime() == AngleRegime::Subcritical)
                                ? subcritical_gamma(c) + 1e-6
                                : 1e-6;
        auto grid = geometric_grid(s_lo, c.alpha() * (1.0 - 1e-6), 200);
        for (double s : grid) {
            const double V = potential_V(c, s);
            csv.write({s, V, 1.0 / V, 4.0 * V, 2.0 * s / (c.alpha() - 1.0)});
        }
    }
    if (emit_json(cfg)) {
        Json j;
        j["version"] = kVersion;
        j["geometry"] = geometry_json(cfg.geom);
        j["constants"] = constants_json(c);
        const double angle = cone_angle_at_D(c);
        j["cone_angle_at_D"] = angle;
        j["cone_angle_over_2pi_beta"] = angle / (2.0 * M_PI * c.beta);
        if (c.regime() == AngleRegime::Subcritical) {
            auto far = cone_angle_at_infinity(c, sol);
            j["cone_angle_at_infinity"] = far.angle;
            j["far_decay_rate_fit"] = far.decay_rate_fit;
            if (c.beta <= 0.05) {
                auto col = small_beta_collapse(c);
                j["collapse"] = Json{{"ratio_325", col.ratio_325},
                                     {"sup_4V", col.sup_4V},
                                     {"circle_length_lambda", col.circle_length_lambda},
                                     {"interval_half_length", col.interval_half_length},
                                     {"transverse_factor_limit", col.transverse_factor_limit}};
            }
        }
        auto rig = futaki_rigidity_check({});
        j["rigidity"] = Json{{"ratio", rig.ratio}, {"gap", rig.gap}, {"strict", rig.strict}};
        write_json(out_path(cfg, "metric_report.json"), j);
    }
    std::printf("metric report written to %s\n", cfg.out_dir.c_str());
    return 0;
}

int cmd_glue(const RunConfig& cfg) {
    const Rational beta = require_beta(cfg);
    auto c = derive(cfg.geom, beta);
    auto plan = make_plan(cfg.geom, c.beta, cfg.theta, cfg.eta, cfg.margin);
    auto sol = solve_profile(c, cfg.grid, Normalization::A1Normalized);

    if (emit_json(cfg)) {
        Json j;
        j["version"] = kVersion;
        j["geometry"] = geometry_json(cfg.geom);
        j["beta"] = rational_json(beta);
        j["regime"] = to_string(plan.regime);
        if (std::isinf(plan.nu0))
            j["nu0"] = "infinity";
        else
            j["nu0"] = plan.nu0;
        j["eps_beta"] = plan.eps_beta;
        j["eta"] = plan.eta;
        j["epsilon"] = plan.epsilon;
        j["theta"] = plan.theta;
        j["sigma"] = plan.sigma;
        j["r_eps"] = plan.r_eps;
        j["u_eps"] = plan.u_eps;
        j["zones"] = Json{{"inner_rho_below", plan.rho_inner},
                          {"gluing_rho_range", Json::array({plan.rho_inner, plan.rho_outer})},
                          {"outer_rho_above", plan.rho_outer}};
        j["rho_range"] = Json::array({plan.rho_min, plan.rho_max});
        j["E"] = plan.E;
        j["F"] = plan.F;
        j["window_margins"] = Json::array({plan.margin_lo, plan.margin_hi});
        write_json(out_path(cfg, "gluing_plan.json"), j);
    }
    if (emit_csv(cfg)) {
        CsvWriter csv(out_path(cfg, "weight.csv"), {"u", "rho", "chi"});
        const double u_lo = sol.u_front() + 0.5;
        const double u_hi = std::log(16.0 / plan.epsilon) / c.beta_star;
        for (int i = 0; i <= 400; ++i) {
            const double uu = u_lo + (u_hi - u_lo) * i / 400.0;
            const double rho = weight_rho(plan, sol, uu);
            csv.write({uu, rho, cutoff_chi(plan, rho)});
        }
    }
    std::printf("gluing plan: eps_beta = %s, r_eps = %s\n",
                format_double(plan.eps_beta).c_str(), format_double(plan.r_eps).c_str());
    return 0;
}

int cmd_obstruct(const RunConfig& cfg, bool find_root, int trace_points) {
    const Rational beta = require_beta(cfg);
    auto c = derive(cfg.geom, beta);
    ModelInputs inputs = ModelInputs::make(c);
    ObstructionModel model(cfg.geom, c.beta, cfg.theta, inputs, cfg.margin);
    auto rep = model.report(cfg.eta);

    std::optional<double> root;
    if (find_root) root = model.find_root();

    if (emit_json(cfg)) {
        Json j;
        j["version"] = kVersion;
        j["geometry"] = geometry_json(cfg.geom);
        j["beta"] = rational_json(beta);
        j["regime"] = to_string(rep.regime);
        j["theta"] = rep.theta;
        j["eta"] = rep.eta;
        j["eps_beta"] = rep.eps_beta;
        j["epsilon"] = rep.epsilon;
        j["matched_kappa_ratio"] = rep.matched_kappa_ratio;
        j["J"] = rep.J_value;
        j["J_ibp"] = rep.J_ibp;
        j["I_normal"] = rep.I_normal;
        j["I2"] = Json{{"total", rep.I2.total},
                       {"tail_part", rep.I2.tail_part},
                       {"green_part", rep.I2.green_part},
                       {"tau", rep.I2.tau}};
        j["A_total"] = rep.A_total;
        j["a_beta"] = rep.a_beta;
        j["aprime_beta"] = rep.aprime_beta;
        j["kappa_fit"] = rep.kappa_fit;
        j["E"] = rep.E;
        j["F"] = rep.F;
        if (root) j["eta_root"] = *root;
        write_json(out_path(cfg, "obstruction_report.json"), j);
    }
    if (emit_csv(cfg)) {
        CsvWriter csv(out_path(cfg, "A_trace.csv"), {"eta", "epsilon", "A"});
        const double span = std::min(10.0 * rep.F, 0.45);
        for (int i = 0; i < trace_points; ++i) {
            const double eta = -span + 2.0 * span * i / (trace_points - 1);
            csv.write({eta, rep.eps_beta * (1.0 + eta), model.A(eta)});
        }
    }
    if (root)
        std::printf("obstruction: A(0) = %s, eta_root = %s\n",
                    format_double(rep.A_total).c_str(), format_double(*root).c_str());
    else
        std::printf("obstruction: A(%s) = %s\n", format_double(cfg.eta).c_str(),
                    format_double(rep.A_total).c_str());
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    if (cfg.beta_list.empty()) throw DomainError("sweep requires beta_list (config) or --betas");
    CsvWriter csv(out_path(cfg, "sweep.csv"),
                  {"beta", "regime", "u_nexus", "psi_nexus", "u_extinct", "cone_angle_at_D"});
    for (const auto& b : cfg.beta_list) {
        auto c = derive(cfg.geom, b);
        auto sol = solve_profile(c, cfg.grid);
        std::vector<std::string> row;
        row.push_back(b.str());
        row.push_back(to_string(sol.regime));
        row.push_back(format_double(sol.u_nexus));
        row.push_back(format_double(sol.psi_nexus));
        row.push_back(sol.u_extinct ? format_double(*sol.u_extinct) : "");
        row.push_back(format_double(cone_angle_at_D(c)));
        csv.write_strings(row);
    }
    std::printf("swept %zu angles -> %s\n", cfg.beta_list.size(), cfg.out_dir.c_str());
    return 0;
}

int cmd_verify(const RunConfig& cfg, double aL_mult) {
    const Rational beta =
        cfg.beta.value_or(Rational(1, 4) + Rational(1, 100000000));
    VerifyOptions opt;
    opt.aL_debug_multiplier = aL_mult;
    auto results = run_verification(cfg.geom, beta, opt);
    int failures = 0;
    for (const auto& r : results) {
        const char* tag = r.status == CheckResult::Status::Pass   ? "PASS"
                          : r.status == CheckResult::Status::Fail ? "FAIL"
                                                                  : "SKIP";
        if (r.status == CheckResult::Status::Skip)
            std::printf("%-4s  %-45s (%s)\n", tag, r.name.c_str(), r.note.c_str());
        else
            std::printf("%-4s  %-45s measured %-12.5g threshold %-10.3g %s\n", tag,
                        r.name.c_str(), r.measured, r.threshold, r.note.c_str());
        if (r.status == CheckResult::Status::Fail) ++failures;
    }
    std::printf("%d checks, %d failures\n", static_cast<int>(results.size()), failures);
    return failures ? 1 : 0;
}

std::string epsilon_beta_law(const GeometryParams& geom) {
    switch (classify(geom)) {
        case Nu0Regime::Less: {
            const Rational expo = (geom.alpha - Rational(1)) / Rational(geom.n * *geom.j0);
            return "(beta-beta_*)^{" + expo.str() + "}";
        }
        case Nu0Regime::Equal:
            return "((beta-beta_*)/(-log(beta-beta_*)))^{1/" + std::to_string(geom.n) + "}";
        case Nu0Regime::Greater:
            return "(beta-beta_*)^{1/" + std::to_string(geom.n) + "}";
    }
    return "?";
}

int cmd_regimes(const std::vector<std::string>& rows) {
    std::vector<GeometryParams> geoms;
    if (rows.empty()) {
        // projective-space rows: quadric divisor for n = 2..4, then the
        // large-degree hypersurface family with alpha = (n+1)/n
        geoms.push_back({2, Rational(3, 2), 1});
        geoms.push_back({3, Rational(2), 1});
        geoms.push_back({4, Rational(5, 2), 1});
        geoms.push_back({3, Rational(4, 3), 1});
        geoms.push_back({4, Rational(5, 4), 1});
    } else {
        for (const auto& row : rows) {
            auto c1 = row.find(',');
            auto c2 = row.find(',', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos)
                throw DomainError("regimes row must be n,alpha,j0");
            GeometryParams g;
            g.n = std::stoi(row.substr(0, c1));
            g.alpha = Rational::parse(row.substr(c1 + 1, c2 - c1 - 1));
            const std::string j0s = row.substr(c2 + 1);
            if (j0s == "inf" || j0s == "infinity")
                g.j0 = std::nullopt;
            else
                g.j0 = std::stoll(j0s);
            geoms.push_back(g);
        }
    }
    std::printf("%-4s %-8s %-9s %-10s %s\n", "n", "alpha", "j0", "regime", "eps_beta");
    for (const auto& g : geoms) {
        g.validate();
        std::printf("%-4d %-8s %-9s %-10s %s\n", g.n, g.alpha.str().c_str(),
                    g.j0_infinite() ? "inf" : std::to_string(*g.j0).c_str(),
                    to_string(classify(g)), epsilon_beta_law(g).c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conic Calabi-ansatz profile toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    RunConfig cfg;
    if (const char* env_out = std::getenv("CALABI_OUT")) cfg.out_dir = env_out;

    std::string config_path, alpha_str, beta_str, j0_str, betas_str, norm_str, rows_str;
    int n_val = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--n", n_val, "complex dimension");
        sub->add_option("--alpha", alpha_str, "proportionality factor, rational like 3/2");
        sub->add_option("--beta", beta_str, "cone angle fraction, rational like 1/4");
        sub->add_option("--j0", j0_str, "formal-neighborhood order (integer or 'infinity')");
        sub->add_option("--theta", cfg.theta, "gluing-scale exponent in (0,1)");
        sub->add_option("--eta", cfg.eta, "relative deviation from eps_beta");
        sub->add_option("--margin", cfg.margin, "window margin factor");
        sub->add_option("--normalization", norm_str, "raw or a1");
        sub->add_option("--resolution", cfg.grid.points_per_decade, "grid points per decade");
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--format", cfg.format, "csv, json, or both");
    };

    auto* solve = app.add_subcommand("solve", "solve the radial profile");
    add_common(solve);
    auto* expand = app.add_subcommand("expand", "apex expansion: coefficients and fits");
    add_common(expand);
    auto* metric = app.add_subcommand("metric", "metric coefficients, cone angles, rigidity");
    add_common(metric);
    auto* glue = app.add_subcommand("glue", "gluing-scale plan, weight, cutoff");
    add_common(glue);
    auto* obstruct = app.add_subcommand("obstruct", "one-dimensional obstruction model");
    add_common(obstruct);
    bool find_root = false;
    int trace_points = 21;
    obstruct->add_flag("--find-root", find_root, "bisect the sign change of A(eta)");
    obstruct->add_option("--trace-points", trace_points, "points in the A(eta) trace");
    auto* sweep = app.add_subcommand("sweep", "run a list of angles");
    add_common(sweep);
    sweep->add_option("--betas", betas_str, "semicolon-separated rationals");
    auto* verify = app.add_subcommand("verify", "run the invariant checks, print PASS/FAIL");
    add_common(verify);
    bool inject_flag = false;
    verify->add_flag("--debug-wrong-al", inject_flag,
                     "debug: double the a_L formula so the expansion check fails");
    auto* regimes = app.add_subcommand("regimes", "print the eps_beta scaling-law table");
    regimes->add_option("--rows", rows_str, "semicolon-separated n,alpha,j0 rows");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        if (n_val > 0) cfg.geom.n = n_val;
        if (!alpha_str.empty()) cfg.geom.alpha = Rational::parse(alpha_str);
        if (!j0_str.empty()) {
            if (j0_str == "infinity" || j0_str == "inf")
                cfg.geom.j0 = std::nullopt;
            else
                cfg.geom.j0 = std::stoll(j0_str);
        }
        if (!beta_str.empty()) cfg.beta = Rational::parse(beta_str);
        if (!norm_str.empty())
            cfg.normalization =
                norm_str == "a1" ? Normalization::A1Normalized : Normalization::Raw;
        if (!betas_str.empty()) {
            cfg.beta_list.clear();
            std::size_t pos = 0;
            while (pos < betas_str.size()) {
                auto next = betas_str.find(';', pos);
                if (next == std::string::npos) next = betas_str.size();
                cfg.beta_list.push_back(Rational::parse(betas_str.substr(pos, next - pos)));
                pos = next + 1;
            }
        }

        if (solve->parsed()) return cmd_solve(cfg);
        if (expand->parsed()) return cmd_expand(cfg);
        if (metric->parsed()) return cmd_metric(cfg);
        if (glue->parsed()) return cmd_glue(cfg);
        if (obstruct->parsed()) return cmd_obstruct(cfg, find_root, trace_points);
        if (sweep->parsed()) return cmd_sweep(cfg);
        if (verify->parsed()) return cmd_verify(cfg, inject_flag ? 2.0 : 1.0);
        if (regimes->parsed()) {
            std::vector<std::string> rows;
            std::size_t pos = 0;
            while (pos < rows_str.size()) {
                auto next = rows_str.find(';', pos);
                if (next == std::string::npos) next = rows_str.size();
                rows.push_back(rows_str.substr(pos, next - pos));
                pos = next + 1;
            }
            return cmd_regimes(rows);
        }
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
