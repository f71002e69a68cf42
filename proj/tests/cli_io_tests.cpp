// End-to-end CLI checks: exit-code contract, output schemas, determinism,
// and the golden regimes table. argv[1] is the CLI binary path.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
    std::printf("%s  %s\n", ok ? "ok  " : "FAIL", what.c_str());
    if (!ok) ++g_failures;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& cmd) { return std::system(cmd.c_str()); }

int exit_code(int status) { return WIFEXITED(status) ? WEXITSTATUS(status) : -1; }

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::printf("usage: cli_io_tests <calabi-binary>\n");
        return 1;
    }
    const std::string cli = argv[1];

    // exit-code contract
    check(exit_code(run(cli + " solve --n 2 --alpha 3/2 --beta 1/4 --out cli_t1 >/dev/null")) == 0,
          "solve critical profile exits 0");
    check(exit_code(run(cli + " solve --n 2 --alpha 5/0 --beta 1/4 --out cli_t2 2>/dev/null")) == 2,
          "malformed alpha 5/0 exits 2");
    check(exit_code(run(cli + " solve --n 2 --alpha 3 --beta 1/4 --out cli_t2 2>/dev/null")) == 2,
          "alpha = n+1 rejected with exit 2");
    check(exit_code(run(cli + " solve --n 2 --alpha 3/2 --beta 7/4 --out cli_t2 2>/dev/null")) == 2,
          "beta outside (0,1) rejected with exit 2");

    // determinism: repeated runs are byte-identical
    run(cli + " solve --n 2 --alpha 3/2 --beta 3/10 --out cli_d1 >/dev/null");
    run(cli + " solve --n 2 --alpha 3/2 --beta 3/10 --out cli_d2 >/dev/null");
    check(!slurp("cli_d1/profile.csv").empty() &&
              slurp("cli_d1/profile.csv") == slurp("cli_d2/profile.csv"),
          "profile.csv byte-identical across reruns");
    check(slurp("cli_d1/profile_meta.json") == slurp("cli_d2/profile_meta.json"),
          "profile_meta.json byte-identical across reruns");

    // CSV schema: header row, LF endings only
    {
        const std::string csv = slurp("cli_d1/profile.csv");
        check(csv.rfind("t,u,phi,psi,V\n", 0) == 0, "profile.csv header row");
        check(csv.find('\r') == std::string::npos, "profile.csv LF line endings");
    }

    // golden regimes table (pure rational formatting, platform-stable)
    {
        run(cli + " regimes > cli_regimes.txt");
        const std::string expected =
            "n    alpha    j0        regime     eps_beta\n"
            "2    3/2      1         nu0>n      (beta-beta_*)^{1/2}\n"
            "3    2        1         nu0=n      ((beta-beta_*)/(-log(beta-beta_*)))^{1/3}\n"
            "4    5/2      1         nu0<n      (beta-beta_*)^{3/8}\n"
            "3    4/3      1         nu0>n      (beta-beta_*)^{1/3}\n"
            "4    5/4      1         nu0>n      (beta-beta_*)^{1/4}\n";
        check(slurp("cli_regimes.txt") == expected, "golden regimes table");
    }

    // verify subcommand: PASS by default, FAIL (exit 1) with the debug flag
    check(exit_code(run(cli + " verify --n 2 --alpha 3/2 --beta 2500000001/10000000000"
                              " > cli_verify.txt")) == 0,
          "verify exits 0 near the critical angle");
    {
        const std::string v = slurp("cli_verify.txt");
        check(v.find("PASS") != std::string::npos && v.find("FAIL") == std::string::npos,
              "verify prints PASS lines and no FAIL");
        check(v.find("SKIP") != std::string::npos, "regime-specific checks reported as SKIP");
    }
    check(exit_code(run(cli + " verify --n 2 --alpha 3/2 --beta 2500000001/10000000000"
                              " --debug-wrong-al > cli_verify_bad.txt")) == 1,
          "verify with the doubled a_L formula exits 1");
    {
        const std::string v = slurp("cli_verify_bad.txt");
        check(v.find("FAIL") != std::string::npos &&
                  v.find("Green coefficient") != std::string::npos,
              "the injected wrong a_L fails exactly the expansion check");
    }

    // skip marker at the critical angle
    run(cli + " verify --n 2 --alpha 3/2 --beta 1/4 > cli_verify_crit.txt");
    check(slurp("cli_verify_crit.txt").find("SKIP  expansion: Green coefficient a_L") !=
              std::string::npos,
          "Green-coefficient check reported as SKIP at beta = beta_*");

    // config file + flag override
    {
        std::ofstream cfg("cli_cfg.json");
        cfg << R"({"geometry": {"n": 2, "alpha": {"num": 3, "den": 2}, "j0": 1},)"
            << R"("beta": {"num": 1, "den": 4}, "format": "csv", "out": "cli_cfg_out"})";
        cfg.close();
        check(exit_code(run(cli + " solve --config cli_cfg.json >/dev/null")) == 0,
              "config-file driven solve");
        check(!slurp("cli_cfg_out/profile.csv").empty() &&
                  slurp("cli_cfg_out/profile_meta.json").empty(),
              "format=csv suppresses the JSON output");
        check(exit_code(run(cli + " solve --config cli_cfg.json --beta 3/10 --out cli_cfg_o2"
                                  " >/dev/null")) == 0,
              "flags override the config file");
    }

    // CALABI_OUT sets the default output directory
    check(exit_code(run("CALABI_OUT=cli_env_out " + cli +
                        " solve --n 2 --alpha 3/2 --beta 1/4 >/dev/null")) == 0 &&
              !slurp("cli_env_out/profile.csv").empty(),
          "CALABI_OUT environment variable honored");

    // glue + obstruct smoke runs with JSON reports
    check(exit_code(run(cli + " glue --n 2 --alpha 3/2 --beta 2500000001/10000000000 --theta 0.6"
                              " --out cli_glue >/dev/null")) == 0,
          "glue plan at a near-critical angle");
    check(slurp("cli_glue/gluing_plan.json").find("\"r_eps\"") != std::string::npos,
          "gluing plan JSON has the scale fields");
    check(exit_code(run(cli + " obstruct --n 2 --alpha 3/2 --beta 2500000001/10000000000"
                              " --theta 0.6 --find-root --trace-points 5 --out cli_obs"
                              " >/dev/null")) == 0,
          "obstruct with root search");
    check(slurp("cli_obs/obstruction_report.json").find("\"eta_root\"") != std::string::npos,
          "obstruction report contains the sign-change root");

    // expand / metric / sweep smoke runs
    check(exit_code(run(cli + " expand --n 2 --alpha 3/2 --beta 2500000001/10000000000"
                              " --out cli_exp >/dev/null")) == 0,
          "expand near the critical angle");
    check(slurp("cli_exp/expansion_report.json").find("\"fitted\"") != std::string::npos &&
              !slurp("cli_exp/expansion_fit.csv").empty(),
          "expansion report and fit CSV written");
    check(exit_code(run(cli + " metric --n 2 --alpha 3/2 --beta 1/10 --out cli_met"
                              " >/dev/null")) == 0,
          "metric report for a subcritical angle");
    check(slurp("cli_met/metric_report.json").find("cone_angle_at_infinity") !=
              std::string::npos,
          "subcritical metric report includes the far cone angle");
    check(exit_code(run(cli + " sweep --n 2 --alpha 3/2 --betas \"1/5;1/4;3/10\" --out cli_sw"
                              " >/dev/null")) == 0,
          "sweep over three angles");
    check(slurp("cli_sw/sweep.csv").find("subcritical") != std::string::npos &&
              slurp("cli_sw/sweep.csv").find("supercritical") != std::string::npos,
          "sweep summary covers the regimes");

    std::printf("%d failures\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
