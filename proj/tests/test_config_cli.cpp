#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "oracles.hpp"

using namespace qcsync;
namespace fs = std::filesystem;

namespace {

const std::string kMinimal = R"(chain:
  theta1: pi/4
  theta2: pi/8
  theta3: pi/4
  phi: pi/8
  collisions: 20
system:
  n_th: 1
  xi: 0.5
  varphi: 0.1
  alpha: 3
)";

struct Run {
    int code = -1;
    std::string stderr_text;
};

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("qcsync_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p;
}

Run cli(const std::string& args, const fs::path& dir, const std::string& env = "") {
    const auto err = dir / "stderr.txt";
    const std::string cmd = env + " " + QCSYNC_CLI + std::string(" ") + args + " > " + (dir / "stdout.txt").string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err);
    r.stderr_text.assign(std::istreambuf_iterator<char>(in), {});
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t lines(const fs::path& p) {
    const auto s = slurp(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::string config_path(const std::string& name) { return std::string(QCSYNC_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST(Config, AngleExpressions) {
    const auto cfg = parse_config_string(kMinimal + "env: {alpha_E: [0.5, -0.25]}\n");
    EXPECT_NEAR(cfg.chain.theta1, kPi / 4, 1e-15);
    EXPECT_NEAR(cfg.chain.phi_a, kPi / 8, 1e-15);
    EXPECT_EQ(cfg.chain.phi_b, cfg.chain.phi_a);
    EXPECT_EQ(cfg.system_a.alpha, cplx(3.0));
    EXPECT_EQ(cfg.env.alpha_E, cplx(0.5, -0.25));
    EXPECT_TRUE(cfg.chain.markovian);
    EXPECT_NEAR(*detail::ExprParser("(1/4 - 1/8)*pi").parse(), kPi / 8, 1e-15);
    EXPECT_NEAR(*detail::ExprParser("-3*pi/8").parse(), -3 * kPi / 8, 1e-15);
    EXPECT_FALSE(detail::ExprParser("pi/").parse());
    EXPECT_FALSE(detail::ExprParser("two").parse());
}

TEST(Config, MemoryKnobs) {
    auto cfg = parse_config_string(kMinimal + "");
    EXPECT_EQ(cfg.chain.env_mixing(), 0.0);
    std::string text = kMinimal;
    text.replace(text.find("  collisions"), 0, "  env_mixing: pi/4\n");
    cfg = parse_config_string(text);
    EXPECT_FALSE(cfg.chain.markovian);
    EXPECT_NEAR(cfg.chain.env_mixing(), kPi / 4, 1e-15);
    text = kMinimal;
    text.replace(text.find("  collisions"), 0, "  theta_E: pi/3\n");
    EXPECT_NEAR(parse_config_string(text).chain.env_mixing(), kPi / 6, 1e-15);
}

TEST(Config, LineAnchoredErrors) {
    std::string text = kMinimal;
    text.replace(text.find("theta1: pi/4"), 12, "theta1: 2.0");
    try {
        parse_config_string(text, "cfg.yaml");
        FAIL();
    } catch (const Error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("cfg.yaml:2:"), std::string::npos) << msg;
        EXPECT_NE(msg.find("chain.theta1"), std::string::npos) << msg;
        EXPECT_TRUE(e.is_usage_error());
    }
    EXPECT_THROW(parse_config_string(kMinimal + "bogus: 1\n"), Error);
    EXPECT_THROW(parse_config_string("chain: {theta1: 0}\n"), Error);
    EXPECT_THROW(parse_config_string(kMinimal + "sweep: {theta1: pi/4, axis1: {min: 0, max: 1, steps: 1}, "
                                                "axis2: {min: 0, max: 0.1, steps: 2}}\n"),
                 Error);
    EXPECT_THROW(parse_config_string(kMinimal + "wigner: {snapshots: [21]}\n"), Error);
}

TEST(Config, ShippedConfigsParse) {
    for (const auto& entry : fs::directory_iterator(QCSYNC_CONFIG_DIR)) {
        if (entry.path().extension() != ".yaml") continue;
        EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
    }
}

TEST(Csv, TrajectoryRoundTrip) {
    const auto cfg = parse_config_string(kMinimal);
    const auto traj = run_trajectory(cfg);
    std::stringstream ss;
    csv::write_trajectory(ss, traj);
    const auto back = csv::read_trajectory(ss);
    ASSERT_EQ(back.size(), traj.size());
    for (std::size_t l = 0; l < traj.size(); ++l) {
        EXPECT_EQ(qcsync::testing::max_abs_diff(back[l], traj[l]), 0.0);
        EXPECT_TRUE(is_physical(back[l].cov).physical);
    }
}

TEST(Cli, PropagateFig2) {
    const auto dir = scratch("propagate");
    const auto r = cli("propagate --config " + config_path("fig2_sync.yaml") + " --out " + dir.string(), dir);
    ASSERT_EQ(r.code, 0) << r.stderr_text;
    EXPECT_EQ(lines(dir / "trajectory.csv"), 152u);
    EXPECT_EQ(lines(dir / "measures.csv"), 152u);
    const auto head = slurp(dir / "measures.csv");
    EXPECT_EQ(head.substr(0, head.find('\n')), "L,S_c,S_re,R_a,R_b,E_N");
    std::ifstream in(dir / "trajectory.csv");
    for (const auto& pt : csv::read_trajectory(in).points) EXPECT_TRUE(is_physical(pt.cov).physical);
}

TEST(Cli, PropagateIsDeterministic) {
    const auto d1 = scratch("det1"), d2 = scratch("det2");
    ASSERT_EQ(cli("propagate --config " + config_path("fig4b.yaml") + " --out " + d1.string(), d1).code, 0);
    ASSERT_EQ(cli("propagate --config " + config_path("fig4b.yaml") + " --out " + d2.string(), d2).code, 0);
    EXPECT_EQ(slurp(d1 / "trajectory.csv"), slurp(d2 / "trajectory.csv"));
    EXPECT_EQ(slurp(d1 / "measures.csv"), slurp(d2 / "measures.csv"));
}

TEST(Cli, Fig4bFinalEntanglement) {
    const auto dir = scratch("fig4b");
    ASSERT_EQ(cli("propagate --config " + config_path("fig4b.yaml") + " --out " + dir.string(), dir).code, 0);
    const auto text = slurp(dir / "measures.csv");
    const auto last = text.substr(text.rfind('\n', text.size() - 2) + 1);
    const double en = std::stod(last.substr(last.rfind(',') + 1));
    EXPECT_NEAR(en, 1.0, 0.05);
}

TEST(Cli, MalformedAngle) {
    const auto dir = scratch("bad");
    std::string text = kMinimal;
    text.replace(text.find("theta1: pi/4"), 12, "theta1: 2.0");
    const auto cfg = write(dir, "bad.yaml", text);
    const auto r = cli("propagate --config " + cfg.string() + " --out " + dir.string(), dir);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.stderr_text.find("chain.theta1"), std::string::npos) << r.stderr_text;
}

TEST(Cli, UsageErrors) {
    const auto dir = scratch("usage");
    EXPECT_EQ(cli("propagate", dir).code, 1);
    EXPECT_EQ(cli("frobnicate --config x", dir).code, 1);
    EXPECT_EQ(cli("propagate --config " + (dir / "missing.yaml").string(), dir).code, 1);
}

TEST(Cli, SweepDegenerateGridAndOrder) {
    const auto dir = scratch("sweep");
    const auto cfg = write(dir, "sweep.yaml",
                           kMinimal + "sweep:\n  theta1: pi/4\n  axis1: {min: -pi/8, max: pi/8, steps: 2}\n"
                                      "  axis2: {min: 0, max: pi/16, steps: 2}\n");
    ASSERT_EQ(cli("sweep --jobs 1 --config " + cfg.string() + " --out " + (dir / "j1").string(), dir).code, 0);
    ASSERT_EQ(cli("sweep --jobs 3 --config " + cfg.string() + " --out " + (dir / "j3").string(), dir).code, 0);
    EXPECT_EQ(lines(dir / "j1" / "sweep.csv"), 5u);
    EXPECT_EQ(slurp(dir / "j1" / "sweep.csv"), slurp(dir / "j3" / "sweep.csv"));
    const auto text = slurp(dir / "j1" / "sweep.csv");
    EXPECT_EQ(text.substr(0, text.find('\n')), "d21,d31,S_re_final,E_N_final");
    // axis1 major: the first two rows share d21.
    std::istringstream is(text);
    std::string h, r1, r2;
    std::getline(is, h);
    std::getline(is, r1);
    std::getline(is, r2);
    EXPECT_EQ(r1.substr(0, r1.find(',')), r2.substr(0, r2.find(',')));
}

TEST(Cli, SweepRequiresSection) {
    const auto dir = scratch("nosweep");
    const auto cfg = write(dir, "c.yaml", kMinimal);
    EXPECT_EQ(cli("sweep --config " + cfg.string() + " --out " + dir.string(), dir).code, 1);
}

TEST(Cli, WignerSnapshots) {
    const auto dir = scratch("wigner");
    const auto r = cli("wigner --config " + config_path("fig2_sync.yaml") + " --out " + dir.string(), dir);
    ASSERT_EQ(r.code, 0) << r.stderr_text;
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir)) files += e.path().filename().string().rfind("wigner_", 0) == 0;
    EXPECT_EQ(files, 8);
    EXPECT_EQ(lines(dir / "wigner_L60_mode_a.csv"), 201u * 201u + 1u);
}

TEST(Cli, WignerInitialPeak) {
    const auto dir = scratch("wigner0");
    const auto cfg = write(dir, "c.yaml", kMinimal);
    ASSERT_EQ(cli("wigner --snapshots 0 --config " + cfg.string() + " --out " + dir.string(), dir).code, 0);
    std::ifstream in(dir / "wigner_L0_mode_a.csv");
    std::string line;
    std::getline(in, line);
    double best = -1, bq = 0, bp = 0;
    while (std::getline(in, line)) {
        double q, p, w;
        char c;
        std::istringstream(line) >> q >> c >> p >> c >> w;
        if (w > best) best = w, bq = q, bp = p;
    }
    const auto traj = run_trajectory(parse_config_string(kMinimal));
    const double h = 2.0 * (std::sqrt(2.0) * 3.0 + 4.0 * std::sqrt(traj[0].cov.block(0, 0).diagonal().maxCoeff())) / 200;
    EXPECT_NEAR(bq, 3.0 * std::sqrt(2.0), h);
    EXPECT_NEAR(bp, 0.0, h);
}

TEST(Cli, WignerOutOfRange) {
    const auto dir = scratch("wigner_bad");
    const auto cfg = write(dir, "c.yaml", kMinimal);
    const auto r = cli("wigner --snapshots 21 --config " + cfg.string() + " --out " + dir.string(), dir);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.stderr_text.find("snapshot 21"), std::string::npos) << r.stderr_text;
}

TEST(Cli, SpectrumClosedAndEnvWarning) {
    const auto dir = scratch("spectrum");
    ASSERT_EQ(cli("spectrum --config " + config_path("spectrum_closed.yaml") + " --out " + dir.string(), dir).code, 0);
    const auto rep = slurp(dir / "spectrum_report.yaml");
    EXPECT_NE(rep.find("gap_defined: false"), std::string::npos) << rep;
    EXPECT_EQ(lines(dir / "spectrum.csv"), 257u);
    EXPECT_TRUE(fs::exists(dir / "dark_states.yaml"));

    auto text = slurp(config_path("spectrum_closed.yaml"));
    text.replace(text.find("output:"), 0, "env:\n  alpha_E: 0.5\n");
    const auto cfg = write(dir, "env.yaml", text);
    const auto r = cli("spectrum --config " + cfg.string() + " --out " + (dir / "env").string(), dir);
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.stderr_text.find("warning"), std::string::npos);
    EXPECT_NE(slurp(dir / "env" / "spectrum_report.yaml").find("valid: false"), std::string::npos);
}

TEST(Cli, OutputDirFromEnvironment) {
    const auto dir = scratch("envout");
    const auto cfg = write(dir, "c.yaml", kMinimal);
    const auto target = dir / "from_env";
    ASSERT_EQ(cli("propagate --config " + cfg.string(), dir, "QCSYNC_OUT_DIR=" + target.string()).code, 0);
    EXPECT_TRUE(fs::exists(target / "trajectory.csv"));
}
