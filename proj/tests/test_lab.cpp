#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "semilab/lab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = SEMILAB_CLI_PATH;
const std::string kSamples = SEMILAB_SAMPLES_DIR;

std::string sample(const std::string& name) { return kSamples + "/" + name; }

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("semilab-test-" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

/// Runs the CLI through the shell; returns its exit code.
int cli(const std::string& args, const std::string& prefix = "") {
    const std::string cmd = prefix + "\"" + kCli + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json report(const fs::path& dir) { return json::parse(slurp(dir / "report.json")); }

int line_count(const fs::path& p) {
    const std::string s = slurp(p);
    return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& content) {
    std::ofstream(dir / name) << content;
    return dir / name;
}

}  // namespace

TEST(Lab, Spectrum) {
    const auto out = scratch("spectrum");
    ASSERT_EQ(cli("spectrum --operator " + sample("diag_stable.op") + " --out " + out.string()), 0);
    const auto r = report(out);
    EXPECT_EQ(r["s_A"].get<double>(), -1.0);
    EXPECT_EQ(r["eigenvalues"].size(), 2u);
    EXPECT_TRUE(r["pass"].get<bool>());
    EXPECT_EQ(r["config"]["T"].get<double>(), 1.0);
    EXPECT_EQ(r["config"]["panels"].get<int>(), 16);
    EXPECT_EQ(r["operator"]["c1"].get<double>(), 1.0);
}

TEST(Lab, ResolventScan) {
    const auto out = scratch("scan");
    ASSERT_EQ(cli("resolvent-scan --operator " + sample("diag_stable.op") + " --mu-grid re=1:10:3,im=-2:2:5 --out " +
                  out.string()),
              0);
    EXPECT_EQ(line_count(out / "scan.csv"), 1 + 15);
    EXPECT_EQ(slurp(out / "scan.csv").substr(0, 40), "re_mu, im_mu, resolvent_norm, weighted_n");
    const auto r = report(out);
    EXPECT_EQ(r["scan_points"].get<int>(), 15);
    EXPECT_FALSE(r.contains("M_hat"));

    const auto out2 = scratch("scan-probes");
    ASSERT_EQ(cli("resolvent-scan --operator " + sample("diag_stable.op") + " --probes " +
                  write_file(out2, "p.txt", "ic x=ones\nexp mu=1 y=e1\n").string() + " --out " + out2.string()),
              0);
    EXPECT_TRUE(report(out2).contains("theorem_bound_2M"));
}

TEST(Lab, MaxRegEstimate) {
    const auto out = scratch("maxreg");
    ASSERT_EQ(cli("maxreg-estimate --operator " + sample("dense_rows.op") + " --probes " + sample("probes.txt") +
                  " --seed 3 --out " + out.string()),
              0);
    EXPECT_EQ(line_count(out / "probes.csv"), 1 + 6);
    const auto r = report(out);
    EXPECT_LE(r["c2_hat"].get<double>(), r["M_hat"].get<double>());
    EXPECT_LE(r["refinement_change"].get<double>(), 0.005);
}

TEST(Lab, IdentityCheckZeroOperator) {
    const auto out = scratch("identity");
    ASSERT_EQ(cli("identity-check --operator " + sample("scalar_zero.op") + " --mu-grid list=1 --out " + out.string()),
              0);
    const auto rec = json::parse(slurp(out / "records.json"));
    ASSERT_EQ(rec.size(), 1u);
    EXPECT_LE(rec[0]["identity_residual"].get<double>(), 1e-12);
    EXPECT_NEAR(rec[0]["V_norm"].get<double>(), 2.0 * std::exp(-1.0) / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(Lab, Reconstruct) {
    const auto out = scratch("reconstruct");
    ASSERT_EQ(cli("reconstruct --operator " + sample("diag_stable.op") + " --out " + out.string()), 0);
    const auto r = report(out);
    EXPECT_LE(r["max_reconstruction_error"].get<double>(), 1e-6);
    EXPECT_EQ(r["mu_points"].get<int>(), 25);

    const auto bad = scratch("reconstruct-unstable");
    write_file(bad, "op.txt", "diag 100\n");
    EXPECT_EQ(cli("reconstruct --operator " + (bad / "op.txt").string() + " --out " + bad.string()), 2);
    EXPECT_FALSE(report(bad)["checks"]["omega2_finite"].get<bool>());
}

TEST(Lab, Weighted) {
    const auto out = scratch("weighted");
    ASSERT_EQ(cli("weighted --operator " + sample("diag_stable.op") + " --sigma 0.5 --p 3 --out " + out.string()), 0);
    const auto w = json::parse(slurp(out / "weighted.json"));
    EXPECT_EQ(w.size(), 2u);
    EXPECT_TRUE(w[0].contains("interp_norm"));
    EXPECT_EQ(report(out)["p"].get<double>(), 3.0);
    EXPECT_EQ(cli("weighted --operator " + sample("diag_stable.op") + " --sigma 2 --out " + out.string()), 1);
}

TEST(Lab, ThetaSweep) {
    const auto out = scratch("theta");
    ASSERT_EQ(cli("theta-sweep --operator " + sample("diag_squares.op") + " --out " + out.string()), 0);
    EXPECT_EQ(line_count(out / "theta.csv"), 1 + 9);
    EXPECT_EQ(cli("theta-sweep --operator " + sample("laplacian64.op") + " --out " + out.string()), 1);
}

TEST(Lab, Verdict) {
    const auto good = scratch("verdict-good");
    EXPECT_EQ(cli("verdict --operator " + sample("diag_stable.op") + " --out " + good.string()), 0);
    const auto r = report(good);
    EXPECT_EQ(r["V_norm_T_doubling"].size(), 6u);
    const auto bad = scratch("verdict-axis");
    EXPECT_EQ(cli("verdict --operator " + sample("diag_axis.op") + " --out " + bad.string()), 2);
    EXPECT_TRUE(report(bad)["uniform_bound"].is_null());
}

TEST(Lab, UsageAndParseErrors) {
    const auto out = scratch("errors");
    EXPECT_EQ(cli("spectrum --operator /nonexistent.op --out " + out.string()), 1);
    EXPECT_EQ(cli("frobnicate --operator " + sample("diag_stable.op")), 1);
    EXPECT_EQ(cli("spectrum"), 1);
    EXPECT_EQ(cli("spectrum --operator " + sample("diag_stable.op") + " --T -1 --out " + out.string()), 1);
    EXPECT_EQ(cli("spectrum --operator " + sample("diag_stable.op") + " --bogus 1"), 1);
    const auto bad_probes = write_file(out, "bad.txt", "exp mu=1\n");
    EXPECT_EQ(cli("maxreg-estimate --operator " + sample("diag_stable.op") + " --probes " + bad_probes.string() +
                  " --out " + out.string()),
              1);
    const auto empty_probes = write_file(out, "empty.txt", "# nothing\n");
    EXPECT_EQ(cli("maxreg-estimate --operator " + sample("diag_stable.op") + " --probes " + empty_probes.string() +
                  " --out " + out.string()),
              1);
    EXPECT_EQ(cli("--help"), 0);
}

TEST(Lab, ByteIdenticalAcrossRunsAndThreads) {
    const std::string args = "maxreg-estimate --operator " + sample("laplacian64.op") + " --seed 5 --out ";
    const auto a = scratch("det-a");
    const auto b = scratch("det-b");
    ASSERT_EQ(cli(args + a.string(), "SEMILAB_THREADS=1 "), 0);
    ASSERT_EQ(cli(args + b.string(), "SEMILAB_THREADS=4 "), 0);
    for (const char* f : {"report.json", "probes.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;

    const std::string idargs = "identity-check --operator " + sample("jordan3.op") + " --seed 2 --out ";
    const auto c = scratch("det-c");
    const auto d = scratch("det-d");
    ASSERT_EQ(cli(idargs + c.string(), "SEMILAB_THREADS=1 "), 0);
    ASSERT_EQ(cli(idargs + d.string(), "SEMILAB_THREADS=3 "), 0);
    for (const char* f : {"report.json", "records.json"}) EXPECT_EQ(slurp(c / f), slurp(d / f)) << f;
}

TEST(Lab, ConfigFile) {
    const auto out = scratch("config");
    ASSERT_EQ(cli("--config identity.cfg --out " + out.string(), "cd \"" + kSamples + "\" && "), 0);
    const auto r = report(out);
    EXPECT_EQ(r["experiment"].get<std::string>(), "identity-check");
    EXPECT_EQ(r["config"]["seed"].get<int>(), 7);
    EXPECT_EQ(r["config"]["mu_grid"].get<std::string>(), "re=0.5:32:5:lin,im=-16:16:5");
    EXPECT_EQ(r["mu_points"].get<int>(), 25);
}

TEST(Lab, LibraryRunMatchesCli) {
    semilab::lab::ExperimentConfig c;
    c.experiment = "spectrum";
    c.operator_file = sample("jordan3.op");
    c.output_dir = scratch("library").string();
    const auto r = semilab::lab::run(c);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.report["s_A"].get<double>(), -1.0);
    ASSERT_EQ(r.files.size(), 1u);
    std::ostringstream err;
    c.operator_file = "/nonexistent";
    EXPECT_EQ(semilab::lab::run_checked(c, err), 1);
    EXPECT_NE(err.str().find("ParseError"), std::string::npos);
}
