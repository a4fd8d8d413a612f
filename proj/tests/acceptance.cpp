// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only if all pass.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "semilab/semilab.hpp"

using namespace semilab;
namespace fs = std::filesystem;

namespace {

struct Named {
    std::string name;
    OperatorPair op;
};

std::vector<Named> corpus() {
    std::vector<Named> c;
    c.push_back({"diag(-1,-4,-9,-2+7i,-5-3i)",
                 OperatorPair(diagonal_matrix({-1.0, -4.0, -9.0, Complex(-2.0, 7.0), Complex(-5.0, -3.0)}))});
    for (int n : {16, 64, 256}) c.push_back({"laplacian" + std::to_string(n), OperatorPair(laplacian1d(n))});
    for (int k : {2, 3, 5, 8}) c.push_back({"jordan(-1) size " + std::to_string(k), OperatorPair(jordan_block(-1.0, k))});
    c.push_back({"random normal 16", OperatorPair(random_normal_sectorial(16, 7))});
    return c;
}

std::vector<Complex> mu_grid_25(double re_lo, double re_hi) {
    return product_grid(spaced(re_lo, re_hi, 5, false), spaced(-16.0, 16.0, 5, false));
}

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string sci(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3e", v);
    return b;
}

// 1 --------------------------------------------------------------------------
void identity_corpus() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    double worst = 0.0;
    std::string worst_at;
    for (const auto& [name, op] : corpus()) {
        const ExponentialSolver solver(op);
        for (const auto& mu : mu_grid_25(0.5, 32.0)) {
            const auto d = assemble_U_V(solver, mu, theorem_grid(1.0, mu, op.stiffness()), op.e0_norm());
            const double r = surjectivity_identity_check(op, d, random_vector(op.dim(), rng));
            if (!(r <= worst)) {
                worst = r;
                worst_at = name;
            }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(1, worst <= 1e-8 && secs < 60.0, "surjectivity identity on corpus x 25 mu, residual <= 1e-8, < 60 s",
           "max residual " + sci(worst) + " at " + worst_at + ", " + sci(secs) + " s");
}

// 2 --------------------------------------------------------------------------
void reconstruction_corpus() {
    std::mt19937_64 rng(2);
    double worst = 0.0;
    int max_terms_half = 0;
    bool ok = true;
    std::string note = "";
    for (const auto& [name, op] : corpus()) {
        const auto w2 = omega2(op, 1.0);
        if (w2.unbounded) {
            ok = false;
            note += " omega2 unbounded for " + name;
            continue;
        }
        const ExponentialSolver solver(op);
        for (const auto& mu : mu_grid_25(w2.omega2 + 0.5, w2.omega2 + 32.0)) {
            const Vec y = random_vector(op.dim(), rng);
            try {
                const auto r = resolvent_from_solver(solver, mu, y, theorem_grid(1.0, mu, op.stiffness()), op.e0_norm());
                const Vec direct = resolvent_solve(op, mu, y);
                worst = std::max(worst, op.norm0(r.x - direct) / op.norm0(direct));
                if (r.V_norm <= 0.5) max_terms_half = std::max(max_terms_half, r.neumann_terms);
            } catch (const Error& e) {
                ok = false;
                note += " " + name + ": " + e.what();
            }
        }
    }
    report(2, ok && worst <= 1e-6 && max_terms_half <= 60,
           "Neumann reconstruction vs direct solve <= 1e-6 for Re mu > omega2, <= 60 terms when ||V|| <= 1/2",
           "max error " + sci(worst) + ", max terms " + std::to_string(max_terms_half) + note);
}

// 3 --------------------------------------------------------------------------
void scalar_closed_forms() {
    const OperatorPair op(diagonal_matrix({0.0}));
    const ExponentialSolver solver(op);
    double worst = 0.0;
    for (double m : {0.05, 0.3, 1.0, std::log(3.0), 2.0, 5.0, 20.0}) {
        const auto d = assemble_U_V(solver, m, theorem_grid(1.0, m, 0.0));
        const double e = std::exp(-m);
        worst = std::max(worst, std::abs(d.U_mu_matrix()(0, 0) - (1.0 - e) * (1.0 - e) / m));
        worst = std::max(worst, std::abs(d.V_mu(0, 0) - 2.0 * e / (1.0 + e)));
    }
    const auto at = assemble_U_V(solver, std::log(3.0), theorem_grid(1.0, std::log(3.0), 0.0));
    worst = std::max(worst, std::abs(at.V_norm - 0.5));
    const auto w2 = omega2(solver, 1.0, [](Complex mu) { return theorem_grid(1.0, mu, 0.0); }, 0.0,
                           NormKind::euclidean, 1e-11);
    const double w2_err = std::abs(w2.omega2 - std::log(3.0));
    report(3, worst <= 1e-10 && w2_err <= 1e-10, "A = 0, T = 1 closed forms for U_mu, V_mu, ||V|| = 1/2 at ln 3",
           "max deviation " + sci(worst) + ", |omega2 - ln 3| " + sci(w2_err));
}

// 4 --------------------------------------------------------------------------
double golden_max(const std::function<double(double)>& f, double a, double b) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    while (b - a > 1e-12) {
        if (f(c) > f(d)) b = d;
        else a = c;
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    return f(0.5 * (a + b));
}

void halfplane_scalar() {
    const OperatorPair op(diagonal_matrix({-1.0}));
    const double re0 = 1e-8;
    const double oracle = golden_max(
        [&](double b) {
            const Complex mu(re0, b);
            return (1.0 + std::abs(mu)) / std::abs(mu + 1.0);
        },
        0.0, 100.0);
    const auto scan = halfplane_scan(op, 0.0, product_grid(spaced(re0, 1e3, 23, true), spaced(-100.0, 100.0, 201, false)));
    const double diff = std::abs(scan.bound_constant - oracle);
    report(4, diff <= 1e-6, "half-plane N for diag(-1) vs 1-D maximization oracle",
           "N " + sci(scan.bound_constant) + ", oracle " + sci(oracle) + ", sqrt 2 " + sci(std::sqrt(2.0)));
}

// 5 --------------------------------------------------------------------------
/// Smallest omega >= 0 with max over the t-grid of w(t) e^{omega t} >= 2M, by bisection.
double brute_omega(double M, double T, double sigma) {
    std::vector<double> ts(10000);
    for (int i = 0; i < 10000; ++i) ts[i] = T * (i + 1) / 10000.0;
    auto sup = [&](double w) {
        double s = sigma == 1.0 ? 1.0 : 0.0;  // t = 0 contributes e^0 = 1 when unweighted
        for (double t : ts) s = std::max(s, std::pow(t, 1.0 - sigma) * std::exp(w * t));
        return s;
    };
    if (sup(0.0) >= 2.0 * M) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (sup(hi) < 2.0 * M) hi *= 2.0;
    while (hi - lo > 1e-12 * (1.0 + hi)) {
        const double mid = 0.5 * (lo + hi);
        (sup(mid) >= 2.0 * M ? hi : lo) = mid;
    }
    return hi;
}

void omega1_brute() {
    double worst = 0.0;
    for (double M : {0.3, 1.0, 2.5, 10.0}) {
        for (double T : {0.5, 1.0, 3.0}) {
            worst = std::max(worst, std::abs(omega1(M, T) - brute_omega(M, T, 1.0)));
            for (double s : {0.25, 0.5, 0.75})
                worst = std::max(worst, std::abs(omega1_weighted(M, T, s) - brute_omega(M, T, s)));
        }
    }
    report(5, worst <= 1e-6, "omega1 and weighted omega1 vs brute force on a 1e4-point t-grid",
           "max deviation " + sci(worst));
}

// 6 --------------------------------------------------------------------------
void verdicts() {
    const auto good = rplus_verdict(OperatorPair(diagonal_matrix({-1.0, -2.0})), default_axis_betas());
    const auto bad = rplus_verdict(OperatorPair(diagonal_matrix({0.0, -1.0})), default_axis_betas());
    const auto scalar = rplus_verdict(OperatorPair(diagonal_matrix({-1.0})), default_axis_betas());
    report(6, good.pass && !bad.pass && scalar.V_decays,
           "verdict: diag(-1,-2) passes, diag(0,-1) fails, V_norm(T) decays below 1e-6 by T = 32",
           "s_A " + sci(good.s_A) + ", axis bound " + sci(good.uniform_bound) + ", V(32) " +
               sci(scalar.V_norms.back()));
}

// 7 --------------------------------------------------------------------------
void contour() {
    std::mt19937_64 rng(42);
    std::vector<std::pair<OperatorPair, Vec>> fx;
    fx.emplace_back(OperatorPair(diagonal_matrix({-1.0})), Vec::Ones(1));
    fx.emplace_back(OperatorPair(laplacian1d(64)), random_vector(64, rng));
    fx.emplace_back(OperatorPair(diagonal_matrix({-1.0, Complex(-2.0, 3.0), Complex(-5.0, -5.0)})),
                    random_vector(3, rng));
    fx.emplace_back(OperatorPair(jordan_block(-1.0, 2)), random_vector(2, rng));
    fx.emplace_back(OperatorPair(jordan_block(-1.0, 8)), random_vector(8, rng));
    fx.emplace_back(OperatorPair(random_normal_sectorial(16, 7)), random_vector(16, rng));
    double worst32 = 0.0, worst_gain = std::numeric_limits<double>::infinity();
    for (const auto& [op, x] : fx) {
        for (double t : {0.01, 0.1, 1.0}) {
            const Vec exact = semigroup_apply_oracle(op, t, x);
            const auto err = [&](int n) {
                const Vec v = semigroup_apply_contour(op, Contour::parabolic(op.spectral_bound(), t, n), t, x).value;
                return (v - exact).norm() / exact.norm();
            };
            const double e32 = err(32), e64 = err(64);
            worst32 = std::max(worst32, e32);
            worst_gain = std::min(worst_gain, e32 / std::max(e64, 1e-300));
        }
    }
    report(7, worst32 <= 1e-8 && worst_gain >= 10.0, "contour semigroup <= 1e-8 at 32 nodes, >= 10x better at 64",
           "max error " + sci(worst32) + ", min gain " + sci(worst_gain));
}

// 8 --------------------------------------------------------------------------
void sigma_one() {
    bool same = true;
    std::mt19937_64 rng(8);
    for (const OperatorPair& op : {OperatorPair(diagonal_matrix({-1.0, -3.0})), OperatorPair(laplacian1d(16)),
                                   OperatorPair(jordan_block(-1.0, 3))}) {
        const TimeGrid g = default_grid(op, 1.0);
        const auto probes = default_probes(op, 1);
        const ExponentialSolver solver(op);
        for (const auto& p : probes) {
            const GridFunction u = solver.solve(p.f, p.x, g);
            same = same && weighted_norm(u, 1.0, op.e0_norm()).value == e0_norm_J(op, u);
            same = same && weighted_e1_norm(op, u, 1.0) == e1_norm_J(op, u);
        }
        const auto a = estimate_M(op, g, probes);
        const auto b = estimate_M_weighted(op, g, probes, 1.0);
        same = same && a.ratios == b.ratios && a.M_hat == b.M_hat && a.c2_hat == b.c2_hat;
        same = same && omega1(a.M_hat, 1.0) == omega1_weighted(a.M_hat, 1.0, 1.0);
        const Vec x = random_vector(op.dim(), rng);
        const auto c = claim1_check(op, g, Complex(2.0, 1.0), x, a.M_hat);
        const auto w = weighted_maxreg_check(op, g, 1.0, Complex(2.0, 1.0), x, a.M_hat, a.c2_hat);
        same = same && c.lhs == w.lhs && c.rhs == w.rhs && c.pass == w.pass;
    }
    report(8, same, "sigma = 1 weighted operations equal unweighted ones bit for bit", "3 fixtures");
}

// 9 --------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args, const std::string& threads) {
    const std::string cmd = "SEMILAB_THREADS=" + threads + " \"" + std::string(SEMILAB_CLI_PATH) + "\" " + args +
                            " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism() {
    const std::string s = SEMILAB_SAMPLES_DIR;
    const std::vector<std::pair<std::string, std::string>> runs{
        {"spectrum", "--operator " + s + "/dense_rows.op"},
        {"resolvent-scan", "--operator " + s + "/laplacian64.op --probes " + s + "/probes.txt"},
        {"maxreg-estimate", "--operator " + s + "/jordan3.op --seed 4"},
        {"identity-check", "--operator " + s + "/laplacian64.op --seed 3"},
        {"reconstruct", "--operator " + s + "/jordan3.op --seed 3"},
        {"weighted", "--operator " + s + "/diag_stable.op --sigma 0.25"},
        {"theta-sweep", "--operator " + s + "/diag_squares.op"},
        {"verdict", "--operator " + s + "/diag_stable.op"},
    };
    const fs::path root = fs::temp_directory_path() / "semilab-acceptance";
    bool ok = true;
    int files = 0;
    std::string note;
    for (const auto& [exp, args] : runs) {
        std::vector<fs::path> dirs;
        std::vector<int> codes;
        int k = 0;
        for (const char* threads : {"1", "1", "4"}) {
            const fs::path dir = root / (exp + "-" + std::to_string(k++));
            fs::remove_all(dir);
            codes.push_back(run_cli(exp + " " + args + " --out " + dir.string(), threads));
            dirs.push_back(dir);
        }
        if (codes[0] == 1 || codes[0] != codes[1] || codes[0] != codes[2]) {
            ok = false;
            note += " " + exp + " exit codes differ or failed";
        }
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            const auto name = entry.path().filename();
            const std::string ref = slurp(entry.path());
            ++files;
            if (ref != slurp(dirs[1] / name) || ref != slurp(dirs[2] / name)) {
                ok = false;
                note += " " + exp + "/" + name.string() + " differs";
            }
        }
    }
    fs::remove_all(root);
    report(9, ok && files > 0, "byte-identical reruns, SEMILAB_THREADS = 1 and 4",
           std::to_string(runs.size()) + " experiments, " + std::to_string(files) + " files" + note);
}

}  // namespace

int main() {
    identity_corpus();
    reconstruction_corpus();
    scalar_closed_forms();
    halfplane_scalar();
    omega1_brute();
    verdicts();
    contour();
    sigma_one();
    determinism();
    std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
