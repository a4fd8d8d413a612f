#pragma once

// Experiment runner behind the semilab command-line tool. Every experiment
// writes report.json (configuration with defaults, results, pass flags) plus
// its CSV/JSON side files, and returns 0 when all pass flags hold, 2 when a
// scientific check failed. Malformed input surfaces as semilab::Error, which
// run_checked maps to exit code 1.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semilab/cauchy.hpp"
#include "semilab/core.hpp"
#include "semilab/io.hpp"
#include "semilab/linop.hpp"
#include "semilab/theorem.hpp"
#include "semilab/weighted.hpp"

namespace semilab::lab {

using nlohmann::json;

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"spectrum",       "resolvent-scan", "maxreg-estimate", "identity-check",
                                                "reconstruct",    "weighted",       "theta-sweep",     "verdict"};
    return names;
}

struct ExperimentConfig {
    std::string experiment;
    std::string operator_file;
    std::optional<std::string> probe_file;
    double T = 1.0;
    std::optional<double> sigma;
    std::optional<double> theta;
    std::optional<double> p;
    std::optional<std::string> mu_grid;
    std::string output_dir = ".";
    std::uint64_t seed = 0;
    int panels = TimeGrid::kDefaultPanels;
};

struct RunResult {
    int exit_code = 0;
    json report;
    std::vector<std::string> files;
};

namespace detail {

inline json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

/// Non-finite values become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Output {
public:
    explicit Output(const std::string& dir) : dir_(dir) { std::filesystem::create_directories(dir_); }

    void write(const std::string& name, const std::string& content) {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
        out << content;
        files.push_back(path.string());
    }

    std::vector<std::string> files;

private:
    std::filesystem::path dir_;
};

inline std::vector<Probe> probes_for(const ExperimentConfig& c, const OperatorPair& op) {
    if (c.probe_file) return io::load_probes(*c.probe_file, op.dim(), c.seed);
    return default_probes(op, c.seed);
}

inline json probe_source(const ExperimentConfig& c) {
    return c.probe_file ? json(*c.probe_file) : json("default family (seeded)");
}

/// Records shared by identity-check and reconstruct.
struct MuRecord {
    Complex mu;
    double V_norm = 0.0;
    std::optional<double> identity_residual;
    std::optional<double> reconstruction_error;
    std::optional<int> neumann_terms;
    double N_running = 0.0;
    std::optional<std::string> error;

    [[nodiscard]] json to_json() const {
        json j;
        j["mu"] = complex_json(mu);
        j["V_norm"] = number(V_norm);
        j["identity_residual"] = identity_residual ? number(*identity_residual) : json(nullptr);
        j["reconstruction_error"] = reconstruction_error ? number(*reconstruction_error) : json(nullptr);
        j["N_running"] = number(N_running);
        if (neumann_terms) j["neumann_terms"] = *neumann_terms;
        if (error) j["error"] = *error;
        return j;
    }
};

inline json records_json(const std::vector<MuRecord>& records) {
    json a = json::array();
    for (const auto& r : records) a.push_back(r.to_json());
    return a;
}

/// (1 + |mu|) ||(mu - A)^{-1}|| or +inf at the spectrum.
inline double weighted_resolvent(const OperatorPair& op, Complex mu) {
    if (op.distance_to_spectrum(mu) <= op.proximity_tolerance()) return std::numeric_limits<double>::infinity();
    return (1.0 + std::abs(mu)) * resolvent_norm(op, mu);
}

inline std::vector<Complex> theorem_mu_grid(double re_lo, double re_hi) {
    return product_grid(spaced(re_lo, re_hi, 5, false), spaced(-16.0, 16.0, 5, false));
}

// ---------------------------------------------------------------------------

inline void run_spectrum(const ExperimentConfig&, const OperatorPair& op, json& rep, json&, Output&) {
    json ev = json::array();
    for (const auto& l : op.eigenvalues()) ev.push_back(complex_json(l));
    rep["eigenvalues"] = ev;
    rep["s_A"] = op.spectral_bound();
    rep["matrix_norm"] = op.matrix_norm();
}

inline void run_resolvent_scan(const ExperimentConfig& c, const OperatorPair& op, json& rep, json& checks,
                               Output& out) {
    const double omega = std::max(0.0, op.spectral_bound());
    const auto grid = c.mu_grid ? io::parse_mu_grid(*c.mu_grid) : default_scan_grid(omega);
    std::optional<double> M_hat;
    if (c.probe_file) M_hat = estimate_M(op, default_grid(op, c.T, c.panels), probes_for(c, op)).M_hat;
    const auto r = halfplane_scan(op, omega, grid, M_hat);
    std::string csv = "re_mu, im_mu, resolvent_norm, weighted_norm\n";
    int singular = 0;
    for (const auto& p : r.scan) {
        const double w = p.singular ? std::numeric_limits<double>::quiet_NaN() : (1.0 + std::abs(p.mu)) * p.resolvent_norm;
        csv += fmt(p.mu.real()) + ", " + fmt(p.mu.imag()) + ", " + fmt(p.resolvent_norm) + ", " + fmt(w) + "\n";
        singular += p.singular ? 1 : 0;
    }
    out.write("scan.csv", csv);
    rep["s_A"] = r.spectral_bound;
    rep["omega"] = omega;
    rep["omega_rule"] = "max(0, s_A); scan starts at Re mu = omega + 0.5 unless --mu-grid is given";
    rep["N"] = r.bound_constant;
    rep["scan_points"] = r.scan.size();
    rep["singular_points"] = singular;
    if (M_hat) {
        rep["M_hat"] = *M_hat;
        rep["theorem_bound_2M"] = number(*r.theorem_bound);
        rep["theorem_bound_holds"] = *r.theorem_bound_holds;
        rep["theorem_bound_note"] = "diagnostic only: M_hat is a lower estimate of M";
    }
    checks["no_singular_points"] = singular == 0;
}

inline void run_maxreg(const ExperimentConfig& c, const OperatorPair& op, json& rep, json& checks, Output& out) {
    const auto probes = probes_for(c, op);
    const auto grid = default_grid(op, c.T, c.panels);
    const auto est = estimate_M(op, grid, probes);
    const auto fine = estimate_M(op, default_grid(op, c.T, 2 * c.panels), probes);
    std::string csv = "probe_id, ratio, M_hat_running\n";
    for (std::size_t i = 0; i < probes.size(); ++i)
        csv += std::to_string(i) + ", " + fmt(est.ratios[i]) + ", " + fmt(est.running[i]) + "\n";
    out.write("probes.csv", csv);
    json labels = json::array();
    for (const auto& p : probes) labels.push_back(p.label);
    const double change = std::abs(fine.M_hat - est.M_hat) / est.M_hat;
    rep["probes"] = labels;
    rep["probe_count"] = est.probe_count;
    rep["M_hat"] = est.M_hat;
    rep["M_hat_note"] = "lower estimate of M";
    rep["c2_hat"] = est.c2_hat;
    rep["omega1"] = omega1(est.M_hat, c.T);
    rep["M_hat_doubled_panels"] = fine.M_hat;
    rep["refinement_change"] = change;
    rep["grid"] = {{"panels", grid.panels()}, {"nodes_per_panel", grid.nodes_per_panel()}, {"nodes", grid.size()}};
    checks["c2_hat_le_M_hat"] = est.c2_hat <= est.M_hat;
    checks["refinement_change_le_0.005"] = change <= 0.005;
}

inline void run_identity(const ExperimentConfig& c, const OperatorPair& op, json& rep, json& checks, Output& out) {
    const auto grid = c.mu_grid ? io::parse_mu_grid(*c.mu_grid) : theorem_mu_grid(0.5, 32.0);
    const ExponentialSolver solver(op);
    std::mt19937_64 rng(c.seed);
    std::vector<MuRecord> records;
    double worst = 0.0, N = 0.0;
    for (const auto& mu : grid) {
        MuRecord r;
        r.mu = mu;
        const Vec x = random_vector(op.dim(), rng);
        const auto d = assemble_U_V(solver, mu, theorem_grid(c.T, mu, op.stiffness(), c.panels), op.e0_norm());
        r.V_norm = d.V_norm;
        r.identity_residual = surjectivity_identity_check(op, d, x);
        N = std::max(N, weighted_resolvent(op, mu));
        r.N_running = N;
        worst = std::max(worst, *r.identity_residual);
        records.push_back(r);
    }
    out.write("records.json", records_json(records).dump(2) + "\n");
    rep["mu_points"] = grid.size();
    rep["max_identity_residual"] = worst;
    rep["tolerance"] = 1e-8;
    rep["N"] = number(N);
    checks["identity_residual_le_1e-8"] = worst <= 1e-8;
}

inline void run_reconstruct(const ExperimentConfig& c, const OperatorPair& op, json& rep, json& checks,
                            Output& out) {
    const auto w2 = omega2(op, c.T);
    rep["omega2"] = number(w2.omega2);
    rep["omega2_unbounded"] = w2.unbounded;
    checks["omega2_finite"] = !w2.unbounded;
    if (w2.unbounded) return;
    const auto grid = c.mu_grid ? io::parse_mu_grid(*c.mu_grid) : theorem_mu_grid(w2.omega2 + 0.5, w2.omega2 + 32.0);
    const ExponentialSolver solver(op);
    std::mt19937_64 rng(c.seed);
    std::vector<MuRecord> records;
    double worst = 0.0, N = 0.0;
    bool terms_ok = true, all_ok = true;
    for (const auto& mu : grid) {
        MuRecord r;
        r.mu = mu;
        const Vec y = random_vector(op.dim(), rng);
        N = std::max(N, weighted_resolvent(op, mu));
        r.N_running = N;
        try {
            const auto d = assemble_U_V(solver, mu, theorem_grid(c.T, mu, op.stiffness(), c.panels), op.e0_norm());
            r.V_norm = d.V_norm;
            r.identity_residual = surjectivity_identity_check(op, d, y);
            const auto rec = neumann_resolvent(d, y);
            const Vec direct = resolvent_solve(op, mu, y);
            r.reconstruction_error = op.norm0(rec.x - direct) / op.norm0(direct);
            r.neumann_terms = rec.neumann_terms;
            worst = std::max(worst, *r.reconstruction_error);
            if (d.V_norm <= 0.5 && rec.neumann_terms > 60) terms_ok = false;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NeumannDivergence && e.kind() != ErrorKind::SlowConvergence &&
                e.kind() != ErrorKind::DegenerateReMu)
                throw;
            r.error = std::string(to_string(e.kind())) + ": " + e.what();
            all_ok = false;
        }
        records.push_back(r);
    }
    out.write("records.json", records_json(records).dump(2) + "\n");
    rep["mu_points"] = grid.size();
    rep["max_reconstruction_error"] = worst;
    rep["N"] = number(N);
    checks["all_points_reconstructed"] = all_ok;
    checks["reconstruction_error_le_1e-6"] = all_ok && worst <= 1e-6;
    checks["neumann_terms_le_60_when_V_le_half"] = terms_ok;
}

inline void run_weighted(const ExperimentConfig& c, const OperatorPair& op, json& rep, json& checks, Output& out) {
    const double sigma = c.sigma.value_or(0.5);
    const double p = c.p.value_or(2.0);
    require(sigma > 0.0 && sigma <= 1.0, ErrorKind::ParseError, "--sigma must lie in (0, 1]");
    require(p > 1.0 && std::isfinite(p), ErrorKind::ParseError, "--p must lie in (1, inf)");
    const auto mus = io::parse_mu_grid(c.mu_grid.value_or("list=1;2+1i"));
    for (const auto& mu : mus) require(mu.real() > 0.0, ErrorKind::ParseError, "weighted experiment needs Re mu > 0");
    const auto grid = default_grid(op, c.T, c.panels);
    std::mt19937_64 rng(c.seed ^ 0x5eedULL);
    auto probes = probes_for(c, op);
    std::vector<Vec> xs;
    for (const auto& mu : mus) {
        const Vec x = random_vector(op.dim(), rng);
        xs.push_back(x);
        probes.push_back({"v_mu", Forcing::exponential(-mu, Vec(mu * x - op.apply(x))), x});
        probes.push_back({"f_conj_mu", Forcing::exponential(std::conj(mu), x), Vec::Zero(op.dim())});
    }
    const auto est = estimate_M_weighted(op, grid, probes, sigma);
    json records = json::array();
    bool ineq = true, endpoint = true, membership = false;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        const auto chk = weighted_maxreg_check(op, grid, sigma, mus[i], xs[i], est.M_hat, est.c2_hat);
        const GridFunction orbit = ExponentialSolver(op).solve(Forcing::zero(op.dim()), xs[i], grid);
        const auto wn = weighted_norm(orbit, sigma, op.e0_norm());
        const auto lp = lp_norms(op, orbit, p);
        json r{{"mu", complex_json(mus[i])},
               {"lhs", chk.lhs},
               {"rhs", chk.rhs},
               {"pass", chk.pass},
               {"endpoint_value", chk.endpoint_value},
               {"endpoint_bound", chk.endpoint_bound},
               {"endpoint_pass", chk.endpoint_pass},
               {"trace_norm_upper", trace_norm_upper(op, xs[i], grid, sigma)},
               {"orbit_weighted_norm", wn.value},
               {"orbit_limit_estimate", wn.limit_estimate},
               {"orbit_membership_violated", wn.membership_violated},
               {"orbit_e0_lp", lp.e0_lp},
               {"orbit_e1_lp", lp.e1_lp}};
        if (op.structure() == Structure::diagonal) r["interp_norm"] = interp_norm_diag(op, xs[i], sigma);
        records.push_back(r);
        ineq = ineq && chk.pass;
        endpoint = endpoint && chk.endpoint_pass;
        membership = membership || wn.membership_violated;
    }
    out.write("weighted.json", records.dump(2) + "\n");
    rep["sigma"] = sigma;
    rep["p"] = p;
    rep["M_hat"] = est.M_hat;
    rep["c2_hat"] = est.c2_hat;
    rep["M_hat_note"] = "lower estimate of M in the weighted norms";
    rep["omega1"] = omega1_weighted(est.M_hat, c.T, sigma);
    rep["probe_count"] = est.probe_count;
    rep["membership_flag_raised"] = membership;
    checks["weighted_inequality"] = ineq;
    checks["endpoint_bound"] = endpoint;
}

inline void run_theta(const ExperimentConfig& c, const OperatorPair& op, json& rep, json& checks, Output& out) {
    require_diagonal(op);
    std::vector<double> thetas;
    if (c.theta) {
        require(*c.theta > 0.0 && *c.theta < 1.0, ErrorKind::ParseError, "--theta must lie in (0, 1)");
        thetas.push_back(*c.theta);
    } else {
        for (int k = 1; k <= 9; ++k) thetas.push_back(0.1 * k);
    }
    const auto probes = probes_for(c, op);
    const auto grid = default_grid(op, c.T, c.panels);
    const double omega = std::max(0.0, op.spectral_bound());
    const auto mus = c.mu_grid ? io::parse_mu_grid(*c.mu_grid) : default_scan_grid(omega);
    std::string csv = "theta, M_hat, omega1, N\n";
    bool finite = true;
    json pts = json::array();
    for (double th : thetas) {
        const auto pt = theta_point(op, th, grid, probes, mus);
        csv += fmt(pt.theta) + ", " + fmt(pt.M_hat) + ", " + fmt(pt.omega1) + ", " + fmt(pt.N) + "\n";
        pts.push_back({{"theta", pt.theta}, {"M_hat", pt.M_hat}, {"omega1", pt.omega1}, {"N", pt.N}});
        finite = finite && std::isfinite(pt.M_hat) && std::isfinite(pt.N);
    }
    out.write("theta.csv", csv);
    rep["points"] = pts;
    rep["M_hat_note"] = "lower estimates of M on the (E_theta, E_{1+theta}) scale";
    checks["all_finite"] = finite;
}

inline void run_verdict(const ExperimentConfig& c, const OperatorPair& op, json& rep, json& checks, Output&) {
    std::vector<double> betas;
    if (c.mu_grid) {
        for (const auto& mu : io::parse_mu_grid(*c.mu_grid)) betas.push_back(mu.imag());
    } else {
        betas = default_axis_betas();
    }
    const auto v = rplus_verdict(op, betas);
    const auto est = estimate_M(op, default_grid(op, c.T, c.panels), probes_for(c, op));
    const double w1 = omega1(est.M_hat, c.T);
    const auto w2 = omega2(op, c.T);
    json vn = json::array();
    for (double x : v.V_norms) vn.push_back(x);
    rep["s_A"] = v.s_A;
    rep["uniform_bound"] = number(v.uniform_bound);
    rep["N"] = number(v.recorded_N);
    rep["V_norm_T_doubling"] = vn;
    rep["V_norm_decays"] = v.V_decays;
    rep["M_hat"] = est.M_hat;
    rep["omega1"] = w1;
    rep["omega2"] = number(w2.omega2);
    rep["omega"] = number(std::max(w1, w2.omega2));
    checks["verdict"] = v.pass;
}

}  // namespace detail

/// Runs one experiment. Throws semilab::Error on malformed input.
inline RunResult run(const ExperimentConfig& c) {
    const auto& names = experiment_names();
    require(std::find(names.begin(), names.end(), c.experiment) != names.end(), ErrorKind::ParseError,
            "unknown experiment '" + c.experiment + "'");
    require(c.T > 0.0 && std::isfinite(c.T), ErrorKind::ParseError, "--T must be positive");
    require(c.panels >= 2, ErrorKind::ParseError, "--panels must be >= 2");
    require(!c.operator_file.empty(), ErrorKind::ParseError, "--operator is required");
    const OperatorPair op = io::load_operator(c.operator_file);

    json rep;
    rep["experiment"] = c.experiment;
    rep["config"] = {{"operator", c.operator_file},
                     {"probes", detail::probe_source(c)},
                     {"T", c.T},
                     {"sigma", c.sigma ? json(*c.sigma) : json(nullptr)},
                     {"theta", c.theta ? json(*c.theta) : json(nullptr)},
                     {"p", c.p ? json(*c.p) : json(nullptr)},
                     {"mu_grid", c.mu_grid ? json(*c.mu_grid) : json("default")},
                     {"seed", c.seed},
                     {"panels", c.panels},
                     {"nodes_per_panel", TimeGrid::kDefaultNodesPerPanel}};
    rep["operator"] = {{"dim", op.dim()},
                       {"structure", std::string(to_string(op.structure()))},
                       {"e0_norm", std::string(to_string(op.e0_norm()))},
                       {"e1_norm", "graph: ||x||_0 + ||Ax||_0"},
                       {"c1", OperatorPair::c1()}};
    json checks = json::object();
    detail::Output out(c.output_dir);

    if (c.experiment == "spectrum") detail::run_spectrum(c, op, rep, checks, out);
    else if (c.experiment == "resolvent-scan") detail::run_resolvent_scan(c, op, rep, checks, out);
    else if (c.experiment == "maxreg-estimate") detail::run_maxreg(c, op, rep, checks, out);
    else if (c.experiment == "identity-check") detail::run_identity(c, op, rep, checks, out);
    else if (c.experiment == "reconstruct") detail::run_reconstruct(c, op, rep, checks, out);
    else if (c.experiment == "weighted") detail::run_weighted(c, op, rep, checks, out);
    else if (c.experiment == "theta-sweep") detail::run_theta(c, op, rep, checks, out);
    else detail::run_verdict(c, op, rep, checks, out);

    bool pass = true;
    for (const auto& [k, v] : checks.items()) pass = pass && v.get<bool>();
    rep["checks"] = checks;
    rep["pass"] = pass;
    out.write("report.json", rep.dump(2) + "\n");

    RunResult r;
    r.exit_code = pass ? 0 : 2;
    r.report = std::move(rep);
    r.files = std::move(out.files);
    return r;
}

/// run() with errors mapped to exit code 1 and a one-line diagnostic.
inline int run_checked(const ExperimentConfig& c, std::ostream& err) {
    try {
        return run(c).exit_code;
    } catch (const Error& e) {
        err << "semilab: " << to_string(e.kind()) << ": " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "semilab: error: " << e.what() << "\n";
    }
    return 1;
}

}  // namespace semilab::lab
