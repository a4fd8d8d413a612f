#pragma once

// Executable form of the generation argument: the a priori inequality for
// v_mu(t) = e^{mu t} x, the threshold omega1, the operators U_mu and V_mu built
// from a black-box solver, the Neumann-series resolvent, the threshold omega2,
// the half-plane resolvent scan, and the spectral-bound verdict.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "semilab/cauchy.hpp"
#include "semilab/core.hpp"
#include "semilab/forcing.hpp"
#include "semilab/grid.hpp"
#include "semilab/linop.hpp"
#include "semilab/parallel.hpp"
#include "semilab/solver.hpp"

namespace semilab {

// ---------------------------------------------------------------------------
// A priori inequality

/// v_mu, g_mu, f_mu, u_mu for one (mu, x).
struct ProofProbe {
    Complex mu;
    Vec x;
    GridFunction v_mu;  // e^{mu t} x, with derivative mu e^{mu t} x
    GridFunction g_mu;  // e^{mu t} (mu - A) x
    GridFunction f_mu;  // e^{-mu t} x
    GridFunction u_mu;  // K_A f_mu
    /// max_i ||v(t_i) - solve(g_mu, x)(t_i)||_0 / max ||v||_0: v solves v' - Av = g, v(0) = x.
    double v_residual = 0.0;
    /// max_t ||u_mu(t)||_0 / ||x||_0.
    double u_bound_ratio = 0.0;
};

inline ProofProbe make_proof_probe(const OperatorPair& op, const TimeGrid& grid, Complex mu, const Vec& x) {
    op.check_dim(x);
    const ExponentialSolver solver(op);
    const Vec gx = mu * x - op.apply(x);
    auto v = GridFunction::sample(grid, [&](double t) { return Vec(std::exp(mu * t) * x); });
    std::vector<Vec> dv;
    for (double t : grid.nodes()) dv.push_back(std::exp(mu * t) * mu * x);
    v.derivative_values = std::move(dv);
    const auto g = GridFunction::sample(grid, [&](double t) { return Vec(std::exp(mu * t) * gx); });
    const auto f = GridFunction::sample(grid, [&](double t) { return Vec(std::exp(-mu * t) * x); });
    GridFunction u = solver.solve(Forcing::exponential(mu, x), Vec::Zero(op.dim()), grid);

    const GridFunction vs = solver.solve(Forcing::exponential(-mu, gx), x, grid);
    double vmax = 0.0, diff = 0.0, umax = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        vmax = std::max(vmax, op.norm0(v.values[i]));
        diff = std::max(diff, op.norm0(v.values[i] - vs.values[i]));
        umax = std::max(umax, op.norm0(u.values[i]));
    }
    const double xn = op.norm0(x);
    ProofProbe p{mu, x, std::move(v), g, f, std::move(u), vmax > 0.0 ? diff / vmax : diff,
                 xn > 0.0 ? umax / xn : 0.0};
    return p;
}

struct InequalityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

/// Both sides of the a priori estimate applied to v_mu = e^{mu t} x:
///   sup_J e^{Re mu t} (||x||_1 + |mu| ||x||_0)  vs  M (sup_J e^{Re mu t} ||(mu - A)x||_0 + ||x||_1),
/// sups taken over grid nodes. M = M_hat is a lower estimate, so a failure calls
/// for more probes rather than signalling a contradiction.
inline InequalityCheck claim1_check(const OperatorPair& op, const TimeGrid& grid, Complex mu, const Vec& x,
                                    double M_hat) {
    op.check_dim(x);
    double growth = 0.0;
    for (double t : grid.nodes()) growth = std::max(growth, std::exp(mu.real() * t));
    const double x1 = op.norm1(x);
    const double lhs = growth * (x1 + std::abs(mu) * op.norm0(x));
    const double rhs = M_hat * (growth * op.norm0(mu * x - op.apply(x)) + x1);
    return {lhs, rhs, lhs <= rhs * (1.0 + 1e-9)};
}

/// Smallest omega >= 0 with 2M <= sup_{[0,T]} e^{omega t} = e^{omega T}.
inline double omega1(double M_hat, double T) {
    require(M_hat > 0.0, ErrorKind::NonpositiveM, "M_hat must be positive");
    require(T > 0.0, ErrorKind::InvalidArgument, "T must be positive");
    return std::max(0.0, std::log(2.0 * M_hat) / T);
}

/// Smallest omega >= 0 with 2M <= sup_{(0,T]} t^{1-sigma} e^{omega t} = T^{1-sigma} e^{omega T}.
inline double omega1_weighted(double M_hat, double T, double sigma) {
    require(M_hat > 0.0, ErrorKind::NonpositiveM, "M_hat must be positive");
    require(T > 0.0, ErrorKind::InvalidArgument, "T must be positive");
    require(sigma > 0.0 && sigma <= 1.0, ErrorKind::InvalidArgument, "sigma must lie in (0, 1]");
    return std::max(0.0, (std::log(2.0 * M_hat) - (1.0 - sigma) * std::log(T)) / T);
}

// ---------------------------------------------------------------------------
// U_mu, V_mu from a black-box solver

/// Grid on [0, T] that resolves e^{-mu t} (panel width <= pi / (4 |Im mu|) and
/// <= 2 / Re mu) and the stiff layer of A near t = 0.
inline TimeGrid theorem_grid(double T, Complex mu, double stiffness, int min_panels = TimeGrid::kDefaultPanels,
                             int nodes_per_panel = TimeGrid::kDefaultNodesPerPanel) {
    const double osc = std::ceil(4.0 * std::abs(mu.imag()) * T / kPi);
    const double decay = std::ceil(std::max(0.0, mu.real()) * T / 2.0);
    const int panels = static_cast<int>(std::max({static_cast<double>(min_panels), osc, decay}));
    return TimeGrid::graded(T, panels, nodes_per_panel, TimeGrid::grading_levels_for(T, panels, stiffness));
}

struct SurjectivityData {
    Complex mu;
    double T = 0.0;
    TimeGrid grid;
    NormKind e0_norm = NormKind::euclidean;
    /// x -> 2 Re mu \int_0^T e^{-mu t} u_{conj mu}(t, x) dt (one solver call per application).
    std::function<Vec(const Vec&)> U_mu_apply;
    /// V_mu = (2 Re mu e^{-mu T} / (1 - e^{-2 Re mu T})) u_{conj mu}(T, .), assembled by columns.
    Mat V_mu;
    double V_norm = 0.0;
    /// 1 - e^{-2 Re mu T}.
    double damping = 0.0;
    std::optional<double> omega2;
    int neumann_terms = 0;

    [[nodiscard]] Vec V_mu_apply(const Vec& x) const { return V_mu * x; }
    /// U_mu as a matrix (dim solver calls).
    [[nodiscard]] Mat U_mu_matrix() const {
        const auto n = V_mu.rows();
        Mat u(n, n);
        for (Eigen::Index j = 0; j < n; ++j) u.col(j) = U_mu_apply(Vec::Unit(n, j));
        return u;
    }
};

/// Builds U_mu and V_mu for Re mu > 0 touching A only through the solver.
template <IvpSolver S>
SurjectivityData assemble_U_V(const S& solver, Complex mu, const TimeGrid& grid,
                              NormKind e0 = NormKind::euclidean) {
    require(mu.real() > 0.0, ErrorKind::DegenerateReMu, "U_mu, V_mu need Re mu > 0");
    const auto n = static_cast<Eigen::Index>(solver.dim());
    const double T = grid.T();
    const double re = mu.real();
    const double damping = -std::expm1(-2.0 * re * T);
    const Complex vscale = 2.0 * re * std::exp(-mu * T) / damping;
    const Complex mubar = std::conj(mu);

    SurjectivityData d{mu, T, grid, e0, {}, Mat(n, n), 0.0, damping, std::nullopt, 0};
    std::vector<Vec> cols(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t j) {
        const Vec e = Vec::Unit(n, static_cast<Eigen::Index>(j));
        cols[j] = vscale * solver.terminal(Forcing::exponential(mubar, e), Vec::Zero(n), T);
    });
    for (Eigen::Index j = 0; j < n; ++j) d.V_mu.col(j) = cols[static_cast<std::size_t>(j)];
    d.V_norm = induced_norm(e0, d.V_mu);

    std::vector<Complex> kernel(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        kernel[i] = 2.0 * re * grid.weights()[i] * std::exp(-mu * grid.nodes()[i]);
    d.U_mu_apply = [solver, grid, kernel, mubar, n](const Vec& x) -> Vec {
        Vec acc = Vec::Zero(n);
        if (x.isZero(0.0)) return acc;
        const GridFunction u = solver.solve(Forcing::exponential(mubar, x), Vec::Zero(n), grid);
        for (std::size_t i = 0; i < kernel.size(); ++i)
            if (kernel[i] != Complex{0.0}) acc += kernel[i] * u.values[i];
        return acc;
    };
    return d;
}

/// ||(mu - A) U_mu x - (1 - e^{-2 Re mu T})(I - V_mu) x||_0 / ||x||_0 (0 for x = 0).
inline double surjectivity_identity_check(const OperatorPair& op, const SurjectivityData& d, const Vec& x) {
    op.check_dim(x);
    require(d.mu.real() > 0.0, ErrorKind::DegenerateReMu, "identity needs Re mu > 0");
    const double xn = op.norm0(x);
    if (xn == 0.0) return 0.0;
    const Vec ux = d.U_mu_apply(x);
    const Vec lhs = d.mu * ux - op.apply(ux);
    const Vec rhs = d.damping * (x - d.V_mu_apply(x));
    return op.norm0(lhs - rhs) / xn;
}

struct Reconstruction {
    Vec x;
    int neumann_terms = 0;
    double V_norm = 0.0;
};

/// x = U_mu (1 - e^{-2 Re mu T})^{-1} sum_k V_mu^k y. At least
/// ceil(log(1e-12) / log ||V_mu||) terms are summed (so the tail is below
/// 1e-12 ||y|| / (1 - ||V_mu||)), and summation continues while the latest
/// term is >= 1e-12 ||y||_0.
inline Reconstruction neumann_resolvent(const SurjectivityData& d, const Vec& y, int max_terms = 200) {
    if (!(d.V_norm < 1.0)) {
        throw Error(ErrorKind::NeumannDivergence,
                    "||V_mu|| = " + std::to_string(d.V_norm) + " >= 1: Re mu is below omega2");
    }
    const int min_terms =
        d.V_norm > 0.0 ? std::max(1, static_cast<int>(std::ceil(std::log(1e-12) / std::log(d.V_norm)))) : 1;
    if (min_terms > max_terms)
        throw Error(ErrorKind::SlowConvergence, "||V_mu|| = " + std::to_string(d.V_norm) + " needs " +
                                                    std::to_string(min_terms) + " > " + std::to_string(max_terms) +
                                                    " Neumann terms");
    const double yn = vector_norm(d.e0_norm, y);
    Reconstruction r;
    r.V_norm = d.V_norm;
    Vec sum = y;
    Vec term = y;
    int terms = 1;
    while (terms < min_terms || (yn > 0.0 && vector_norm(d.e0_norm, term) >= 1e-12 * yn)) {
        if (terms >= max_terms)
            throw Error(ErrorKind::SlowConvergence, "Neumann series needs more than " + std::to_string(max_terms) +
                                                        " terms");
        term = d.V_mu_apply(term);
        sum += term;
        ++terms;
    }
    r.neumann_terms = terms;
    r.x = d.U_mu_apply(sum / d.damping);
    return r;
}

template <IvpSolver S>
Reconstruction resolvent_from_solver(const S& solver, Complex mu, const Vec& y, const TimeGrid& grid,
                                     NormKind e0 = NormKind::euclidean) {
    require(y.size() == static_cast<Eigen::Index>(solver.dim()), ErrorKind::DimensionMismatch,
            "right-hand side length differs from solver dimension");
    const SurjectivityData d = assemble_U_V(solver, mu, grid, e0);
    return neumann_resolvent(d, y);
}

struct Omega2Result {
    /// Threshold on Re mu (+inf when V_norm >= 1/2 at the top of the bracket).
    double omega2 = 0.0;
    bool unbounded = false;
    int evaluations = 0;
};

/// Bisection on Re mu (Im mu fixed) of ||V_mu|| against 1/2 over [0, 64/T].
/// `grid_for(mu)` supplies the quadrature grid for each trial mu.
template <IvpSolver S, typename GridFor>
Omega2Result omega2(const S& solver, double T, GridFor&& grid_for, double im_mu = 0.0,
                    NormKind e0 = NormKind::euclidean, double tolerance = 1e-6) {
    require(T > 0.0, ErrorKind::InvalidArgument, "T must be positive");
    Omega2Result r;
    auto vnorm = [&](double re) {
        ++r.evaluations;
        const Complex mu(re, im_mu);
        return assemble_U_V(solver, mu, grid_for(mu), e0).V_norm;
    };
    double lo = 1e-9 / T;
    double hi = 64.0 / T;
    if (vnorm(hi) >= 0.5) {
        r.omega2 = std::numeric_limits<double>::infinity();
        r.unbounded = true;
        return r;
    }
    if (vnorm(lo) < 0.5) {
        r.omega2 = 0.0;
        return r;
    }
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        (vnorm(mid) < 0.5 ? hi : lo) = mid;
    }
    r.omega2 = hi;
    return r;
}

inline Omega2Result omega2(const OperatorPair& op, double T, double im_mu = 0.0, double tolerance = 1e-6) {
    const double stiff = op.stiffness();
    return omega2(ExponentialSolver(op), T, [&](Complex mu) { return theorem_grid(T, mu, stiff); }, im_mu,
                  op.e0_norm(), tolerance);
}

// ---------------------------------------------------------------------------
// Half-plane scan and verdict

/// Log-spaced (or linear) values.
inline std::vector<double> spaced(double lo, double hi, int n, bool log_scale) {
    require(n >= 1, ErrorKind::InvalidArgument, "need at least one point");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double s = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        v[static_cast<std::size_t>(i)] =
            log_scale ? std::exp(std::log(lo) + s * (std::log(hi) - std::log(lo))) : lo + s * (hi - lo);
    }
    return v;
}

inline std::vector<Complex> product_grid(const std::vector<double>& re, const std::vector<double>& im) {
    std::vector<Complex> g;
    for (double a : re)
        for (double b : im) g.emplace_back(a, b);
    return g;
}

/// Re mu log-spaced in [omega + 0.5, 1e3] (5 values), Im mu linear in [-100, 100] (21 values).
inline std::vector<Complex> default_scan_grid(double omega) {
    return product_grid(spaced(omega + 0.5, std::max(1e3, omega + 1.0), 5, true), spaced(-100.0, 100.0, 21, false));
}

/// (1 + |mu|) ||(mu - A)^{-1}|| on every grid point; N is their maximum.
/// Singular points are recorded and skipped. When M_hat is supplied the bound
/// N <= 2 M_hat (1 v c1) is reported as a diagnostic only (M_hat is a lower
/// estimate of M).
inline SpectralReport halfplane_scan(const OperatorPair& op, double omega, const std::vector<Complex>& mu_grid,
                                     std::optional<double> M_hat = std::nullopt) {
    for (const auto& mu : mu_grid)
        require(mu.real() > omega, ErrorKind::InvalidArgument, "scan point with Re mu <= omega");
    SpectralReport r = spectrum_and_bound(op);
    r.half_plane_offset = omega;
    r.scan.resize(mu_grid.size());
    parallel_for(mu_grid.size(), [&](std::size_t i) {
        ScanPoint p{mu_grid[i], 0.0, false};
        try {
            p.resolvent_norm = resolvent_norm(op, mu_grid[i]);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SingularResolvent) throw;
            p.singular = true;
            p.resolvent_norm = std::numeric_limits<double>::quiet_NaN();
        }
        r.scan[i] = p;
    });
    for (const auto& p : r.scan)
        if (!p.singular) r.bound_constant = std::max(r.bound_constant, (1.0 + std::abs(p.mu)) * p.resolvent_norm);
    if (M_hat) {
        r.theorem_bound = 2.0 * *M_hat * std::max(1.0, OperatorPair::c1());
        r.theorem_bound_holds = r.bound_constant <= *r.theorem_bound;
    }
    return r;
}

struct Verdict {
    double s_A = 0.0;
    /// max over beta of (1 + |beta|) ||(i beta - A)^{-1}|| (+inf if the axis meets the spectrum).
    double uniform_bound = 0.0;
    /// N over the half-plane grid Re mu in [1e-8, 1e3] at the same Im mu values.
    double recorded_N = 0.0;
    /// ||V_mu|| at mu = 1 for T = 1, 2, 4, ..., 32.
    std::vector<double> V_norms;
    bool V_decays = false;
    bool pass = false;
};

/// Spectral-bound verdict: s(A) < 0, a finite uniform resolvent bound on the
/// imaginary axis consistent with the half-plane constant, and V_mu -> 0 as T
/// grows (the infinite-interval limit in which V_mu vanishes).
inline Verdict rplus_verdict(const OperatorPair& op, const std::vector<double>& betas) {
    Verdict v;
    v.s_A = op.spectral_bound();
    v.uniform_bound = 0.0;
    std::vector<Complex> axis;
    for (double b : betas) axis.emplace_back(0.0, b);
    std::vector<double> axis_values(axis.size());
    parallel_for(axis.size(), [&](std::size_t i) {
        if (op.distance_to_spectrum(axis[i]) <= op.proximity_tolerance()) {
            axis_values[i] = std::numeric_limits<double>::infinity();
            return;
        }
        axis_values[i] = (1.0 + std::abs(axis[i])) * resolvent_norm(op, axis[i]);
    });
    for (double a : axis_values) v.uniform_bound = std::max(v.uniform_bound, a);

    const auto half = halfplane_scan(op, 0.0, product_grid(spaced(1e-8, 1e3, 23, true), betas));
    v.recorded_N = half.bound_constant;

    const ExponentialSolver solver(op);
    for (double T = 1.0; T <= 32.0; T *= 2.0) {
        const Complex mu(1.0, 0.0);
        v.V_norms.push_back(assemble_U_V(solver, mu, theorem_grid(T, mu, op.stiffness()), op.e0_norm()).V_norm);
    }
    v.V_decays = v.V_norms.back() < 1e-6;
    for (std::size_t i = 1; i < v.V_norms.size(); ++i) v.V_decays = v.V_decays && v.V_norms[i] < v.V_norms[i - 1];

    v.pass = v.s_A < 0.0 && std::isfinite(v.uniform_bound) && v.uniform_bound <= v.recorded_N * (1.0 + 1e-6) &&
             v.V_decays;
    return v;
}

/// Imaginary-axis sample used by the verdict when none is given.
inline std::vector<double> default_axis_betas() { return spaced(-100.0, 100.0, 201, false); }

}  // namespace semilab
