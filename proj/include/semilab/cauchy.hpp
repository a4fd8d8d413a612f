#pragma once

// Function norms over J = [0, T], the solution operator K_A, the probe-based
// maximal-regularity estimator, and the constant extension / restriction /
// gluing operations used in the uniqueness argument.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "semilab/core.hpp"
#include "semilab/forcing.hpp"
#include "semilab/grid.hpp"
#include "semilab/linop.hpp"
#include "semilab/parallel.hpp"
#include "semilab/solver.hpp"

namespace semilab {

/// A pair of norms (E0, E1) on vectors. OperatorPair provides the graph-norm
/// pair; weighted.hpp provides the interpolation-scale pair.
template <typename N>
concept NormPair = requires(const N& n, const Vec& x) {
    { n.norm0(x) } -> std::convertible_to<double>;
    { n.norm1(x) } -> std::convertible_to<double>;
};

/// max_i ||f(t_i)||_0.
template <NormPair N>
double e0_norm_J(const N& norms, const GridFunction& f) {
    double m = 0.0;
    for (const auto& v : f.values) m = std::max(m, static_cast<double>(norms.norm0(v)));
    return m;
}

/// max_i ||u'(t_i)||_0 + ||u(t_i)||_1.
template <NormPair N>
double e1_norm_J(const N& norms, const GridFunction& u) {
    require(u.derivative_values.has_value(), ErrorKind::MissingDerivative, "E1(J) norm needs derivative samples");
    double m = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        m = std::max(m, static_cast<double>(norms.norm0((*u.derivative_values)[i]) + norms.norm1(u.values[i])));
    return m;
}

/// Default grid for an operator on [0, T]: uniform panels with the first one
/// graded toward 0 according to the stiffness of A.
inline TimeGrid default_grid(const OperatorPair& op, double T, int panels = TimeGrid::kDefaultPanels,
                             int nodes_per_panel = TimeGrid::kDefaultNodesPerPanel) {
    return TimeGrid::graded(T, panels, nodes_per_panel, TimeGrid::grading_levels_for(T, panels, op.stiffness()));
}

// ---------------------------------------------------------------------------
// Spectral differentiation (independent of the integrator)

/// Derivative of the piecewise interpolant through each panel's q + 2 nodes
/// (both edges and the Gauss nodes). Interior edges take the right panel.
inline std::vector<Vec> differentiate(const GridFunction& u) {
    const auto& g = u.grid;
    const auto& nodes = g.nodes();
    const int m = g.nodes_per_panel() + 2;
    std::vector<Vec> d(nodes.size());
    for (std::size_t p = 0; p < static_cast<std::size_t>(g.panels()); ++p) {
        const std::size_t first = g.edge_index(p);
        std::vector<double> z(static_cast<std::size_t>(m)), w(static_cast<std::size_t>(m), 1.0);
        for (int i = 0; i < m; ++i) z[static_cast<std::size_t>(i)] = nodes[first + static_cast<std::size_t>(i)];
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (i != j) w[static_cast<std::size_t>(i)] /= z[static_cast<std::size_t>(i)] - z[static_cast<std::size_t>(j)];
        const bool last = p + 1 == static_cast<std::size_t>(g.panels());
        for (int i = 0; i < m; ++i) {
            if (i == m - 1 && !last) continue;
            const auto ii = static_cast<std::size_t>(i);
            Vec acc = Vec::Zero(u.dim());
            for (int j = 0; j < m; ++j) {
                if (j == i) continue;
                const auto jj = static_cast<std::size_t>(j);
                const double dij = (w[jj] / w[ii]) / (z[ii] - z[jj]);
                acc += dij * (u.values[first + jj] - u.values[first + ii]);
            }
            d[first + ii] = acc;
        }
    }
    return d;
}

/// max_i ||(Du)(t_i) - A u(t_i) - f(t_i)||_0 with D the spectral derivative.
inline double ode_residual(const OperatorPair& op, const GridFunction& u, const Forcing& f) {
    const auto d = differentiate(u);
    double r = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        r = std::max(r, op.norm0(d[i] - op.apply(u.values[i]) - f.at(u.grid.nodes()[i])));
    return r;
}

// ---------------------------------------------------------------------------
// Solution operator

struct SolveOptions {
    /// Re-solve on the grid with every panel split and compare at panel edges.
    bool verify_refinement = true;
    double refinement_tolerance = 1e-9;
};

/// u' = Au + f, u(0) = x on the grid; derivative_values = Au + f.
inline GridFunction solve_ivp(const OperatorPair& op, const Forcing& f, const Vec& x, const TimeGrid& grid,
                              SolveOptions options = {}) {
    const ExponentialSolver solver(op);
    GridFunction u = solver.solve(f, x, grid);
    u.values[0] = x;
    if (options.verify_refinement) {
        const TimeGrid fine = grid.refined();
        const GridFunction uf = solver.solve(f, x, fine);
        double scale = op.norm0(x);
        for (const auto& v : u.values) scale = std::max(scale, op.norm0(v));
        for (std::size_t p = 0; p < grid.edges().size(); ++p) {
            const double diff = op.norm0(u.values[grid.edge_index(p)] - uf.values[fine.edge_index(2 * p)]);
            if (diff > options.refinement_tolerance * std::max(scale, 1e-300)) {
                throw Error(ErrorKind::QuadratureUnderResolved,
                            "panel doubling changes u(" + std::to_string(grid.edges()[p]) + ") by " +
                                std::to_string(diff / scale) + " relative");
            }
        }
    }
    return u;
}

/// Sampled right-hand side (values at Gauss nodes are interpolated panel-wise).
inline GridFunction solve_ivp(const OperatorPair& op, const GridFunction& f, const Vec& x, const TimeGrid& grid,
                              SolveOptions options = {}) {
    return solve_ivp(op, Forcing::samples(f), x, grid, options);
}

struct SolutionOperatorResult {
    GridFunction u;
    /// ||K_A f||_{E1(J)} / ||f||_{E0(J)} (0 when f = 0).
    double ratio = 0.0;
};

/// K_A f: the solution with zero initial value.
inline SolutionOperatorResult solution_operator_KA(const OperatorPair& op, const Forcing& f, const TimeGrid& grid,
                                                   SolveOptions options = {}) {
    GridFunction u = solve_ivp(op, f, Vec::Zero(op.dim()), grid, options);
    const double num = e1_norm_J(op, u);
    const double den = e0_norm_J(op, f.sample(grid));
    return {std::move(u), den > 0.0 ? num / den : 0.0};
}

inline SolutionOperatorResult solution_operator_KA(const OperatorPair& op, const GridFunction& f,
                                                   const TimeGrid& grid, SolveOptions options = {}) {
    return solution_operator_KA(op, Forcing::samples(f), grid, options);
}

// ---------------------------------------------------------------------------
// Maximal-regularity estimate

/// One probe (f, x) for the a priori estimate.
struct Probe {
    std::string label;
    Forcing f;
    Vec x;
};

struct MaxRegEstimate {
    /// Lower estimate of M: max over probes of ||u||_{E1(J)} / (||f||_{E0(J)} + ||x||_1).
    double M_hat = 0.0;
    /// Lower estimate of c1 ||K_A||, from the probes with x = 0.
    double c2_hat = 0.0;
    std::size_t probe_count = 0;
    TimeGrid grid;
    std::vector<double> ratios;
    /// M_hat after each probe, in probe order.
    std::vector<double> running;
};

/// Ratio of one probe; throws InvalidArgument for a zero probe.
template <IvpSolver S, NormPair N>
double probe_ratio(const S& solver, const N& norms, const TimeGrid& grid, const Probe& probe) {
    const GridFunction u = solver.solve(probe.f, probe.x, grid);
    const double den = e0_norm_J(norms, probe.f.sample(grid)) + norms.norm1(probe.x);
    require(den > 0.0, ErrorKind::InvalidArgument, "probe '" + probe.label + "' has zero data");
    return e1_norm_J(norms, u) / den;
}

/// Probes run in parallel; the reduction walks them in index order.
template <IvpSolver S, NormPair N>
MaxRegEstimate estimate_M(const S& solver, const N& norms, double c1, const TimeGrid& grid,
                          const std::vector<Probe>& probes) {
    require(!probes.empty(), ErrorKind::EmptyProbeSet, "probe set is empty");
    std::vector<double> ratios(probes.size());
    parallel_for(probes.size(), [&](std::size_t i) { ratios[i] = probe_ratio(solver, norms, grid, probes[i]); });
    MaxRegEstimate est{0.0, 0.0, probes.size(), grid, ratios, {}};
    for (std::size_t i = 0; i < probes.size(); ++i) {
        est.M_hat = std::max(est.M_hat, ratios[i]);
        if (probes[i].x.isZero(0.0)) est.c2_hat = std::max(est.c2_hat, c1 * ratios[i]);
        est.running.push_back(est.M_hat);
    }
    return est;
}

inline MaxRegEstimate estimate_M(const OperatorPair& op, const TimeGrid& grid, const std::vector<Probe>& probes) {
    return estimate_M(ExponentialSolver(op), op, OperatorPair::c1(), grid, probes);
}

/// Eigenvectors for the eigenvalues of largest real part and largest modulus.
inline std::vector<Vec> extremal_eigenvectors(const OperatorPair& op) {
    Mat vecs;
    Vec lam;
    if (op.has_unitary_eigenbasis()) {
        vecs = op.unitary_basis();
        lam = op.basis_eigenvalues();
    } else {
        Eigen::ComplexEigenSolver<Mat> es(op.matrix(), true);
        require(es.info() == Eigen::Success, ErrorKind::EigenFailure, "eigenvector computation failed");
        vecs = es.eigenvectors();
        lam = es.eigenvalues();
    }
    Eigen::Index top = 0, stiff = 0;
    for (Eigen::Index i = 1; i < lam.size(); ++i) {
        if (lam(i).real() > lam(top).real()) top = i;
        if (std::abs(lam(i)) > std::abs(lam(stiff))) stiff = i;
    }
    std::vector<Vec> out{vecs.col(top).normalized()};
    if (stiff != top) out.push_back(vecs.col(stiff).normalized());
    return out;
}

/// Default probe family: exponential forcings e^{-mu t} y on a log-spaced real
/// mu grid, polynomial forcings t^k y, and initial values along extremal
/// eigenvectors and in random directions. Deterministic in the seed.
inline std::vector<Probe> default_probes(const OperatorPair& op, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto n = op.dim();
    const Vec zero = Vec::Zero(n);
    std::vector<Probe> probes;
    for (int k = 0; k < 4; ++k) {
        const double mu = std::pow(10.0, -1.0 + k);
        for (int r = 0; r < 2; ++r) {
            const Vec y = random_vector(n, rng);
            probes.push_back({"exp mu=" + std::to_string(mu) + " y=random" + std::to_string(r),
                              Forcing::exponential(mu, y), zero});
        }
    }
    for (int k = 0; k <= 2; ++k) {
        std::vector<Complex> c(static_cast<std::size_t>(k + 1), 0.0);
        c.back() = 1.0;
        probes.push_back({"poly t^" + std::to_string(k), Forcing::polynomial(c, random_vector(n, rng)), zero});
    }
    int e = 0;
    for (const auto& v : extremal_eigenvectors(op))
        probes.push_back({"ic eigenvector" + std::to_string(e++), Forcing::zero(n), v});
    for (int r = 0; r < 2; ++r) probes.push_back({"ic random" + std::to_string(r), Forcing::zero(n), random_vector(n, rng)});
    return probes;
}

// ---------------------------------------------------------------------------
// Extension, restriction, gluing

/// (Ef)(t) = f(T) for t in [T, T_new], on appended panels of (at most) the
/// width of the last panel.
inline GridFunction extend_constant(const GridFunction& f, double T_new) {
    const auto& g = f.grid;
    const double T = g.T();
    require(T_new > T, ErrorKind::BadEndpoint, "extension endpoint must exceed T");
    const double last = g.edges()[g.edges().size() - 1] - g.edges()[g.edges().size() - 2];
    const int extra = std::max(1, static_cast<int>(std::ceil((T_new - T) / last - 1e-9)));
    std::vector<double> edges = g.edges();
    for (int j = 1; j <= extra; ++j) edges.push_back(j == extra ? T_new : T + (T_new - T) * j / extra);
    TimeGrid ext(std::move(edges), g.nodes_per_panel());
    std::vector<Vec> values = f.values;
    values.resize(ext.size(), f.values.back());
    std::optional<std::vector<Vec>> d;
    if (f.derivative_values) {
        d = *f.derivative_values;
        d->resize(ext.size(), Vec::Zero(f.dim()));
    }
    return GridFunction(std::move(ext), std::move(values), std::move(d));
}

/// Ru: truncation to [0, T'] where T' must be a panel edge other than the first.
inline GridFunction restrict(const GridFunction& u, double T_new) {
    const auto& edges = u.grid.edges();
    const auto it = std::find(edges.begin(), edges.end(), T_new);
    require(it != edges.end() && it - edges.begin() >= 2 && T_new < u.grid.T(), ErrorKind::BadEndpoint,
            "restriction endpoint must be an interior panel edge beyond the first panel");
    const auto p = static_cast<std::size_t>(it - edges.begin());
    TimeGrid g(std::vector<double>(edges.begin(), it + 1), u.grid.nodes_per_panel());
    const std::size_t count = u.grid.edge_index(p) + 1;
    std::vector<Vec> values(u.values.begin(), u.values.begin() + static_cast<std::ptrdiff_t>(count));
    std::optional<std::vector<Vec>> d;
    if (u.derivative_values)
        d.emplace(u.derivative_values->begin(), u.derivative_values->begin() + static_cast<std::ptrdiff_t>(count));
    return GridFunction(std::move(g), std::move(values), std::move(d));
}

struct GlueReport {
    /// max ||Du - Au||_0 over nodes in [0, t1] (D the spectral derivative).
    double residual_head = 0.0;
    /// Same for the homogeneous continuation v on the extension grid.
    double residual_tail = 0.0;
    /// max of the two: residual of w over the glued grid.
    double residual = 0.0;
    double w_t1_norm = 0.0;
    /// residual_head <= 1e-9 (1 + sup ||u||_0).
    bool hypothesis_holds = false;
    /// hypothesis holds yet w(t1) != 0: a nonzero solution of the homogeneous
    /// problem with zero initial value.
    bool contradiction = false;
};

/// w = u_tilde on [0, t1], w(t) = e^{(t - t1)A} u_tilde(t1) afterwards.
inline GlueReport glue_check(const OperatorPair& op, const GridFunction& u_tilde, double t1,
                             const TimeGrid& grid_ext) {
    op.check_dim(u_tilde.values.front());
    const auto node = u_tilde.grid.find_node(t1);
    if (!node || *node == 0 || *node + 1 == u_tilde.grid.size())
        throw Error(ErrorKind::NotANode, "t1 = " + std::to_string(t1) + " is not an interior grid node");
    double scale = 0.0;
    for (const auto& v : u_tilde.values) scale = std::max(scale, op.norm0(v));
    const double tol = 1e-9 * (1.0 + scale);
    require(op.norm0(u_tilde.values.front()) <= tol, ErrorKind::PreconditionViolated,
            "u_tilde(0) != 0: not a solution with zero initial value");

    GlueReport r;
    const auto d = differentiate(u_tilde);
    for (std::size_t i = 0; i <= *node; ++i)
        r.residual_head = std::max(r.residual_head, op.norm0(d[i] - op.apply(u_tilde.values[i])));

    const Vec& w1 = u_tilde.values[*node];
    const GridFunction v = ExponentialSolver(op).solve(Forcing::zero(op.dim()), w1, grid_ext);
    const auto dv = differentiate(v);
    for (std::size_t i = 0; i < dv.size(); ++i)
        r.residual_tail = std::max(r.residual_tail, op.norm0(dv[i] - op.apply(v.values[i])));

    r.residual = std::max(r.residual_head, r.residual_tail);
    r.w_t1_norm = op.norm0(w1);
    r.hypothesis_holds = r.residual_head <= tol;
    r.contradiction = r.hypothesis_holds && r.w_t1_norm > tol;
    return r;
}

}  // namespace semilab
