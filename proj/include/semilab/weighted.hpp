#pragma once

// Time-weighted sup norms sup_{t>0} t^{1-sigma} ||u(t)||, the weighted a priori
// inequality, trace-norm upper bounds, the spectral interpolation norms for
// diagonal operators, and L_p-in-time norms.

#include <algorithm>
#include <cmath>
#include <vector>

#include "semilab/cauchy.hpp"
#include "semilab/core.hpp"
#include "semilab/grid.hpp"
#include "semilab/linop.hpp"
#include "semilab/parallel.hpp"
#include "semilab/solver.hpp"
#include "semilab/theorem.hpp"

namespace semilab {

struct WeightParams {
    double sigma = 1.0;
    double theta = 0.5;
    double p = 2.0;

    void validate() const {
        require(sigma > 0.0 && sigma <= 1.0, ErrorKind::InvalidArgument, "sigma must lie in (0, 1]");
        require(theta > 0.0 && theta < 1.0, ErrorKind::InvalidArgument, "theta must lie in (0, 1)");
        require(p > 1.0 && std::isfinite(p), ErrorKind::InvalidArgument, "p must lie in (1, inf)");
    }
};

namespace detail {
inline void check_sigma(double sigma) {
    require(sigma > 0.0 && sigma <= 1.0, ErrorKind::InvalidArgument, "sigma must lie in (0, 1]");
}
/// Nodes entering a weighted sup: all of them for sigma = 1, t > 0 otherwise.
inline bool weighted_node(double t, double sigma) { return sigma == 1.0 || t > 0.0; }
}  // namespace detail

struct WeightedNorm {
    double value = 0.0;
    /// Quadratic extrapolation of t^{1-sigma} ||u(t)|| to t = 0 from the three
    /// smallest positive nodes.
    double limit_estimate = 0.0;
    /// limit_estimate exceeds 5% of the norm: the little-o condition at t = 0
    /// looks violated. Never raised for sigma = 1.
    bool membership_violated = false;
};

/// sup_{t in (0,T]} t^{1-sigma} ||u(t)||_0 over grid nodes.
inline WeightedNorm weighted_norm(const GridFunction& u, double sigma, NormKind e0 = NormKind::euclidean) {
    detail::check_sigma(sigma);
    const auto& nodes = u.grid.nodes();
    WeightedNorm r;
    std::vector<std::pair<double, double>> small;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double t = nodes[i];
        if (!detail::weighted_node(t, sigma)) continue;
        const double g = std::pow(t, 1.0 - sigma) * vector_norm(e0, u.values[i]);
        r.value = std::max(r.value, g);
        if (t > 0.0 && small.size() < 3) small.emplace_back(t, g);
    }
    if (sigma < 1.0 && small.size() == 3) {
        double lim = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            double l = 1.0;
            for (std::size_t j = 0; j < 3; ++j)
                if (j != i) l *= (0.0 - small[j].first) / (small[i].first - small[j].first);
            lim += l * small[i].second;
        }
        r.limit_estimate = lim;
        r.membership_violated = std::abs(lim) > 0.05 * r.value && r.value > 0.0;
    }
    return r;
}

/// sup_{t in (0,T]} t^{1-sigma} (||u'(t)||_0 + ||u(t)||_1).
template <NormPair N>
double weighted_e1_norm(const N& norms, const GridFunction& u, double sigma) {
    detail::check_sigma(sigma);
    require(u.derivative_values.has_value(), ErrorKind::MissingDerivative, "E1(J) norm needs derivative samples");
    const auto& nodes = u.grid.nodes();
    double m = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!detail::weighted_node(nodes[i], sigma)) continue;
        const double w = std::pow(nodes[i], 1.0 - sigma);
        m = std::max(m, w * static_cast<double>(norms.norm0((*u.derivative_values)[i]) + norms.norm1(u.values[i])));
    }
    return m;
}

/// M_hat and c2_hat in the weighted norms: ratios
/// sup t^{1-sigma}(||u'||_0 + ||u||_1) / (sup t^{1-sigma} ||f||_0 + ||x||_1).
inline MaxRegEstimate estimate_M_weighted(const OperatorPair& op, const TimeGrid& grid,
                                          const std::vector<Probe>& probes, double sigma) {
    detail::check_sigma(sigma);
    require(!probes.empty(), ErrorKind::EmptyProbeSet, "probe set is empty");
    const ExponentialSolver solver(op);
    std::vector<double> ratios(probes.size());
    parallel_for(probes.size(), [&](std::size_t i) {
        const GridFunction u = solver.solve(probes[i].f, probes[i].x, grid);
        const double den = weighted_norm(probes[i].f.sample(grid), sigma, op.e0_norm()).value + op.norm1(probes[i].x);
        require(den > 0.0, ErrorKind::InvalidArgument, "probe '" + probes[i].label + "' has zero data");
        ratios[i] = weighted_e1_norm(op, u, sigma) / den;
    });
    MaxRegEstimate est{0.0, 0.0, probes.size(), grid, ratios, {}};
    for (std::size_t i = 0; i < probes.size(); ++i) {
        est.M_hat = std::max(est.M_hat, ratios[i]);
        if (probes[i].x.isZero(0.0)) est.c2_hat = std::max(est.c2_hat, OperatorPair::c1() * ratios[i]);
        est.running.push_back(est.M_hat);
    }
    return est;
}

struct WeightedInequalityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
    /// T^{1-sigma} ||u_{conj mu}(T)||_0 against c2_hat T^{1-sigma} ||x||_0.
    double endpoint_value = 0.0;
    double endpoint_bound = 0.0;
    bool endpoint_pass = false;
};

/// Weighted form of the a priori inequality for v_mu = e^{mu t} x:
///   sup t^{1-sigma} e^{Re mu t} (||x||_1 + |mu| ||x||_0)
///   vs M (sup t^{1-sigma} e^{Re mu t} ||(mu - A)x||_0 + ||x||_1),
/// plus the endpoint bound on u_{conj mu} = K_A(e^{-conj(mu) t} x).
inline WeightedInequalityCheck weighted_maxreg_check(const OperatorPair& op, const TimeGrid& grid, double sigma,
                                                     Complex mu, const Vec& x, double M_hat, double c2_hat) {
    detail::check_sigma(sigma);
    op.check_dim(x);
    double growth = 0.0;
    for (double t : grid.nodes())
        if (detail::weighted_node(t, sigma)) growth = std::max(growth, std::pow(t, 1.0 - sigma) * std::exp(mu.real() * t));
    const double x1 = op.norm1(x);
    WeightedInequalityCheck r;
    r.lhs = growth * (x1 + std::abs(mu) * op.norm0(x));
    r.rhs = M_hat * (growth * op.norm0(mu * x - op.apply(x)) + x1);
    r.pass = r.lhs <= r.rhs * (1.0 + 1e-9);

    const double T = grid.T();
    const double wT = std::pow(T, 1.0 - sigma);
    const Vec uT = ExponentialSolver(op).terminal(Forcing::exponential(std::conj(mu), x), Vec::Zero(op.dim()), T);
    r.endpoint_value = wT * op.norm0(uT);
    r.endpoint_bound = c2_hat * wT * op.norm0(x);
    r.endpoint_pass = r.endpoint_value <= r.endpoint_bound * (1.0 + 1e-6);
    return r;
}

/// Weighted E1(J) norm of t -> e^{tA} x: an upper bound for the trace-space
/// norm of x, which is the infimum over all extensions.
inline double trace_norm_upper(const OperatorPair& op, const Vec& x, const TimeGrid& grid, double sigma) {
    const GridFunction u = ExponentialSolver(op).solve(Forcing::zero(op.dim()), x, grid);
    return weighted_e1_norm(op, u, sigma);
}

// ---------------------------------------------------------------------------
// Interpolation scale for diagonal operators

inline void require_diagonal(const OperatorPair& op) {
    require(op.structure() == Structure::diagonal, ErrorKind::NotDiagonal,
            "interpolation norms are realized for diagonal operators only");
}

/// sup_k (1 + |lambda_k|)^theta |x_k|.
inline double interp_norm_diag(const OperatorPair& op, const Vec& x, double theta) {
    require_diagonal(op);
    op.check_dim(x);
    double m = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k)
        m = std::max(m, std::pow(1.0 + std::abs(op.matrix()(k, k)), theta) * std::abs(x(k)));
    return m;
}

/// The same operator viewed on E_theta with domain E_{1+theta}:
/// ||x||_theta = sup_k (1+|lambda_k|)^theta |x_k|,
/// ||x||_{1+theta} = sup_k (1+|lambda_k|)^{1+theta} |x_k|.
/// Since 1 + |lambda_k| >= 1 the embedding constant is 1.
class InterpolationScale {
public:
    InterpolationScale(OperatorPair op, double theta) : op_(std::move(op)), theta_(theta) {
        require_diagonal(op_);
        require(theta >= 0.0 && theta <= 1.0, ErrorKind::InvalidArgument, "theta must lie in [0, 1]");
        weights0_.resize(op_.dim());
        weights1_.resize(op_.dim());
        for (Eigen::Index k = 0; k < op_.dim(); ++k) {
            const double a = 1.0 + std::abs(op_.matrix()(k, k));
            weights0_(k) = std::pow(a, theta);
            weights1_(k) = std::pow(a, 1.0 + theta);
        }
    }

    [[nodiscard]] double theta() const noexcept { return theta_; }
    [[nodiscard]] const OperatorPair& op() const noexcept { return op_; }
    /// A_theta: the part of A in E_theta (same matrix on C^dim).
    [[nodiscard]] const Mat& A_theta() const noexcept { return op_.matrix(); }
    [[nodiscard]] static constexpr double c1() noexcept { return 1.0; }

    [[nodiscard]] double norm0(const Vec& x) const {
        op_.check_dim(x);
        return x.size() ? weights0_.cwiseProduct(x.cwiseAbs()).maxCoeff() : 0.0;
    }
    [[nodiscard]] double norm1(const Vec& x) const {
        op_.check_dim(x);
        return x.size() ? weights1_.cwiseProduct(x.cwiseAbs()).maxCoeff() : 0.0;
    }

private:
    OperatorPair op_;
    double theta_;
    Eigen::VectorXd weights0_;
    Eigen::VectorXd weights1_;
};

inline InterpolationScale dpg_scale(const OperatorPair& op, double theta) { return InterpolationScale(op, theta); }

struct ThetaPoint {
    double theta = 0.0;
    double M_hat = 0.0;
    double omega1 = 0.0;
    double N = 0.0;
};

/// M_hat on (E_theta, E_{1+theta}), the resulting omega1, and the resolvent
/// constant N over mu_grid in the E_theta operator norm, which for diagonal A
/// is max_k 1/|mu - lambda_k|.
inline ThetaPoint theta_point(const OperatorPair& op, double theta, const TimeGrid& grid,
                              const std::vector<Probe>& probes, const std::vector<Complex>& mu_grid) {
    const auto scale = dpg_scale(op, theta);
    const auto est = estimate_M(ExponentialSolver(op), scale, InterpolationScale::c1(), grid, probes);
    ThetaPoint p{theta, est.M_hat, omega1(est.M_hat, grid.T()), 0.0};
    for (const auto& mu : mu_grid) {
        if (op.distance_to_spectrum(mu) <= op.proximity_tolerance()) continue;
        double r = 0.0;
        for (Eigen::Index k = 0; k < op.dim(); ++k) r = std::max(r, 1.0 / std::abs(mu - op.matrix()(k, k)));
        p.N = std::max(p.N, (1.0 + std::abs(mu)) * r);
    }
    return p;
}

// ---------------------------------------------------------------------------
// L_p in time

struct LpNorms {
    double e0_lp = 0.0;
    double e1_lp = 0.0;
};

/// (\int_0^T ||u||_0^p dt)^{1/p} by the panel Gauss rule.
inline double lp_norm0(const GridFunction& u, double p, NormKind e0 = NormKind::euclidean) {
    require(p >= 1.0 && std::isfinite(p), ErrorKind::InvalidArgument, "p must be finite and >= 1");
    const auto& w = u.grid.weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] > 0.0) s += w[i] * std::pow(vector_norm(e0, u.values[i]), p);
    return std::pow(s, 1.0 / p);
}

/// L_p norms of ||u||_0 and ||u'||_0 + ||u||_1.
inline LpNorms lp_norms(const OperatorPair& op, const GridFunction& u, double p) {
    require(u.derivative_values.has_value(), ErrorKind::MissingDerivative, "L_p E1 norm needs derivative samples");
    LpNorms r;
    r.e0_lp = lp_norm0(u, p, op.e0_norm());
    const auto& w = u.grid.weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] > 0.0) s += w[i] * std::pow(op.norm0((*u.derivative_values)[i]) + op.norm1(u.values[i]), p);
    r.e1_lp = std::pow(s, 1.0 / p);
    return r;
}

}  // namespace semilab
