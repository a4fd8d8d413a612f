#pragma once

// Two independent evaluators of e^{tA}x: the oracle (matrix exponential or
// per-eigenvalue exponential) and a contour quadrature of the inverse Laplace
// representation, which touches A only through resolvent solves.

#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "semilab/core.hpp"
#include "semilab/linop.hpp"

namespace semilab {

/// Scaling-and-squaring matrix exponential (Pade), complex.
inline Mat matrix_exponential(const Mat& m) { return m.exp(); }

/// e^{tA}x. Diagonal operators use per-eigenvalue exponentials; everything
/// else goes through the dense matrix exponential. t = 0 returns x unchanged.
inline Vec semigroup_apply_oracle(const OperatorPair& op, double t, const Vec& x) {
    op.check_dim(x);
    require(t >= 0.0, ErrorKind::InvalidArgument, "semigroup time must be nonnegative");
    if (t == 0.0) return x;
    if (op.structure() == Structure::diagonal) {
        Vec y(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) y(i) = std::exp(t * op.matrix()(i, i)) * x(i);
        return y;
    }
    const Mat a = t * op.matrix();
    return matrix_exponential(a) * x;
}

enum class ContourKind { parabolic, hyperbolic };

/// Integration path mu(s), s in [-half_width, half_width], sampled by the
/// midpoint rule with node_count nodes.
///
///   parabolic:  mu(s) = shift + scale (1 + i s)^2
///   hyperbolic: mu(s) = shift + scale (1 + sin(i s - angle))
///
/// The shape (scale * t, tail depth) is fixed and node_count only refines the
/// step, so the discretization error decays geometrically in node_count.
struct Contour {
    ContourKind kind = ContourKind::parabolic;
    int node_count = 32;
    double shift = 0.0;
    double scale = 1.0;
    double half_width = 1.0;
    double angle = 0.6;

    /// Scale * t for the parabola and its offset * t to the right of the
    /// spectral bound; the tails are cut where Re(mu - shift) t reaches -tail_depth.
    static constexpr double kParabolicScaleT = 6.0;
    static constexpr double kParabolicOffsetT = 3.0;
    static constexpr double kHyperbolicScaleT = 6.0;
    static constexpr double kHyperbolicAngle = 0.6;
    static constexpr double kTailDepth = 36.0;
    static constexpr double kHyperbolicTailDepth = 36.0;

    /// Default contour for e^{tA}: vertex at spectral_bound + (offset + scale) / t.
    static Contour parabolic(double spectral_bound, double t, int nodes = 32) {
        require(t > 0.0, ErrorKind::InvalidArgument, "contour needs t > 0");
        Contour c;
        c.kind = ContourKind::parabolic;
        c.node_count = nodes;
        c.shift = spectral_bound + kParabolicOffsetT / t;
        c.scale = kParabolicScaleT / t;
        c.half_width = std::sqrt(1.0 + kTailDepth / kParabolicScaleT);
        c.validate();
        return c;
    }

    static Contour hyperbolic(double spectral_bound, double t, int nodes = 64) {
        require(t > 0.0, ErrorKind::InvalidArgument, "contour needs t > 0");
        Contour c;
        c.kind = ContourKind::hyperbolic;
        c.node_count = nodes;
        c.shift = spectral_bound;
        c.scale = kHyperbolicScaleT / t;
        c.angle = kHyperbolicAngle;
        c.half_width = std::acosh((1.0 + kHyperbolicTailDepth / kHyperbolicScaleT) / std::sin(c.angle));
        c.validate();
        return c;
    }

    void validate() const {
        require(node_count >= 8 && node_count % 2 == 0, ErrorKind::InvalidArgument,
                "contour node count must be even and >= 8");
        require(scale > 0.0 && half_width > 0.0, ErrorKind::InvalidArgument, "contour shape must be positive");
        require(kind == ContourKind::parabolic || (angle > 0.0 && angle < 0.5 * kPi),
                ErrorKind::InvalidArgument, "hyperbolic angle must lie in (0, pi/2)");
    }

    [[nodiscard]] double step() const { return 2.0 * half_width / node_count; }
    [[nodiscard]] double parameter(int j) const { return -half_width + step() * (j + 0.5); }

    [[nodiscard]] Complex point(double s) const {
        if (kind == ContourKind::parabolic) {
            const Complex w(1.0, s);
            return shift + scale * w * w;
        }
        return shift + scale * (1.0 + std::sin(Complex(-angle, s)));
    }

    [[nodiscard]] Complex derivative(double s) const {
        if (kind == ContourKind::parabolic) return 2.0 * Complex(0.0, scale) * Complex(1.0, s);
        return Complex(0.0, scale) * std::cos(Complex(-angle, s));
    }

    /// Signed horizontal gap between the curve and z at the height Im z;
    /// positive when z lies strictly inside (to the left of) the contour.
    [[nodiscard]] double enclosure_margin(Complex z) const {
        const double a = (z.real() - shift) / scale;
        const double b = z.imag() / scale;
        double boundary = 0.0;
        if (kind == ContourKind::parabolic) {
            boundary = 1.0 - 0.25 * b * b;
        } else {
            const double c = b / std::cos(angle);
            boundary = 1.0 - std::sin(angle) * std::sqrt(1.0 + c * c);
        }
        return (boundary - a) * scale;
    }
};

struct ContourResult {
    Vec value;
    /// ||I_N - I_{N/2}|| / ||I_N||: an overestimate of the error of I_N.
    double error_estimate = 0.0;
};

namespace detail {
inline Vec contour_sum(const OperatorPair& op, const Contour& c, double t, const Vec& x, int stride) {
    Vec acc = Vec::Zero(x.size());
    const double h = 2.0 * c.half_width / (c.node_count / stride);
    for (int j = 0; j < c.node_count / stride; ++j) {
        const double s = -c.half_width + h * (j + 0.5);
        const Complex mu = c.point(s);
        acc += (std::exp(mu * t) * c.derivative(s)) * resolvent_solve(op, mu, x);
    }
    return acc * (h / Complex(0.0, 2.0 * kPi));
}
}  // namespace detail

/// e^{tA}x = (1/2 pi i) \int_Gamma e^{mu t} (mu - A)^{-1} x dmu by the
/// midpoint rule on the contour parameter.
inline ContourResult semigroup_apply_contour(const OperatorPair& op, const Contour& contour, double t,
                                             const Vec& x) {
    op.check_dim(x);
    contour.validate();
    require(t > 0.0, ErrorKind::InvalidArgument, "contour evaluation needs t > 0");
    for (const auto& l : op.eigenvalues()) {
        if (contour.enclosure_margin(l) <= 0.0) {
            throw Error(ErrorKind::ContourCrossesSpectrum,
                        "eigenvalue (" + std::to_string(l.real()) + "," + std::to_string(l.imag()) +
                            ") is not enclosed by the contour");
        }
    }
    ContourResult r;
    r.value = detail::contour_sum(op, contour, t, x, 1);
    const Vec coarse = detail::contour_sum(op, contour, t, x, 2);
    const double scale = r.value.norm();
    r.error_estimate = (r.value - coarse).norm() / (scale > 0.0 ? scale : 1.0);
    return r;
}

}  // namespace semilab
