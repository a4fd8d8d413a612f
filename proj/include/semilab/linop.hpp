#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "semilab/core.hpp"
#include "semilab/tridiagonal.hpp"

namespace semilab {

enum class NormKind { euclidean, sup };
enum class Structure { dense, diagonal, tridiagonal };

constexpr std::string_view to_string(NormKind n) { return n == NormKind::euclidean ? "euclidean" : "sup"; }
constexpr std::string_view to_string(Structure s) {
    switch (s) {
    case Structure::dense: return "dense";
    case Structure::diagonal: return "diagonal";
    case Structure::tridiagonal: return "tridiagonal";
    }
    return "dense";
}

/// Vector norm on E0.
inline double vector_norm(NormKind kind, const Vec& x) {
    return kind == NormKind::euclidean ? x.norm() : (x.size() ? x.cwiseAbs().maxCoeff() : 0.0);
}

/// Operator norm induced by the E0 norm: largest singular value (euclidean)
/// or maximum absolute row sum (sup).
inline double induced_norm(NormKind kind, const Mat& m) {
    if (m.size() == 0) return 0.0;
    if (kind == NormKind::sup) return m.cwiseAbs().rowwise().sum().maxCoeff();
    Eigen::BDCSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

/// A closed operator A on E0 = C^dim together with the graph norm
/// ||x||_1 = ||x||_0 + ||Ax||_0 on E1 = D(A). With this choice the embedding
/// constant c1 (||x||_0 <= c1 ||x||_1) is exactly 1.
///
/// Immutable after construction. Eigenvalues, the E0 operator norm of A, and
/// (for diagonal or Hermitian matrices) a unitary eigenbasis are computed once
/// here and shared by copies.
class OperatorPair {
public:
    OperatorPair(Mat matrix, NormKind e0 = NormKind::euclidean,
                 std::optional<Structure> structure = std::nullopt)
        : cache_(std::make_shared<Cache>()) {
        require(matrix.rows() == matrix.cols() && matrix.rows() > 0, ErrorKind::DimensionMismatch,
                "operator matrix must be square and nonempty");
        cache_->matrix = std::move(matrix);
        cache_->norm = e0;
        cache_->structure = structure.value_or(detect_structure(cache_->matrix));
        validate_structure();
        analyse();
    }

    [[nodiscard]] Eigen::Index dim() const noexcept { return cache_->matrix.rows(); }
    [[nodiscard]] const Mat& matrix() const noexcept { return cache_->matrix; }
    [[nodiscard]] NormKind e0_norm() const noexcept { return cache_->norm; }
    [[nodiscard]] Structure structure() const noexcept { return cache_->structure; }
    [[nodiscard]] bool hermitian() const noexcept { return cache_->hermitian; }
    /// Eigenvalues sorted by descending real part (ties: descending imaginary part).
    [[nodiscard]] const std::vector<Complex>& eigenvalues() const noexcept { return cache_->eigenvalues; }
    [[nodiscard]] double spectral_bound() const noexcept { return cache_->spectral_bound; }
    /// ||A||_{B(E0)}.
    [[nodiscard]] double matrix_norm() const noexcept { return cache_->matrix_norm; }
    /// Largest |lambda|; drives time-grid grading near t = 0.
    [[nodiscard]] double stiffness() const noexcept { return cache_->stiffness; }
    /// Embedding constant of E1 into E0 under the graph norm.
    [[nodiscard]] static constexpr double c1() noexcept { return 1.0; }

    /// Unitary eigenbasis when A is diagonal or Hermitian; A = Q diag(lambda) Q^*.
    [[nodiscard]] bool has_unitary_eigenbasis() const noexcept { return cache_->unitary_basis.has_value(); }
    [[nodiscard]] const Mat& unitary_basis() const { return *cache_->unitary_basis; }
    /// Eigenvalues in the column order of unitary_basis().
    [[nodiscard]] const Vec& basis_eigenvalues() const { return cache_->basis_eigenvalues; }

    [[nodiscard]] Vec apply(const Vec& x) const {
        check_dim(x);
        if (structure() == Structure::diagonal) return cache_->matrix.diagonal().cwiseProduct(x);
        return cache_->matrix * x;
    }
    [[nodiscard]] double norm0(const Vec& x) const { return vector_norm(cache_->norm, x); }
    [[nodiscard]] double norm1(const Vec& x) const { return norm0(x) + norm0(apply(x)); }
    [[nodiscard]] double op_norm(const Mat& m) const { return induced_norm(cache_->norm, m); }

    /// Tolerance used to decide that mu is (numerically) an eigenvalue.
    [[nodiscard]] double proximity_tolerance() const noexcept { return 1e-12 * (1.0 + matrix_norm()); }
    [[nodiscard]] double distance_to_spectrum(Complex mu) const {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& l : cache_->eigenvalues) d = std::min(d, std::abs(mu - l));
        return d;
    }

    void check_dim(const Vec& x) const {
        require(x.size() == dim(), ErrorKind::DimensionMismatch,
                "vector length " + std::to_string(x.size()) + " != dim " + std::to_string(dim()));
    }

private:
    struct Cache {
        Mat matrix;
        NormKind norm = NormKind::euclidean;
        Structure structure = Structure::dense;
        bool hermitian = false;
        std::vector<Complex> eigenvalues;
        double spectral_bound = 0.0;
        double matrix_norm = 0.0;
        double stiffness = 0.0;
        std::optional<Mat> unitary_basis;
        Vec basis_eigenvalues;
    };

    static Structure detect_structure(const Mat& m) {
        const auto n = m.rows();
        bool diag = true, tri = true;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) {
                if (i == j || m(i, j) == Complex{0.0}) continue;
                diag = false;
                if (std::abs(i - j) > 1) tri = false;
            }
        if (diag) return Structure::diagonal;
        if (tri && n > 2) return Structure::tridiagonal;
        return Structure::dense;
    }

    void validate_structure() const {
        const auto& m = cache_->matrix;
        const auto n = m.rows();
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) {
                if (i == j || m(i, j) == Complex{0.0}) continue;
                if (cache_->structure == Structure::diagonal)
                    throw Error(ErrorKind::InvalidArgument, "diagonal structure with nonzero off-diagonal entry");
                if (cache_->structure == Structure::tridiagonal && std::abs(i - j) > 1)
                    throw Error(ErrorKind::InvalidArgument, "tridiagonal structure with entry outside the band");
            }
    }

    void analyse() {
        auto& c = *cache_;
        const auto n = c.matrix.rows();
        c.hermitian = (c.matrix - c.matrix.adjoint()).cwiseAbs().maxCoeff() == 0.0;
        if (c.structure == Structure::diagonal) {
            c.basis_eigenvalues = c.matrix.diagonal();
            c.unitary_basis = Mat::Identity(n, n);
        } else if (c.hermitian) {
            Eigen::SelfAdjointEigenSolver<Mat> es(c.matrix);
            if (es.info() != Eigen::Success) throw Error(ErrorKind::EigenFailure, "Hermitian eigensolve failed");
            c.basis_eigenvalues = es.eigenvalues().cast<Complex>();
            c.unitary_basis = es.eigenvectors();
        } else {
            Eigen::ComplexEigenSolver<Mat> es(c.matrix, /*computeEigenvectors=*/false);
            if (es.info() != Eigen::Success) throw Error(ErrorKind::EigenFailure, "QR iteration did not converge");
            c.basis_eigenvalues = es.eigenvalues();
        }
        c.eigenvalues.assign(c.basis_eigenvalues.data(), c.basis_eigenvalues.data() + n);
        std::sort(c.eigenvalues.begin(), c.eigenvalues.end(), [](Complex a, Complex b) {
            if (a.real() != b.real()) return a.real() > b.real();
            return a.imag() > b.imag();
        });
        c.spectral_bound = c.eigenvalues.front().real();
        c.stiffness = 0.0;
        for (const auto& l : c.eigenvalues) c.stiffness = std::max(c.stiffness, std::abs(l));
        if (c.structure == Structure::diagonal) {
            c.matrix_norm = c.stiffness;
        } else {
            c.matrix_norm = induced_norm(c.norm, c.matrix);
        }
    }

    std::shared_ptr<Cache> cache_;
};

// ---------------------------------------------------------------------------
// Generators

/// Second-difference Dirichlet Laplacian on (0,1) with n interior points.
inline Mat laplacian1d(Eigen::Index n) {
    require(n > 0, ErrorKind::InvalidArgument, "laplacian1d needs n > 0");
    const double h = 1.0 / static_cast<double>(n + 1);
    const double s = 1.0 / (h * h);
    Mat a = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, i) = -2.0 * s;
        if (i + 1 < n) {
            a(i, i + 1) = s;
            a(i + 1, i) = s;
        }
    }
    return a;
}

inline Mat diagonal_matrix(const std::vector<Complex>& entries) {
    require(!entries.empty(), ErrorKind::InvalidArgument, "diag needs at least one entry");
    const auto n = static_cast<Eigen::Index>(entries.size());
    Mat a = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) a(i, i) = entries[static_cast<std::size_t>(i)];
    return a;
}

/// Upper Jordan block J(lambda) of the given size.
inline Mat jordan_block(Complex lambda, Eigen::Index size) {
    require(size > 0, ErrorKind::InvalidArgument, "jordan size must be positive");
    Mat a = Mat::Zero(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        a(i, i) = lambda;
        if (i + 1 < size) a(i, i + 1) = 1.0;
    }
    return a;
}

/// Deterministic uniform draw in [-1, 1) from a 64-bit engine; avoids the
/// implementation-defined std::uniform_real_distribution.
inline double uniform_pm1(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

inline Vec random_vector(Eigen::Index n, std::mt19937_64& rng) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = uniform_pm1(rng);
        const double im = uniform_pm1(rng);
        v(i) = Complex(re, im);
    }
    return v;
}

/// Normal matrix Q diag(lambda) Q^* with a seeded random unitary Q and
/// eigenvalues in the sector |arg(-lambda)| <= pi/4, modulus in [0.5, 20].
inline Mat random_normal_sectorial(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Mat g(n, n);
    for (Eigen::Index j = 0; j < n; ++j) g.col(j) = random_vector(n, rng);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    Vec lam(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = 0.5 + 19.5 * 0.5 * (uniform_pm1(rng) + 1.0);
        const double phi = 0.25 * kPi * uniform_pm1(rng);
        lam(i) = -std::polar(r, phi);
    }
    return q * lam.asDiagonal() * q.adjoint();
}

// ---------------------------------------------------------------------------
// Resolvent

inline void check_resolvent_point(const OperatorPair& op, Complex mu) {
    const double d = op.distance_to_spectrum(mu);
    if (d <= op.proximity_tolerance()) {
        throw Error(ErrorKind::SingularResolvent,
                    "mu is within " + std::to_string(d) + " of the spectrum");
    }
}

/// Solves (mu - A) x = y.
inline Vec resolvent_solve(const OperatorPair& op, Complex mu, const Vec& y) {
    op.check_dim(y);
    check_resolvent_point(op, mu);
    const auto& a = op.matrix();
    const auto n = op.dim();
    switch (op.structure()) {
    case Structure::diagonal: {
        Vec x(n);
        for (Eigen::Index i = 0; i < n; ++i) x(i) = y(i) / (mu - a(i, i));
        return x;
    }
    case Structure::tridiagonal: {
        std::vector<Complex> sub(static_cast<std::size_t>(n - 1)), diag(static_cast<std::size_t>(n)),
            sup(static_cast<std::size_t>(n - 1));
        for (Eigen::Index i = 0; i < n; ++i) {
            diag[static_cast<std::size_t>(i)] = mu - a(i, i);
            if (i + 1 < n) {
                sub[static_cast<std::size_t>(i)] = -a(i + 1, i);
                sup[static_cast<std::size_t>(i)] = -a(i, i + 1);
            }
        }
        return TridiagonalLU(std::move(sub), std::move(diag), std::move(sup)).solve(y);
    }
    case Structure::dense:
    default: {
        Mat m = -a;
        m.diagonal().array() += mu;
        return m.partialPivLu().solve(y);
    }
    }
}

/// ||(mu - A)^{-1}||_{B(E0)}.
inline double resolvent_norm(const OperatorPair& op, Complex mu) {
    check_resolvent_point(op, mu);
    const auto& a = op.matrix();
    const auto n = op.dim();
    if (op.structure() == Structure::diagonal) {
        double best = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) best = std::max(best, 1.0 / std::abs(mu - a(i, i)));
        return best;
    }
    Mat m = -a;
    m.diagonal().array() += mu;
    if (op.e0_norm() == NormKind::euclidean) {
        Eigen::BDCSVD<Mat> svd(m);
        const double smin = svd.singularValues()(n - 1);
        if (smin == 0.0) throw Error(ErrorKind::SingularResolvent, "mu - A is singular");
        return 1.0 / smin;
    }
    const Mat inv = m.partialPivLu().inverse();
    return inv.cwiseAbs().rowwise().sum().maxCoeff();
}

struct ScanPoint {
    Complex mu;
    double resolvent_norm = 0.0;  // NaN when singular
    bool singular = false;
};

/// Spectrum, spectral bound and (optionally) a resolvent scan with the
/// constant N = max (1+|mu|) ||(mu-A)^{-1}|| over the scanned points.
struct SpectralReport {
    std::vector<Complex> eigenvalues;
    double spectral_bound = 0.0;
    std::vector<ScanPoint> scan;
    double bound_constant = 0.0;
    double half_plane_offset = 0.0;
    /// Diagnostic against 2 M_hat (1 v c1); only set when M_hat was supplied.
    std::optional<double> theorem_bound;
    std::optional<bool> theorem_bound_holds;
};

inline SpectralReport spectrum_and_bound(const OperatorPair& op) {
    SpectralReport r;
    r.eigenvalues = op.eigenvalues();
    r.spectral_bound = op.spectral_bound();
    return r;
}

}  // namespace semilab
