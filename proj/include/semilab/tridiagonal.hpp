#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "semilab/core.hpp"

namespace semilab {

/// LU factorization of a complex tridiagonal matrix with partial pivoting
/// (the gtsv scheme: pivoting introduces one extra superdiagonal).
class TridiagonalLU {
public:
    /// sub[i] = M(i+1, i), diag[i] = M(i, i), sup[i] = M(i, i+1).
    TridiagonalLU(std::vector<Complex> sub, std::vector<Complex> diag, std::vector<Complex> sup)
        : n_(diag.size()), dl_(std::move(sub)), d_(std::move(diag)), du_(std::move(sup)),
          du2_(n_ > 2 ? n_ - 2 : 0, Complex{0.0}), swapped_(n_ > 0 ? n_ - 1 : 0, false) {
        require(dl_.size() + 1 == n_ || n_ == 0, ErrorKind::DimensionMismatch, "tridiagonal sub size");
        require(du_.size() + 1 == n_ || n_ == 0, ErrorKind::DimensionMismatch, "tridiagonal sup size");
        for (std::size_t i = 0; i + 1 < n_; ++i) {
            if (std::abs(d_[i]) >= std::abs(dl_[i])) {
                if (d_[i] == Complex{0.0}) { singular_ = true; continue; }
                const Complex fact = dl_[i] / d_[i];
                dl_[i] = fact;
                d_[i + 1] -= fact * du_[i];
            } else {
                swapped_[i] = true;
                const Complex fact = d_[i] / dl_[i];
                d_[i] = dl_[i];
                dl_[i] = fact;
                const Complex temp = du_[i];
                du_[i] = d_[i + 1];
                d_[i + 1] = temp - fact * d_[i + 1];
                if (i + 2 < n_) {
                    du2_[i] = du_[i + 1];
                    du_[i + 1] = -fact * du_[i + 1];
                }
            }
        }
        for (const auto& v : d_)
            if (v == Complex{0.0}) singular_ = true;
    }

    [[nodiscard]] bool singular() const noexcept { return singular_; }

    [[nodiscard]] Vec solve(const Vec& rhs) const {
        require(static_cast<std::size_t>(rhs.size()) == n_, ErrorKind::DimensionMismatch,
                "tridiagonal rhs size");
        require(!singular_, ErrorKind::SingularResolvent, "singular tridiagonal factor");
        Vec b = rhs;
        for (std::size_t i = 0; i + 1 < n_; ++i) {
            if (swapped_[i]) {
                std::swap(b(i), b(i + 1));
            }
            b(i + 1) -= dl_[i] * b(i);
        }
        const auto n = static_cast<Eigen::Index>(n_);
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            Complex s = b(i);
            if (i + 1 < n) s -= du_[i] * b(i + 1);
            if (i + 2 < n) s -= du2_[i] * b(i + 2);
            b(i) = s / d_[i];
        }
        return b;
    }

private:
    std::size_t n_;
    std::vector<Complex> dl_, d_, du_, du2_;
    std::vector<bool> swapped_;
    bool singular_ = false;
};

}  // namespace semilab
