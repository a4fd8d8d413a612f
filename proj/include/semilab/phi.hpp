#pragma once

// Scalar exponential-integrator functions
//   phi_0(z) = e^z,   phi_{k+1}(z) = (phi_k(z) - 1/k!) / z,
// i.e. phi_k(z) = sum_j z^j / (j+k)!.

#include <array>
#include <cmath>

#include "semilab/core.hpp"

namespace semilab {

/// e^z - 1 without cancellation for small |z|.
inline Complex expm1(Complex z) {
    const double x = z.real();
    const double y = z.imag();
    const double em1 = std::expm1(x);
    const double s = std::sin(0.5 * y);
    // cos(y) - 1 = -2 sin^2(y/2)
    const double re = em1 * std::cos(y) - 2.0 * s * s;
    const double im = std::exp(x) * std::sin(y);
    return {re, im};
}

inline constexpr int kMaxPhiOrder = 16;

/// phi_1 .. phi_order evaluated at z; out[k] = phi_k(z), out[0] = e^z.
/// Taylor series inside |z| <= 4 (cancellation bounded by e^4), upward
/// recurrence outside where each step loses at most a factor (k+1)/|z|.
inline std::array<Complex, kMaxPhiOrder + 1> phi_functions(Complex z, int order) {
    require(order >= 0 && order <= kMaxPhiOrder, ErrorKind::InvalidArgument,
            "phi order out of range");
    std::array<Complex, kMaxPhiOrder + 1> out{};
    out[0] = std::exp(z);
    if (order == 0) return out;

    if (std::abs(z) <= 4.0) {
        // sum_j z^j/(j+k)! for each k; 60 terms reach 4^60/60! < 1e-45.
        for (int k = 1; k <= order; ++k) {
            double inv_fact = 1.0;
            for (int i = 2; i <= k; ++i) inv_fact /= i;
            Complex term = inv_fact;
            Complex sum = term;
            for (int j = 1; j < 60; ++j) {
                term *= z / static_cast<double>(j + k);
                sum += term;
                if (std::abs(term) < 1e-18 * std::abs(sum)) break;
            }
            out[k] = sum;
        }
        return out;
    }

    out[1] = expm1(z) / z;
    double inv_fact = 1.0;  // 1/k!
    for (int k = 1; k < order; ++k) {
        inv_fact /= k;
        out[k + 1] = (out[k] - inv_fact) / z;
    }
    return out;
}

inline Complex phi1(Complex z) { return phi_functions(z, 1)[1]; }

}  // namespace semilab
