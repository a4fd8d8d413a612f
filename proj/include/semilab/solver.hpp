#pragma once

// Exact exponential integrator for u' = Au + f, u(0) = x, with f an
// exponential-polynomial (or piecewise polynomial) forcing:
//
//   u(a + s) = e^{sA} u(a) + \int_0^s e^{(s-r)A} f(a + r) dr,
//   \int_0^s e^{(s-r)A} e^{-nu r} r^k dr = e^{-nu s} k! s^{k+1} phi_{k+1}(s(A + nu)).
//
// Operators with a unitary eigenbasis (diagonal, Hermitian) evaluate the
// phi-functions per eigenvalue; other operators use augmented-matrix
// exponentials.

#include <concepts>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "semilab/core.hpp"
#include "semilab/forcing.hpp"
#include "semilab/grid.hpp"
#include "semilab/linop.hpp"
#include "semilab/phi.hpp"
#include "semilab/semigroup.hpp"

namespace semilab {

/// Black-box initial-value solver interface: (f, x) -> u on a grid, or u(T).
template <typename S>
concept IvpSolver = requires(const S& s, const Forcing& f, const Vec& x, const TimeGrid& g, double T) {
    { s.dim() } -> std::convertible_to<Eigen::Index>;
    { s.solve(f, x, g) } -> std::same_as<GridFunction>;
    { s.terminal(f, x, T) } -> std::same_as<Vec>;
};

class ExponentialSolver {
public:
    explicit ExponentialSolver(OperatorPair op)
        : op_(std::move(op)), memo_(std::make_shared<Memo>()) {}

    [[nodiscard]] Eigen::Index dim() const { return op_.dim(); }

    /// u on every node of the grid, with u' = Au + f filled in.
    [[nodiscard]] GridFunction solve(const Forcing& f, const Vec& x, const TimeGrid& grid) const {
        check(f, x);
        const auto& nodes = grid.nodes();
        const auto& edges = grid.edges();
        const int q = grid.nodes_per_panel();
        std::vector<Vec> values(nodes.size());
        std::vector<Vec> derivs(nodes.size());

        State state = to_state(x);
        values[0] = x;
        for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
            const double a = edges[p];
            const double w = edges[p + 1] - a;
            const auto local = f.local_expansion(a, w, q);
            const auto local_state = to_state_terms(local);
            const std::size_t first = grid.edge_index(p);
            State next;
            for (int k = 1; k <= q + 1; ++k) {
                const std::size_t i = first + static_cast<std::size_t>(k);
                // Offsets from the panel start are formed the same way on every
                // panel so equal-width panels share cached exponentials.
                const double s = k == q + 1 ? w : w * grid.rule().nodes[static_cast<std::size_t>(k - 1)];
                State st = step(state, s, local, local_state);
                values[i] = from_state(st);
                if (k == q + 1) next = std::move(st);
            }
            state = std::move(next);
        }
        for (std::size_t i = 0; i < nodes.size(); ++i) derivs[i] = op_.apply(values[i]) + f.at(nodes[i]);
        return GridFunction(grid, std::move(values), std::move(derivs));
    }

    /// u(T) only.
    [[nodiscard]] Vec terminal(const Forcing& f, const Vec& x, double T) const {
        check(f, x);
        require(T > 0.0, ErrorKind::InvalidArgument, "terminal time must be positive");
        std::vector<double> edges{0.0};
        for (double e : f.sample_edges())
            if (e > 0.0 && e < T) edges.push_back(e);
        edges.push_back(T);
        const int q = 8;
        State state = to_state(x);
        for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
            const double w = edges[p + 1] - edges[p];
            const auto local = f.local_expansion(edges[p], w, q);
            state = step(state, w, local, to_state_terms(local));
        }
        return from_state(state);
    }

    [[nodiscard]] const OperatorPair& op() const noexcept { return op_; }

private:
    // In the spectral path State holds eigen-coordinates; otherwise plain coordinates.
    using State = Vec;

    struct Memo {
        std::mutex mutex;
        std::map<std::tuple<double, double, double>, std::pair<Mat, Mat>> blocks;
    };

    void check(const Forcing& f, const Vec& x) const {
        op_.check_dim(x);
        require(f.dim() == op_.dim(), ErrorKind::DimensionMismatch, "forcing dimension differs from operator");
    }

    [[nodiscard]] bool spectral() const { return op_.has_unitary_eigenbasis(); }

    [[nodiscard]] State to_state(const Vec& x) const {
        return spectral() ? Vec(op_.unitary_basis().adjoint() * x) : x;
    }
    [[nodiscard]] Vec from_state(const State& s) const {
        return spectral() ? Vec(op_.unitary_basis() * s) : s;
    }
    [[nodiscard]] std::vector<ExpPolyTerm> to_state_terms(const std::vector<ExpPolyTerm>& terms) const {
        if (!spectral()) return terms;
        std::vector<ExpPolyTerm> out = terms;
        for (auto& t : out)
            for (auto& c : t.coeffs) c = op_.unitary_basis().adjoint() * c;
        return out;
    }

    [[nodiscard]] State step(const State& state, double s, const std::vector<ExpPolyTerm>& local,
                             const std::vector<ExpPolyTerm>& local_state) const {
        return spectral() ? step_spectral(state, s, local_state) : step_dense(state, s, local);
    }

    [[nodiscard]] State step_spectral(const State& state, double s, const std::vector<ExpPolyTerm>& terms) const {
        const Vec& lam = op_.basis_eigenvalues();
        const auto n = lam.size();
        State out(n);
        for (Eigen::Index i = 0; i < n; ++i) out(i) = std::exp(s * lam(i)) * state(i);
        for (const auto& term : terms) {
            const int order = static_cast<int>(term.coeffs.size());
            if (order == 0) continue;
            const Complex damp = std::exp(-term.decay * s);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto phi = phi_functions(s * (lam(i) + term.decay), order);
                Complex acc = 0.0;
                double fact = 1.0;  // k!
                double spow = s;    // s^{k+1}
                for (int k = 0; k < order; ++k) {
                    if (k > 0) fact *= k;
                    acc += (fact * spow) * phi[static_cast<std::size_t>(k + 1)] * term.coeffs[static_cast<std::size_t>(k)](i);
                    spow *= s;
                }
                out(i) += damp * acc;
            }
        }
        return out;
    }

    /// (e^{sA}, \int_0^s e^{(s-r)A} e^{-nu r} dr) from one exponential of
    /// [[sA, sI], [0, -s nu I]]; memoized per (s, nu).
    [[nodiscard]] std::pair<Mat, Mat> blocks(double s, Complex nu) const {
        const auto key = std::make_tuple(s, nu.real(), nu.imag());
        {
            std::lock_guard lock(memo_->mutex);
            if (auto it = memo_->blocks.find(key); it != memo_->blocks.end()) return it->second;
        }
        const auto n = op_.dim();
        Mat big = Mat::Zero(2 * n, 2 * n);
        big.topLeftCorner(n, n) = s * op_.matrix();
        big.topRightCorner(n, n) = s * Mat::Identity(n, n);
        big.bottomRightCorner(n, n).diagonal().setConstant(-s * nu);
        const Mat e = matrix_exponential(big);
        std::pair<Mat, Mat> result{e.topLeftCorner(n, n), e.topRightCorner(n, n)};
        std::lock_guard lock(memo_->mutex);
        if (memo_->blocks.size() > 4096) memo_->blocks.clear();
        memo_->blocks.emplace(key, result);
        return result;
    }

    [[nodiscard]] State step_dense(const State& state, double s, const std::vector<ExpPolyTerm>& terms) const {
        const auto n = op_.dim();
        State out = blocks(s, Complex{0.0}).first * state;
        for (const auto& term : terms) {
            const auto p = static_cast<Eigen::Index>(term.coeffs.size());
            if (p == 0) continue;
            if (p == 1) {
                out += blocks(s, term.decay).second * term.coeffs[0];
                continue;
            }
            // Augmented exponential: top block of exp(s[[B, W], [0, J]]) e_{n+p}
            // equals sum_j s^j phi_j(sB) w_j with W = [w_p .. w_1], J the shift.
            Mat aug = Mat::Zero(n + p, n + p);
            aug.topLeftCorner(n, n) = op_.matrix();
            aug.topLeftCorner(n, n).diagonal().array() += term.decay;
            double fact = 1.0;
            for (Eigen::Index j = 1; j <= p; ++j) {
                if (j > 1) fact *= static_cast<double>(j - 1);
                aug.block(0, n + p - j, n, 1) = fact * term.coeffs[static_cast<std::size_t>(j - 1)];
            }
            for (Eigen::Index j = 0; j + 1 < p; ++j) aug(n + j, n + j + 1) = 1.0;
            const Mat e = matrix_exponential(s * aug);
            out += std::exp(-term.decay * s) * e.block(0, n + p - 1, n, 1);
        }
        return out;
    }

    OperatorPair op_;
    std::shared_ptr<Memo> memo_;
};

static_assert(IvpSolver<ExponentialSolver>);

}  // namespace semilab
