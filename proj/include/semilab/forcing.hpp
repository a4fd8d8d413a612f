#pragma once

#include <algorithm>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/LU>

#include "semilab/core.hpp"
#include "semilab/grid.hpp"

namespace semilab {

/// e^{-decay t} * sum_k coeffs[k] t^k.
struct ExpPolyTerm {
    Complex decay{0.0};
    std::vector<Vec> coeffs;
};

/// Right-hand side f of u' - Au = f, kept in closed form where possible so the
/// exponential integrator can treat it exactly. Sampled data is carried as a
/// piecewise polynomial through the Gauss nodes of each panel.
class Forcing {
public:
    explicit Forcing(Eigen::Index dim) : dim_(dim) {}

    static Forcing zero(Eigen::Index dim) { return Forcing(dim); }

    /// f(t) = e^{-decay t} y.
    static Forcing exponential(Complex decay, const Vec& y) {
        Forcing f(y.size());
        f.terms_.push_back({decay, {y}});
        return f;
    }

    /// f(t) = (sum_k c_k t^k) y.
    static Forcing polynomial(const std::vector<Complex>& c, const Vec& y) {
        Forcing f(y.size());
        ExpPolyTerm term;
        for (const auto& ck : c) term.coeffs.push_back(ck * y);
        if (!term.coeffs.empty()) f.terms_.push_back(std::move(term));
        return f;
    }

    /// f given by samples on a grid (values at Gauss nodes are interpolated).
    static Forcing samples(const GridFunction& g) {
        Forcing f(g.dim());
        f.samples_.push_back({Complex{1.0}, std::make_shared<const GridFunction>(g)});
        return f;
    }

    [[nodiscard]] Eigen::Index dim() const noexcept { return dim_; }
    [[nodiscard]] const std::vector<ExpPolyTerm>& terms() const noexcept { return terms_; }
    [[nodiscard]] bool has_samples() const noexcept { return !samples_.empty(); }
    [[nodiscard]] bool is_zero() const noexcept { return terms_.empty() && samples_.empty(); }

    /// Panel edges of the sampled parts (empty if purely closed-form).
    [[nodiscard]] std::vector<double> sample_edges() const {
        std::vector<double> e;
        for (const auto& s : samples_) e.insert(e.end(), s.data->grid.edges().begin(), s.data->grid.edges().end());
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end()), e.end());
        return e;
    }

    Forcing& operator+=(const Forcing& o) {
        require(o.dim_ == dim_, ErrorKind::DimensionMismatch, "forcing dimensions differ");
        terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
        samples_.insert(samples_.end(), o.samples_.begin(), o.samples_.end());
        return *this;
    }
    friend Forcing operator+(Forcing a, const Forcing& b) { return a += b; }

    friend Forcing operator*(Complex c, Forcing f) {
        for (auto& t : f.terms_)
            for (auto& v : t.coeffs) v *= c;
        for (auto& s : f.samples_) s.factor *= c;
        return f;
    }

    [[nodiscard]] Vec at(double t) const {
        Vec out = Vec::Zero(dim_);
        for (const auto& term : terms_) {
            Vec p = Vec::Zero(dim_);
            for (auto k = term.coeffs.size(); k-- > 0;) p = p * t + term.coeffs[k];
            out += std::exp(-term.decay * t) * p;
        }
        for (const auto& s : samples_) out += s.factor * interpolate(*s.data, t);
        return out;
    }

    [[nodiscard]] GridFunction sample(const TimeGrid& g) const {
        return GridFunction::sample(g, [this](double t) { return at(t); });
    }

    /// Restatement of f on [a, a + width] in the local variable r = t - a:
    /// a list of (decay, coefficient vectors of r^k). Closed-form terms are
    /// re-centred exactly; sampled parts become the degree q-1 interpolant
    /// through the q Gauss nodes of the panel.
    [[nodiscard]] std::vector<ExpPolyTerm> local_expansion(double a, double width, int q) const {
        std::vector<ExpPolyTerm> out;
        for (const auto& term : terms_) {
            ExpPolyTerm local;
            local.decay = term.decay;
            const Complex scale = std::exp(-term.decay * a);
            const auto deg = term.coeffs.size();
            local.coeffs.assign(deg, Vec::Zero(dim_));
            // sum_k c_k (a + r)^k = sum_j r^j sum_{k>=j} c_k C(k,j) a^{k-j}
            for (std::size_t k = 0; k < deg; ++k) {
                double binom = 1.0;
                for (std::size_t j = 0; j <= k; ++j) {
                    const double apow = std::pow(a, static_cast<double>(k - j));
                    local.coeffs[j] += (scale * (binom * apow)) * term.coeffs[k];
                    binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
                }
            }
            out.push_back(std::move(local));
        }
        if (!samples_.empty()) {
            const GaussLegendre rule(q);
            Eigen::MatrixXd vander(q, q);
            for (int i = 0; i < q; ++i)
                for (int k = 0; k < q; ++k)
                    vander(i, k) = std::pow(rule.nodes[static_cast<std::size_t>(i)], static_cast<double>(k));
            const Eigen::PartialPivLU<Eigen::MatrixXd> lu(vander);
            Mat rhs(q, dim_);
            for (int i = 0; i < q; ++i) {
                Vec fi = Vec::Zero(dim_);
                const double t = a + width * rule.nodes[static_cast<std::size_t>(i)];
                for (const auto& s : samples_) fi += s.factor * interpolate(*s.data, t);
                rhs.row(i) = fi.transpose();
            }
            const Mat c = lu.solve(rhs.real()).cast<Complex>() +
                          Complex(0.0, 1.0) * lu.solve(rhs.imag()).cast<Complex>();
            ExpPolyTerm local;
            for (int k = 0; k < q; ++k) local.coeffs.push_back(c.row(k).transpose() / std::pow(width, k));
            out.push_back(std::move(local));
        }
        return out;
    }

    /// Barycentric interpolation through the Gauss nodes of the panel holding t.
    static Vec interpolate(const GridFunction& g, double t) {
        const auto& grid = g.grid;
        const auto& edges = grid.edges();
        auto it = std::upper_bound(edges.begin(), edges.end(), t);
        std::size_t p = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
        p = std::min<std::size_t>(p, static_cast<std::size_t>(grid.panels() - 1));
        const int q = grid.nodes_per_panel();
        const std::size_t first = grid.edge_index(p) + 1;
        const auto& nodes = grid.nodes();
        std::vector<double> w(static_cast<std::size_t>(q), 1.0);
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j)
                if (i != j) w[static_cast<std::size_t>(i)] /= nodes[first + i] - nodes[first + j];
        Vec num = Vec::Zero(g.dim());
        double den = 0.0;
        for (int i = 0; i < q; ++i) {
            const double d = t - nodes[first + i];
            if (d == 0.0) return g.values[first + i];
            const double c = w[static_cast<std::size_t>(i)] / d;
            num += c * g.values[first + i];
            den += c;
        }
        return num / den;
    }

private:
    struct SampledPart {
        Complex factor{1.0};
        std::shared_ptr<const GridFunction> data;
    };

    Eigen::Index dim_;
    std::vector<ExpPolyTerm> terms_;
    std::vector<SampledPart> samples_;
};

}  // namespace semilab
