#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "semilab/core.hpp"

namespace semilab {

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) {
        require(n >= 1, ErrorKind::InvalidArgument, "Gauss-Legendre needs n >= 1");
        nodes.resize(static_cast<std::size_t>(n));
        weights.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            // Newton on P_n from the Chebyshev-like initial guess.
            double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
            double dp = 1.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double pn = n == 1 ? x : p1;
                const double pnm1 = n == 1 ? 1.0 : p0;
                dp = n * (x * pn - pnm1) / (x * x - 1.0);
                const double dx = pn / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            // Recompute derivative at the converged node.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
            const auto j = static_cast<std::size_t>(n - 1 - i);  // ascending order
            nodes[j] = 0.5 * (x + 1.0);
            weights[j] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

/// Partition of J = [0, T] into panels, each carrying `nodes_per_panel`
/// Gauss-Legendre nodes. Sample nodes are the panel edges plus the interior
/// Gauss nodes, in increasing order; nodes.front() == 0 and nodes.back() == T.
/// Quadrature weights are zero at panel edges.
class TimeGrid {
public:
    static constexpr int kDefaultPanels = 16;
    static constexpr int kDefaultNodesPerPanel = 8;

    /// Panels on arbitrary sorted edges (edges.front() == 0).
    TimeGrid(std::vector<double> edges, int nodes_per_panel) : edges_(std::move(edges)), q_(nodes_per_panel) {
        require(edges_.size() >= 3, ErrorKind::InvalidArgument, "time grid needs at least 2 panels");
        require(q_ >= 4, ErrorKind::InvalidArgument, "time grid needs at least 4 nodes per panel");
        require(edges_.front() == 0.0, ErrorKind::InvalidArgument, "time grid must start at 0");
        for (std::size_t i = 1; i < edges_.size(); ++i)
            require(edges_[i] > edges_[i - 1], ErrorKind::InvalidArgument, "panel edges must increase");
        build();
    }

    /// Uniform panels of width T/panels.
    static TimeGrid uniform(double T, int panels = kDefaultPanels, int nodes_per_panel = kDefaultNodesPerPanel) {
        return graded(T, panels, nodes_per_panel, 0);
    }

    /// Uniform panels with the first one split geometrically toward t = 0:
    /// [0, h/2^L], [h/2^L, h/2^{L-1}], ..., [h/2, h]. Resolves e^{lambda t}
    /// layers of width 1/|lambda| down to h/2^L.
    static TimeGrid graded(double T, int panels, int nodes_per_panel, int levels) {
        require(T > 0.0 && std::isfinite(T), ErrorKind::InvalidArgument, "T must be positive");
        require(panels >= 2, ErrorKind::InvalidArgument, "time grid needs at least 2 panels");
        require(levels >= 0 && levels < 60, ErrorKind::InvalidArgument, "grading levels out of range");
        const double h = T / panels;
        std::vector<double> edges{0.0};
        for (int k = levels; k >= 1; --k) edges.push_back(std::ldexp(h, -k));
        for (int j = 1; j <= panels; ++j) edges.push_back(j == panels ? T : h * j);
        return TimeGrid(std::move(edges), nodes_per_panel);
    }

    /// Grading depth so that the first panel satisfies stiffness * width <= 4.
    static int grading_levels_for(double T, int panels, double stiffness) {
        const double h = T / panels;
        const double ratio = stiffness * h / 4.0;
        if (!(ratio > 1.0)) return 0;
        return std::min(59, static_cast<int>(std::ceil(std::log2(ratio))));
    }

    [[nodiscard]] double T() const noexcept { return edges_.back(); }
    [[nodiscard]] int panels() const noexcept { return static_cast<int>(edges_.size()) - 1; }
    [[nodiscard]] int nodes_per_panel() const noexcept { return q_; }
    [[nodiscard]] const std::vector<double>& edges() const noexcept { return edges_; }
    [[nodiscard]] const std::vector<double>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] double max_panel_width() const {
        double w = 0.0;
        for (std::size_t i = 1; i < edges_.size(); ++i) w = std::max(w, edges_[i] - edges_[i - 1]);
        return w;
    }

    /// Index of node t_p in nodes() for panel edge p.
    [[nodiscard]] std::size_t edge_index(std::size_t panel_edge) const {
        return panel_edge * static_cast<std::size_t>(q_ + 1);
    }
    /// Panel containing node i (edges belong to the panel they start; T to the last).
    [[nodiscard]] std::size_t panel_of(std::size_t node) const {
        const auto p = node / static_cast<std::size_t>(q_ + 1);
        return std::min<std::size_t>(p, static_cast<std::size_t>(panels() - 1));
    }
    [[nodiscard]] bool is_edge(std::size_t node) const { return node % static_cast<std::size_t>(q_ + 1) == 0; }

    [[nodiscard]] std::optional<std::size_t> find_node(double t) const {
        const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
        if (it != nodes_.end() && *it == t) return static_cast<std::size_t>(it - nodes_.begin());
        return std::nullopt;
    }

    /// Every panel split in two.
    [[nodiscard]] TimeGrid refined() const {
        std::vector<double> e{0.0};
        for (std::size_t i = 1; i < edges_.size(); ++i) {
            e.push_back(0.5 * (edges_[i - 1] + edges_[i]));
            e.push_back(edges_[i]);
        }
        return TimeGrid(std::move(e), q_);
    }

    /// Unit-interval Gauss nodes shared by all panels.
    [[nodiscard]] const GaussLegendre& rule() const noexcept { return rule_; }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) { return a.q_ == b.q_ && a.edges_ == b.edges_; }

private:
    void build() {
        rule_ = GaussLegendre(q_);
        nodes_.clear();
        weights_.clear();
        for (std::size_t p = 0; p + 1 < edges_.size(); ++p) {
            const double a = edges_[p];
            const double w = edges_[p + 1] - a;
            nodes_.push_back(a);
            weights_.push_back(0.0);
            for (int k = 0; k < q_; ++k) {
                nodes_.push_back(a + w * rule_.nodes[static_cast<std::size_t>(k)]);
                weights_.push_back(w * rule_.weights[static_cast<std::size_t>(k)]);
            }
        }
        nodes_.push_back(edges_.back());
        weights_.push_back(0.0);
    }

    std::vector<double> edges_;
    int q_;
    GaussLegendre rule_{4};
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Vector-valued function sampled on a TimeGrid, optionally with derivative samples.
struct GridFunction {
    TimeGrid grid;
    std::vector<Vec> values;
    std::optional<std::vector<Vec>> derivative_values;

    GridFunction(TimeGrid g, std::vector<Vec> v, std::optional<std::vector<Vec>> d = std::nullopt)
        : grid(std::move(g)), values(std::move(v)), derivative_values(std::move(d)) {
        require(values.size() == grid.size(), ErrorKind::DimensionMismatch, "values do not match grid nodes");
        require(!derivative_values || derivative_values->size() == grid.size(), ErrorKind::DimensionMismatch,
                "derivative values do not match grid nodes");
    }

    /// Samples a callable t -> Vec at every node.
    template <typename F>
    static GridFunction sample(const TimeGrid& g, F&& f) {
        std::vector<Vec> v;
        v.reserve(g.size());
        for (double t : g.nodes()) v.push_back(f(t));
        return GridFunction(g, std::move(v));
    }

    [[nodiscard]] Eigen::Index dim() const { return values.empty() ? 0 : values.front().size(); }
};

}  // namespace semilab
