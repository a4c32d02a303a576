#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gfmmd/parallel.hpp"

namespace gfmmd {

/// Undirected weighted edge, canonical form a < b.
struct Edge {
    int a = 0;
    int b = 0;
    double weight = 0.0;
};

/// Sparse undirected graph with nonnegative weights and no self loops.
/// Edges are stored once in canonical (a < b) order, sorted lexicographically,
/// so two graphs with the same edge set compare and serialize identically.
class Graph {
public:
    Graph() = default;

    Graph(int vertex_count, std::vector<Edge> edges) : n_(vertex_count) {
        if (vertex_count < 0) throw std::invalid_argument("Graph: negative vertex count");
        for (auto& e : edges) {
            if (e.a < 0 || e.b < 0 || e.a >= n_ || e.b >= n_)
                throw std::invalid_argument("Graph: edge endpoint out of range");
            if (e.a == e.b) throw std::invalid_argument("Graph: self loops are not allowed");
            if (!(e.weight >= 0.0))
                throw std::invalid_argument("Graph: edge weights must be nonnegative and finite");
            if (!std::isfinite(e.weight))
                throw std::invalid_argument("Graph: edge weights must be finite");
            if (e.a > e.b) std::swap(e.a, e.b);
        }
        // Zero-weight edges carry no coupling; drop them so the edge set,
        // component structure, and Laplacian kernel stay consistent.
        edges.erase(std::remove_if(edges.begin(), edges.end(),
                                   [](const Edge& e) { return e.weight == 0.0; }),
                    edges.end());
        std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
            return std::make_pair(x.a, x.b) < std::make_pair(y.a, y.b);
        });
        for (std::size_t i = 1; i < edges.size(); ++i)
            if (edges[i - 1].a == edges[i].a && edges[i - 1].b == edges[i].b)
                throw std::invalid_argument("Graph: duplicate edge");
        edges_ = std::move(edges);
        adjacency_.assign(n_, {});
        for (const auto& e : edges_) {
            adjacency_[e.a].emplace_back(e.b, e.weight);
            adjacency_[e.b].emplace_back(e.a, e.weight);
        }
    }

    int vertex_count() const { return n_; }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Neighbor list (vertex, weight) of v; sorted by vertex index.
    const std::vector<std::pair<int, double>>& neighbors(int v) const {
        return adjacency_.at(static_cast<std::size_t>(v));
    }

    Eigen::VectorXd degrees() const {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(n_);
        for (const auto& e : edges_) {
            d[e.a] += e.weight;
            d[e.b] += e.weight;
        }
        return d;
    }

    Eigen::SparseMatrix<double> adjacency_matrix() const {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(2 * edges_.size());
        for (const auto& e : edges_) {
            trip.emplace_back(e.a, e.b, e.weight);
            trip.emplace_back(e.b, e.a, e.weight);
        }
        Eigen::SparseMatrix<double> a(n_, n_);
        a.setFromTriplets(trip.begin(), trip.end());
        return a;
    }

    /// Same topology with every weight multiplied by c > 0.
    Graph scaled(double c) const {
        if (!(c > 0.0)) throw std::invalid_argument("Graph::scaled: factor must be positive");
        std::vector<Edge> scaled_edges = edges_;
        for (auto& e : scaled_edges) e.weight *= c;
        return Graph(n_, std::move(scaled_edges));
    }

private:
    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, double>>> adjacency_;
};

/// Combinatorial Laplacian L = D - A together with the degree vector.
struct LaplacianMatrix {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd degrees;

    int size() const { return static_cast<int>(degrees.size()); }
};

/// Partition of the vertices into connected components. Component labels are
/// assigned in order of the lowest vertex index they contain.
struct ComponentLabeling {
    std::vector<int> labels;
    int count = 0;
    std::vector<std::vector<int>> members;
};

inline double gaussian_kernel(double distance, double sigma) {
    if (distance == 0.0) return 1.0;
    if (sigma == 0.0) return 0.0;
    return std::exp(-(distance * distance) / (sigma * sigma));
}

/// Symmetric per-point bandwidth kernel: the mean of two Gaussians whose
/// bandwidths come from each endpoint's local neighbor distance.
inline double adaptive_kernel(double distance, double sigma_a, double sigma_b) {
    if (distance == 0.0) return 1.0;
    auto half = [distance](double sigma) {
        return sigma == 0.0 ? 0.0 : std::exp(-(distance * distance) / (sigma * sigma));
    };
    return 0.5 * (half(sigma_a) + half(sigma_b));
}

/// Affinity kernel choice for k-NN graph construction.
class KernelSpec {
public:
    enum class Kind { gaussian, adaptive_gaussian };

    static KernelSpec gaussian(double sigma) {
        if (!(sigma > 0.0)) throw std::invalid_argument("KernelSpec: sigma must be positive");
        KernelSpec k;
        k.kind_ = Kind::gaussian;
        k.sigma_ = sigma;
        return k;
    }

    static KernelSpec adaptive_gaussian(int bandwidth_neighbors = 5) {
        if (bandwidth_neighbors < 1)
            throw std::invalid_argument("KernelSpec: bandwidth neighbor count must be >= 1");
        KernelSpec k;
        k.kind_ = Kind::adaptive_gaussian;
        k.k_bw_ = bandwidth_neighbors;
        return k;
    }

    Kind kind() const { return kind_; }
    double sigma() const { return sigma_; }
    int bandwidth_neighbors() const { return k_bw_; }

private:
    Kind kind_ = Kind::gaussian;
    double sigma_ = 1.0;
    int k_bw_ = 5;
};

namespace detail {

struct NeighborHit {
    double dist2;
    int index;
    bool operator<(const NeighborHit& o) const {
        return dist2 != o.dist2 ? dist2 < o.dist2 : index < o.index;
    }
};

// k smallest (distance, index) pairs from point i to all other rows; ties
// broken by index so the result is independent of evaluation order.
inline std::vector<NeighborHit> nearest_neighbors(const Eigen::MatrixXd& points, int i, int k) {
    const int n = static_cast<int>(points.rows());
    std::vector<NeighborHit> hits;
    hits.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        hits.push_back({(points.row(i) - points.row(j)).squaredNorm(), j});
    }
    const int keep = std::min<int>(k, static_cast<int>(hits.size()));
    std::partial_sort(hits.begin(), hits.begin() + keep, hits.end());
    hits.resize(keep);
    return hits;
}

}  // namespace detail

/// Builds a k-nearest-neighbor affinity graph over the rows of `points`.
/// Edge (a,b) exists iff b is among a's k_nn nearest points or vice versa
/// (union symmetrization); the weight is the kernel value of the Euclidean
/// distance. Coincident points get weight 1.
inline Graph build_knn_graph(const Eigen::MatrixXd& points, int k_nn, const KernelSpec& kernel) {
    const int n = static_cast<int>(points.rows());
    if (n < 2) throw std::invalid_argument("build_knn_graph: need at least 2 points");
    if (k_nn < 1 || k_nn >= n)
        throw std::invalid_argument("build_knn_graph: require 1 <= k_nn < point count");
    if (!points.allFinite())
        throw std::invalid_argument("build_knn_graph: point coordinates must be finite");

    const bool adaptive = kernel.kind() == KernelSpec::Kind::adaptive_gaussian;
    const int k_query = adaptive ? std::max(k_nn, kernel.bandwidth_neighbors()) : k_nn;
    if (adaptive && kernel.bandwidth_neighbors() > n - 1)
        throw std::invalid_argument("build_knn_graph: bandwidth neighbor count exceeds point count - 1");

    std::vector<std::vector<detail::NeighborHit>> hits(n);
    detail::parallel_for(0, n, [&](int i) {
        hits[i] = detail::nearest_neighbors(points, i, k_query);
    });

    std::vector<double> bandwidth(n, 0.0);
    if (adaptive) {
        for (int i = 0; i < n; ++i)
            bandwidth[i] = std::sqrt(hits[i][kernel.bandwidth_neighbors() - 1].dist2);
    }

    // Union symmetrization over the directed k_nn picks.
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n) * k_nn);
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < k_nn; ++r) {
            const auto& h = hits[i][static_cast<std::size_t>(r)];
            const int a = std::min(i, h.index);
            const int b = std::max(i, h.index);
            const double d = std::sqrt(h.dist2);
            const double w = adaptive ? adaptive_kernel(d, bandwidth[a], bandwidth[b])
                                      : gaussian_kernel(d, kernel.sigma());
            edges.push_back({a, b, w});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
        return std::make_pair(x.a, x.b) < std::make_pair(y.a, y.b);
    });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const Edge& x, const Edge& y) {
                                return x.a == y.a && x.b == y.b;
                            }),
                edges.end());
    return Graph(n, std::move(edges));
}

inline LaplacianMatrix laplacian(const Graph& g) {
    const int n = g.vertex_count();
    LaplacianMatrix lap;
    lap.degrees = g.degrees();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * g.edges().size() + static_cast<std::size_t>(n));
    for (const auto& e : g.edges()) {
        trip.emplace_back(e.a, e.b, -e.weight);
        trip.emplace_back(e.b, e.a, -e.weight);
    }
    for (int v = 0; v < n; ++v) trip.emplace_back(v, v, lap.degrees[v]);
    lap.matrix.resize(n, n);
    lap.matrix.setFromTriplets(trip.begin(), trip.end());
    return lap;
}

/// BFS labeling; the component containing the lowest unvisited vertex index
/// gets the next label, so the labeling is deterministic.
inline ComponentLabeling connected_components(const Graph& g) {
    const int n = g.vertex_count();
    ComponentLabeling out;
    out.labels.assign(n, -1);
    for (int start = 0; start < n; ++start) {
        if (out.labels[start] != -1) continue;
        const int label = out.count++;
        out.members.emplace_back();
        std::deque<int> queue{start};
        out.labels[start] = label;
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            out.members[label].push_back(v);
            for (const auto& [u, w] : g.neighbors(v)) {
                (void)w;
                if (out.labels[u] == -1) {
                    out.labels[u] = label;
                    queue.push_back(u);
                }
            }
        }
        std::sort(out.members[label].begin(), out.members[label].end());
    }
    return out;
}

/// 4-neighbor lattice with unit weights; vertex (i, j) sits at index i*cols+j.
inline Graph grid_graph(int rows, int cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("grid_graph: rows, cols must be >= 1");
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(2 * rows * cols));
    auto at = [cols](int i, int j) { return i * cols + j; };
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (j + 1 < cols) edges.push_back({at(i, j), at(i, j + 1), 1.0});
            if (i + 1 < rows) edges.push_back({at(i, j), at(i + 1, j), 1.0});
        }
    }
    return Graph(rows * cols, std::move(edges));
}

/// Uniform distribution over the vertices within `hops` BFS steps of v.
inline Eigen::VectorXd hop_distribution(const Graph& g, int vertex, int hops) {
    const int n = g.vertex_count();
    if (vertex < 0 || vertex >= n) throw std::invalid_argument("hop_distribution: vertex out of range");
    if (hops < 0) throw std::invalid_argument("hop_distribution: hops must be >= 0");
    std::vector<int> depth(n, -1);
    std::deque<int> queue{vertex};
    depth[vertex] = 0;
    int reached = 1;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        if (depth[v] == hops) continue;
        for (const auto& [u, w] : g.neighbors(v)) {
            (void)w;
            if (depth[u] == -1) {
                depth[u] = depth[v] + 1;
                ++reached;
                queue.push_back(u);
            }
        }
    }
    Eigen::VectorXd dist = Eigen::VectorXd::Zero(n);
    const double mass = 1.0 / reached;
    for (int v = 0; v < n; ++v)
        if (depth[v] != -1) dist[v] = mass;
    return dist;
}

}  // namespace gfmmd
