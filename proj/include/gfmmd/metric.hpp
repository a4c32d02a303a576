#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfmmd/graph.hpp"
#include "gfmmd/parallel.hpp"
#include "gfmmd/spectral.hpp"

namespace gfmmd {

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultMassTolerance = 1e-9;

/// Column-stochastic signal matrix: one distribution per labeled column.
struct SignalMatrix {
    Eigen::MatrixXd values;  // n x m
    std::vector<std::string> labels;
    bool normalized = false;

    int vertex_count() const { return static_cast<int>(values.rows()); }
    int signal_count() const { return static_cast<int>(values.cols()); }
};

namespace detail {

inline std::vector<std::string> default_labels(int count) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) labels.push_back("signal_" + std::to_string(i));
    return labels;
}

inline void check_unique_labels(const std::vector<std::string>& labels) {
    std::vector<std::string> sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("signal labels must be unique");
}

}  // namespace detail

/// Divides each column by its sum. Negative entries and all-zero columns
/// are rejected; the error names the offending column.
inline SignalMatrix normalize_signals(Eigen::MatrixXd raw, std::vector<std::string> labels = {}) {
    const int m = static_cast<int>(raw.cols());
    if (labels.empty()) labels = detail::default_labels(m);
    if (static_cast<int>(labels.size()) != m)
        throw std::invalid_argument("normalize_signals: label count does not match column count");
    detail::check_unique_labels(labels);
    for (int j = 0; j < m; ++j) {
        if ((raw.col(j).array() < 0.0).any())
            throw std::invalid_argument("normalize_signals: negative entry in column '" + labels[j] + "'");
        const double sum = raw.col(j).sum();
        if (!(sum > 0.0))
            throw std::invalid_argument("normalize_signals: column '" + labels[j] + "' sums to zero");
        raw.col(j) /= sum;
    }
    return SignalMatrix{std::move(raw), std::move(labels), true};
}

/// Feature vectors E_i (rows) whose Euclidean distances realize the metric.
struct EmbeddingMatrix {
    Eigen::MatrixXd features;  // m x n
    std::vector<std::string> labels;
    std::string provenance;

    int signal_count() const { return static_cast<int>(features.rows()); }
};

/// Symmetric distance matrix; entries may be +inf for unequal component mass.
struct DistanceMatrix {
    Eigen::MatrixXd values;  // m x m
    std::vector<std::string> labels;
};

struct ExactEngineOptions {
    double rank_tolerance = 1e-9;
    int dense_limit = kDenseEigenLimit;
    double mass_tolerance = kDefaultMassTolerance;
};

struct ChebyshevEngineOptions {
    int order = 512;
    double epsilon_scale = 1e-6;  // epsilon = epsilon_scale * lambda_max estimate
    double mass_tolerance = kDefaultMassTolerance;
};

/// Binds a graph to one of the two filtering paths (exact spectral or
/// Chebyshev) and owns the shared precomputed state. Immutable after
/// construction; safe to share across threads.
class Engine {
public:
    using ExactOptions = ExactEngineOptions;
    using ChebyshevOptions = ChebyshevEngineOptions;

    static Engine exact(Graph graph, ExactOptions options = {}) {
        Engine e(std::move(graph), options.mass_tolerance);
        e.decomposition_ =
            eigendecompose(e.laplacian_, options.rank_tolerance, options.dense_limit);
        e.lambda_max_ = std::max(e.decomposition_->lambda_max(), 0.0);
        e.provenance_ = "exact";
        return e;
    }

    static Engine chebyshev(Graph graph, ChebyshevOptions options = {}) {
        if (options.order < 1) throw std::invalid_argument("Engine: Chebyshev order must be >= 1");
        if (!(options.epsilon_scale > 0.0))
            throw std::invalid_argument("Engine: epsilon scale must be positive");
        Engine e(std::move(graph), options.mass_tolerance);
        e.lambda_max_ = estimate_lambda_max(e.laplacian_);
        e.cheby_order_ = options.order;
        e.cheby_epsilon_ = options.epsilon_scale * e.lambda_max_;
        if (e.lambda_max_ > 0.0) {
            e.inverse_sqrt_fit_ = chebyshev_fit(FilterSpec::inverse_sqrt(e.cheby_epsilon_),
                                                e.lambda_max_, options.order);
        }
        e.provenance_ = "chebyshev(order=" + std::to_string(options.order) +
                        ",epsilon=" + std::to_string(options.epsilon_scale) + "*lambda_max)";
        return e;
    }

    const Graph& graph() const { return graph_; }
    const LaplacianMatrix& laplacian() const { return laplacian_; }
    const ComponentLabeling& components() const { return components_; }
    double mass_tolerance() const { return mass_tolerance_; }
    double lambda_max() const { return lambda_max_; }
    bool is_exact() const { return decomposition_.has_value(); }
    const std::string& provenance() const { return provenance_; }

    const SpectralDecomposition& decomposition() const {
        if (!decomposition_)
            throw std::runtime_error("Engine: spectral decomposition is only available on the exact path");
        return *decomposition_;
    }

    /// Subtracts the per-component mean from every column (projection onto
    /// the orthogonal complement of the Laplacian kernel).
    Eigen::MatrixXd center_per_component(Eigen::MatrixXd signals) const {
        for (const auto& members : components_.members) {
            for (int j = 0; j < signals.cols(); ++j) {
                double mean = 0.0;
                for (int v : members) mean += signals(v, j);
                mean /= static_cast<double>(members.size());
                for (int v : members) signals(v, j) -= mean;
            }
        }
        return signals;
    }

    /// The feature map: center per component, then apply the inverse square
    /// root filter on the configured path.
    Eigen::MatrixXd feature_map(const Eigen::MatrixXd& signals) const {
        Eigen::MatrixXd centered = center_per_component(signals);
        if (is_exact())
            return apply_filter_exact(*decomposition_, FilterSpec::inverse_sqrt(0.0), centered);
        if (lambda_max_ == 0.0) return Eigen::MatrixXd::Zero(signals.rows(), signals.cols());
        return apply_filter_chebyshev(laplacian_, inverse_sqrt_fit_, centered);
    }

    /// Heat semigroup e^{-tau L} applied to the columns.
    Eigen::MatrixXd apply_heat(double tau, const Eigen::MatrixXd& signals) const {
        const FilterSpec heat = FilterSpec::heat(tau);
        if (is_exact()) return apply_filter_exact(*decomposition_, heat, signals);
        if (lambda_max_ == 0.0) return signals;
        // Order 50 resolves e^{-tau lambda} to machine precision for the tau
        // scales of interest; larger configured orders are used as-is.
        const int order = std::max(cheby_order_, 50);
        return apply_filter_chebyshev(laplacian_, chebyshev_fit(heat, lambda_max_, order), signals);
    }

private:
    Engine(Graph graph, double mass_tolerance)
        : graph_(std::move(graph)),
          laplacian_(::gfmmd::laplacian(graph_)),
          components_(connected_components(graph_)),
          mass_tolerance_(mass_tolerance) {
        if (!(mass_tolerance_ >= 0.0))
            throw std::invalid_argument("Engine: mass tolerance must be >= 0");
    }

    Graph graph_;
    LaplacianMatrix laplacian_;
    ComponentLabeling components_;
    double mass_tolerance_ = kDefaultMassTolerance;
    double lambda_max_ = 0.0;
    std::optional<SpectralDecomposition> decomposition_;
    int cheby_order_ = 0;
    double cheby_epsilon_ = 0.0;
    ChebyshevFilter inverse_sqrt_fit_;
    std::string provenance_;
};

/// Largest absolute difference of per-component masses between two columns.
inline double component_mass_gap(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                                 const ComponentLabeling& components) {
    if (p.size() != q.size() ||
        static_cast<std::size_t>(p.size()) != components.labels.size())
        throw std::invalid_argument("component_mass_gap: dimension mismatch");
    double gap = 0.0;
    for (const auto& members : components.members) {
        double diff = 0.0;
        for (int v : members) diff += p[v] - q[v];
        gap = std::max(gap, std::abs(diff));
    }
    return gap;
}

/// Per-component column masses, one row per component.
inline Eigen::MatrixXd component_masses(const Eigen::MatrixXd& signals,
                                        const ComponentLabeling& components) {
    Eigen::MatrixXd masses = Eigen::MatrixXd::Zero(components.count, signals.cols());
    for (int c = 0; c < components.count; ++c)
        for (int v : components.members[static_cast<std::size_t>(c)])
            masses.row(c) += signals.row(v);
    return masses;
}

/// Seminorm distance ||L^{-1/2}(f - g)|| for arbitrary signals; no
/// normalization requirement and no infinite-distance rule. Mass that
/// differs across components is simply projected out.
inline double signal_distance(const Engine& engine, const Eigen::VectorXd& f,
                              const Eigen::VectorXd& g) {
    if (f.size() != g.size() || f.size() != engine.graph().vertex_count())
        throw std::invalid_argument("signal_distance: dimension mismatch");
    return engine.feature_map(f - g).norm();
}

/// The metric: +inf when component masses differ beyond the engine's mass
/// tolerance, otherwise ||L^{-1/2}(P - Q)||.
inline double gfmmd(const Engine& engine, const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    if (p.size() != q.size() || p.size() != engine.graph().vertex_count())
        throw std::invalid_argument("gfmmd: dimension mismatch");
    if (component_mass_gap(p, q, engine.components()) > engine.mass_tolerance())
        return kInfiniteDistance;
    return engine.feature_map(p - q).norm();
}

/// Applies the feature map to all columns; row i of the result is E_i.
inline EmbeddingMatrix embed(const Engine& engine, const SignalMatrix& signals) {
    if (!signals.normalized)
        throw std::invalid_argument("embed: signals must be normalized first");
    if (signals.vertex_count() != engine.graph().vertex_count())
        throw std::invalid_argument("embed: signal rows do not match graph vertex count");
    EmbeddingMatrix out;
    out.features = engine.feature_map(signals.values).transpose();
    out.labels = signals.labels;
    out.provenance = engine.provenance();
    return out;
}

/// All pairwise embedding distances, with +inf where the component-mass gap
/// exceeds the tolerance. `masses` is the component_masses() matrix of the
/// embedded signals.
inline DistanceMatrix pairwise_distances(const EmbeddingMatrix& embedding,
                                         const Eigen::MatrixXd& masses,
                                         double mass_tolerance = kDefaultMassTolerance) {
    const int m = embedding.signal_count();
    if (masses.cols() != m)
        throw std::invalid_argument("pairwise_distances: mass matrix columns do not match signals");
    DistanceMatrix out;
    out.labels = embedding.labels;
    out.values = Eigen::MatrixXd::Zero(m, m);
    detail::parallel_for(0, m, [&](int i) {
        for (int j = i + 1; j < m; ++j) {
            const double gap = (masses.col(i) - masses.col(j)).cwiseAbs().maxCoeff();
            out.values(i, j) = gap > mass_tolerance
                                   ? kInfiniteDistance
                                   : (embedding.features.row(i) - embedding.features.row(j)).norm();
        }
    });
    // mirror the upper triangle
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < i; ++j) out.values(i, j) = out.values(j, i);
    return out;
}

inline Eigen::VectorXd uniform_distribution(int n) {
    return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
}

/// Distance to the uniform distribution; high means concentrated.
inline double localization_score(const Engine& engine, const Eigen::VectorXd& p) {
    return gfmmd(engine, p, uniform_distribution(engine.graph().vertex_count()));
}

/// The maximizer of the expectation gap over unit-smoothness functions:
/// f* = L^dagger (P - Q) / ||L^{-1/2}(P - Q)||. Exact path only.
inline Eigen::VectorXd witness_function(const Engine& engine, const Eigen::VectorXd& p,
                                        const Eigen::VectorXd& q) {
    const auto& dec = engine.decomposition();
    const double distance = gfmmd(engine, p, q);
    if (std::isinf(distance))
        throw std::invalid_argument("witness_function: distributions with unequal component mass "
                                    "have no witness (distance is infinite)");
    if (distance == 0.0)
        throw std::invalid_argument("witness_function: witness is undefined for P = Q");
    const Eigen::VectorXd centered = engine.center_per_component(p - q);
    const int n = dec.size();
    Eigen::VectorXd spectral = dec.eigenvectors.transpose() * centered;
    for (int i = 0; i < n; ++i)
        spectral[i] = dec.eigenvalues[i] == 0.0 ? 0.0 : spectral[i] / dec.eigenvalues[i];
    return (dec.eigenvectors * spectral) / distance;
}

/// Squared feature-map distance of the two Dirac signals; +inf across
/// components.
inline double effective_resistance(const Engine& engine, int a, int b) {
    const int n = engine.graph().vertex_count();
    if (a < 0 || a >= n || b < 0 || b >= n)
        throw std::invalid_argument("effective_resistance: vertex out of range");
    if (a == b) return 0.0;
    if (engine.components().labels[static_cast<std::size_t>(a)] !=
        engine.components().labels[static_cast<std::size_t>(b)])
        return kInfiniteDistance;
    Eigen::VectorXd diff = Eigen::VectorXd::Zero(n);
    diff[a] = 1.0;
    diff[b] = -1.0;
    const double d = engine.feature_map(diff).norm();
    return d * d;
}

/// Checks the coupling inequality: GFMMD(P,Q)^2 <= E[Re(X,Y)] for any joint
/// distribution of (X, Y) with marginals P and Q. Returns (lhs, rhs).
inline std::pair<double, double> coupling_bound_check(const Engine& engine,
                                                      const Eigen::VectorXd& p,
                                                      const Eigen::VectorXd& q,
                                                      const Eigen::MatrixXd& coupling) {
    const int n = engine.graph().vertex_count();
    if (coupling.rows() != n || coupling.cols() != n)
        throw std::invalid_argument("coupling_bound_check: coupling must be n x n");
    constexpr double marginal_tol = 1e-9;
    if (((coupling.rowwise().sum() - p).cwiseAbs().maxCoeff() > marginal_tol) ||
        ((coupling.colwise().sum().transpose() - q).cwiseAbs().maxCoeff() > marginal_tol))
        throw std::invalid_argument("coupling_bound_check: coupling marginals do not match P and Q");

    const double distance = gfmmd(engine, p, q);
    const double lhs = std::isinf(distance) ? kInfiniteDistance : distance * distance;

    // E[Re(X,Y)] from the pseudoinverse: Re(a,b) = Ldag_aa + Ldag_bb - 2 Ldag_ab.
    const auto& dec = engine.decomposition();
    Eigen::VectorXd inv = dec.eigenvalues;
    for (int i = 0; i < inv.size(); ++i) inv[i] = inv[i] == 0.0 ? 0.0 : 1.0 / inv[i];
    const Eigen::MatrixXd pinv =
        dec.eigenvectors * inv.asDiagonal() * dec.eigenvectors.transpose();
    const auto& labels = engine.components().labels;
    double rhs = 0.0;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const double mass = coupling(a, b);
            if (mass == 0.0 || a == b) continue;
            if (labels[static_cast<std::size_t>(a)] != labels[static_cast<std::size_t>(b)])
                return {lhs, kInfiniteDistance};
            rhs += mass * (pinv(a, a) + pinv(b, b) - 2.0 * pinv(a, b));
        }
    }
    return {lhs, rhs};
}

/// Fiedler-value upper bound sqrt(2 (1 - p) / lambda_2), where p is the mass
/// P puts on the set where P and Q agree entrywise. Returns (gfmmd, bound).
/// 1 - p is accumulated directly over the disagreement set so that P = Q
/// yields an exactly zero bound.
inline std::pair<double, double> fiedler_bound_check(const Engine& engine,
                                                     const Eigen::VectorXd& p,
                                                     const Eigen::VectorXd& q) {
    if (engine.components().count != 1)
        throw std::invalid_argument("fiedler_bound_check: graph must be connected");
    const auto& dec = engine.decomposition();
    constexpr double agreement_tol = 1e-12;
    double disagreed_mass = 0.0;
    for (int v = 0; v < p.size(); ++v)
        if (std::abs(p[v] - q[v]) > agreement_tol) disagreed_mass += p[v];
    const double distance = gfmmd(engine, p, q);
    const double bound = std::sqrt(2.0 * disagreed_mass / dec.lambda_2());
    return {distance, bound};
}

/// Unbiased two-sample kernel MMD^2 estimator with the Gaussian kernel
/// exp(-||x - y||^2 / sigma^2); rows are samples. May be negative.
inline double kernel_mmd_baseline(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                  double sigma) {
    const int m = static_cast<int>(x.rows());
    const int n = static_cast<int>(y.rows());
    if (m < 2 || n < 2)
        throw std::invalid_argument("kernel_mmd_baseline: need at least 2 samples on each side");
    if (!(sigma > 0.0)) throw std::invalid_argument("kernel_mmd_baseline: sigma must be positive");
    const double inv_s2 = 1.0 / (sigma * sigma);
    auto k = [inv_s2](const auto& a, const auto& b) {
        return std::exp(-(a - b).squaredNorm() * inv_s2);
    };
    double within_x = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (i != j) within_x += k(x.row(i), x.row(j));
    double within_y = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) within_y += k(y.row(i), y.row(j));
    double cross = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) cross += k(x.row(i), y.row(j));
    return within_x / (static_cast<double>(m) * (m - 1)) +
           within_y / (static_cast<double>(n) * (n - 1)) -
           2.0 * cross / (static_cast<double>(m) * n);
}

/// e^{-tau L} delta_v, clamped to nonnegative and renormalized to sum 1.
inline Eigen::VectorXd heat_diffuse_dirac(const Engine& engine, int vertex, double tau) {
    const int n = engine.graph().vertex_count();
    if (vertex < 0 || vertex >= n)
        throw std::invalid_argument("heat_diffuse_dirac: vertex out of range");
    if (!(tau > 0.0)) throw std::invalid_argument("heat_diffuse_dirac: tau must be positive");
    Eigen::VectorXd dirac = Eigen::VectorXd::Zero(n);
    dirac[vertex] = 1.0;
    Eigen::VectorXd diffused = engine.apply_heat(tau, dirac).cwiseMax(0.0);
    const double sum = diffused.sum();
    if (!(sum > 0.0)) throw std::runtime_error("heat_diffuse_dirac: diffusion produced no mass");
    return diffused / sum;
}

}  // namespace gfmmd
