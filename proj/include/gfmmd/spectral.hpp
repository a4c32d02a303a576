#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "gfmmd/graph.hpp"
#include "gfmmd/parallel.hpp"

namespace gfmmd {

/// Thrown when a dense-path operation is asked to exceed its size budget.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kDenseEigenLimit = 4096;

/// Eigenpairs of a Laplacian, ascending. Eigenvalues at or below
/// rank_tolerance * lambda_max are clamped to exactly zero; on a clean graph
/// their count equals the number of connected components.
struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;  // orthonormal columns, one per eigenvalue
    double rank_tolerance = 1e-9;
    int zero_count = 0;

    int size() const { return static_cast<int>(eigenvalues.size()); }
    double lambda_max() const { return size() == 0 ? 0.0 : eigenvalues[size() - 1]; }
    /// Smallest nonzero eigenvalue (the Fiedler value on connected graphs).
    double lambda_2() const {
        if (zero_count >= size()) throw std::runtime_error("lambda_2: no nonzero eigenvalues");
        return eigenvalues[zero_count];
    }
};

/// Scalar spectral filter h(lambda).
class FilterSpec {
public:
    enum class Kind { identity, inverse_sqrt, heat };

    static FilterSpec identity() { return FilterSpec(Kind::identity, 0.0, 0.0); }

    /// Regularized inverse square root (lambda + epsilon)^{-1/2}. The exact
    /// application path ignores epsilon and uses pseudoinverse semantics;
    /// the Chebyshev path requires epsilon > 0 to stay bounded at zero.
    static FilterSpec inverse_sqrt(double epsilon) {
        if (!(epsilon >= 0.0)) throw std::invalid_argument("FilterSpec: epsilon must be >= 0");
        return FilterSpec(Kind::inverse_sqrt, epsilon, 0.0);
    }

    static FilterSpec heat(double tau) {
        if (!(tau > 0.0)) throw std::invalid_argument("FilterSpec: tau must be positive");
        return FilterSpec(Kind::heat, 0.0, tau);
    }

    Kind kind() const { return kind_; }
    double epsilon() const { return epsilon_; }
    double tau() const { return tau_; }

    double operator()(double lambda) const {
        switch (kind_) {
            case Kind::identity: return 1.0;
            case Kind::inverse_sqrt: return 1.0 / std::sqrt(lambda + epsilon_);
            case Kind::heat: return std::exp(-tau_ * lambda);
        }
        return 0.0;
    }

    std::string name() const {
        switch (kind_) {
            case Kind::identity: return "identity";
            case Kind::inverse_sqrt: return "inverse_sqrt";
            case Kind::heat: return "heat";
        }
        return "?";
    }

private:
    FilterSpec(Kind kind, double epsilon, double tau) : kind_(kind), epsilon_(epsilon), tau_(tau) {}

    Kind kind_;
    double epsilon_;
    double tau_;
};

/// Chebyshev interpolant of a filter on [0, interval_max]. Coefficients are
/// in the standard convention p(x) = c0/2 + sum_{j>=1} c_j T_j(x) with
/// x = 2*lambda/interval_max - 1.
struct ChebyshevFilter {
    std::vector<double> coefficients;
    double interval_max = 0.0;
    double sup_error = 0.0;  // measured on a 200-point uniform grid of the interval

    int order() const { return static_cast<int>(coefficients.size()) - 1; }

    /// Clenshaw evaluation of the interpolant at a single point.
    double evaluate(double lambda) const {
        const double x = 2.0 * lambda / interval_max - 1.0;
        double b1 = 0.0, b2 = 0.0;
        for (int j = order(); j >= 1; --j) {
            const double b0 = 2.0 * x * b1 - b2 + coefficients[static_cast<std::size_t>(j)];
            b2 = b1;
            b1 = b0;
        }
        return x * b1 - b2 + 0.5 * coefficients[0];
    }
};

namespace detail {

// Deterministic pseudo-random unit-ish start vector (splitmix64 stream).
inline Eigen::VectorXd power_iteration_start(int n) {
    Eigen::VectorXd v(n);
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    for (int i = 0; i < n; ++i) {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        v[i] = static_cast<double>(z >> 11) / 9007199254740992.0 - 0.5;
    }
    const double norm = v.norm();
    return norm > 0 ? Eigen::VectorXd(v / norm) : Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
}

struct PowerIterationResult {
    double estimate = 0.0;  // Rayleigh quotient, a lower bound on lambda_max
    bool converged = true;
};

inline PowerIterationResult power_iteration_raw(const LaplacianMatrix& lap, double rel_tol = 1e-6,
                                                int max_iterations = 500) {
    const int n = lap.size();
    if (n == 0 || lap.degrees.maxCoeff() == 0.0) return {0.0, true};
    Eigen::VectorXd v = power_iteration_start(n);
    double estimate = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        Eigen::VectorXd w = lap.matrix * v;
        const double norm = w.norm();
        if (norm == 0.0) return {0.0, true};
        v = w / norm;
        const double next = v.dot(lap.matrix * v);
        if (it > 0 && std::abs(next - estimate) <= rel_tol * std::abs(next)) return {next, true};
        estimate = next;
    }
    return {estimate, false};
}

}  // namespace detail

/// Upper estimate of the largest Laplacian eigenvalue. Power iteration with
/// a 1% safety inflation when it converges; the bound 2*max_degree otherwise.
inline double estimate_lambda_max(const LaplacianMatrix& lap) {
    if (lap.size() == 0) return 0.0;
    const double max_degree = lap.degrees.maxCoeff();
    if (max_degree == 0.0) return 0.0;
    const auto pi = detail::power_iteration_raw(lap);
    if (!pi.converged) return 2.0 * max_degree;
    return std::min(1.01 * pi.estimate, 2.0 * max_degree);
}

/// Dense symmetric eigendecomposition with small-eigenvalue clamping.
inline SpectralDecomposition eigendecompose(const LaplacianMatrix& lap,
                                            double rank_tolerance = 1e-9,
                                            int dense_limit = kDenseEigenLimit) {
    const int n = lap.size();
    if (n > dense_limit)
        throw CapacityError("eigendecompose: " + std::to_string(n) +
                            " vertices exceed the dense limit of " + std::to_string(dense_limit) +
                            "; use the Chebyshev path for graphs this large");
    if (!(rank_tolerance > 0.0 && rank_tolerance < 1.0))
        throw std::invalid_argument("eigendecompose: rank tolerance must lie in (0, 1)");

    SpectralDecomposition dec;
    dec.rank_tolerance = rank_tolerance;
    if (n == 0) return dec;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(lap.matrix));
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigendecompose: eigensolver failed to converge");
    dec.eigenvalues = solver.eigenvalues();
    dec.eigenvectors = solver.eigenvectors();

    const double lambda_max = std::max(dec.eigenvalues[n - 1], 0.0);
    const double threshold = rank_tolerance * lambda_max;
    dec.zero_count = 0;
    for (int i = 0; i < n; ++i) {
        if (dec.eigenvalues[i] <= threshold) {
            dec.eigenvalues[i] = 0.0;
            ++dec.zero_count;
        }
    }
    return dec;
}

/// Interpolation of a scalar function at order+1 Chebyshev nodes mapped to
/// [0, interval_max]. The reported sup error comes from a 200-point uniform
/// grid of the interval.
template <typename Fn>
    requires(!std::is_same_v<std::remove_cvref_t<Fn>, FilterSpec>)
ChebyshevFilter chebyshev_fit(Fn&& h, double interval_max, int order) {
    if (!(interval_max > 0.0)) throw std::invalid_argument("chebyshev_fit: interval must be positive");
    if (order < 1) throw std::invalid_argument("chebyshev_fit: order must be >= 1");

    const int node_count = order + 1;
    std::vector<double> node_values(static_cast<std::size_t>(node_count));
    constexpr double pi = 3.14159265358979323846;
    for (int k = 0; k < node_count; ++k) {
        const double x = std::cos(pi * (k + 0.5) / node_count);
        const double lambda = interval_max * (x + 1.0) / 2.0;
        const double value = h(lambda);
        if (!std::isfinite(value))
            throw std::invalid_argument("chebyshev_fit: filter is not finite on the interval (for "
                                        "inverse_sqrt use epsilon > 0)");
        node_values[static_cast<std::size_t>(k)] = value;
    }

    ChebyshevFilter fit;
    fit.interval_max = interval_max;
    fit.coefficients.resize(static_cast<std::size_t>(node_count));
    for (int j = 0; j < node_count; ++j) {
        double acc = 0.0;
        for (int k = 0; k < node_count; ++k)
            acc += node_values[static_cast<std::size_t>(k)] * std::cos(j * pi * (k + 0.5) / node_count);
        fit.coefficients[static_cast<std::size_t>(j)] = 2.0 * acc / node_count;
    }

    double sup = 0.0;
    for (int s = 0; s < 200; ++s) {
        const double lambda = interval_max * s / 199.0;
        sup = std::max(sup, std::abs(fit.evaluate(lambda) - h(lambda)));
    }
    fit.sup_error = sup;
    return fit;
}

/// FilterSpec overload: an unregularized inverse square root is singular at
/// zero and cannot be represented by a bounded polynomial.
inline ChebyshevFilter chebyshev_fit(const FilterSpec& h, double interval_max, int order) {
    if (h.kind() == FilterSpec::Kind::inverse_sqrt && h.epsilon() == 0.0)
        throw std::invalid_argument(
            "chebyshev_fit: inverse_sqrt needs epsilon > 0 on the polynomial path");
    return chebyshev_fit([&h](double lambda) { return h(lambda); }, interval_max, order);
}

/// Psi h(Lambda) Psi^T S. For inverse_sqrt filters the clamped zero
/// eigenvalues map to 0 (pseudoinverse convention) and epsilon is ignored.
inline Eigen::MatrixXd apply_filter_exact(const SpectralDecomposition& dec, const FilterSpec& h,
                                          const Eigen::MatrixXd& signals) {
    if (signals.rows() != dec.size())
        throw std::invalid_argument("apply_filter_exact: signal rows do not match decomposition size");
    const int n = dec.size();
    Eigen::VectorXd scale(n);
    for (int i = 0; i < n; ++i) {
        const double lambda = dec.eigenvalues[i];
        if (h.kind() == FilterSpec::Kind::inverse_sqrt)
            scale[i] = lambda == 0.0 ? 0.0 : 1.0 / std::sqrt(lambda);
        else
            scale[i] = h(lambda);
    }
    Eigen::MatrixXd spectral = dec.eigenvectors.transpose() * signals;
    spectral.array().colwise() *= scale.array();
    return dec.eigenvectors * spectral;
}

/// Three-term Chebyshev recurrence: only sparse L*vector products, order
/// products per column. Columns are processed in independent blocks.
inline Eigen::MatrixXd apply_filter_chebyshev(const LaplacianMatrix& lap, const ChebyshevFilter& fit,
                                              const Eigen::MatrixXd& signals) {
    if (signals.rows() != lap.size())
        throw std::invalid_argument("apply_filter_chebyshev: signal rows do not match Laplacian size");
    const double bound = detail::power_iteration_raw(lap).estimate;
    if (fit.interval_max < bound)
        throw std::invalid_argument("apply_filter_chebyshev: fit interval is smaller than the "
                                    "spectral radius estimate; refit with a larger interval");

    const int m = static_cast<int>(signals.cols());
    Eigen::MatrixXd out(signals.rows(), m);
    const double b = fit.interval_max;
    const auto& c = fit.coefficients;

    // One column block per worker; the recurrence within a block is the same
    // arithmetic regardless of how many blocks run concurrently.
    const int block = std::max(1, (m + max_threads() - 1) / max_threads());
    const int block_count = (m + block - 1) / block;
    detail::parallel_for(0, block_count, [&](int bi) {
        const int lo = bi * block;
        const int width = std::min(block, m - lo);
        Eigen::MatrixXd t_prev = signals.middleCols(lo, width);
        Eigen::MatrixXd acc = (0.5 * c[0]) * t_prev;
        if (fit.order() >= 1) {
            // x = 2L/b - I applied to the signal block
            Eigen::MatrixXd t_cur = (2.0 / b) * (lap.matrix * t_prev) - t_prev;
            acc += c[1] * t_cur;
            for (int j = 2; j <= fit.order(); ++j) {
                Eigen::MatrixXd t_next =
                    (4.0 / b) * (lap.matrix * t_cur) - 2.0 * t_cur - t_prev;
                acc += c[static_cast<std::size_t>(j)] * t_next;
                t_prev.swap(t_cur);
                t_cur.swap(t_next);
            }
        }
        out.middleCols(lo, width) = acc;
    });
    return out;
}

}  // namespace gfmmd
