#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfmmd/graph.hpp"
#include "gfmmd/metric.hpp"
#include "gfmmd/spectral.hpp"

namespace gfmmd {

/// Arc length of the spiral (t cos t, t sin t) from 0 to t.
inline double swiss_arc_length(double t) {
    return (t * std::sqrt(1.0 + t * t) + std::asinh(t)) / 2.0;
}

/// Geodesic distance on the roll between parameter points (t1, h1), (t2, h2):
/// the surface is an isometric unrolling, so the distance is Euclidean in
/// (arc length, height) coordinates.
inline double swiss_geodesic(double t1, double h1, double t2, double h2) {
    const double ds = swiss_arc_length(t1) - swiss_arc_length(t2);
    const double dh = h1 - h2;
    return std::sqrt(ds * ds + dh * dh);
}

/// Point clouds sampled around swiss-roll centers, with the ground-truth
/// geodesic matrix between the centers.
struct SwissRollDataset {
    Eigen::MatrixXd centers;       // n x 3
    Eigen::VectorXd t_params;      // n
    Eigen::VectorXd heights;       // n
    Eigen::MatrixXd cloud_points;  // (n*m) x ambient_dim, cloud i occupies rows [i*m, (i+1)*m)
    Eigen::MatrixXd geodesics;     // n x n
    int center_count = 0;
    int cloud_size = 0;
    double noise_sigma = 0.0;
    int ambient_dim = 0;
    std::uint64_t seed = 0;
};

/// Draws n centers (t, h) with t ~ U[t_min, t_max], h ~ U[h_min, h_max],
/// embeds them as (t cos t, h, t sin t) zero-padded to ambient_dim, and puts
/// an m-point isotropic Gaussian cloud around each. Deterministic in seed:
/// all t draws, then all h draws, then noise row by row.
inline SwissRollDataset sample_swiss_roll(int center_count, int cloud_size, double noise_sigma,
                                          int ambient_dim, std::uint64_t seed,
                                          double t_min = 1.5 * 3.14159265358979323846,
                                          double t_max = 4.5 * 3.14159265358979323846,
                                          double height_min = 0.0, double height_max = 20.0) {
    if (center_count < 2 || cloud_size < 2)
        throw std::invalid_argument("sample_swiss_roll: need at least 2 centers and 2 points per cloud");
    if (ambient_dim < 3) throw std::invalid_argument("sample_swiss_roll: ambient dimension must be >= 3");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("sample_swiss_roll: noise sigma must be >= 0");

    SwissRollDataset data;
    data.center_count = center_count;
    data.cloud_size = cloud_size;
    data.noise_sigma = noise_sigma;
    data.ambient_dim = ambient_dim;
    data.seed = seed;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> t_draw(t_min, t_max);
    std::uniform_real_distribution<double> h_draw(height_min, height_max);
    data.t_params.resize(center_count);
    data.heights.resize(center_count);
    for (int i = 0; i < center_count; ++i) data.t_params[i] = t_draw(rng);
    for (int i = 0; i < center_count; ++i) data.heights[i] = h_draw(rng);

    data.centers.resize(center_count, 3);
    for (int i = 0; i < center_count; ++i) {
        const double t = data.t_params[i];
        data.centers(i, 0) = t * std::cos(t);
        data.centers(i, 1) = data.heights[i];
        data.centers(i, 2) = t * std::sin(t);
    }

    data.cloud_points = Eigen::MatrixXd::Zero(center_count * cloud_size, ambient_dim);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 0; i < center_count; ++i) {
        for (int p = 0; p < cloud_size; ++p) {
            const int row = i * cloud_size + p;
            data.cloud_points(row, 0) = data.centers(i, 0);
            data.cloud_points(row, 1) = data.centers(i, 1);
            data.cloud_points(row, 2) = data.centers(i, 2);
            if (noise_sigma > 0.0)
                for (int d = 0; d < ambient_dim; ++d)
                    data.cloud_points(row, d) += noise_sigma * noise(rng);
        }
    }

    data.geodesics = Eigen::MatrixXd::Zero(center_count, center_count);
    for (int i = 0; i < center_count; ++i)
        for (int j = i + 1; j < center_count; ++j)
            data.geodesics(i, j) = data.geodesics(j, i) =
                swiss_geodesic(data.t_params[i], data.heights[i], data.t_params[j], data.heights[j]);
    return data;
}

/// Spearman rank correlation; ties get the mean of their rank range.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("spearman: need at least 2 observations");
    auto ranks = [](const std::vector<double>& v) {
        const int n = static_cast<int>(v.size());
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            // infinities compare correctly; ties broken stably below
            return v[static_cast<std::size_t>(a)] < v[static_cast<std::size_t>(b)];
        });
        std::vector<double> r(static_cast<std::size_t>(n));
        int i = 0;
        while (i < n) {
            int j = i;
            while (j + 1 < n && !(v[static_cast<std::size_t>(order[static_cast<std::size_t>(j + 1)])] >
                                  v[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]))
                ++j;
            const double mean_rank = (i + j) / 2.0 + 1.0;
            for (int k = i; k <= j; ++k) r[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = mean_rank;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mean = (n + 1.0) / 2.0;
    double cov = 0.0, var_x = 0.0, var_y = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if (var_x == 0.0 || var_y == 0.0)
        throw std::invalid_argument("spearman: correlation undefined for constant ranks");
    return cov / std::sqrt(var_x * var_y);
}

struct SwissRollConfig {
    int center_count = 100;
    int cloud_size = 100;
    double noise_sigma = 0.25;
    int ambient_dim = 10;
    double t_min = 1.5 * 3.14159265358979323846;
    double t_max = 4.5 * 3.14159265358979323846;
    double height_min = 0.0;
    double height_max = 20.0;
    int k_nn = 10;
    KernelSpec kernel = KernelSpec::adaptive_gaussian(5);
    std::vector<int> chebyshev_orders = {8, 64, 512};
    double epsilon_scale = 1e-6;
    double mmd_sigma = 0.0;  // <= 0: median distance between centers
    int mmd_sample_size = 20;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    double mass_tolerance = kDefaultMassTolerance;

    /// Desk-scale preset: one winding of the roll with proportionally
    /// reduced height range so 20 clouds keep the sampling density of the
    /// full-scale configuration.
    static SwissRollConfig desk() {
        SwissRollConfig c;
        c.center_count = 20;
        c.cloud_size = 20;
        c.noise_sigma = 1.1;
        c.t_max = 2.5 * 3.14159265358979323846;
        c.height_max = 4.0;
        c.k_nn = 15;
        return c;
    }
};

struct MethodResult {
    std::string name;
    std::vector<double> rho_per_seed;
    double rho_mean = 0.0;
    double rho_sd = 0.0;
    double embed_seconds = 0.0;     // mean per seed
    double allpairs_seconds = 0.0;  // mean per seed, embedding included
};

struct BenchmarkReport {
    SwissRollConfig config;
    std::vector<MethodResult> methods;
    /// (geodesic, distance) scatter pairs for the first seed, per method.
    std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> scatter;
};

inline void to_json(nlohmann::json& j, const KernelSpec& kernel) {
    if (kernel.kind() == KernelSpec::Kind::gaussian)
        j = {{"variant", "gaussian"}, {"sigma", kernel.sigma()}};
    else
        j = {{"variant", "adaptive"}, {"k_bw", kernel.bandwidth_neighbors()}};
}

inline void from_json(const nlohmann::json& j, KernelSpec& kernel) {
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "gaussian")
        kernel = KernelSpec::gaussian(j.at("sigma").get<double>());
    else if (variant == "adaptive")
        kernel = KernelSpec::adaptive_gaussian(j.at("k_bw").get<int>());
    else
        throw std::invalid_argument("unknown kernel variant '" + variant + "'");
}

inline void to_json(nlohmann::json& j, const SwissRollConfig& c) {
    j = {{"center_count", c.center_count},
         {"cloud_size", c.cloud_size},
         {"noise_sigma", c.noise_sigma},
         {"ambient_dim", c.ambient_dim},
         {"t_min", c.t_min},
         {"t_max", c.t_max},
         {"height_min", c.height_min},
         {"height_max", c.height_max},
         {"k_nn", c.k_nn},
         {"kernel", c.kernel},
         {"chebyshev_orders", c.chebyshev_orders},
         {"epsilon_scale", c.epsilon_scale},
         {"mmd_sigma", c.mmd_sigma},
         {"mmd_sample_size", c.mmd_sample_size},
         {"seeds", c.seeds},
         {"mass_tolerance", c.mass_tolerance}};
}

inline void from_json(const nlohmann::json& j, SwissRollConfig& c) {
    SwissRollConfig defaults;
    c.center_count = j.value("center_count", defaults.center_count);
    c.cloud_size = j.value("cloud_size", defaults.cloud_size);
    c.noise_sigma = j.value("noise_sigma", defaults.noise_sigma);
    c.ambient_dim = j.value("ambient_dim", defaults.ambient_dim);
    c.t_min = j.value("t_min", defaults.t_min);
    c.t_max = j.value("t_max", defaults.t_max);
    c.height_min = j.value("height_min", defaults.height_min);
    c.height_max = j.value("height_max", defaults.height_max);
    c.k_nn = j.value("k_nn", defaults.k_nn);
    if (j.contains("kernel")) c.kernel = j.at("kernel").get<KernelSpec>();
    c.chebyshev_orders = j.value("chebyshev_orders", defaults.chebyshev_orders);
    c.epsilon_scale = j.value("epsilon_scale", defaults.epsilon_scale);
    c.mmd_sigma = j.value("mmd_sigma", defaults.mmd_sigma);
    c.mmd_sample_size = j.value("mmd_sample_size", defaults.mmd_sample_size);
    c.seeds = j.value("seeds", defaults.seeds);
    c.mass_tolerance = j.value("mass_tolerance", defaults.mass_tolerance);
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline std::vector<double> upper_triangle(const Eigen::MatrixXd& m) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m.rows() * (m.rows() - 1) / 2));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = i + 1; j < m.cols(); ++j) out.push_back(m(i, j));
    return out;
}

inline void finalize_method(MethodResult& r) {
    const double n = static_cast<double>(r.rho_per_seed.size());
    r.rho_mean = std::accumulate(r.rho_per_seed.begin(), r.rho_per_seed.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : r.rho_per_seed) ss += (v - r.rho_mean) * (v - r.rho_mean);
    r.rho_sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

inline double median_center_distance(const Eigen::MatrixXd& centers) {
    std::vector<double> d;
    for (int i = 0; i < centers.rows(); ++i)
        for (int j = i + 1; j < centers.rows(); ++j)
            d.push_back((centers.row(i) - centers.row(j)).norm());
    std::sort(d.begin(), d.end());
    return d.empty() ? 1.0 : d[d.size() / 2];
}

}  // namespace detail

/// Runs the full swiss-roll distance benchmark: one joint k-NN graph over
/// all cloud points, uniform-on-own-cloud distributions, all-pairs GFMMD on
/// the exact path and each configured Chebyshev order, plus the sampling
/// kernel-MMD baseline; Spearman rho of each distance vector against the
/// geodesics, averaged over seeds.
inline BenchmarkReport run_swissroll_benchmark(const SwissRollConfig& config) {
    if (config.seeds.empty()) throw std::invalid_argument("benchmark: need at least one seed");
    if (config.mmd_sample_size < 2)
        throw std::invalid_argument("benchmark: mmd_sample_size must be >= 2");
    if (!(config.t_min < config.t_max) || !(config.height_min <= config.height_max))
        throw std::invalid_argument("benchmark: invalid parameter ranges");

    BenchmarkReport report;
    report.config = config;
    const int n = config.center_count;
    const int m = config.cloud_size;

    MethodResult exact_result{"exact", {}, 0, 0, 0, 0};
    std::vector<MethodResult> cheby_results;
    for (int order : config.chebyshev_orders)
        cheby_results.push_back({"cheby:" + std::to_string(order), {}, 0, 0, 0, 0});
    MethodResult mmd_result{"kernel-mmd", {}, 0, 0, 0, 0};

    for (std::size_t seed_index = 0; seed_index < config.seeds.size(); ++seed_index) {
        const std::uint64_t seed = config.seeds[seed_index];
        const auto data =
            sample_swiss_roll(n, m, config.noise_sigma, config.ambient_dim, seed, config.t_min,
                              config.t_max, config.height_min, config.height_max);
        const Graph graph = build_knn_graph(data.cloud_points, config.k_nn, config.kernel);

        // uniform distribution over each cloud's own vertices
        Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(n * m, n);
        for (int i = 0; i < n; ++i)
            for (int p = 0; p < m; ++p) raw(i * m + p, i) = 1.0;
        std::vector<std::string> labels;
        for (int i = 0; i < n; ++i) labels.push_back("cloud_" + std::to_string(i));
        const SignalMatrix signals = normalize_signals(raw, labels);
        const std::vector<double> geo = detail::upper_triangle(data.geodesics);

        // Timings cover the full per-method pipeline: engine setup (the
        // eigendecomposition or the polynomial fit), the feature map, and
        // the distance assembly. The shared graph build is excluded.
        auto record = [&](MethodResult& result, auto&& make_engine) {
            const auto t0 = std::chrono::steady_clock::now();
            const Engine engine = make_engine();
            const EmbeddingMatrix embedding = embed(engine, signals);
            const double embed_s = detail::seconds_since(t0);
            const Eigen::MatrixXd masses = component_masses(signals.values, engine.components());
            const DistanceMatrix distances =
                pairwise_distances(embedding, masses, config.mass_tolerance);
            const double total_s = detail::seconds_since(t0);
            result.rho_per_seed.push_back(spearman(geo, detail::upper_triangle(distances.values)));
            result.embed_seconds += embed_s / static_cast<double>(config.seeds.size());
            result.allpairs_seconds += total_s / static_cast<double>(config.seeds.size());
            if (seed_index == 0) {
                std::vector<std::pair<double, double>> pairs;
                const auto dist_flat = detail::upper_triangle(distances.values);
                for (std::size_t k = 0; k < geo.size(); ++k)
                    pairs.emplace_back(geo[k], dist_flat[k]);
                report.scatter.emplace_back(result.name, std::move(pairs));
            }
        };

        record(exact_result, [&] {
            Engine::ExactOptions opts;
            opts.mass_tolerance = config.mass_tolerance;
            return Engine::exact(graph, opts);
        });
        for (std::size_t c = 0; c < config.chebyshev_orders.size(); ++c) {
            record(cheby_results[c], [&] {
                Engine::ChebyshevOptions opts;
                opts.order = config.chebyshev_orders[c];
                opts.epsilon_scale = config.epsilon_scale;
                opts.mass_tolerance = config.mass_tolerance;
                return Engine::chebyshev(graph, opts);
            });
        }

        // kernel-MMD baseline: sample with replacement from each cloud, then
        // the unbiased two-sample estimator on every pair.
        {
            const auto t0 = std::chrono::steady_clock::now();
            const double sigma = config.mmd_sigma > 0.0
                                     ? config.mmd_sigma
                                     : detail::median_center_distance(data.centers);
            std::mt19937_64 rng(seed ^ 0x6d6d64ULL);
            std::uniform_int_distribution<int> pick(0, m - 1);
            std::vector<Eigen::MatrixXd> samples;
            samples.reserve(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                Eigen::MatrixXd s(config.mmd_sample_size, config.ambient_dim);
                for (int r = 0; r < config.mmd_sample_size; ++r)
                    s.row(r) = data.cloud_points.row(i * m + pick(rng));
                samples.push_back(std::move(s));
            }
            Eigen::MatrixXd mmd = Eigen::MatrixXd::Zero(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    mmd(i, j) = kernel_mmd_baseline(samples[static_cast<std::size_t>(i)],
                                                    samples[static_cast<std::size_t>(j)], sigma);
            const double total_s = detail::seconds_since(t0);
            mmd_result.rho_per_seed.push_back(spearman(geo, detail::upper_triangle(mmd)));
            mmd_result.embed_seconds += total_s / static_cast<double>(config.seeds.size());
            mmd_result.allpairs_seconds += total_s / static_cast<double>(config.seeds.size());
            if (seed_index == 0) {
                std::vector<std::pair<double, double>> pairs;
                const auto flat = detail::upper_triangle(mmd);
                for (std::size_t k = 0; k < geo.size(); ++k) pairs.emplace_back(geo[k], flat[k]);
                report.scatter.emplace_back(mmd_result.name, std::move(pairs));
            }
        }
    }

    detail::finalize_method(exact_result);
    report.methods.push_back(std::move(exact_result));
    for (auto& r : cheby_results) {
        detail::finalize_method(r);
        report.methods.push_back(std::move(r));
    }
    detail::finalize_method(mmd_result);
    report.methods.push_back(std::move(mmd_result));
    return report;
}

inline nlohmann::json report_to_json(const BenchmarkReport& report, bool include_timings = true) {
    nlohmann::json j;
    j["config"] = report.config;
    j["methods"] = nlohmann::json::array();
    for (const auto& m : report.methods) {
        nlohmann::json jm;
        jm["name"] = m.name;
        jm["rho_per_seed"] = m.rho_per_seed;
        jm["rho_mean"] = m.rho_mean;
        jm["rho_sd"] = m.rho_sd;
        if (include_timings) {
            jm["embed_seconds"] = m.embed_seconds;
            jm["allpairs_seconds"] = m.allpairs_seconds;
        }
        j["methods"].push_back(jm);
    }
    return j;
}

/// 16x16-grid translation experiment: P is a heat-diffused Dirac, Q_j the
/// same diffusion started 2j columns to the right; reports the distance
/// sequence, witness functions, and bimodal localization scores.
struct GridExperimentConfig {
    int rows = 16;
    int cols = 16;
    double tau = 16.0;
    int source_row = 8;  // 1-based grid coordinates, matching (8,4)
    int source_col = 4;
    std::vector<int> column_offsets = {0, 2, 4, 6};
};

inline void to_json(nlohmann::json& j, const GridExperimentConfig& c) {
    j = {{"rows", c.rows},         {"cols", c.cols},
         {"tau", c.tau},           {"source_row", c.source_row},
         {"source_col", c.source_col}, {"column_offsets", c.column_offsets}};
}

inline void from_json(const nlohmann::json& j, GridExperimentConfig& c) {
    GridExperimentConfig defaults;
    c.rows = j.value("rows", defaults.rows);
    c.cols = j.value("cols", defaults.cols);
    c.tau = j.value("tau", defaults.tau);
    c.source_row = j.value("source_row", defaults.source_row);
    c.source_col = j.value("source_col", defaults.source_col);
    c.column_offsets = j.value("column_offsets", defaults.column_offsets);
}

struct GridExperimentReport {
    GridExperimentConfig config;
    std::vector<double> distances;        // gfmmd(P, Q_j)
    std::vector<double> bimodal_scores;   // s(0.5 (P + Q_j))
    std::vector<Eigen::VectorXd> witnesses;  // empty entry where P = Q_j
};

inline GridExperimentReport run_grid_experiment(const GridExperimentConfig& config) {
    GridExperimentReport report;
    report.config = config;
    const Graph grid = grid_graph(config.rows, config.cols);
    const Engine engine = Engine::exact(grid);
    auto vertex_at = [&](int row1, int col1) {
        if (row1 < 1 || row1 > config.rows || col1 < 1 || col1 > config.cols)
            throw std::invalid_argument("grid experiment: source position outside the grid");
        return (row1 - 1) * config.cols + (col1 - 1);
    };
    const Eigen::VectorXd p =
        heat_diffuse_dirac(engine, vertex_at(config.source_row, config.source_col), config.tau);
    for (int offset : config.column_offsets) {
        const Eigen::VectorXd q = heat_diffuse_dirac(
            engine, vertex_at(config.source_row, config.source_col + offset), config.tau);
        report.distances.push_back(gfmmd(engine, p, q));
        report.bimodal_scores.push_back(localization_score(engine, 0.5 * (p + q)));
        if (offset == 0)
            report.witnesses.emplace_back();
        else
            report.witnesses.push_back(witness_function(engine, p, q));
    }
    return report;
}

inline nlohmann::json grid_report_to_json(const GridExperimentReport& report) {
    nlohmann::json j;
    j["config"] = report.config;
    j["distances"] = report.distances;
    j["bimodal_scores"] = report.bimodal_scores;
    j["witnesses"] = nlohmann::json::array();
    for (const auto& w : report.witnesses) {
        std::vector<double> values(w.data(), w.data() + w.size());
        j["witnesses"].push_back(values);
    }
    return j;
}

}  // namespace gfmmd
