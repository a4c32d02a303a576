#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gfmmd/bench.hpp"
#include "support/test_helpers.hpp"

using Catch::Approx;
using namespace gfmmd;

TEST_CASE("swiss arc length matches quadrature", "[bench]") {
    for (const double t : {0.5, 3.0, 4.71, 14.137}) {
        CHECK(swiss_arc_length(t) == Approx(testsupport::quadrature_arc_length(0.0, t)).margin(1e-9));
    }
}

TEST_CASE("swiss geodesic distances", "[bench]") {
    CHECK(swiss_geodesic(5.0, 2.0, 5.0, 2.0) == 0.0);
    CHECK(swiss_geodesic(5.0, 2.0, 5.0, 7.0) == Approx(5.0));  // pure height offset
    const double t1 = 1.5 * 3.14159265358979323846;
    const double t2 = 4.5 * 3.14159265358979323846;
    CHECK(swiss_geodesic(t1, 0.0, t2, 0.0) ==
          Approx(testsupport::quadrature_arc_length(t1, t2)).margin(1e-9));
}

TEST_CASE("sample_swiss_roll is deterministic and well-shaped", "[bench]") {
    const auto a = sample_swiss_roll(100, 100, 0.25, 10, 7);
    const auto b = sample_swiss_roll(100, 100, 0.25, 10, 7);
    CHECK(a.cloud_points == b.cloud_points);
    CHECK(a.geodesics == b.geodesics);
    CHECK(a.cloud_points.rows() == 10000);  // n * m total points
    CHECK(a.cloud_points.cols() == 10);

    const auto c = sample_swiss_roll(100, 100, 0.25, 10, 8);
    CHECK(a.cloud_points != c.cloud_points);

    SECTION("geodesic matrix is a metric") {
        CHECK(a.geodesics.diagonal().cwiseAbs().maxCoeff() == 0.0);
        CHECK(a.geodesics == a.geodesics.transpose());
        for (int i = 0; i < 40; i += 7)
            for (int j = 0; j < 40; j += 5)
                for (int k = 0; k < 40; k += 3)
                    CHECK(a.geodesics(i, j) <= a.geodesics(i, k) + a.geodesics(k, j) + 1e-9);
    }
}

TEST_CASE("zero noise collapses clouds onto padded centers", "[bench]") {
    const auto data = sample_swiss_roll(5, 4, 0.0, 7, 3);
    for (int i = 0; i < 5; ++i) {
        for (int p = 0; p < 4; ++p) {
            const int row = i * 4 + p;
            CHECK(data.cloud_points(row, 0) == data.centers(i, 0));
            CHECK(data.cloud_points(row, 1) == data.centers(i, 1));
            CHECK(data.cloud_points(row, 2) == data.centers(i, 2));
            for (int d = 3; d < 7; ++d) CHECK(data.cloud_points(row, d) == 0.0);
        }
    }
}

TEST_CASE("spearman rank correlation", "[bench]") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == Approx(-1.0));
    // hand-ranked oracle: ranks of x are (1, 2.5, 2.5, 4), ranks of y are
    // (1, 2, 3, 4); Pearson of those ranks is 4.5 / sqrt(4.5 * 5) = 3/sqrt(10)
    CHECK(spearman({1, 2, 2, 4}, {1, 2, 3, 4}) == Approx(3.0 / std::sqrt(10.0)).epsilon(1e-14));
    CHECK_THROWS_AS(spearman({1, 1, 1}, {1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(spearman({1, 2}, {1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(spearman({1}, {2}), std::invalid_argument);

    SECTION("infinities rank above every finite value") {
        const double inf = std::numeric_limits<double>::infinity();
        CHECK(spearman({1, 2, 3, inf}, {1, 2, 3, 4}) == Approx(1.0));
    }
}

TEST_CASE("swiss roll benchmark produces a deterministic report", "[bench]") {
    SwissRollConfig config = SwissRollConfig::desk();
    config.center_count = 8;
    config.cloud_size = 8;
    config.k_nn = 8;
    config.chebyshev_orders = {8};
    config.seeds = {1, 2};

    const BenchmarkReport report = run_swissroll_benchmark(config);
    REQUIRE(report.methods.size() == 3);  // exact, cheby:8, kernel-mmd
    CHECK(report.methods[0].name == "exact");
    CHECK(report.methods[1].name == "cheby:8");
    CHECK(report.methods[2].name == "kernel-mmd");
    for (const auto& m : report.methods) {
        REQUIRE(m.rho_per_seed.size() == 2);
        for (double rho : m.rho_per_seed) {
            CHECK(rho >= -1.0);
            CHECK(rho <= 1.0);
        }
        CHECK(m.embed_seconds >= 0.0);
        CHECK(m.allpairs_seconds >= m.embed_seconds * 0.999);
    }
    CHECK(report.scatter.size() == 3);
    CHECK(report.scatter[0].second.size() == 8 * 7 / 2);

    const BenchmarkReport again = run_swissroll_benchmark(config);
    for (std::size_t i = 0; i < report.methods.size(); ++i)
        CHECK(report.methods[i].rho_per_seed == again.methods[i].rho_per_seed);
}

TEST_CASE("benchmark config round-trips through JSON", "[bench]") {
    SwissRollConfig config = SwissRollConfig::desk();
    config.kernel = KernelSpec::gaussian(2.5);
    config.seeds = {11, 22, 33};
    config.chebyshev_orders = {8, 64};
    const nlohmann::json j = config;
    const auto back = j.get<SwissRollConfig>();
    CHECK(nlohmann::json(back) == j);

    GridExperimentConfig grid;
    grid.tau = 4.0;
    grid.column_offsets = {0, 1};
    const nlohmann::json gj = grid;
    CHECK(nlohmann::json(gj.get<GridExperimentConfig>()) == gj);
}

TEST_CASE("benchmark rejects invalid configs", "[bench]") {
    SwissRollConfig config = SwissRollConfig::desk();
    config.seeds = {};
    CHECK_THROWS_AS(run_swissroll_benchmark(config), std::invalid_argument);
    config = SwissRollConfig::desk();
    config.mmd_sample_size = 1;
    CHECK_THROWS_AS(run_swissroll_benchmark(config), std::invalid_argument);
    config = SwissRollConfig::desk();
    config.t_min = config.t_max;
    CHECK_THROWS_AS(run_swissroll_benchmark(config), std::invalid_argument);
}

TEST_CASE("grid experiment reproduces the translation geometry", "[bench]") {
    const GridExperimentReport report = run_grid_experiment(GridExperimentConfig{});
    REQUIRE(report.distances.size() == 4);
    CHECK(report.distances[0] == 0.0);
    for (std::size_t j = 1; j < 4; ++j) CHECK(report.distances[j] > report.distances[j - 1]);

    // bimodal signals disperse as the modes separate
    REQUIRE(report.bimodal_scores.size() == 4);
    for (std::size_t j = 1; j < 4; ++j)
        CHECK(report.bimodal_scores[j] <= report.bimodal_scores[j - 1]);

    REQUIRE(report.witnesses.size() == 4);
    CHECK(report.witnesses[0].size() == 0);  // no witness for the identical pair
    for (std::size_t j = 1; j < 4; ++j) CHECK(report.witnesses[j].size() == 256);

    // witness peaks near P's center, troughs near Q's center
    const int p_vertex = 7 * 16 + 3;
    const int q_vertex = 7 * 16 + 9;
    CHECK(report.witnesses[3][p_vertex] > 0.0);
    CHECK(report.witnesses[3][q_vertex] < 0.0);
}

TEST_CASE("grid experiment validates the source position", "[bench]") {
    GridExperimentConfig config;
    config.source_col = 16;  // offsets walk outside the grid
    CHECK_THROWS_AS(run_grid_experiment(config), std::invalid_argument);
}

TEST_CASE("chebyshev error shrinks with order on a swiss-roll graph", "[bench]") {
    const auto data = sample_swiss_roll(8, 8, 1.1, 10, 3, 1.5 * 3.14159265358979323846,
                                        2.5 * 3.14159265358979323846, 0.0, 4.0);
    const Graph graph = build_knn_graph(data.cloud_points, 8, KernelSpec::adaptive_gaussian(5));
    const LaplacianMatrix lap = laplacian(graph);
    const SpectralDecomposition dec = eigendecompose(lap);
    const double lambda_hat = estimate_lambda_max(lap);

    // uniform-on-own-cloud distributions, centered per component
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(64, 8);
    for (int i = 0; i < 8; ++i)
        for (int p = 0; p < 8; ++p) raw(i * 8 + p, i) = 1.0 / 8.0;
    const auto comps = connected_components(graph);
    Eigen::MatrixXd centered = raw;
    for (const auto& members : comps.members) {
        for (int j = 0; j < centered.cols(); ++j) {
            double mean = 0.0;
            for (int v : members) mean += centered(v, j);
            mean /= static_cast<double>(members.size());
            for (int v : members) centered(v, j) -= mean;
        }
    }
    const Eigen::MatrixXd exact = apply_filter_exact(dec, FilterSpec::inverse_sqrt(0.0), centered);
    double previous = std::numeric_limits<double>::infinity();
    for (const int order : {8, 64, 512}) {
        const ChebyshevFilter fit =
            chebyshev_fit(FilterSpec::inverse_sqrt(1e-6 * lambda_hat), lambda_hat, order);
        const double err = (apply_filter_chebyshev(lap, fit, centered) - exact).norm() / exact.norm();
        CHECK(err <= previous);
        previous = err;
    }
    CHECK(previous <= 0.01);
}
