#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfmmd/graph.hpp"
#include "gfmmd/metric.hpp"

namespace gfmmd {

/// Malformed input file; the message carries path and 1-based line number.
struct ParseError : std::runtime_error {
    ParseError(const std::string& path, int line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what) {}
};

namespace detail {

/// Shortest decimal form that round-trips a double exactly.
inline std::string format_double(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == value) {
        // try shorter representations for readability
        for (int digits = 1; digits < 17; ++digits) {
            char shorter[32];
            std::snprintf(shorter, sizeof(shorter), "%.*g", digits, value);
            std::sscanf(shorter, "%lf", &back);
            if (back == value) return shorter;
        }
    }
    return buf;
}

inline bool parse_double(const std::string& token, double& out) {
    if (token == "inf" || token == "+inf") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    if (token == "-inf") {
        out = -std::numeric_limits<double>::infinity();
        return true;
    }
    char* end = nullptr;
    out = std::strtod(token.c_str(), &end);
    return end == token.c_str() + token.size() && !token.empty();
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream stream(line);
    while (std::getline(stream, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return in;
}

inline std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace detail

/// Edge-list format: one `a<TAB>b<TAB>weight` per line, 0-indexed, each
/// undirected edge listed once; `#` starts a comment. The writer puts the
/// vertex count in a leading `# vertices: N` comment so isolated trailing
/// vertices survive a round trip.
inline void write_edge_list(const std::string& path, const Graph& graph) {
    auto out = detail::open_output(path);
    out << "# vertices: " << graph.vertex_count() << "\n";
    for (const auto& e : graph.edges())
        out << e.a << '\t' << e.b << '\t' << detail::format_double(e.weight) << '\n';
}

inline Graph read_edge_list(const std::string& path) {
    auto in = detail::open_input(path);
    std::vector<Edge> edges;
    int declared_vertices = -1;
    int max_index = -1;
    std::string line;
    int line_no = 0;
    bool saw_content = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            int n = 0;
            if (std::sscanf(line.c_str(), "# vertices: %d", &n) == 1) declared_vertices = n;
            continue;
        }
        saw_content = true;
        const auto cells = detail::split(line, '\t');
        if (cells.size() != 3)
            throw ParseError(path, line_no, "expected 'a<TAB>b<TAB>weight', got '" + line + "'");
        char* end = nullptr;
        const long a = std::strtol(cells[0].c_str(), &end, 10);
        if (end != cells[0].c_str() + cells[0].size())
            throw ParseError(path, line_no, "invalid vertex index '" + cells[0] + "'");
        const long b = std::strtol(cells[1].c_str(), &end, 10);
        if (end != cells[1].c_str() + cells[1].size())
            throw ParseError(path, line_no, "invalid vertex index '" + cells[1] + "'");
        double w = 0.0;
        if (!detail::parse_double(cells[2], w) || !std::isfinite(w))
            throw ParseError(path, line_no, "invalid weight '" + cells[2] + "'");
        if (a < 0 || b < 0) throw ParseError(path, line_no, "vertex indices must be nonnegative");
        if (a == b) throw ParseError(path, line_no, "self loops are not allowed");
        if (w < 0.0) throw ParseError(path, line_no, "weights must be nonnegative");
        edges.push_back({static_cast<int>(a), static_cast<int>(b), w});
        max_index = std::max(max_index, static_cast<int>(std::max(a, b)));
    }
    if (!saw_content && declared_vertices < 0)
        throw ParseError(path, std::max(line_no, 1), "no edges found");
    const int n = std::max(declared_vertices, max_index + 1);
    try {
        return Graph(n, std::move(edges));
    } catch (const std::invalid_argument& err) {
        throw ParseError(path, line_no, err.what());
    }
}

/// Point-cloud CSV: one row per point, no header, all cells numeric.
inline Eigen::MatrixXd read_point_cloud_csv(const std::string& path) {
    auto in = detail::open_input(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const auto cells = detail::split(line, ',');
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& cell : cells) {
            double v = 0.0;
            if (!detail::parse_double(cell, v) || !std::isfinite(v))
                throw ParseError(path, line_no, "invalid numeric cell '" + cell + "'");
            row.push_back(v);
        }
        if (rows.empty())
            width = row.size();
        else if (row.size() != width)
            throw ParseError(path, line_no,
                             "row has " + std::to_string(row.size()) + " cells, expected " +
                                 std::to_string(width));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path, std::max(line_no, 1), "no data rows");
    Eigen::MatrixXd points(static_cast<int>(rows.size()), static_cast<int>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j)
            points(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return points;
}

/// Signal CSV: header row of column labels, then n numeric rows. Values are
/// returned raw (not normalized).
inline SignalMatrix read_signals_csv(const std::string& path) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path, 1, "missing header row");
    line = detail::strip_cr(line);
    std::vector<std::string> labels = detail::split(line, ',');
    if (labels.empty()) throw ParseError(path, 1, "empty header row");
    detail::check_unique_labels(labels);

    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const auto cells = detail::split(line, ',');
        if (cells.size() != labels.size())
            throw ParseError(path, line_no,
                             "row has " + std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(labels.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& cell : cells) {
            double v = 0.0;
            if (!detail::parse_double(cell, v) || !std::isfinite(v))
                throw ParseError(path, line_no, "invalid numeric cell '" + cell + "'");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path, line_no, "no data rows");
    SignalMatrix out;
    out.labels = std::move(labels);
    out.values.resize(static_cast<int>(rows.size()), static_cast<int>(out.labels.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < out.labels.size(); ++j)
            out.values(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    out.normalized = false;
    return out;
}

inline void write_signals_csv(const std::string& path, const SignalMatrix& signals) {
    auto out = detail::open_output(path);
    for (std::size_t j = 0; j < signals.labels.size(); ++j)
        out << (j ? "," : "") << signals.labels[j];
    out << '\n';
    for (int i = 0; i < signals.values.rows(); ++i) {
        for (int j = 0; j < signals.values.cols(); ++j)
            out << (j ? "," : "") << detail::format_double(signals.values(i, j));
        out << '\n';
    }
}

/// Labeled square matrix; infinities spelled `inf`.
inline void write_distance_matrix_csv(const std::string& path, const DistanceMatrix& distances) {
    auto out = detail::open_output(path);
    out << "label";
    for (const auto& label : distances.labels) out << ',' << label;
    out << '\n';
    for (int i = 0; i < distances.values.rows(); ++i) {
        out << distances.labels[static_cast<std::size_t>(i)];
        for (int j = 0; j < distances.values.cols(); ++j)
            out << ',' << detail::format_double(distances.values(i, j));
        out << '\n';
    }
}

/// m rows by n columns, first cell of each row is the signal label.
inline void write_embedding_csv(const std::string& path, const EmbeddingMatrix& embedding) {
    auto out = detail::open_output(path);
    for (int i = 0; i < embedding.features.rows(); ++i) {
        out << embedding.labels[static_cast<std::size_t>(i)];
        for (int j = 0; j < embedding.features.cols(); ++j)
            out << ',' << detail::format_double(embedding.features(i, j));
        out << '\n';
    }
}

inline void write_scores_csv(const std::string& path,
                             const std::vector<std::pair<std::string, double>>& scores) {
    auto out = detail::open_output(path);
    out << "label,score\n";
    for (const auto& [label, score] : scores)
        out << label << ',' << detail::format_double(score) << '\n';
}

/// Vertex-indexed witness values with the achieved expectation gap appended
/// as a footer row.
inline void write_witness_csv(const std::string& path, const Eigen::VectorXd& witness,
                              double expectation_gap) {
    auto out = detail::open_output(path);
    out << "vertex,witness\n";
    for (int v = 0; v < witness.size(); ++v)
        out << v << ',' << detail::format_double(witness[v]) << '\n';
    out << "gap," << detail::format_double(expectation_gap) << '\n';
}

}  // namespace gfmmd
