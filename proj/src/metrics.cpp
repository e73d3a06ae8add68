#include "spod/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace spod {

namespace {

std::string format_double(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

}  // namespace

double relative_reconstruction_error(const SpodProblem& problem, const Decomposition& decomposition) {
    return relative_residual(problem, decomposition.frames, decomposition.noise);
}

double pod_truncation_error(const Eigen::Ref<const Matrix>& q, Eigen::Index rank) {
    const Eigen::Index full = std::min(q.rows(), q.cols());
    if (rank < 1 || rank > full)
        throw DomainError("pod_truncation_error: rank must lie in [1, min(M,N)]");
    const double qnorm = q.norm();
    if (qnorm == 0.0) return 0.0;
    Eigen::BDCSVD<Matrix> svd(q, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Matrix approx = svd.matrixU().leftCols(rank) * svd.singularValues().head(rank).asDiagonal() *
                          svd.matrixV().leftCols(rank).transpose();
    return (q - approx).norm() / qnorm;
}

RunReport make_report(const std::string& benchmark, const SpodProblem& problem, const SolveResult& result,
                      Method method) {
    RunReport r;
    r.benchmark = benchmark;
    r.method = std::string(to_string(method));
    r.relative_error = relative_reconstruction_error(problem, result.decomposition);
    r.ranks = result.decomposition.ranks;
    r.iterations = result.decomposition.iterations;
    r.cpu_seconds = result.history.empty() ? 0.0 : result.history.back().seconds;
    r.converged = result.decomposition.converged;
    return r;
}

std::string format_ranks(const std::vector<Eigen::Index>& ranks) {
    std::string out = "(";
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(ranks[i]);
    }
    return out + ")";
}

Table build_table(const std::vector<RunReport>& reports) {
    if (reports.empty()) throw DomainError("build_table: need at least one report");
    Table t;
    t.header = {"benchmark", "method", "relative_error", "ranks", "iterations", "cpu_seconds", "converged"};
    for (const auto& r : reports) {
        t.rows.push_back({r.benchmark, r.method, format_double(r.relative_error, "%.3e"), format_ranks(r.ranks),
                          std::to_string(r.iterations), format_double(r.cpu_seconds, "%.2f"),
                          r.converged ? "yes" : "no"});
    }
    return t;
}

std::string Table::to_text() const {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());

    std::ostringstream os;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) os << "  ";
            os << cells[c];
            if (c + 1 < cells.size()) os << std::string(width[c] - cells[c].size(), ' ');
        }
        os << '\n';
    };
    emit(header);
    std::size_t total = 0;
    for (auto w : width) total += w;
    os << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    for (const auto& row : rows) emit(row);
    return os.str();
}

std::string Table::to_csv() const {
    // Cells never contain commas except the rank tuple, which is quoted.
    auto cell = [](const std::string& s) {
        return s.find(',') == std::string::npos ? s : "\"" + s + "\"";
    };
    std::ostringstream os;
    for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << cell(header[c]);
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << cell(row[c]);
        os << '\n';
    }
    return os.str();
}

}  // namespace spod
