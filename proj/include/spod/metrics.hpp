#pragma once

#include <string>
#include <vector>

#include "spod/solvers.hpp"

namespace spod {

/// One (benchmark, method) row of the comparison table.
struct RunReport {
    std::string benchmark;
    std::string method;
    double relative_error = 0.0;
    std::vector<Eigen::Index> ranks;
    int iterations = 0;
    double cpu_seconds = 0.0;
    bool converged = false;
};

/// ||Q - sum_k T^k Q^k - E||_F / ||Q||_F for a finished decomposition.
double relative_reconstruction_error(const SpodProblem& problem, const Decomposition& decomposition);

/// ||Q - Q_R||_F / ||Q||_F with Q_R the best rank-R approximation.
/// Throws DomainError unless 1 <= rank <= min(M, N).
double pod_truncation_error(const Eigen::Ref<const Matrix>& q, Eigen::Index rank);

/// Summarises a solver run. Relative error and ranks come from the stored
/// decomposition, iteration count and timing from the history.
RunReport make_report(const std::string& benchmark, const SpodProblem& problem, const SolveResult& result,
                      Method method);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_text() const;
    std::string to_csv() const;
};

/// Columns: benchmark, method, relative_error, ranks, iterations, cpu_seconds, converged.
/// Throws DomainError for an empty report list.
Table build_table(const std::vector<RunReport>& reports);

/// "(4,2)"-style rendering used in tables.
std::string format_ranks(const std::vector<Eigen::Index>& ranks);

}  // namespace spod
