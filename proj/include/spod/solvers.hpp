#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spod/errors.hpp"
#include "spod/grid_transport.hpp"
#include "spod/prox.hpp"

namespace spod {

enum class Method { JFB, BFB, ALM };

std::string_view to_string(Method method);
/// Accepts "jfb", "bfb", "alm" in any case. Throws DomainError otherwise.
Method parse_method(std::string_view name);

/// Which size enters the default ALM penalty mu0 = size / (4 * ||Q||_1).
enum class MuPreset {
    SnapshotCount,  ///< size = M * N (the value used in the benchmark runs)
    FrameCount,     ///< size = M * K
};

/// How the ALM noise update scales the dual variable.
enum class AlmNoiseUpdate {
    Scaled,   ///< E + R + Y / mu, a gradient step of length 1/mu on the augmented Lagrangian
    Literal,  ///< E + R / mu + Y
};

struct SpodProblem {
    SnapshotMatrix snapshot;
    std::vector<TransportOperator> transports;
    bool noise_enabled = true;

    std::size_t frame_count() const { return transports.size(); }
    void validate() const;
};

struct SolverConfig {
    Method method = Method::ALM;
    /// Either one value shared by all frames or one per frame.
    std::vector<double> lambdas{1.0};
    /// Weight of ||E||_1. Zero pins E to the zero matrix.
    double lambda_noise = 0.0;
    /// FB step size; defaults to 1/K.
    std::optional<double> step_alpha;
    /// Optional BFB per-block steps: K frame steps followed by the noise step.
    std::vector<double> step_alphas;
    /// ALM penalty; defaults to mu0 under mu_preset.
    std::optional<double> mu;
    MuPreset mu_preset = MuPreset::SnapshotCount;
    AlmNoiseUpdate alm_noise_update = AlmNoiseUpdate::Scaled;
    double delta_tol = 1e-5;
    /// Defaults to 5000 for FB methods and 500 for ALM.
    std::optional<int> max_iter;
    double rank_rel_tol = kDefaultRankRelTol;

    double lambda(std::size_t k) const;
    double alpha(std::size_t block, std::size_t frame_count) const;
    int iteration_cap() const;
    /// Throws DomainError on non-positive weights, steps or tolerances.
    void validate(std::size_t frame_count) const;
};

/// mu0 = size / (4 * ||Q||_1); returns 1 for an all-zero snapshot.
double default_mu(const SpodProblem& problem, MuPreset preset = MuPreset::SnapshotCount);

/// Noise weight 1 / sqrt(min(M, K)) with K the number of frames.
double alm_noise_weight(Eigen::Index m_points, std::size_t frame_count);
/// Noise weight 1 / sqrt(min(M, N)) with N the number of snapshots.
double alm_noise_weight_snapshots(Eigen::Index m_points, Eigen::Index n_snapshots);

/// Iterate of any of the three methods. `dual` is only used by ALM.
struct SolverState {
    std::vector<Matrix> frames;
    Matrix noise;
    Matrix dual;
    std::vector<SingularSpectrum> spectra;
    std::vector<Eigen::Index> ranks;

    /// All-zero variables with empty spectra.
    static SolverState zeros(const SpodProblem& problem);
};

struct Decomposition {
    std::vector<Matrix> frames;
    Matrix noise;
    std::vector<SingularSpectrum> spectra;
    std::vector<Eigen::Index> ranks;
    bool converged = false;
    int iterations = 0;
};

struct IterationRecord {
    int iteration = 0;
    /// Stopping quantity: objective F for FB methods, relative residual for ALM.
    double criterion = 0.0;
    double objective = 0.0;
    double rel_error = 0.0;
    std::vector<Eigen::Index> ranks;
    double noise_l1 = 0.0;
    double seconds = 0.0;
};

struct ConvergenceHistory {
    std::vector<IterationRecord> records;

    bool empty() const { return records.empty(); }
    const IterationRecord& back() const { return records.back(); }
};

struct SolveResult {
    Decomposition decomposition;
    ConvergenceHistory history;
};

/// Raised when an iterate turns non-finite. Carries the records completed so far.
class DivergedError : public NumericalError {
public:
    DivergedError(const std::string& what, ConvergenceHistory history)
        : NumericalError(what), history_(std::move(history)) {}
    const ConvergenceHistory& history() const { return history_; }

private:
    ConvergenceHistory history_;
};

/// Q - sum_k T^k Q^k - E.
Matrix residual(const SpodProblem& problem, const std::vector<Matrix>& frames, const Matrix& noise);

/// 1/2 ||R||_F^2 + sum_k lambda_k ||Q^k||_* + lambda_noise ||E||_1.
double objective(const SpodProblem& problem, const std::vector<Matrix>& frames, const Matrix& noise,
                 const SolverConfig& config);

/// ||R||_F / ||Q||_F, or 0 when Q is identically zero.
double relative_residual(const SpodProblem& problem, const std::vector<Matrix>& frames, const Matrix& noise);

struct Gradient {
    std::vector<Matrix> frames;
    Matrix noise;
};

/// Partial gradients of the data term: (-T^{-k} R)_k and -R.
Gradient grad_f(const SpodProblem& problem, const std::vector<Matrix>& frames, const Matrix& noise);

SolverState jfb_iterate(SolverState state, const SpodProblem& problem, const SolverConfig& config);
SolverState bfb_iterate(SolverState state, const SpodProblem& problem, const SolverConfig& config);
SolverState alm_iterate(SolverState state, const SpodProblem& problem, const SolverConfig& config);

/// Runs the configured method from the zero state. FB methods stop once
/// F(x_t) - F(x_{t+1}) <= delta_tol * F(x_t); ALM once the relative residual
/// changes by at most delta_tol of its previous value. Either way the run
/// ends at the iteration cap. Non-finite iterates raise DivergedError.
SolveResult solve(const SpodProblem& problem, const SolverConfig& config);

}  // namespace spod
