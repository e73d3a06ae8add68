#include "spod/solvers.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <string>

namespace spod {

namespace {

bool noise_active(const SpodProblem& problem, const SolverConfig& config) {
    return problem.noise_enabled && config.lambda_noise > 0.0;
}

double resolved_mu(const SpodProblem& problem, const SolverConfig& config) {
    return config.mu ? *config.mu : default_mu(problem, config.mu_preset);
}

void check_shapes(const SpodProblem& problem, const std::vector<Matrix>& frames, const Matrix& noise) {
    const auto& q = problem.snapshot.values;
    if (frames.size() != problem.frame_count())
        throw ShapeError("expected " + std::to_string(problem.frame_count()) + " frames, got " +
                         std::to_string(frames.size()));
    for (const auto& f : frames)
        if (f.rows() != q.rows() || f.cols() != q.cols())
            throw ShapeError("frame shape does not match the snapshot matrix");
    if (noise.rows() != q.rows() || noise.cols() != q.cols())
        throw ShapeError("noise shape does not match the snapshot matrix");
}

// Transported frames T^k Q^k, kept alongside the iterate so block updates
// only re-transport the block that changed.
std::vector<Matrix> transported(const SpodProblem& problem, const std::vector<Matrix>& frames) {
    std::vector<Matrix> out;
    out.reserve(frames.size());
    for (std::size_t k = 0; k < frames.size(); ++k) out.push_back(problem.transports[k].forward(frames[k]));
    return out;
}

Matrix residual_from(const Matrix& q, const std::vector<Matrix>& moved, const Matrix& noise) {
    Matrix r = q - noise;
    for (const auto& m : moved) r -= m;
    return r;
}

void store_prox(SolverState& state, std::size_t k, SvtResult&& prox) {
    state.frames[k] = std::move(prox.matrix);
    state.spectra[k] = std::move(prox.spectrum_after);
    state.ranks[k] = prox.rank_after;
}

}  // namespace

std::string_view to_string(Method method) {
    switch (method) {
        case Method::JFB: return "jfb";
        case Method::BFB: return "bfb";
        case Method::ALM: return "alm";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "jfb") return Method::JFB;
    if (lower == "bfb") return Method::BFB;
    if (lower == "alm") return Method::ALM;
    throw DomainError("unknown method '" + std::string(name) + "' (expected jfb, bfb or alm)");
}

void SpodProblem::validate() const {
    snapshot.validate();
    if (transports.empty())
        throw ShapeError("SpodProblem: at least one transport is required");
    for (const auto& op : transports) {
        if (op.size() != static_cast<std::size_t>(snapshot.cols()))
            throw ShapeError("SpodProblem: transport has " + std::to_string(op.size()) +
                             " shift samples but the snapshot has " + std::to_string(snapshot.cols()) +
                             " columns");
        if (op.grid().m_points != snapshot.grid.m_points)
            throw ShapeError("SpodProblem: transport grid does not match the snapshot grid");
    }
}

double SolverConfig::lambda(std::size_t k) const {
    if (lambdas.size() == 1) return lambdas.front();
    return lambdas.at(k);
}

double SolverConfig::alpha(std::size_t block, std::size_t frame_count) const {
    if (method == Method::BFB && !step_alphas.empty()) return step_alphas.at(block);
    return step_alpha ? *step_alpha : 1.0 / static_cast<double>(frame_count);
}

int SolverConfig::iteration_cap() const {
    if (max_iter) return *max_iter;
    return method == Method::ALM ? 500 : 5000;
}

void SolverConfig::validate(std::size_t frame_count) const {
    if (lambdas.size() != 1 && lambdas.size() != frame_count)
        throw DomainError("SolverConfig: need one lambda or one per frame");
    for (double l : lambdas)
        if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("SolverConfig: lambdas must be positive");
    if (!(lambda_noise >= 0.0) || !std::isfinite(lambda_noise))
        throw DomainError("SolverConfig: lambda_noise must be non-negative");
    if (step_alpha && !(*step_alpha > 0.0)) throw DomainError("SolverConfig: step_alpha must be positive");
    if (!step_alphas.empty()) {
        if (step_alphas.size() != frame_count + 1)
            throw DomainError("SolverConfig: step_alphas needs K+1 entries");
        for (double a : step_alphas)
            if (!(a > 0.0)) throw DomainError("SolverConfig: step_alphas must be positive");
    }
    if (mu && !(*mu > 0.0)) throw DomainError("SolverConfig: mu must be positive");
    if (!(delta_tol > 0.0)) throw DomainError("SolverConfig: delta_tol must be positive");
    if (iteration_cap() <= 0) throw DomainError("SolverConfig: max_iter must be positive");
    if (!(rank_rel_tol > 0.0)) throw DomainError("SolverConfig: rank_rel_tol must be positive");
}

double default_mu(const SpodProblem& problem, MuPreset preset) {
    const auto& q = problem.snapshot.values;
    const double l1 = l1_norm(q);
    if (l1 == 0.0) return 1.0;
    const double rows = static_cast<double>(q.rows());
    const double size = preset == MuPreset::SnapshotCount ? rows * static_cast<double>(q.cols())
                                                          : rows * static_cast<double>(problem.frame_count());
    return size / (4.0 * l1);
}

double alm_noise_weight(Eigen::Index m_points, std::size_t frame_count) {
    return 1.0 / std::sqrt(static_cast<double>(std::min<Eigen::Index>(m_points, static_cast<Eigen::Index>(frame_count))));
}

double alm_noise_weight_snapshots(Eigen::Index m_points, Eigen::Index n_snapshots) {
    return 1.0 / std::sqrt(static_cast<double>(std::min(m_points, n_snapshots)));
}

SolverState SolverState::zeros(const SpodProblem& problem) {
    const auto rows = problem.snapshot.rows();
    const auto cols = problem.snapshot.cols();
    const std::size_t k = problem.frame_count();
    SolverState s;
    s.frames.assign(k, Matrix::Zero(rows, cols));
    s.noise = Matrix::Zero(rows, cols);
    s.dual = Matrix::Zero(rows, cols);
    s.spectra.assign(k, SingularSpectrum{Vector::Zero(std::min(rows, cols))});
    s.ranks.assign(k, 0);
    return s;
}

Matrix residual(const SpodProblem& problem, const std::vector<Matrix>& frames, const Matrix& noise) {
    check_shapes(problem, frames, noise);
    return residual_from(problem.snapshot.values, transported(problem, frames), noise);
}

double objective(const SpodProblem& problem, const std::vector<Matrix>& frames, const Matrix& noise,
                 const SolverConfig& config) {
    const Matrix r = residual(problem, frames, noise);
    double value = 0.5 * r.squaredNorm();
    for (std::size_t k = 0; k < frames.size(); ++k) value += config.lambda(k) * nuclear_norm(frames[k]);
    return value + config.lambda_noise * l1_norm(noise);
}

double relative_residual(const SpodProblem& problem, const std::vector<Matrix>& frames, const Matrix& noise) {
    const double qnorm = problem.snapshot.values.norm();
    const double rnorm = residual(problem, frames, noise).norm();
    return qnorm > 0.0 ? rnorm / qnorm : rnorm;
}

Gradient grad_f(const SpodProblem& problem, const std::vector<Matrix>& frames, const Matrix& noise) {
    const Matrix r = residual(problem, frames, noise);
    Gradient g;
    g.frames.reserve(frames.size());
    for (std::size_t k = 0; k < frames.size(); ++k) g.frames.push_back(-problem.transports[k].backward(r));
    g.noise = -r;
    return g;
}

SolverState jfb_iterate(SolverState state, const SpodProblem& problem, const SolverConfig& config) {
    check_shapes(problem, state.frames, state.noise);
    const std::size_t frame_count = problem.frame_count();
    const double alpha = config.alpha(0, frame_count);
    const Matrix r = residual(problem, state.frames, state.noise);

    for (std::size_t k = 0; k < frame_count; ++k) {
        Matrix step = state.frames[k] + alpha * problem.transports[k].backward(r);
        store_prox(state, k, svt(step, alpha * config.lambda(k), config.rank_rel_tol));
    }
    if (noise_active(problem, config))
        state.noise = soft_threshold(state.noise + alpha * r, alpha * config.lambda_noise);
    return state;
}

SolverState bfb_iterate(SolverState state, const SpodProblem& problem, const SolverConfig& config) {
    check_shapes(problem, state.frames, state.noise);
    const std::size_t frame_count = problem.frame_count();
    const Matrix& q = problem.snapshot.values;
    std::vector<Matrix> moved = transported(problem, state.frames);

    for (std::size_t k = 0; k < frame_count; ++k) {
        const double alpha = config.alpha(k, frame_count);
        const Matrix r = residual_from(q, moved, state.noise);
        Matrix step = state.frames[k] + alpha * problem.transports[k].backward(r);
        store_prox(state, k, svt(step, alpha * config.lambda(k), config.rank_rel_tol));
        moved[k] = problem.transports[k].forward(state.frames[k]);
    }
    if (noise_active(problem, config)) {
        const double alpha = config.alpha(frame_count, frame_count);
        const Matrix r = residual_from(q, moved, state.noise);
        state.noise = soft_threshold(state.noise + alpha * r, alpha * config.lambda_noise);
    }
    return state;
}

SolverState alm_iterate(SolverState state, const SpodProblem& problem, const SolverConfig& config) {
    check_shapes(problem, state.frames, state.noise);
    const std::size_t frame_count = problem.frame_count();
    const Matrix& q = problem.snapshot.values;
    if (state.dual.rows() != q.rows() || state.dual.cols() != q.cols())
        throw ShapeError("alm_iterate: dual variable shape does not match the snapshot matrix");
    const double mu = resolved_mu(problem, config);
    const double inv_mu = 1.0 / mu;
    std::vector<Matrix> moved = transported(problem, state.frames);

    for (std::size_t k = 0; k < frame_count; ++k) {
        // Residual that excludes frame k itself.
        Matrix partial = q - state.noise;
        for (std::size_t l = 0; l < frame_count; ++l)
            if (l != k) partial -= moved[l];
        partial += inv_mu * state.dual;
        store_prox(state, k, svt(problem.transports[k].backward(partial), inv_mu * config.lambda(k),
                                 config.rank_rel_tol));
        moved[k] = problem.transports[k].forward(state.frames[k]);
    }

    if (noise_active(problem, config)) {
        const Matrix r = residual_from(q, moved, state.noise);
        Matrix step = config.alm_noise_update == AlmNoiseUpdate::Scaled
                          ? Matrix(state.noise + r + inv_mu * state.dual)
                          : Matrix(state.noise + inv_mu * r + state.dual);
        state.noise = soft_threshold(step, inv_mu * config.lambda_noise);
    }
    state.dual += mu * residual_from(q, moved, state.noise);
    return state;
}

SolveResult solve(const SpodProblem& problem, const SolverConfig& config) {
    problem.validate();
    config.validate(problem.frame_count());

    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const bool fb = config.method != Method::ALM;
    const int cap = config.iteration_cap();

    SolverState state = SolverState::zeros(problem);
    ConvergenceHistory history;
    // Stopping quantity at the zero initial point.
    double previous = fb ? objective(problem, state.frames, state.noise, config)
                         : relative_residual(problem, state.frames, state.noise);
    bool converged = false;

    for (int it = 1; it <= cap; ++it) {
        try {
            switch (config.method) {
                case Method::JFB: state = jfb_iterate(std::move(state), problem, config); break;
                case Method::BFB: state = bfb_iterate(std::move(state), problem, config); break;
                case Method::ALM: state = alm_iterate(std::move(state), problem, config); break;
            }
        } catch (const NumericalError& e) {
            throw DivergedError("solver diverged at iteration " + std::to_string(it) + ": " + e.what(),
                                std::move(history));
        }

        IterationRecord rec;
        rec.iteration = it;
        const Matrix r = residual(problem, state.frames, state.noise);
        const double qnorm = problem.snapshot.values.norm();
        rec.rel_error = qnorm > 0.0 ? r.norm() / qnorm : r.norm();
        // Frames are SVT outputs, so their nuclear norms are the recorded spectra sums.
        rec.objective = 0.5 * r.squaredNorm();
        for (std::size_t k = 0; k < state.frames.size(); ++k)
            rec.objective += config.lambda(k) * state.spectra[k].values.sum();
        rec.noise_l1 = l1_norm(state.noise);
        rec.objective += config.lambda_noise * rec.noise_l1;
        rec.criterion = fb ? rec.objective : rec.rel_error;
        rec.ranks = state.ranks;
        rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();

        if (!std::isfinite(rec.objective) || !std::isfinite(rec.rel_error)) {
            throw DivergedError("solver diverged at iteration " + std::to_string(it) + " (" +
                                    std::string(to_string(config.method)) + ")",
                                std::move(history));
        }
        history.records.push_back(std::move(rec));

        // F decreases monotonically for FB methods; the ALM residual does not,
        // so its test uses the magnitude of the change.
        const double current = history.back().criterion;
        const double change = fb ? previous - current : std::abs(previous - current);
        if (change <= config.delta_tol * previous) {
            converged = true;
            break;
        }
        previous = current;
    }

    SolveResult result;
    result.decomposition.frames = std::move(state.frames);
    result.decomposition.noise = std::move(state.noise);
    result.decomposition.spectra = std::move(state.spectra);
    result.decomposition.ranks = std::move(state.ranks);
    result.decomposition.converged = converged;
    result.decomposition.iterations = static_cast<int>(history.records.size());
    result.history = std::move(history);
    return result;
}

}  // namespace spod
