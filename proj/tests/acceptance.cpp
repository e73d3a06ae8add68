// Acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "property_checks.hpp"
#include "spod/metrics.hpp"
#include "spod/solvers.hpp"
#include "spod/synth_bench.hpp"

using namespace spod;

namespace {

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

void info(const std::string& line) {
    std::printf("  info: %s\n", line.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Timed {
    SolveResult result;
    double seconds = 0.0;
};

Timed timed_solve(const SpodProblem& p, const SolverConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    Timed t{solve(p, c)};
    t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return t;
}

std::string summary(const SpodProblem& p, const Timed& t) {
    const auto& d = t.result.decomposition;
    return "rel_error " + fmt("%.3e", relative_reconstruction_error(p, d)) + ", ranks " + format_ranks(d.ranks) +
           ", iterations " + std::to_string(d.iterations) + (d.converged ? "" : " (cap)") + ", " +
           fmt("%.1f s", t.seconds);
}

SolverConfig alm_config(const SpodProblem& p, double lambda_noise, double mu_factor) {
    SolverConfig c;
    c.method = Method::ALM;
    c.lambdas = {1.0};
    c.lambda_noise = lambda_noise;
    c.mu = mu_factor * default_mu(p, MuPreset::SnapshotCount);
    return c;
}

SolverConfig fb_config(Method m) {
    SolverConfig c;
    c.method = m;
    c.lambdas = {0.3};
    c.step_alpha = 0.5;
    return c;
}

bool in_window(int value, double target, double rel) {
    return value >= target * (1.0 - rel) && value <= target * (1.0 + rel);
}

// Fraction of the |mask| largest-magnitude entries of E that lie in the mask.
double mask_hit_rate(const Matrix& e, const std::vector<MatrixIndex>& mask) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(e.size()));
    for (Eigen::Index i = 0; i < e.size(); ++i) order[static_cast<std::size_t>(i)] = i;
    const auto top = static_cast<std::ptrdiff_t>(mask.size());
    std::partial_sort(order.begin(), order.begin() + top, order.end(),
                      [&](Eigen::Index a, Eigen::Index b) { return std::abs(e.data()[a]) > std::abs(e.data()[b]); });
    std::set<Eigen::Index> truth;
    for (const auto& [i, j] : mask) truth.insert(j * e.rows() + i);
    std::size_t hits = 0;
    for (std::ptrdiff_t t = 0; t < top; ++t)
        if (e.data()[order[static_cast<std::size_t>(t)]] != 0.0 && truth.count(order[static_cast<std::size_t>(t)]))
            ++hits;
    return mask.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(mask.size());
}

Matrix truncate(const Matrix& x, Eigen::Index rank) {
    if (rank == 0) return Matrix::Zero(x.rows(), x.cols());
    Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::Index r = std::min(rank, svd.singularValues().size());
    return svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal() *
           svd.matrixV().leftCols(r).transpose();
}

}  // namespace

int main() {
    // Multilinear transport, noise term disabled.
    const Benchmark ml = gen_multilinear(BenchmarkSpec::multilinear());
    const SpodProblem mlp = ml.problem(false);

    const Timed alm = timed_solve(mlp, alm_config(mlp, 0.0, 1.0));
    {
        const auto& d = alm.result.decomposition;
        const double err = relative_reconstruction_error(mlp, d);
        const bool ok = err <= 1e-4 && d.ranks == std::vector<Eigen::Index>{4, 2} && alm.seconds <= 120.0;
        verdict(1, ok, "ALM multilinear: " + summary(mlp, alm) + " [need rel_error <= 1e-4, ranks (4,2), <= 120 s]");
    }

    const Timed jfb = timed_solve(mlp, fb_config(Method::JFB));
    const Timed bfb = timed_solve(mlp, fb_config(Method::BFB));
    {
        bool ok = true;
        std::string detail;
        const double f0 = 0.5 * mlp.snapshot.values.squaredNorm();
        for (const auto* t : {&jfb, &bfb}) {
            const auto& d = t->result.decomposition;
            double prev = f0;
            int increases = 0;
            for (const auto& rec : t->result.history.records) {
                if (rec.objective > prev + 1e-12 * f0) ++increases;
                prev = rec.objective;
            }
            const double err = relative_reconstruction_error(mlp, d);
            ok = ok && err <= 5e-2 && d.ranks == std::vector<Eigen::Index>{4, 2} && increases == 0;
            detail += std::string(t == &jfb ? "JFB: " : "; BFB: ") + summary(mlp, *t) + ", objective increases " +
                      std::to_string(increases);
        }
        verdict(2, ok, detail + " [need rel_error <= 5e-2, ranks (4,2), no increase]");
    }

    // Sine waves with salt-and-pepper noise.
    const Benchmark sn = gen_sine_noise(BenchmarkSpec::sine_noise());
    const SpodProblem snp = sn.problem(true);
    {
        const double lam = alm_noise_weight(snp.snapshot.rows(), snp.frame_count());
        const Timed t = timed_solve(snp, alm_config(snp, lam, 0.1));
        const auto& d = t.result.decomposition;
        const double err = relative_reconstruction_error(snp, d);
        const double hit = mask_hit_rate(d.noise, sn.truth.noise_mask);
        const bool ok = d.ranks == std::vector<Eigen::Index>{4, 1} && err <= 1e-3 && hit >= 0.95;
        verdict(3, ok, "ALM sine+noise, lambda_noise " + fmt("%.4f", lam) + ": " + summary(snp, t) + ", mask hit " +
                           fmt("%.3f", hit) + " [need ranks (4,1), rel_error <= 1e-3, mask hit >= 0.95]");

        const double lam_n = alm_noise_weight_snapshots(snp.snapshot.rows(), snp.snapshot.cols());
        const Timed alt = timed_solve(snp, alm_config(snp, lam_n, 0.1));
        info("same run with lambda_noise 1/sqrt(min(M,N)) = " + fmt("%.4f", lam_n) + ": " + summary(snp, alt) +
             ", mask hit " + fmt("%.3f", mask_hit_rate(alt.result.decomposition.noise, sn.truth.noise_mask)));
    }

    {
        const int na = alm.result.decomposition.iterations, nj = jfb.result.decomposition.iterations;
        const bool ok = in_window(na, 104, 0.3) && in_window(nj, 221, 0.3);
        verdict(4, ok, "ALM " + std::to_string(na) + " iterations, JFB " + std::to_string(nj) +
                           " iterations [need ALM in [72.8, 135.2], JFB in [154.7, 287.3]]");
        info("BFB " + std::to_string(bfb.result.decomposition.iterations) + " iterations");
    }

    {
        const auto checks = spod::testing::run_property_suite(20240611);
        bool ok = true;
        std::string detail;
        for (const auto& c : checks) {
            ok = ok && c.passed();
            detail += (detail.empty() ? "" : "; ") + c.name + " " + std::to_string(c.trials - c.failures) + "/" +
                      std::to_string(c.trials);
        }
        verdict(5, ok, detail);
    }

    {
        // Third frame moving as t^2; the data contain nothing for it to pick up.
        SpodProblem p3 = mlp;
        std::vector<double> s3;
        for (double t : mlp.snapshot.times) s3.push_back(t * t);
        p3.transports.emplace_back(s3, mlp.snapshot.grid);
        const Timed t = timed_solve(p3, alm_config(p3, 0.0, 1.0));
        const double ratio = t.result.decomposition.frames[2].norm() / p3.snapshot.values.norm();
        verdict(6, ratio <= 1e-3, "ALM with extra frame: ||Q3||/||Q|| " + fmt("%.3e", ratio) + ", " + summary(p3, t) +
                                      " [need <= 1e-3]");
    }

    {
        BenchmarkSpec spec = BenchmarkSpec::sine_noise();
        spec.noise_fraction = 0.0;
        const Benchmark clean = gen_sine_noise(spec);
        const SpodProblem cp = clean.problem(false);
        const Timed t = timed_solve(cp, alm_config(cp, 0.0, 1.0));
        const auto& frames = t.result.decomposition.frames;
        // Best split of five modes between the two frames.
        double best = 1e300;
        Eigen::Index best_r1 = 0;
        for (Eigen::Index r1 = 0; r1 <= 5; ++r1) {
            Decomposition d;
            d.frames = {truncate(frames[0], r1), truncate(frames[1], 5 - r1)};
            d.noise = Matrix::Zero(cp.snapshot.rows(), cp.snapshot.cols());
            const double e = relative_reconstruction_error(cp, d);
            if (e < best) {
                best = e;
                best_r1 = r1;
            }
        }
        const double pod = pod_truncation_error(cp.snapshot.values, 5);
        verdict(7, best < pod, "clean sine, total rank 5: sPOD " + fmt("%.3e", best) + " with ranks (" +
                                   std::to_string(best_r1) + "," + std::to_string(5 - best_r1) + "), POD " +
                                   fmt("%.3e", pod) + "; ALM run " + summary(cp, t) + " [need sPOD < POD]");
    }

    std::printf("%d of 7 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
