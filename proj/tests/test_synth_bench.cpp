#include <doctest.h>

#include <set>

#include "spod/errors.hpp"
#include "spod/prox.hpp"
#include "spod/synth_bench.hpp"
#include "support.hpp"

using namespace spod;

namespace {

Matrix reassemble(const Benchmark& b) {
    Matrix q = Matrix::Zero(b.snapshot.rows(), b.snapshot.cols());
    for (std::size_t k = 0; k < b.transports.size(); ++k) q += b.transports[k].forward(b.truth.frames[k]);
    return q;
}

std::vector<Eigen::Index> frame_ranks(const Benchmark& b) {
    std::vector<Eigen::Index> r;
    for (const auto& f : b.truth.frames) r.push_back(estimate_rank(singular_values(f), 1e-7));
    return r;
}

}  // namespace

TEST_CASE("preset defaults") {
    const auto ml = BenchmarkSpec::multilinear();
    CHECK(ml.m == 400);
    CHECK(ml.n == 200);
    CHECK(ml.space_a == -0.5);
    CHECK(ml.space_b == 0.5);
    CHECK(ml.time_1 == 0.5);
    CHECK(ml.delta_width == 0.0125);
    CHECK(ml.noise_fraction == 0.0);
    const auto sn = BenchmarkSpec::sine_noise();
    CHECK(sn.space_b == 0.5);
    CHECK(sn.time_1 == 1.0);
    CHECK(sn.noise_fraction == 0.125);
    CHECK_THROWS_AS(BenchmarkSpec::preset("two_cylinders"), DomainError);
}

TEST_CASE("multilinear ground truth") {
    const Benchmark b = gen_multilinear(BenchmarkSpec::multilinear());
    CHECK(b.snapshot.rows() == 400);
    CHECK(b.snapshot.cols() == 200);
    CHECK(b.truth.true_ranks == std::vector<Eigen::Index>{4, 2});
    CHECK(frame_ranks(b) == b.truth.true_ranks);
    const Matrix& q = b.snapshot.values;
    CHECK((q - reassemble(b)).norm() <= 1e-12 * q.norm());
    // Shifts are whole lattice steps.
    for (const auto& op : b.transports)
        for (double s : op.shifts()) {
            const double cells = s / b.snapshot.grid.dx;
            CHECK(std::abs(cells - std::round(cells)) <= 1e-9);
        }
    // Undoing each transport on its own frame recovers the stationary profile exactly.
    for (std::size_t k = 0; k < 2; ++k)
        CHECK(b.transports[k].backward(b.transports[k].forward(b.truth.frames[k])) == b.truth.frames[k]);
}

TEST_CASE("clean sine benchmark") {
    BenchmarkSpec spec = BenchmarkSpec::sine_noise();
    spec.noise_fraction = 0.0;
    const Benchmark b = gen_sine_noise(spec);
    CHECK(b.truth.true_ranks == std::vector<Eigen::Index>{4, 1});
    CHECK(frame_ranks(b) == b.truth.true_ranks);
    CHECK(b.truth.noise_mask.empty());
    // Off-lattice shifts: the analytic field differs from the interpolated
    // frames by the interpolation error, which must shrink like h^6.
    const double err = (b.snapshot.values - reassemble(b)).norm() / b.snapshot.values.norm();
    CHECK(err <= 5e-5);
    spec.m *= 2;
    const Benchmark fine = gen_sine_noise(spec);
    const double err_fine = (fine.snapshot.values - reassemble(fine)).norm() / fine.snapshot.values.norm();
    CHECK(err / err_fine >= 32.0);
}

TEST_CASE("noisy sine benchmark corrupts exactly 12.5% of entries") {
    const BenchmarkSpec spec = BenchmarkSpec::sine_noise();
    const Benchmark b = gen_sine_noise(spec);
    CHECK(b.truth.noise_mask.size() == 10000);
    std::set<MatrixIndex> distinct(b.truth.noise_mask.begin(), b.truth.noise_mask.end());
    CHECK(distinct.size() == 10000);
    for (const auto& [i, j] : b.truth.noise_mask) CHECK(b.snapshot.values(i, j) == 1.0);
}

TEST_CASE("salt and pepper edge fractions") {
    spod::testing::Rng rng(3);
    const Matrix q = rng.matrix(20, 10);
    const auto none = add_salt_pepper(q, 0.0, 1.0, 1);
    CHECK(none.values == q);
    CHECK(none.mask.empty());
    const auto all = add_salt_pepper(q, 1.0, 7.0, 1);
    CHECK((all.values.array() == 7.0).all());
    CHECK(all.mask.size() == 200);
    CHECK(std::is_sorted(all.mask.begin(), all.mask.end(), [](const MatrixIndex& a, const MatrixIndex& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    }));
    CHECK_THROWS_AS(add_salt_pepper(q, 1.5, 1.0, 1), DomainError);
}

TEST_CASE("fixed seed gives identical masks, different seeds differ") {
    spod::testing::Rng rng(4);
    const Matrix q = rng.matrix(30, 30);
    const auto a = add_salt_pepper(q, 0.2, 1.0, 99);
    const auto b = add_salt_pepper(q, 0.2, 1.0, 99);
    const auto c = add_salt_pepper(q, 0.2, 1.0, 100);
    CHECK(a.mask == b.mask);
    CHECK(a.mask != c.mask);
}

TEST_CASE("time samples exclude the right endpoint") {
    const auto t = BenchmarkSpec::multilinear().times();
    REQUIRE(t.size() == 200);
    CHECK(t.front() == 0.0);
    CHECK(t[1] == doctest::Approx(0.0025));
    CHECK(t.back() < 0.5);
}

TEST_CASE("spec validation") {
    BenchmarkSpec s = BenchmarkSpec::multilinear();
    s.m = 4;
    CHECK_THROWS_AS(s.validate(), DomainError);
    s = BenchmarkSpec::multilinear();
    s.noise_fraction = -0.1;
    CHECK_THROWS_AS(s.validate(), DomainError);
    s = BenchmarkSpec::multilinear();
    s.name = "unknown";
    CHECK_THROWS_AS(generate(s), DomainError);
}

TEST_CASE("smaller multilinear grids keep lattice shifts") {
    BenchmarkSpec s = BenchmarkSpec::multilinear();
    s.m = 64;
    s.n = 32;
    const Benchmark b = generate(s);
    CHECK((b.snapshot.values - reassemble(b)).norm() <= 1e-12 * b.snapshot.values.norm());
}
