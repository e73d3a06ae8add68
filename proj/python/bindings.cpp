#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spod/errors.hpp"
#include "spod/grid_transport.hpp"
#include "spod/matrix_io.hpp"
#include "spod/metrics.hpp"
#include "spod/prox.hpp"
#include "spod/solvers.hpp"
#include "spod/synth_bench.hpp"

namespace py = pybind11;
using namespace spod;

namespace {

py::dict history_dict(const ConvergenceHistory& h) {
    const auto n = static_cast<Eigen::Index>(h.records.size());
    Eigen::VectorXi iteration(n);
    Vector criterion(n), objective(n), rel_error(n), noise_l1(n), seconds(n);
    const Eigen::Index k = h.empty() ? 0 : static_cast<Eigen::Index>(h.back().ranks.size());
    Eigen::MatrixXi ranks(n, k);
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto& r = h.records[static_cast<std::size_t>(t)];
        iteration(t) = r.iteration;
        criterion(t) = r.criterion;
        objective(t) = r.objective;
        rel_error(t) = r.rel_error;
        noise_l1(t) = r.noise_l1;
        seconds(t) = r.seconds;
        for (Eigen::Index j = 0; j < k; ++j) ranks(t, j) = static_cast<int>(r.ranks[static_cast<std::size_t>(j)]);
    }
    py::dict d;
    d["iteration"] = iteration;
    d["criterion"] = criterion;
    d["objective"] = objective;
    d["rel_error"] = rel_error;
    d["ranks"] = ranks;
    d["noise_l1"] = noise_l1;
    d["seconds"] = seconds;
    return d;
}

SpodProblem make_problem(const Matrix& q, const std::vector<std::vector<double>>& shifts, const SpatialGrid& grid,
                         std::optional<std::vector<double>> times, bool noise_enabled) {
    SpodProblem p;
    std::vector<double> t;
    if (times) {
        t = *times;
    } else {
        for (Eigen::Index n = 0; n < q.cols(); ++n) t.push_back(static_cast<double>(n));
    }
    p.snapshot = SnapshotMatrix{q, grid, std::move(t)};
    for (const auto& s : shifts) p.transports.emplace_back(s, grid);
    p.noise_enabled = noise_enabled;
    return p;
}

}  // namespace

PYBIND11_MODULE(_robust_spod, m) {
    m.doc() = "Robust shifted proper orthogonal decomposition";

    py::register_exception<DivergedError>(m, "DivergedError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const IoError& e) {
            PyErr_SetString(PyExc_OSError, e.what());
        }
    });

    py::class_<SpatialGrid>(m, "SpatialGrid")
        .def(py::init([](Eigen::Index m_points, double x_min, double dx) {
                 SpatialGrid g{m_points, x_min, dx, true};
                 g.validate();
                 return g;
             }),
             py::arg("m_points"), py::arg("x_min"), py::arg("dx"))
        .def_static("uniform", &SpatialGrid::uniform, py::arg("m"), py::arg("a"), py::arg("b"))
        .def_readonly("m_points", &SpatialGrid::m_points)
        .def_readonly("x_min", &SpatialGrid::x_min)
        .def_readonly("dx", &SpatialGrid::dx)
        .def("coordinate", &SpatialGrid::coordinate)
        .def("length", &SpatialGrid::length)
        .def("__repr__", [](const SpatialGrid& g) {
            return "SpatialGrid(m_points=" + std::to_string(g.m_points) + ", x_min=" + io::format_exact(g.x_min) +
                   ", dx=" + io::format_exact(g.dx) + ")";
        });

    m.def("lagrange_weights", &lagrange_weights, py::arg("f"));
    m.def("apply_shift", &apply_shift, py::arg("q"), py::arg("delta"), py::arg("grid"));

    py::class_<TransportOperator>(m, "TransportOperator")
        .def(py::init<std::vector<double>, SpatialGrid>(), py::arg("shifts"), py::arg("grid"))
        .def_property_readonly("shifts",
                               [](const TransportOperator& op) {
                                   return std::vector<double>(op.shifts().begin(), op.shifts().end());
                               })
        .def_property_readonly("grid", &TransportOperator::grid)
        .def("forward", &TransportOperator::forward, py::arg("q"))
        .def("backward", &TransportOperator::backward, py::arg("q"));

    m.def("soft_threshold", &soft_threshold, py::arg("x"), py::arg("tau"));
    m.def(
        "svt",
        [](const Matrix& x, double tau, double rank_rel_tol) {
            SvtResult r = svt(x, tau, rank_rel_tol);
            return py::make_tuple(r.matrix, r.spectrum_after.values, r.rank_after);
        },
        py::arg("x"), py::arg("tau"), py::arg("rank_rel_tol") = kDefaultRankRelTol,
        "Returns (matrix, thresholded singular values, rank).");
    m.def("singular_values", [](const Matrix& x) { return singular_values(x).values; }, py::arg("x"));
    m.def("nuclear_norm", &nuclear_norm, py::arg("x"));
    m.def("l1_norm", &l1_norm, py::arg("x"));
    m.def(
        "estimate_rank",
        [](const Vector& sigma, double rel_tol) { return estimate_rank(SingularSpectrum{sigma}, rel_tol); },
        py::arg("sigma"), py::arg("rel_tol") = kDefaultRankRelTol);

    py::enum_<Method>(m, "Method").value("JFB", Method::JFB).value("BFB", Method::BFB).value("ALM", Method::ALM);
    py::enum_<MuPreset>(m, "MuPreset")
        .value("SNAPSHOT_COUNT", MuPreset::SnapshotCount)
        .value("FRAME_COUNT", MuPreset::FrameCount);
    py::enum_<AlmNoiseUpdate>(m, "AlmNoiseUpdate")
        .value("SCALED", AlmNoiseUpdate::Scaled)
        .value("LITERAL", AlmNoiseUpdate::Literal);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init([](const std::string& method, std::vector<double> lambdas, double lambda_noise,
                         std::optional<double> step_alpha, std::vector<double> step_alphas, std::optional<double> mu,
                         MuPreset mu_preset, AlmNoiseUpdate alm_noise_update, double delta_tol,
                         std::optional<int> max_iter, double rank_rel_tol) {
                 SolverConfig c;
                 c.method = parse_method(method);
                 c.lambdas = std::move(lambdas);
                 c.lambda_noise = lambda_noise;
                 c.step_alpha = step_alpha;
                 c.step_alphas = std::move(step_alphas);
                 c.mu = mu;
                 c.mu_preset = mu_preset;
                 c.alm_noise_update = alm_noise_update;
                 c.delta_tol = delta_tol;
                 c.max_iter = max_iter;
                 c.rank_rel_tol = rank_rel_tol;
                 return c;
             }),
             py::kw_only(), py::arg("method") = "alm", py::arg("lambdas") = std::vector<double>{1.0},
             py::arg("lambda_noise") = 0.0, py::arg("step_alpha") = py::none(),
             py::arg("step_alphas") = std::vector<double>{}, py::arg("mu") = py::none(),
             py::arg("mu_preset") = MuPreset::SnapshotCount, py::arg("alm_noise_update") = AlmNoiseUpdate::Scaled,
             py::arg("delta_tol") = 1e-5, py::arg("max_iter") = py::none(),
             py::arg("rank_rel_tol") = kDefaultRankRelTol)
        .def_readwrite("method", &SolverConfig::method)
        .def_readwrite("lambdas", &SolverConfig::lambdas)
        .def_readwrite("lambda_noise", &SolverConfig::lambda_noise)
        .def_readwrite("step_alpha", &SolverConfig::step_alpha)
        .def_readwrite("step_alphas", &SolverConfig::step_alphas)
        .def_readwrite("mu", &SolverConfig::mu)
        .def_readwrite("mu_preset", &SolverConfig::mu_preset)
        .def_readwrite("alm_noise_update", &SolverConfig::alm_noise_update)
        .def_readwrite("delta_tol", &SolverConfig::delta_tol)
        .def_readwrite("max_iter", &SolverConfig::max_iter)
        .def_readwrite("rank_rel_tol", &SolverConfig::rank_rel_tol)
        .def("iteration_cap", &SolverConfig::iteration_cap);

    m.def(
        "decompose",
        [](const Matrix& q, const std::vector<std::vector<double>>& shifts, const SpatialGrid& grid,
           const SolverConfig& config, std::optional<std::vector<double>> times) {
            const SpodProblem p = make_problem(q, shifts, grid, std::move(times), config.lambda_noise > 0.0);
            SolveResult r;
            {
                py::gil_scoped_release release;
                r = solve(p, config);
            }
            const auto& d = r.decomposition;
            std::vector<Vector> spectra;
            for (const auto& s : d.spectra) spectra.push_back(s.values);
            py::dict out;
            out["frames"] = d.frames;
            out["noise"] = d.noise;
            out["spectra"] = spectra;
            out["ranks"] = d.ranks;
            out["converged"] = d.converged;
            out["iterations"] = d.iterations;
            out["relative_error"] = relative_reconstruction_error(p, d);
            out["history"] = history_dict(r.history);
            return out;
        },
        py::arg("q"), py::arg("shifts"), py::arg("grid"), py::arg("config"), py::arg("times") = py::none(),
        "Runs one solver. The noise term is active when config.lambda_noise > 0.");

    m.def(
        "default_mu",
        [](const Matrix& q, std::size_t frame_count, MuPreset preset) {
            SpodProblem p;
            p.snapshot.values = q;
            p.transports.resize(frame_count);
            return default_mu(p, preset);
        },
        py::arg("q"), py::arg("frame_count"), py::arg("preset") = MuPreset::SnapshotCount);
    m.def("alm_noise_weight", &alm_noise_weight, py::arg("m_points"), py::arg("frame_count"));
    m.def("alm_noise_weight_snapshots", &alm_noise_weight_snapshots, py::arg("m_points"), py::arg("n_snapshots"));

    m.def(
        "generate",
        [](const std::string& name, std::optional<Eigen::Index> m_points, std::optional<Eigen::Index> n_snapshots,
           std::optional<double> noise_fraction, std::optional<std::uint64_t> seed) {
            BenchmarkSpec spec = BenchmarkSpec::preset(name);
            if (m_points) spec.m = *m_points;
            if (n_snapshots) spec.n = *n_snapshots;
            if (noise_fraction) spec.noise_fraction = *noise_fraction;
            if (seed) spec.seed = *seed;
            const Benchmark b = generate(spec);
            std::vector<std::vector<double>> shifts;
            for (const auto& op : b.transports) shifts.emplace_back(op.shifts().begin(), op.shifts().end());
            Eigen::MatrixXi mask(static_cast<Eigen::Index>(b.truth.noise_mask.size()), 2);
            for (std::size_t i = 0; i < b.truth.noise_mask.size(); ++i) {
                mask(static_cast<Eigen::Index>(i), 0) = static_cast<int>(b.truth.noise_mask[i].first);
                mask(static_cast<Eigen::Index>(i), 1) = static_cast<int>(b.truth.noise_mask[i].second);
            }
            py::dict out;
            out["q"] = b.snapshot.values;
            out["times"] = b.snapshot.times;
            out["grid"] = b.snapshot.grid;
            out["shifts"] = shifts;
            out["frames"] = b.truth.frames;
            out["true_ranks"] = b.truth.true_ranks;
            out["noise_mask"] = mask;
            return out;
        },
        py::arg("name"), py::kw_only(), py::arg("m") = py::none(), py::arg("n") = py::none(),
        py::arg("noise_fraction") = py::none(), py::arg("seed") = py::none());

    m.def("pod_truncation_error", &pod_truncation_error, py::arg("q"), py::arg("rank"));

    m.def("read_matrix", [](const std::string& path) { return io::read_matrix(path); }, py::arg("path"));
    m.def(
        "write_matrix", [](const std::string& path, const Matrix& x) { io::write_matrix(path, x); }, py::arg("path"),
        py::arg("x"));
}
