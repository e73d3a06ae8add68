#include "spod/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spod/errors.hpp"
#include "spod/matrix_io.hpp"
#include "spod/synth_bench.hpp"

namespace spod::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string_view to_string(MuPreset p) { return p == MuPreset::FrameCount ? "frames" : "snapshots"; }

MuPreset parse_mu_preset(const std::string& s) {
    const std::string l = lower(s);
    if (l == "snapshots") return MuPreset::SnapshotCount;
    if (l == "frames") return MuPreset::FrameCount;
    throw DomainError("unknown mu preset '" + s + "' (expected snapshots or frames)");
}

std::string_view to_string(AlmNoiseUpdate u) { return u == AlmNoiseUpdate::Literal ? "literal" : "scaled"; }

AlmNoiseUpdate parse_noise_update(const std::string& s) {
    const std::string l = lower(s);
    if (l == "scaled") return AlmNoiseUpdate::Scaled;
    if (l == "literal") return AlmNoiseUpdate::Literal;
    throw DomainError("unknown ALM noise update '" + s + "' (expected scaled or literal)");
}

std::string join_ranks(const std::vector<Eigen::Index>& ranks) {
    std::string s;
    for (std::size_t i = 0; i < ranks.size(); ++i) s += (i ? "," : "") + std::to_string(ranks[i]);
    return s;
}

// Numeric value, or one of the named weights that depend on the problem size.
double resolve_lambda_noise(const std::string& text, const SpodProblem& problem) {
    const std::string l = lower(text);
    if (l == "frames") return alm_noise_weight(problem.snapshot.rows(), problem.frame_count());
    if (l == "snapshots") return alm_noise_weight_snapshots(problem.snapshot.rows(), problem.snapshot.cols());
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DomainError("--lambda-noise expects a number, 'frames' or 'snapshots', got '" + text + "'");
    }
}

void write_history_csv(const fs::path& path, const ConvergenceHistory& history, std::size_t frames) {
    std::ostringstream os;
    os << "iter,criterion,rel_error";
    for (std::size_t k = 1; k <= frames; ++k) os << ",rank_" << k;
    os << ",seconds,objective,noise_l1\n";
    for (const auto& r : history.records) {
        os << r.iteration << ',' << io::format_exact(r.criterion) << ',' << io::format_exact(r.rel_error);
        for (std::size_t k = 0; k < frames; ++k) os << ',' << (k < r.ranks.size() ? r.ranks[k] : 0);
        os << ',' << io::format_exact(r.seconds) << ',' << io::format_exact(r.objective) << ','
           << io::format_exact(r.noise_l1) << '\n';
    }
    io::write_file_atomic(path, os.str());
}

void write_spectra(const fs::path& path, const std::vector<SingularSpectrum>& spectra) {
    std::ostringstream os;
    for (const auto& s : spectra) {
        for (Eigen::Index i = 0; i < s.values.size(); ++i) os << (i ? " " : "") << io::format_exact(s.values(i));
        os << '\n';
    }
    io::write_file_atomic(path, os.str());
}

struct DecomposeFlags {
    std::string input_dir;
    std::string q_path, times_path, benchmark, manifest_path, out_dir;
    std::vector<std::string> shift_paths;
    double x_min = 0.0, dx = 0.0;
    std::string method, mu_preset, noise_update, lambda_noise;
    std::vector<double> lambdas, alphas;
    double mu = 0.0, mu_scale = 1.0, alpha = 0.0, tol = 0.0, rank_tol = 0.0;
    int max_iter = 0;
    std::uint64_t seed = 0;
};

struct GenerateFlags {
    std::string name, out_dir;
    Eigen::Index m = 0, n = 0;
    double noise = 0.0, delta = 0.0;
    std::uint64_t seed = 0;
};

struct ReportFlags {
    std::vector<std::string> dirs;
    std::string out_path;
};

int cmd_generate(const CLI::App& sub, const GenerateFlags& f, std::ostream& out) {
    BenchmarkSpec spec = BenchmarkSpec::preset(f.name);
    if (sub.count("--m")) spec.m = f.m;
    if (sub.count("--n")) spec.n = f.n;
    if (sub.count("--noise")) spec.noise_fraction = f.noise;
    if (sub.count("--delta")) spec.delta_width = f.delta;
    if (sub.count("--seed")) spec.seed = f.seed;
    const Benchmark bench = generate(spec);

    const fs::path dir = sub.count("--out") ? fs::path(f.out_dir) : default_output_root() / spec.name;
    fs::create_directories(dir);
    io::write_matrix(dir / "Q.matrix", bench.snapshot.values);
    for (std::size_t k = 0; k < bench.transports.size(); ++k)
        io::write_vector_text(dir / ("shift_" + std::to_string(k + 1) + ".txt"), bench.transports[k].shifts());
    io::write_vector_text(dir / "times.txt", bench.snapshot.times);

    std::ostringstream mask;
    for (const auto& [i, j] : bench.truth.noise_mask) mask << i << ',' << j << '\n';
    io::write_file_atomic(dir / "noise_mask.csv", mask.str());

    const SpatialGrid& g = bench.snapshot.grid;
    io::write_key_values(dir / "meta.txt",
                         {{"benchmark", spec.name},
                          {"m", std::to_string(spec.m)},
                          {"n", std::to_string(spec.n)},
                          {"x_min", io::format_exact(g.x_min)},
                          {"dx", io::format_exact(g.dx)},
                          {"space_a", io::format_exact(spec.space_a)},
                          {"space_b", io::format_exact(spec.space_b)},
                          {"time_0", io::format_exact(spec.time_0)},
                          {"time_1", io::format_exact(spec.time_1)},
                          {"delta_width", io::format_exact(spec.delta_width)},
                          {"noise_fraction", io::format_exact(spec.noise_fraction)},
                          {"seed", std::to_string(spec.seed)},
                          {"frames", std::to_string(bench.transports.size())},
                          {"true_ranks", join_ranks(bench.truth.true_ranks)},
                          {"mask_count", std::to_string(bench.truth.noise_mask.size())}});
    out << "wrote " << spec.name << " (" << spec.m << "x" << spec.n << ", " << bench.transports.size()
        << " frames) to " << dir.string() << '\n';
    return kExitOk;
}

int cmd_decompose(const CLI::App& sub, const DecomposeFlags& f, std::ostream& out, std::ostream& err) {
    RunManifest m;
    if (sub.count("--manifest")) m = manifest_from_json(io::read_file(f.manifest_path));

    if (sub.count("input")) m.inputs = inputs_from_directory(f.input_dir);
    if (sub.count("--q")) m.inputs.q_path = f.q_path;
    if (sub.count("--shift")) m.inputs.shift_paths.assign(f.shift_paths.begin(), f.shift_paths.end());
    if (sub.count("--times")) m.inputs.times_path = fs::path(f.times_path);
    if (sub.count("--x-min")) m.inputs.x_min = f.x_min;
    if (sub.count("--dx")) m.inputs.dx = f.dx;
    if (sub.count("--benchmark")) m.inputs.benchmark = f.benchmark;

    SolverConfig& c = m.config;
    if (sub.count("--method")) c.method = parse_method(f.method);
    if (sub.count("--lambda")) c.lambdas = f.lambdas;
    if (sub.count("--alpha")) c.step_alpha = f.alpha;
    if (sub.count("--alphas")) c.step_alphas = f.alphas;
    if (sub.count("--mu")) c.mu = f.mu;
    if (sub.count("--mu-preset")) c.mu_preset = parse_mu_preset(f.mu_preset);
    if (sub.count("--mu-scale")) m.mu_scale = f.mu_scale;
    if (sub.count("--alm-noise-update")) c.alm_noise_update = parse_noise_update(f.noise_update);
    if (sub.count("--tol")) c.delta_tol = f.tol;
    if (sub.count("--max-iter")) c.max_iter = f.max_iter;
    if (sub.count("--rank-tol")) c.rank_rel_tol = f.rank_tol;
    if (sub.count("--seed")) m.seed = f.seed;

    if (m.inputs.q_path.empty() || m.inputs.shift_paths.empty())
        throw CLI::ValidationError("decompose", "no input: pass a generated directory, or --q and --shift");
    if (!(m.inputs.dx > 0.0)) throw CLI::ValidationError("decompose", "--dx is required when meta.txt is absent");

    m.inputs.q_path = fs::absolute(m.inputs.q_path);
    for (auto& p : m.inputs.shift_paths) p = fs::absolute(p);
    if (m.inputs.times_path) m.inputs.times_path = fs::absolute(*m.inputs.times_path);

    // lambda_noise may be symbolic, and a symbolic value depends on the shape.
    SpodProblem problem = load_problem(m.inputs, false);
    if (sub.count("--lambda-noise")) c.lambda_noise = resolve_lambda_noise(f.lambda_noise, problem);
    problem.noise_enabled = c.lambda_noise > 0.0;
    if (c.method == Method::ALM && !c.mu) c.mu = m.mu_scale * default_mu(problem, c.mu_preset);
    c.validate(problem.frame_count());

    if (sub.count("--out")) m.out_dir = f.out_dir;
    if (m.out_dir.empty()) {
        const std::string label = m.inputs.benchmark.empty() ? "run" : m.inputs.benchmark;
        m.out_dir = default_output_root() / (label + "_" + lower(std::string(spod::to_string(c.method))));
    }
    fs::create_directories(m.out_dir);
    io::write_file_atomic(m.out_dir / "manifest.json", manifest_to_json(m));

    json result = {{"benchmark", m.inputs.benchmark},
                   {"method", spod::to_string(c.method)},
                   {"lambda_noise", c.lambda_noise}};
    if (c.mu) result["mu"] = *c.mu;

    SolveResult sr;
    try {
        sr = solve(problem, c);
    } catch (const DivergedError& e) {
        write_history_csv(m.out_dir / "history.csv", e.history(), problem.frame_count());
        result["status"] = "diverged";
        result["message"] = e.what();
        result["iterations"] = e.history().records.size();
        io::write_file_atomic(m.out_dir / "result.json", result.dump(2) + "\n");
        err << "error: " << e.what() << '\n';
        return kExitDiverged;
    }

    const Decomposition& d = sr.decomposition;
    for (std::size_t k = 0; k < d.frames.size(); ++k)
        io::write_matrix(m.out_dir / ("frame_" + std::to_string(k + 1) + ".matrix"), d.frames[k]);
    io::write_matrix(m.out_dir / "E.matrix", d.noise);
    write_spectra(m.out_dir / "spectra.txt", d.spectra);
    write_history_csv(m.out_dir / "history.csv", sr.history, problem.frame_count());

    const RunReport rep = make_report(m.inputs.benchmark, problem, sr, c.method);
    result["status"] = "ok";
    result["relative_error"] = rep.relative_error;
    result["ranks"] = rep.ranks;
    result["iterations"] = rep.iterations;
    result["cpu_seconds"] = rep.cpu_seconds;
    result["converged"] = rep.converged;
    io::write_file_atomic(m.out_dir / "result.json", result.dump(2) + "\n");

    out << spod::to_string(c.method) << ": rel_error " << io::format_exact(rep.relative_error) << ", ranks "
        << format_ranks(rep.ranks) << ", " << rep.iterations << " iterations"
        << (rep.converged ? "" : " (iteration cap)") << " -> " << m.out_dir.string() << '\n';
    return kExitOk;
}

int cmd_report(const ReportFlags& f, std::ostream& out) {
    std::vector<RunReport> reports;
    for (const auto& d : f.dirs) reports.push_back(read_run_report(d));
    const Table table = build_table(reports);
    const fs::path path = f.out_path.empty() ? default_output_root() / "report.csv" : fs::path(f.out_path);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    io::write_file_atomic(path, table.to_csv());
    out << table.to_text();
    return kExitOk;
}

}  // namespace

fs::path default_output_root() {
    const char* env = std::getenv(kOutputDirEnv);
    return (env && *env) ? fs::path(env) : fs::path("spod_output");
}

std::string manifest_to_json(const RunManifest& m) {
    std::vector<std::string> shifts;
    for (const auto& p : m.inputs.shift_paths) shifts.push_back(p.string());
    const SolverConfig& c = m.config;
    json j = {
        {"inputs",
         {{"benchmark", m.inputs.benchmark},
          {"q", m.inputs.q_path.string()},
          {"shifts", shifts},
          {"times", m.inputs.times_path ? json(m.inputs.times_path->string()) : json(nullptr)},
          {"x_min", m.inputs.x_min},
          {"dx", m.inputs.dx}}},
        {"solver",
         {{"method", spod::to_string(c.method)},
          {"lambdas", c.lambdas},
          {"lambda_noise", c.lambda_noise},
          {"step_alpha", c.step_alpha ? json(*c.step_alpha) : json(nullptr)},
          {"step_alphas", c.step_alphas},
          {"mu", c.mu ? json(*c.mu) : json(nullptr)},
          {"mu_preset", to_string(c.mu_preset)},
          {"mu_scale", m.mu_scale},
          {"alm_noise_update", to_string(c.alm_noise_update)},
          {"delta_tol", c.delta_tol},
          {"max_iter", c.max_iter ? json(*c.max_iter) : json(nullptr)},
          {"rank_rel_tol", c.rank_rel_tol}}},
        {"seed", m.seed},
        {"out_dir", m.out_dir.string()},
    };
    return j.dump(2) + "\n";
}

RunManifest manifest_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("manifest: ") + e.what());
    }
    RunManifest m;
    try {
        const json& in = j.at("inputs");
        m.inputs.benchmark = in.value("benchmark", "");
        m.inputs.q_path = in.at("q").get<std::string>();
        for (const auto& s : in.at("shifts")) m.inputs.shift_paths.emplace_back(s.get<std::string>());
        if (in.contains("times") && !in["times"].is_null()) m.inputs.times_path = in["times"].get<std::string>();
        m.inputs.x_min = in.value("x_min", 0.0);
        m.inputs.dx = in.at("dx").get<double>();

        const json& s = j.at("solver");
        SolverConfig& c = m.config;
        c.method = parse_method(s.at("method").get<std::string>());
        c.lambdas = s.at("lambdas").get<std::vector<double>>();
        c.lambda_noise = s.value("lambda_noise", 0.0);
        if (s.contains("step_alpha") && !s["step_alpha"].is_null()) c.step_alpha = s["step_alpha"].get<double>();
        if (s.contains("step_alphas")) c.step_alphas = s["step_alphas"].get<std::vector<double>>();
        if (s.contains("mu") && !s["mu"].is_null()) c.mu = s["mu"].get<double>();
        c.mu_preset = parse_mu_preset(s.value("mu_preset", "snapshots"));
        m.mu_scale = s.value("mu_scale", 1.0);
        c.alm_noise_update = parse_noise_update(s.value("alm_noise_update", "scaled"));
        c.delta_tol = s.value("delta_tol", c.delta_tol);
        if (s.contains("max_iter") && !s["max_iter"].is_null()) c.max_iter = s["max_iter"].get<int>();
        c.rank_rel_tol = s.value("rank_rel_tol", c.rank_rel_tol);

        m.seed = j.value("seed", std::uint64_t{0});
        m.out_dir = j.value("out_dir", "");
    } catch (const json::exception& e) {
        throw IoError(std::string("manifest: ") + e.what());
    }
    return m;
}

RunInputs inputs_from_directory(const fs::path& dir) {
    RunInputs in;
    in.q_path = dir / "Q.matrix";
    if (!fs::exists(in.q_path)) throw IoError(in.q_path.string() + " does not exist");
    for (int k = 1;; ++k) {
        const fs::path p = dir / ("shift_" + std::to_string(k) + ".txt");
        if (!fs::exists(p)) break;
        in.shift_paths.push_back(p);
    }
    if (fs::exists(dir / "times.txt")) in.times_path = dir / "times.txt";
    if (fs::exists(dir / "meta.txt")) {
        const auto kv = io::read_key_values(dir / "meta.txt");
        auto num = [&](const char* key, double fallback) {
            const auto it = kv.find(key);
            return it == kv.end() ? fallback : std::stod(it->second);
        };
        in.x_min = num("x_min", 0.0);
        in.dx = num("dx", 0.0);
        if (auto it = kv.find("benchmark"); it != kv.end()) in.benchmark = it->second;
    }
    return in;
}

SpodProblem load_problem(const RunInputs& inputs, bool noise_enabled) {
    const std::string ext = lower(inputs.q_path.extension().string());
    Matrix q = ext == ".csv" ? io::read_matrix_csv(inputs.q_path) : io::read_matrix(inputs.q_path);

    SpatialGrid grid;
    grid.m_points = q.rows();
    grid.x_min = inputs.x_min;
    grid.dx = inputs.dx;
    grid.periodic = true;

    std::vector<double> times;
    if (inputs.times_path) {
        times = io::read_vector_text(*inputs.times_path);
    } else {
        for (Eigen::Index n = 0; n < q.cols(); ++n) times.push_back(static_cast<double>(n));
    }

    SpodProblem problem;
    problem.snapshot = SnapshotMatrix{std::move(q), grid, std::move(times)};
    for (const auto& p : inputs.shift_paths) problem.transports.emplace_back(io::read_vector_text(p), grid);
    problem.noise_enabled = noise_enabled;
    problem.validate();
    return problem;
}

RunReport read_run_report(const fs::path& run_dir) {
    const fs::path path = run_dir / "result.json";
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    RunReport r;
    try {
        r.benchmark = j.value("benchmark", "");
        r.method = j.at("method").get<std::string>();
        if (j.value("status", "") != "ok") {
            r.relative_error = std::nan("");
            r.iterations = j.value("iterations", 0);
            return r;
        }
        r.relative_error = j.at("relative_error").get<double>();
        r.ranks = j.at("ranks").get<std::vector<Eigen::Index>>();
        r.iterations = j.at("iterations").get<int>();
        r.cpu_seconds = j.at("cpu_seconds").get<double>();
        r.converged = j.at("converged").get<bool>();
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return r;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust shifted proper orthogonal decomposition", "spod"};
    app.require_subcommand(1);

    GenerateFlags gf;
    auto* gen = app.add_subcommand("generate", "Write a synthetic benchmark to disk");
    gen->add_option("name", gf.name, "Benchmark name")->required()->check(CLI::IsMember({"multilinear", "sine_noise"}));
    gen->add_option("--m", gf.m, "Spatial points")->check(CLI::PositiveNumber);
    gen->add_option("--n", gf.n, "Snapshots")->check(CLI::PositiveNumber);
    gen->add_option("--noise", gf.noise, "Fraction of corrupted entries")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--delta", gf.delta, "Gaussian pulse width")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gf.seed, "Noise seed");
    gen->add_option("--out", gf.out_dir, "Output directory");

    DecomposeFlags df;
    auto* dec = app.add_subcommand("decompose", "Run a solver on a snapshot matrix");
    dec->add_option("input", df.input_dir, "Directory written by generate");
    dec->add_option("--q", df.q_path, "Snapshot matrix (.matrix or .csv)");
    dec->add_option("--shift", df.shift_paths, "Shift file per frame, one value per line")->delimiter(',');
    dec->add_option("--times", df.times_path, "Time samples, one per line");
    dec->add_option("--x-min", df.x_min, "Grid origin");
    dec->add_option("--dx", df.dx, "Grid spacing");
    dec->add_option("--benchmark", df.benchmark, "Label used in reports");
    dec->add_option("--method", df.method, "jfb, bfb or alm")
        ->check(CLI::IsMember({"jfb", "bfb", "alm"}, CLI::ignore_case));
    dec->add_option("--lambda", df.lambdas, "Frame weights: one value, or one per frame")->delimiter(',');
    dec->add_option("--lambda-noise", df.lambda_noise, "Noise weight: number, 'frames' or 'snapshots'");
    dec->add_option("--mu", df.mu, "ALM penalty");
    dec->add_option("--mu-preset", df.mu_preset, "Default penalty size: snapshots or frames");
    dec->add_option("--mu-scale", df.mu_scale, "Factor applied to the default penalty");
    dec->add_option("--alpha", df.alpha, "Forward-backward step size");
    dec->add_option("--alphas", df.alphas, "BFB per-block steps (K frames then noise)")->delimiter(',');
    dec->add_option("--alm-noise-update", df.noise_update, "scaled or literal");
    dec->add_option("--tol", df.tol, "Relative stopping tolerance");
    dec->add_option("--max-iter", df.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
    dec->add_option("--rank-tol", df.rank_tol, "Relative singular value cutoff for rank estimates");
    dec->add_option("--seed", df.seed, "Recorded in the manifest");
    dec->add_option("--manifest", df.manifest_path, "Replay a previous run; flags override its fields");
    dec->add_option("--out", df.out_dir, "Output directory");

    ReportFlags rf;
    auto* rep = app.add_subcommand("report", "Tabulate finished runs");
    rep->add_option("runs", rf.dirs, "Run directories")->required()->expected(1, -1);
    rep->add_option("--out", rf.out_path, "CSV output path");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_generate(*gen, gf, out);
        if (dec->parsed()) return cmd_decompose(*dec, df, out, err);
        return cmd_report(rf, out);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace spod::cli
