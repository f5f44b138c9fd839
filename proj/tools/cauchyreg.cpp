// Command-line driver: solve single experiment runs, sweep convergence
// studies, and run the verification suites.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "cauchyreg/csv.hpp"
#include "cauchyreg/experiments.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace cauchyreg;

namespace {

struct RunConfig {
    std::string problem;
    std::vector<double> eps;
    double m = 0.99;
    std::string kernel = "semilinear";
    std::string mode = "march";
    std::size_t grid_m = 0; // 0 = problem default
    std::size_t grid_k = 0;
    std::size_t modes = 3;
    std::size_t quad_time = 16;
    std::size_t quad_space = 32;
    std::vector<std::uint64_t> seeds{42};
    std::string out = ".";
    std::string format = "csv";
};

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

void apply_json(RunConfig& cfg, const json& j) {
    if (j.contains("problem")) cfg.problem = j.at("problem").get<std::string>();
    if (j.contains("eps")) {
        cfg.eps.clear();
        if (j.at("eps").is_array())
            for (const auto& e : j.at("eps")) cfg.eps.push_back(e.get<double>());
        else
            cfg.eps.push_back(j.at("eps").get<double>());
    }
    if (j.contains("m")) cfg.m = j.at("m").get<double>();
    if (j.contains("kernel")) cfg.kernel = j.at("kernel").get<std::string>();
    if (j.contains("mode")) cfg.mode = j.at("mode").get<std::string>();
    if (j.contains("grid_m")) cfg.grid_m = j.at("grid_m").get<std::size_t>();
    if (j.contains("grid_k")) cfg.grid_k = j.at("grid_k").get<std::size_t>();
    if (j.contains("modes")) cfg.modes = j.at("modes").get<std::size_t>();
    if (j.contains("quad_time")) cfg.quad_time = j.at("quad_time").get<std::size_t>();
    if (j.contains("quad_space")) cfg.quad_space = j.at("quad_space").get<std::size_t>();
    if (j.contains("seeds")) {
        cfg.seeds.clear();
        for (const auto& s : j.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());
    }
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    if (j.contains("format")) cfg.format = j.at("format").get<std::string>();
}

json to_json(const RunConfig& cfg) {
    json j;
    j["problem"] = cfg.problem;
    j["eps"] = cfg.eps;
    j["m"] = cfg.m;
    j["kernel"] = cfg.kernel;
    j["mode"] = cfg.mode;
    j["grid_m"] = cfg.grid_m;
    j["grid_k"] = cfg.grid_k;
    j["modes"] = cfg.modes;
    j["quad_time"] = cfg.quad_time;
    j["quad_space"] = cfg.quad_space;
    j["seeds"] = cfg.seeds;
    j["out"] = cfg.out;
    j["format"] = cfg.format;
    return j;
}

ManufacturedProblem make_problem(const RunConfig& cfg) {
    if (cfg.problem == "example1" || cfg.problem == "example1-poly")
        return example1_problem(Example1Test::Poly, cfg.modes);
    if (cfg.problem == "example1-cossum")
        return example1_problem(Example1Test::CosSum, cfg.modes);
    if (cfg.problem == "example2")
        return example2_problem(cfg.modes);
    throw ConfigError("unknown problem '" + cfg.problem +
                      "' (expected example1, example1-cossum, or example2)");
}

MarchingConfig make_marching(const RunConfig& cfg, const ManufacturedProblem& prob) {
    MarchingConfig mc;
    // benchmark defaults: K=M=20 for example 1, K=M=60 for example 2
    std::size_t def = prob.id == "example2" ? 60 : 20;
    mc.m_steps = cfg.grid_m ? cfg.grid_m : def;
    mc.k_steps = cfg.grid_k ? cfg.grid_k : def;
    mc.quad_time_order = cfg.quad_time;
    mc.quad_space_order = cfg.quad_space;
    if (cfg.mode == "march")
        mc.mode = SolveMode::TimeMarching;
    else if (cfg.mode == "picard")
        mc.mode = SolveMode::GlobalPicard;
    else
        throw ConfigError("unknown mode '" + cfg.mode + "' (expected march or picard)");
    return mc;
}

void validate(const RunConfig& cfg) {
    if (cfg.problem.empty())
        throw ConfigError("missing required field: problem");
    if (cfg.eps.empty())
        throw ConfigError("missing required field: eps");
    for (double e : cfg.eps)
        if (e < 0.0)
            throw ConfigError("eps must be >= 0");
    if (cfg.m <= 0.0 || cfg.m >= 1.0)
        throw ConfigError("m must lie in (0,1)");
    if (cfg.seeds.empty())
        throw ConfigError("missing required field: seeds");
    if (cfg.modes < 1)
        throw ConfigError("modes must be >= 1");
    if (cfg.format != "csv")
        throw ConfigError("unsupported format '" + cfg.format + "' (only csv)");
    static const std::vector<std::string> kernels{"semilinear", "newlinear", "qr",
                                                  "quasiboundary", "truncation"};
    if (std::find(kernels.begin(), kernels.end(), cfg.kernel) == kernels.end())
        throw ConfigError("unknown kernel '" + cfg.kernel + "'");
}

std::string manifest_hash(const json& manifest) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  (unsigned long long)csv::fnv1a(manifest.dump()));
    return buf;
}

std::string grid_csv(const GridSolution& g, const std::string& hash) {
    std::ostringstream os;
    os << "# manifest=" << hash << "\n";
    os << "t\\x";
    for (double x : g.x_grid)
        os << "," << csv::fmt(x);
    os << "\n";
    for (std::size_t i = 0; i < g.t_grid.size(); ++i) {
        os << csv::fmt(g.t_grid[i]);
        for (double v : g.values[i])
            os << "," << csv::fmt(v);
        os << "\n";
    }
    return os.str();
}

std::string errors_csv(const ErrorReport& rep, const std::string& hash) {
    std::ostringstream os;
    os << "# manifest=" << hash << "\n";
    os << "t,E,R\n";
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
        os << csv::fmt(rep.t_grid[i]) << "," << csv::fmt(rep.midpoint_errors[i]) << ","
           << csv::fmt(rep.rrms_errors[i]) << "\n";
    return os.str();
}

std::size_t worker_count() {
    if (const char* env = std::getenv("CAUCHYREG_THREADS")) {
        long n = std::atol(env);
        if (n >= 1)
            return std::size_t(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_solve(const RunConfig& cfg) {
    validate(cfg);
    if (cfg.eps.size() != 1)
        throw ConfigError("solve expects exactly one eps (use study for sweeps)");
    if (cfg.seeds.size() != 1)
        throw ConfigError("solve expects exactly one seed (use study for sweeps)");

    ManufacturedProblem prob = make_problem(cfg);
    MarchingConfig mc = make_marching(cfg, prob);
    const double eps = cfg.eps[0];
    const std::uint64_t seed = cfg.seeds[0];

    RegParams params(eps, cfg.m, prob.horizon);
    CauchyData noisy = add_noise(prob.data, eps, seed);
    GridSolution approx = solve_problem(prob, noisy, params, mc);
    GridSolution exact = prob.exact_grid(mc);
    ErrorReport rep = error_metrics(exact, approx);

    json manifest = to_json(cfg);
    manifest["command"] = "solve";
    std::string hash = manifest_hash(manifest);
    manifest["hash"] = hash;

    fs::path out(cfg.out);
    fs::create_directories(out);
    csv::atomic_write(out / "solution.csv", grid_csv(approx, hash));
    csv::atomic_write(out / "errors.csv", errors_csv(rep, hash));
    csv::atomic_write(out / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "wrote " << (out / "solution.csv").string() << ", errors.csv, manifest.json"
              << " (manifest " << hash << ")\n";
    return 0;
}

int cmd_study(const RunConfig& cfg) {
    validate(cfg);
    ManufacturedProblem prob = make_problem(cfg);
    MarchingConfig mc = make_marching(cfg, prob);
    GridSolution exact = prob.exact_grid(mc);

    struct Cell {
        double eps;
        std::uint64_t seed;
        ErrorReport rep;
        std::string failure;
    };
    std::vector<Cell> cells;
    for (double eps : cfg.eps)
        for (std::uint64_t seed : cfg.seeds)
            cells.push_back({eps, seed, {}, {}});

    std::atomic<std::size_t> cursor{0};
    auto work = [&]() {
        for (;;) {
            std::size_t k = cursor.fetch_add(1);
            if (k >= cells.size())
                return;
            Cell& c = cells[k];
            try {
                RegParams params(c.eps, cfg.m, prob.horizon);
                CauchyData noisy = add_noise(prob.data, c.eps, c.seed);
                GridSolution approx = solve_problem(prob, noisy, params, mc);
                c.rep = error_metrics(exact, approx);
            } catch (const std::exception& e) {
                c.failure = e.what();
            }
        }
    };
    std::size_t nthreads = std::min(worker_count(), cells.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < nthreads; ++w)
        pool.emplace_back(work);
    work();
    for (auto& th : pool)
        th.join();

    json manifest = to_json(cfg);
    manifest["command"] = "study";
    std::string hash = manifest_hash(manifest);
    manifest["hash"] = hash;

    std::ostringstream os;
    os << "# manifest=" << hash << "\n";
    os << "epsilon,m,seed,t,E,R\n";
    StudyDataset ds;
    for (const Cell& c : cells) {
        if (!c.failure.empty()) {
            std::cerr << "cell eps=" << c.eps << " seed=" << c.seed << " failed: " << c.failure
                      << "\n";
            continue;
        }
        for (std::size_t i = 0; i < c.rep.t_grid.size(); ++i) {
            os << csv::fmt(c.eps) << "," << csv::fmt(cfg.m) << "," << c.seed << ","
               << csv::fmt(c.rep.t_grid[i]) << "," << csv::fmt(c.rep.midpoint_errors[i]) << ","
               << csv::fmt(c.rep.rrms_errors[i]) << "\n";
            ds.rows.push_back({c.eps, cfg.m, c.seed, c.rep.t_grid[i], c.rep.midpoint_errors[i],
                               c.rep.rrms_errors[i]});
        }
    }

    // Per-time empirical rate vs the theoretical exponent m(T-t)/T.
    std::ostringstream rs;
    rs << "# manifest=" << hash << "\n";
    rs << "t,empirical_slope,theoretical_slope\n";
    if (cfg.eps.size() >= 2) {
        std::vector<double> t_nodes;
        for (std::size_t i = 0; i <= mc.m_steps; ++i)
            t_nodes.push_back(prob.horizon * double(i) / double(mc.m_steps));
        for (double t : t_nodes) {
            std::vector<double> xs, ys;
            for (double eps : cfg.eps) {
                try {
                    double med = ds.median(eps, t, false);
                    if (med > 0.0) {
                        xs.push_back(eps);
                        ys.push_back(med);
                    }
                } catch (const std::exception&) {
                }
            }
            if (xs.size() >= 2)
                rs << csv::fmt(t) << "," << csv::fmt(loglog_slope(xs, ys)) << ","
                   << csv::fmt(cfg.m * (prob.horizon - t) / prob.horizon) << "\n";
        }
    }

    fs::path out(cfg.out);
    fs::create_directories(out);
    csv::atomic_write(out / "study.csv", os.str());
    csv::atomic_write(out / "rates.csv", rs.str());
    csv::atomic_write(out / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << (out / "study.csv").string() << ", rates.csv, manifest.json"
              << " (manifest " << hash << ")\n";
    return 0;
}

// ---- verification suites -------------------------------------------------

struct CheckPrinter {
    bool all_ok = true;
    void check(const std::string& name, bool ok, double margin) {
        std::cout << (ok ? "PASS" : "FAIL") << " " << name << " (margin " << csv::fmt(margin)
                  << ")\n";
        all_ok = all_ok && ok;
    }
};

int verify_kernels() {
    CheckPrinter out;
    RegParams params(1e-2, 0.99, 1.0);
    const double beta = params.beta();

    // (A): sup over lambda of the new linear kernel is at most 1/(2 beta) + 1/2.
    double cap = 0.5 / beta + 0.5;
    double worst = 0.0;
    for (double lam : {1.0, 4.0, 9.0, 1e2, 1e4, 1e6})
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0})
            worst = std::max(worst, kernel_Q(NewLinear{}, t, lam, params));
    out.check("property (A) boundedness", worst <= cap, cap - worst);

    // (B)/(D): convergence to cosh/sinh as beta decreases.
    double max_gap = 0.0;
    bool monotone = true;
    for (double lam : {1.0, 4.0, 9.0})
        for (double t : {0.3, 0.7, 1.0}) {
            if (std::sqrt(lam) * t > 5.0)
                continue;
            auto [ch, sh] = exact_kernels(t, lam);
            double prev_q = 1e300, prev_r = 1e300;
            for (int k = 1; k <= 8; ++k) {
                RegParams pk = RegParams::with_beta(std::pow(10.0, -k), 1.0);
                double dq = std::abs(kernel_Q(NewLinear{}, t, lam, pk) - ch);
                double dr = std::abs(kernel_R(NewLinear{}, t, lam, pk) - sh);
                monotone = monotone && dq <= prev_q + 1e-15 && dr <= prev_r + 1e-15;
                prev_q = dq;
                prev_r = dr;
                if (k == 8)
                    max_gap = std::max(max_gap, std::max(dq, dr));
            }
        }
    out.check("property (B)/(D) limits", monotone && max_gap < 1e-4, 1e-4 - max_gap);

    // Lemma bounds for Phi and Psi on a (t, s, lambda) grid.
    double min_margin = 1e300;
    for (double b : {1e-2, 1e-4}) {
        RegParams pb = RegParams::with_beta(b, 1.0);
        for (int it = 0; it < 10; ++it)
            for (int is = 0; is <= it; ++is)
                for (int il = 0; il < 10; ++il) {
                    double t = (it + 1) / 10.0;
                    double s = t * is / 10.0;
                    double lam = std::pow(4.0, il);
                    min_margin = std::min(min_margin,
                                          phi_bound(t, pb) - kernel_Phi(t, lam, pb));
                    min_margin = std::min(min_margin, psi_bound(t, s, 1.0, pb) -
                                                          kernel_Psi(t, s, lam, pb));
                }
    }
    out.check("lemma Phi/Psi bounds", min_margin >= 0.0, min_margin);

    // Finite for huge lambda; no growing exponential is ever formed.
    bool finite = true;
    RegParams pf = RegParams::with_beta(1e-2, 1.0);
    for (double lam : {1e6, 1e9, 1e12}) {
        finite = finite && std::isfinite(kernel_Q(NewLinear{}, 0.9, lam, pf));
        finite = finite && std::isfinite(kernel_R(NewLinear{}, 0.9, lam, pf));
        finite = finite && std::isfinite(kernel_Phi(0.9, lam, pf));
        finite = finite && std::isfinite(kernel_Psi(0.9, 0.2, lam, pf));
        finite = finite && std::isfinite(kernel_Q(QuasiBoundary{1.0}, 0.9, lam, pf));
        finite = finite && std::isfinite(kernel_Q(Truncation{}, 0.9, lam, pf));
    }
    out.check("overflow safety to lambda=1e12", finite, finite ? 0.0 : -1.0);

    return out.all_ok ? 0 : 1;
}

int verify_theorem2_suite(const std::string& case_name) {
    Theorem2Case c;
    if (case_name == "i")
        c = Theorem2Case::I;
    else if (case_name == "ii")
        c = Theorem2Case::II;
    else if (case_name == "iii")
        c = Theorem2Case::III;
    else
        throw ConfigError("unknown theorem2 case '" + case_name + "' (expected i, ii, iii)");

    EigenSystem sys{BasisKind::DirichletSine, M_PI, 3};
    SpectralVector phi(sys, {1.0, 0.4, 0.1});
    SpectralVector g(sys, {0.2, -0.3, 0.05});
    CauchyData data(phi, g);

    CheckPrinter out;
    std::vector<double> ts{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    for (double eps : {1e-2, 1e-3, 1e-4})
        for (double m : {0.5, 0.99}) {
            RegParams params(eps, m, 1.0);
            Theorem2Report rep = verify_theorem2(data, params, c, ts, seeds);
            std::ostringstream name;
            name << "theorem2 case " << case_name << " eps=" << eps << " m=" << m;
            out.check(name.str(), rep.all_hold, rep.min_margin);
        }
    return out.all_ok ? 0 : 1;
}

int verify_theorem8_suite() {
    ManufacturedProblem prob = example2_problem(3);
    MarchingConfig mc;
    mc.m_steps = mc.k_steps = 60;
    std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5};
    std::vector<std::uint64_t> seeds{1, 2, 3};
    Theorem8Report rep = verify_theorem8(prob, eps, 0.99, seeds, 0.5, mc);

    CheckPrinter out;
    out.check("theorem8 bound never violated", rep.bounds_hold, 0.0);
    double dev = std::abs(rep.empirical_slope - rep.theoretical_exponent);
    out.check("theorem8 empirical slope within 0.15 of " +
                  csv::fmt(rep.theoretical_exponent) + " (got " +
                  csv::fmt(rep.empirical_slope) + ")",
              dev <= 0.15, 0.15 - dev);
    return out.all_ok ? 0 : 1;
}

int verify_contraction() {
    ManufacturedProblem prob = example2_problem(3);
    MarchingConfig mc;
    mc.m_steps = mc.k_steps = 30;
    mc.mode = SolveMode::GlobalPicard;
    RegParams params(1e-2, 0.99, prob.horizon);
    CauchyData noisy = add_noise(prob.data, 1e-2, 7);
    PicardResult res = picard_solve(noisy, prob.f, params, mc);
    ContractionReport rep = contraction_diagnostics(res.iterate_diffs, params, prob.f,
                                                    eigenvalue(prob.sys, 1));
    CheckPrinter out;
    out.check("picard converged", res.converged, 0.0);
    bool eventually = !rep.observed_ratios.empty() && rep.observed_ratios.back() < 1.0;
    out.check("observed ratios eventually < 1", eventually,
              eventually ? 1.0 - rep.observed_ratios.back() : -1.0);
    out.check("finite m0 with factor < 1", rep.m0 >= 1, double(rep.m0));
    std::cout << "m0 = " << rep.m0 << ", iterations = " << res.iterate_diffs.size() << "\n";
    return out.all_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral regularization of the elliptic Cauchy problem"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    std::vector<std::string> eps_args;
    std::vector<std::string> seed_args;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (flags override)");
        sub->add_option("--problem", cfg.problem, "example1 | example1-cossum | example2");
        sub->add_option("--eps", eps_args, "noise level(s)");
        sub->add_option("--m", cfg.m, "regularization exponent in (0,1)");
        sub->add_option("--kernel", cfg.kernel, "kernel family name");
        sub->add_option("--mode", cfg.mode, "march | picard");
        sub->add_option("--grid-m", cfg.grid_m, "time steps M");
        sub->add_option("--grid-k", cfg.grid_k, "space steps K");
        sub->add_option("--modes", cfg.modes, "truncation term N");
        sub->add_option("--quad-time", cfg.quad_time, "time quadrature order");
        sub->add_option("--quad-space", cfg.quad_space, "space quadrature order");
        sub->add_option("--seed", seed_args, "seed(s)");
        sub->add_option("--seeds", seed_args, "seed list");
        sub->add_option("--out", cfg.out, "output directory");
        sub->add_option("--format", cfg.format, "output format (csv)");
    };

    CLI::App* solve = app.add_subcommand("solve", "single run: solution + error CSVs");
    add_common(solve);
    CLI::App* study = app.add_subcommand("study", "sweep over eps and seeds");
    add_common(study);
    CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
    std::string suite;
    std::string t2_case = "iii";
    verify->add_option("suite", suite, "kernels | theorem2 | theorem8 | contraction")
        ->required();
    verify->add_option("--case", t2_case, "theorem2 case: i | ii | iii");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (verify->parsed()) {
            if (suite == "kernels")
                return verify_kernels();
            if (suite == "theorem2")
                return verify_theorem2_suite(t2_case);
            if (suite == "theorem8")
                return verify_theorem8_suite();
            if (suite == "contraction")
                return verify_contraction();
            throw ConfigError("unknown suite '" + suite +
                              "' (expected kernels, theorem2, theorem8, contraction)");
        }

        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in)
                throw ConfigError("cannot read config file " + config_path);
            json j = json::parse(in);
            RunConfig base;
            apply_json(base, j);
            // flags given on the command line override config values
            if (cfg.problem.empty()) cfg.problem = base.problem;
            if (eps_args.empty()) cfg.eps = base.eps;
            if (seed_args.empty()) cfg.seeds = base.seeds;
            if (cfg.m == 0.99 && j.contains("m")) cfg.m = base.m;
            if (cfg.kernel == "semilinear" && j.contains("kernel")) cfg.kernel = base.kernel;
            if (cfg.mode == "march" && j.contains("mode")) cfg.mode = base.mode;
            if (cfg.grid_m == 0) cfg.grid_m = base.grid_m;
            if (cfg.grid_k == 0) cfg.grid_k = base.grid_k;
            if (cfg.modes == 3 && j.contains("modes")) cfg.modes = base.modes;
            if (cfg.quad_time == 16 && j.contains("quad_time")) cfg.quad_time = base.quad_time;
            if (cfg.quad_space == 32 && j.contains("quad_space"))
                cfg.quad_space = base.quad_space;
            if (cfg.out == "." && j.contains("out")) cfg.out = base.out;
            if (cfg.format == "csv" && j.contains("format")) cfg.format = base.format;
        }
        if (!eps_args.empty()) {
            cfg.eps.clear();
            for (const auto& s : eps_args)
                cfg.eps.push_back(std::stod(s));
        }
        if (!seed_args.empty()) {
            cfg.seeds.clear();
            for (const auto& s : seed_args)
                cfg.seeds.push_back(std::stoull(s));
        }

        if (solve->parsed())
            return cmd_solve(cfg);
        if (study->parsed())
            return cmd_study(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
