#include "roms/pipeline.hpp"
#include "roms/rom.hpp"
#include "roms/version.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>

namespace fs = std::filesystem;
using namespace roms;

namespace {

struct ConfigOpts {
    std::string file;
    std::vector<std::string> sets;
};

void add_config_flags(CLI::App* sub, ConfigOpts& c) {
    sub->add_option("--config", c.file, "key=value configuration file");
    sub->add_option("--set", c.sets, "override one configuration key (key=value)")
        ->take_all();
}

ExperimentConfig make_config(const ConfigOpts& c) {
    ExperimentConfig cfg = default_config();
    if (!c.file.empty()) load_config_file(cfg, c.file);
    for (const std::string& kv : c.sets) apply_config_line(cfg, kv, "--set");
    return cfg;
}

IndexWindow parse_window(const std::string& text) {
    std::size_t colon = text.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
        throw ConfigError("window: expected lo:hi, got '" + text + "'");
    IndexWindow w;
    try {
        w.lo = std::stoi(text.substr(0, colon));
        w.hi = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("window: expected lo:hi, got '" + text + "'");
    }
    if (!w.valid()) throw ConfigError("window: need 1 <= lo <= hi");
    return w;
}

std::pair<double, double> parse_span(const std::string& text) {
    std::size_t colon = text.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
        throw ConfigError("tspan: expected lo:hi, got '" + text + "'");
    double lo = 0, hi = 0;
    try {
        lo = std::stod(text.substr(0, colon));
        hi = std::stod(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("tspan: expected lo:hi, got '" + text + "'");
    }
    if (!(hi > lo)) throw ConfigError("tspan: need hi > lo");
    return {lo, hi};
}

GLDomain domain_from(const ExperimentConfig& cfg) {
    GLDomain d;
    d.x_min = cfg.get_double("x_min");
    d.x_max = cfg.get_double("x_max");
    d.n = cfg.get_int("grid_n");
    d.t_final = cfg.get_double("t_final");
    d.snapshot_count = static_cast<int>(cfg.get_int("snapshots"));
    d.initial.profile = cfg.get("profile");
    d.initial.amplitude = cfg.get_double("amplitude");
    d.initial.mode = static_cast<int>(cfg.get_int("ic_mode"));
    return d;
}

SimulateOptions sim_opts_from(const ExperimentConfig& cfg, const std::string& regime) {
    SimulateOptions o;
    o.rtol = cfg.get_double("rtol");
    o.atol = cfg.get_double("atol");
    o.regime = regime;
    return o;
}

// A library directory holds modes_<label>.txt per regime plus optional
// states_<label>.txt with held-out snapshots, exactly as `run` writes them.
struct LoadedLibrary {
    RegimeLibrary<Cplx> lib;
    std::vector<LabeledState<Cplx>> validation;
};

LoadedLibrary read_library_dir(const std::string& dir, bool need_states) {
    if (!fs::is_directory(dir))
        throw IoError("library directory not found: " + dir);
    std::vector<std::string> labels;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (name.size() > 10 && name.rfind("modes_", 0) == 0 &&
            name.compare(name.size() - 4, 4, ".txt") == 0)
            labels.push_back(name.substr(6, name.size() - 10));
    }
    std::sort(labels.begin(), labels.end());
    if (labels.size() < 2)
        throw InvalidInput("library directory needs at least two modes_<label>.txt files: " +
                           dir);

    LoadedLibrary out;
    Index total = 0;
    for (const std::string& label : labels) {
        Matrix<Cplx> modes = read_matrix<Cplx>((fs::path(dir) / ("modes_" + label + ".txt")).string());
        if (!out.lib.sublibraries.empty() && modes.rows() != out.lib.dim())
            throw DimensionError("library directory: regime '" + label +
                                 "' has mismatched state dimension");
        out.lib.regime_ids.push_back(label);
        out.lib.sublibraries.push_back(
            PODBasis<Cplx>{modes, Eigen::VectorXd::Ones(modes.cols()), 1.0});
        total += modes.cols();
        if (out.lib.concat.rows() == 0) out.lib.concat.resize(modes.rows(), 0);
    }
    out.lib.concat.resize(out.lib.sublibraries.front().dim(), total);
    Index col = 0;
    for (const auto& b : out.lib.sublibraries) {
        out.lib.concat.middleCols(col, b.rank()) = b.modes;
        col += b.rank();
    }
    for (const std::string& label : labels) {
        fs::path p = fs::path(dir) / ("states_" + label + ".txt");
        if (!fs::exists(p)) continue;
        Matrix<Cplx> states = read_matrix<Cplx>(p.string());
        if (states.rows() != out.lib.dim())
            throw DimensionError("library directory: states for '" + label +
                                 "' have mismatched state dimension");
        for (Index j = 0; j < states.cols(); ++j)
            out.validation.push_back({label, states.col(j)});
    }
    if (need_states && out.validation.empty())
        throw InvalidInput("library directory has no states_<label>.txt files: " + dir);
    return out;
}

std::vector<LabeledState<Cplx>> read_states_dir(const std::string& dir) {
    if (!fs::is_directory(dir))
        throw IoError("states directory not found: " + dir);
    std::vector<std::pair<std::string, std::string>> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (name.size() > 11 && name.rfind("states_", 0) == 0 &&
            name.compare(name.size() - 4, 4, ".txt") == 0)
            found.emplace_back(name.substr(7, name.size() - 11), entry.path().string());
    }
    std::sort(found.begin(), found.end());
    if (found.empty())
        throw InvalidInput("no states_<label>.txt files in: " + dir);
    std::vector<LabeledState<Cplx>> out;
    for (const auto& [label, path] : found) {
        Matrix<Cplx> states = read_matrix<Cplx>(path);
        for (Index j = 0; j < states.cols(); ++j)
            out.push_back({label, states.col(j)});
    }
    return out;
}

GAConfig ga_config_from(const ExperimentConfig& cfg) {
    GAConfig g;
    g.population = static_cast<int>(cfg.get_int("ga_population"));
    g.elite = static_cast<int>(cfg.get_int("ga_elite"));
    g.generations = static_cast<int>(cfg.get_int("ga_generations"));
    g.mutation_prob = cfg.get_double("ga_mutation");
    g.mutation_radius = static_cast<int>(cfg.get_int("ga_radius"));
    g.seed = cfg.get_seed();
    g.margin_min = cfg.get_double("margin_min");
    return g;
}

// ---- subcommand bodies -------------------------------------------------

struct SimulateOpts {
    ConfigOpts config;
    std::string regime;
    std::optional<long> n, snapshots;
    std::optional<double> tfinal;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int run_simulate(const SimulateOpts& o) {
    ExperimentConfig cfg = make_config(o.config);
    if (o.n) set_config_value(cfg, "grid_n", std::to_string(*o.n));
    if (o.tfinal) set_config_value(cfg, "t_final", format_value(*o.tfinal));
    if (o.snapshots) set_config_value(cfg, "snapshots", std::to_string(*o.snapshots));
    if (o.seed) set_config_value(cfg, "seed", std::to_string(*o.seed));
    SnapshotSet<Cplx> snap = simulate(regime_params(o.regime), domain_from(cfg),
                                      cfg.get_seed(), sim_opts_from(cfg, o.regime));
    write_matrix(o.out, snap.data);
    std::printf("wrote %s: %lld x %lld complex snapshots, t in [0, %s]\n", o.out.c_str(),
                static_cast<long long>(snap.dim()), static_cast<long long>(snap.count()),
                format_value(cfg.get_double("t_final")).c_str());
    return 0;
}

struct PodOpts {
    ConfigOpts config;
    std::string snapshots, out;
    std::optional<long> rank;
    std::optional<double> energy;
};

template <typename Scalar>
int pod_body(const PodOpts& o, const ExperimentConfig& cfg) {
    Matrix<Scalar> X = read_matrix<Scalar>(o.snapshots);
    Truncation trunc = o.rank ? Truncation::rank(static_cast<Index>(*o.rank))
                              : Truncation::energy(o.energy ? *o.energy
                                                            : cfg.get_double("energy"));
    PODBasis<Scalar> basis = compute_pod(X, trunc);
    write_matrix(o.out, basis.modes);
    std::printf("rank=%lld energy_captured=%s\n", static_cast<long long>(basis.rank()),
                format_value(basis.energy_captured).c_str());
    return 0;
}

int run_pod(const PodOpts& o) {
    if (o.rank && o.energy)
        throw ConfigError("pod: --rank and --energy are mutually exclusive");
    ExperimentConfig cfg = make_config(o.config);
    return read_matrix_header(o.snapshots).complex_field ? pod_body<Cplx>(o, cfg)
                                                         : pod_body<double>(o, cfg);
}

struct DeimOpts {
    ConfigOpts config;
    std::string basis, out;
    long m = 3;
    long drop_first = 0;
};

template <typename Scalar>
int deim_body(const DeimOpts& o) {
    Matrix<Scalar> Xi = read_matrix<Scalar>(o.basis);
    IndexSet idx = deim_plus_k(Xi, static_cast<int>(o.m), static_cast<int>(o.drop_first));
    write_index_set(o.out, idx);
    std::printf("wrote %s:", o.out.c_str());
    for (int i : idx.values) std::printf(" %d", i);
    std::printf("\n");
    return 0;
}

int run_deim(const DeimOpts& o) {
    return read_matrix_header(o.basis).complex_field ? deim_body<Cplx>(o)
                                                     : deim_body<double>(o);
}

struct GappyFitOpts {
    ConfigOpts config;
    std::string library, indices, state, report;
};

int run_gappy_fit(const GappyFitOpts& o) {
    ExperimentConfig cfg = make_config(o.config);
    Matrix<Cplx> modes = read_matrix<Cplx>(o.library);
    Matrix<Cplx> states = read_matrix<Cplx>(o.state);
    if (states.rows() != modes.rows())
        throw DimensionError("gappy-fit: state dimension " + std::to_string(states.rows()) +
                             " != library dimension " + std::to_string(modes.rows()));
    IndexSet idx = read_index_set(o.indices, static_cast<int>(modes.rows()));
    PODBasis<Cplx> basis{modes, Eigen::VectorXd::Ones(modes.cols()), 1.0};
    GappySystem<Cplx> sys = make_gappy_system(basis, idx);
    if (sys.rank_deficient)
        std::fprintf(stderr,
                     "warning: sampled system rank %lld < %lld modes; minimum-norm fit\n",
                     static_cast<long long>(sys.numerical_rank),
                     static_cast<long long>(modes.cols()));
    std::ofstream out(o.report);
    if (!out) throw IoError("cannot write: " + o.report);
    out << provenance_header(cfg) << "\n";
    out << "snapshot_index,rel_error\n";
    for (Index j = 0; j < states.cols(); ++j) {
        Vector<Cplx> u = states.col(j);
        ReducedState<Cplx> a = gappy_fit(sys, sample_entries(u, idx));
        out << (j + 1) << ',' << format_value(reconstruction_error(u, reconstruct(sys, a)))
            << "\n";
    }
    std::printf("wrote %s: %lld snapshots\n", o.report.c_str(),
                static_cast<long long>(states.cols()));
    return 0;
}

struct ClassifyOpts {
    ConfigOpts config;
    std::string library_dir, indices, state, report;
    std::optional<double> noise;
    std::optional<long> rounds;
    std::optional<std::uint64_t> seed;
};

int run_classify(const ClassifyOpts& o) {
    ExperimentConfig cfg = make_config(o.config);
    if (o.noise) set_config_value(cfg, "noise_frac", format_value(*o.noise));
    if (o.rounds) set_config_value(cfg, "noise_rounds", std::to_string(*o.rounds));
    if (o.seed) set_config_value(cfg, "seed", std::to_string(*o.seed));
    const double frac = cfg.get_double("noise_frac");
    const int rounds = static_cast<int>(cfg.get_int("noise_rounds"));
    const std::uint64_t seed = cfg.get_seed();

    LoadedLibrary loaded = read_library_dir(o.library_dir, false);
    Matrix<Cplx> states = read_matrix<Cplx>(o.state);
    if (states.rows() != loaded.lib.dim())
        throw DimensionError("classify: state dimension != library dimension");
    IndexSet idx = read_index_set(o.indices, static_cast<int>(loaded.lib.dim()));

    std::ofstream out(o.report);
    if (!out) throw IoError("cannot write: " + o.report);
    out << provenance_header(cfg) << "\n";
    out << "snapshot_index,predicted,margin,stability\n";
    for (Index j = 0; j < states.cols(); ++j) {
        Vector<Cplx> samples = sample_entries(Vector<Cplx>(states.col(j)), idx);
        ClassificationResult res = classify(loaded.lib, idx, samples);
        // Stability: fraction of noisy redraws that repeat the clean label.
        int agree = 0;
        for (int t = 0; t < rounds; ++t) {
            std::mt19937_64 rng =
                rng_stream(seed, static_cast<std::uint64_t>(j) * rounds +
                                     static_cast<std::uint64_t>(t));
            Vector<Cplx> noisy = samples;
            add_sample_noise(noisy, frac, rng);
            if (classify(loaded.lib, idx, noisy).predicted == res.predicted) ++agree;
        }
        out << (j + 1) << ',' << res.predicted << ',' << format_value(res.margin) << ','
            << format_value(static_cast<double>(agree) / rounds) << "\n";
    }
    std::printf("wrote %s: %lld states against %d regimes\n", o.report.c_str(),
                static_cast<long long>(states.cols()), loaded.lib.regime_count());
    return 0;
}

struct GaOpts {
    ConfigOpts config;
    std::string start, library_dir, validation, trace, out, window;
    std::optional<long> pop, elite, gens, radius;
    std::optional<double> mutation;
    std::optional<std::uint64_t> seed;
};

int run_ga(const GaOpts& o) {
    ExperimentConfig cfg = make_config(o.config);
    if (o.pop) set_config_value(cfg, "ga_population", std::to_string(*o.pop));
    if (o.elite) set_config_value(cfg, "ga_elite", std::to_string(*o.elite));
    if (o.gens) set_config_value(cfg, "ga_generations", std::to_string(*o.gens));
    if (o.mutation) set_config_value(cfg, "ga_mutation", format_value(*o.mutation));
    if (o.radius) set_config_value(cfg, "ga_radius", std::to_string(*o.radius));
    if (o.seed) set_config_value(cfg, "seed", std::to_string(*o.seed));

    LoadedLibrary loaded = read_library_dir(o.library_dir, o.validation.empty());
    std::vector<LabeledState<Cplx>> validation =
        o.validation.empty() ? std::move(loaded.validation) : read_states_dir(o.validation);
    IndexSet start = read_index_set(o.start, static_cast<int>(loaded.lib.dim()));

    GAConfig g = ga_config_from(cfg);
    if (!o.window.empty()) g.window = parse_window(o.window);
    EvolveResult res = evolve(start, loaded.lib, validation, g);
    if (!o.trace.empty()) write_ga_trace(o.trace, res.trace, cfg);
    write_index_set(o.out, res.best.index_set);
    std::printf("best error %s (%s) at [%s]\n", format_value(res.best.error).c_str(),
                res.best.feasible ? "feasible" : "infeasible",
                join_indices(res.best.index_set).c_str());
    return 0;
}

struct BruteOpts {
    ConfigOpts config;
    std::string library_dir, window, out, histograms;
    std::optional<long> k, rounds;
    std::optional<double> accuracy, noise;
    std::optional<std::uint64_t> seed;
};

int run_brute(const BruteOpts& o) {
    ExperimentConfig cfg = make_config(o.config);
    if (o.k) set_config_value(cfg, "subset_size", std::to_string(*o.k));
    if (o.rounds) set_config_value(cfg, "noise_rounds", std::to_string(*o.rounds));
    if (o.accuracy) set_config_value(cfg, "accuracy_min", format_value(*o.accuracy));
    if (o.noise) set_config_value(cfg, "noise_frac", format_value(*o.noise));
    if (o.seed) set_config_value(cfg, "seed", std::to_string(*o.seed));
    IndexWindow w = o.window.empty() ? cfg.window() : parse_window(o.window);
    if (!o.window.empty()) {
        set_config_value(cfg, "window_lo", std::to_string(w.lo));
        set_config_value(cfg, "window_hi", std::to_string(w.hi));
    }

    LoadedLibrary loaded = read_library_dir(o.library_dir, true);
    NoiseSpec noise{cfg.get_double("noise_frac"),
                    static_cast<int>(cfg.get_int("noise_rounds")),
                    cfg.get_double("accuracy_min"), cfg.get_seed(),
                    cfg.get_double("margin_min")};
    const int k = static_cast<int>(cfg.get_int("subset_size"));
    BruteResult res = exhaustive_search(loaded.lib, k, w, loaded.validation, noise);
    write_brute_csv(o.out, res, cfg);
    if (!o.histograms.empty()) {
        auto hist = position_histograms(res.ranked, k, w);
        std::ofstream out(o.histograms);
        if (!out) throw IoError("cannot write: " + o.histograms);
        out << provenance_header(cfg) << "\n";
        out << "slot,position,count\n";
        for (std::size_t s = 0; s < hist.size(); ++s)
            for (std::size_t p = 0; p < hist[s].size(); ++p)
                out << (s + 1) << ',' << (p + 1) << ',' << hist[s][p] << "\n";
    }
    std::printf("candidates=%llu stage1=%llu retained=%zu\n",
                static_cast<unsigned long long>(res.candidates_total),
                static_cast<unsigned long long>(res.stage1_survivors), res.ranked.size());
    if (!res.ranked.empty())
        std::printf("optimum [%s] error %s\n", join_indices(res.ranked.front().indices).c_str(),
                    format_value(res.ranked.front().error).c_str());
    return 0;
}

struct RomOpts {
    ConfigOpts config;
    std::string regime, rank = "auto", indices, tspan = "0:10", report;
    long m = 10;
    std::optional<std::uint64_t> seed;
};

int run_rom(const RomOpts& o) {
    ExperimentConfig cfg = make_config(o.config);
    if (o.seed) set_config_value(cfg, "seed", std::to_string(*o.seed));
    auto [t_lo, t_hi] = parse_span(o.tspan);
    GLDomain domain = domain_from(cfg);
    if (t_hi > domain.t_final + 1e-12)
        throw ConfigError("rom: tspan exceeds t_final=" +
                          format_value(domain.t_final));

    GLParams params = regime_params(o.regime);
    SnapshotSet<Cplx> full =
        simulate(params, domain, cfg.get_seed(), sim_opts_from(cfg, o.regime));

    // Basis from post-transient snapshots, as in library construction.
    const Index drop = static_cast<Index>(
        std::floor(static_cast<double>(full.count()) * cfg.get_double("transient_fraction")));
    Matrix<Cplx> train = full.data.rightCols(full.count() - drop);
    Truncation trunc = o.rank == "auto"
                           ? Truncation::energy(cfg.get_double("energy"))
                           : Truncation::rank(static_cast<Index>(std::stol(o.rank)));
    PODBasis<Cplx> basis = compute_pod(train, trunc);

    Matrix<Cplx> nl(train.rows(), train.cols());
    Vector<Cplx> work;
    for (Index j = 0; j < train.cols(); ++j) {
        Vector<Cplx> u = train.col(j);
        nonlinear_term(u, params, work);
        nl.col(j) = work;
    }
    IndexSet idx = o.indices.empty()
                       ? IndexSet{}
                       : read_index_set(o.indices, static_cast<int>(domain.n));
    const int m = o.indices.empty() ? static_cast<int>(o.m)
                                    : static_cast<int>(idx.size());
    PODBasis<Cplx> nl_basis = compute_pod(nl, Truncation::rank(m));
    if (o.indices.empty()) idx = deim_indices(nl_basis, m);
    DeimProjector<Cplx> proj = build_projector(nl_basis.modes, idx);

    SpectralLinearAction L(params, domain);
    ReducedModel<Cplx> model = galerkin_reduce_action(L, basis, proj);

    // Integrate from the first snapshot inside the span, compare on the rest.
    std::size_t i0 = 0;
    while (i0 + 1 < full.times.size() && full.times[i0] < t_lo - 1e-12) ++i0;
    std::vector<double> times;
    for (std::size_t i = i0; i < full.times.size() && full.times[i] <= t_hi + 1e-12; ++i)
        times.push_back(full.times[i]);
    if (times.size() < 2) throw ConfigError("rom: tspan covers fewer than two snapshots");

    Vector<Cplx> a0 = project(basis, Vector<Cplx>(full.data.col(static_cast<Index>(i0)))).coeffs;
    OdeOptions opts;
    opts.rtol = cfg.get_double("rtol");
    opts.atol = cfg.get_double("atol");
    std::vector<Vector<Cplx>> coeffs =
        rom_integrate(model, a0, times, opts, pointwise_nonlinearity(params));

    std::ofstream out(o.report);
    if (!out) throw IoError("cannot write: " + o.report);
    out << provenance_header(cfg) << "\n";
    out << "t,rom_vs_full_rel_error\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        Vector<Cplx> rec = basis.modes * coeffs[i];
        double err = reconstruction_error(
            Vector<Cplx>(full.data.col(static_cast<Index>(i0 + i))), rec);
        worst = std::max(worst, err);
        out << format_value(times[i]) << ',' << format_value(err) << "\n";
    }
    std::printf("rank=%lld m=%d worst_rel_error=%s over t in [%s, %s]\n",
                static_cast<long long>(basis.rank()), m, format_value(worst).c_str(),
                format_value(times.front()).c_str(), format_value(times.back()).c_str());
    return 0;
}

struct CompareOpts {
    ConfigOpts config;
    std::string out_dir;
};

int run_compare(const CompareOpts& o) {
    ExperimentConfig cfg = make_config(o.config);
    if (!o.out_dir.empty()) set_config_value(cfg, "out_dir", o.out_dir);
    fs::path dir = cfg.get("out_dir");
    fs::create_directories(dir);

    LibraryBundle bundle = build_bundle(cfg);
    Scorecard card = compare_strategies(bundle, cfg);
    write_scorecard((dir / "scorecard.csv").string(), card.rows, cfg);
    write_brute_csv((dir / "brute.csv").string(), card.brute, cfg);
    {
        auto hist = position_histograms(card.brute.ranked,
                                        static_cast<int>(cfg.get_int("subset_size")),
                                        cfg.window());
        std::ofstream out(dir / "histograms.csv");
        if (!out) throw IoError("cannot write: " + (dir / "histograms.csv").string());
        out << provenance_header(cfg) << "\n";
        out << "slot,position,count\n";
        for (std::size_t s = 0; s < hist.size(); ++s)
            for (std::size_t p = 0; p < hist[s].size(); ++p)
                out << (s + 1) << ',' << (p + 1) << ',' << hist[s][p] << "\n";
    }
    for (const StrategyRow& row : card.rows)
        std::printf("%-22s error=%-12s misclassification=%-8s %s\n", row.name.c_str(),
                    format_value(row.error).c_str(),
                    format_value(row.misclassification).c_str(),
                    row.feasible ? "feasible" : "infeasible");
    std::printf("wrote %s\n", (dir / "scorecard.csv").string().c_str());
    return 0;
}

struct RunOpts {
    ConfigOpts config;
    std::string out_dir;
};

int run_run(const RunOpts& o) {
    ExperimentConfig cfg = make_config(o.config);
    if (!o.out_dir.empty()) set_config_value(cfg, "out_dir", o.out_dir);
    RunStatus st = end_to_end(cfg);
    if (st.ok)
        std::printf("ok: %s\n", cfg.get("out_dir").c_str());
    else
        std::fprintf(stderr, "failed at %s: %s\n", st.stage.c_str(), st.message.c_str());
    return st.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reduced-order model sparse sampling toolkit"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);
    std::function<int()> action;

    auto sim = std::make_shared<SimulateOpts>();
    {
        CLI::App* sub = app.add_subcommand("simulate", "integrate one dynamical regime");
        add_config_flags(sub, sim->config);
        sub->add_option("--regime", sim->regime, "regime label (b1..b6)")->required();
        sub->add_option("--n", sim->n, "grid points (power of two)");
        sub->add_option("--tfinal", sim->tfinal, "integration horizon");
        sub->add_option("--snapshots", sim->snapshots, "snapshot count");
        sub->add_option("--seed", sim->seed, "simulation seed");
        sub->add_option("--out", sim->out, "output snapshot matrix")->required();
        sub->callback([&action, sim] { action = [sim] { return run_simulate(*sim); }; });
    }

    auto pod = std::make_shared<PodOpts>();
    {
        CLI::App* sub = app.add_subcommand("pod", "truncated POD basis of a snapshot matrix");
        add_config_flags(sub, pod->config);
        sub->add_option("--snapshots", pod->snapshots, "input snapshot matrix")->required();
        sub->add_option("--rank", pod->rank, "fixed rank");
        sub->add_option("--energy", pod->energy, "energy threshold in (0,1]");
        sub->add_option("--out", pod->out, "output modes matrix")->required();
        sub->callback([&action, pod] { action = [pod] { return run_pod(*pod); }; });
    }

    auto deim = std::make_shared<DeimOpts>();
    {
        CLI::App* sub = app.add_subcommand("deim", "greedy interpolation indices of a basis");
        add_config_flags(sub, deim->config);
        sub->add_option("--basis", deim->basis, "input basis matrix")->required();
        sub->add_option("--m", deim->m, "index count")->required();
        sub->add_option("--drop-first", deim->drop_first, "skip the first k greedy picks");
        sub->add_option("--out", deim->out, "output index file")->required();
        sub->callback([&action, deim] { action = [deim] { return run_deim(*deim); }; });
    }

    auto gap = std::make_shared<GappyFitOpts>();
    {
        CLI::App* sub = app.add_subcommand("gappy-fit", "sparse least-squares reconstruction");
        add_config_flags(sub, gap->config);
        sub->add_option("--library", gap->library, "modes matrix")->required();
        sub->add_option("--indices", gap->indices, "sample index file")->required();
        sub->add_option("--state", gap->state, "states to reconstruct, one per column")
            ->required();
        sub->add_option("--report", gap->report, "output CSV")->required();
        sub->callback([&action, gap] { action = [gap] { return run_gappy_fit(*gap); }; });
    }

    auto cls = std::make_shared<ClassifyOpts>();
    {
        CLI::App* sub = app.add_subcommand("classify", "regime classification from samples");
        add_config_flags(sub, cls->config);
        sub->add_option("--library-dir", cls->library_dir, "directory of modes_<label>.txt")
            ->required();
        sub->add_option("--indices", cls->indices, "sample index file")->required();
        sub->add_option("--state", cls->state, "states to classify, one per column")
            ->required();
        sub->add_option("--noise", cls->noise, "noise fraction of sample RMS");
        sub->add_option("--rounds", cls->rounds, "noisy redraws per state");
        sub->add_option("--seed", cls->seed, "noise seed");
        sub->add_option("--report", cls->report, "output CSV")->required();
        sub->callback([&action, cls] { action = [cls] { return run_classify(*cls); }; });
    }

    auto ga = std::make_shared<GaOpts>();
    {
        CLI::App* sub = app.add_subcommand("ga", "mutation-only genetic index refinement");
        add_config_flags(sub, ga->config);
        sub->add_option("--start", ga->start, "starting index file")->required();
        sub->add_option("--library-dir", ga->library_dir, "directory of modes_<label>.txt")
            ->required();
        sub->add_option("--validation", ga->validation,
                        "directory of states_<label>.txt (default: library dir)");
        sub->add_option("--pop", ga->pop, "population size");
        sub->add_option("--elite", ga->elite, "elite count");
        sub->add_option("--gens", ga->gens, "generations");
        sub->add_option("--mutation", ga->mutation, "per-index mutation probability");
        sub->add_option("--radius", ga->radius, "mutation shift radius");
        sub->add_option("--window", ga->window, "restrict indices to lo:hi");
        sub->add_option("--seed", ga->seed, "evolution seed");
        sub->add_option("--trace", ga->trace, "per-generation trace CSV");
        sub->add_option("--out", ga->out, "output index file")->required();
        sub->callback([&action, ga] { action = [ga] { return run_ga(*ga); }; });
    }

    auto brute = std::make_shared<BruteOpts>();
    {
        CLI::App* sub = app.add_subcommand("brute", "exhaustive subset search in a window");
        add_config_flags(sub, brute->config);
        sub->add_option("--library-dir", brute->library_dir,
                        "directory of modes_<label>.txt and states_<label>.txt")
            ->required();
        sub->add_option("--k", brute->k, "subset size");
        sub->add_option("--window", brute->window, "candidate window lo:hi");
        sub->add_option("--rounds", brute->rounds, "noise rounds per survivor");
        sub->add_option("--accuracy", brute->accuracy, "per-regime accuracy floor");
        sub->add_option("--noise", brute->noise, "noise fraction of sample RMS");
        sub->add_option("--seed", brute->seed, "noise seed");
        sub->add_option("--out", brute->out, "ranked CSV")->required();
        sub->add_option("--histograms", brute->histograms, "per-slot position histogram CSV");
        sub->callback([&action, brute] { action = [brute] { return run_brute(*brute); }; });
    }

    auto rom = std::make_shared<RomOpts>();
    {
        CLI::App* sub = app.add_subcommand("rom", "reduced model against the full solve");
        add_config_flags(sub, rom->config);
        sub->add_option("--regime", rom->regime, "regime label (b1..b6)")->required();
        sub->add_option("--rank", rom->rank, "basis rank or 'auto' (energy threshold)");
        sub->add_option("--m", rom->m, "interpolation point count");
        sub->add_option("--indices", rom->indices, "index file overriding the greedy picks");
        sub->add_option("--tspan", rom->tspan, "comparison span lo:hi");
        sub->add_option("--seed", rom->seed, "simulation seed");
        sub->add_option("--report", rom->report, "output CSV")->required();
        sub->callback([&action, rom] { action = [rom] { return run_rom(*rom); }; });
    }

    auto cmp = std::make_shared<CompareOpts>();
    {
        CLI::App* sub = app.add_subcommand("compare", "score all selection strategies");
        add_config_flags(sub, cmp->config);
        sub->add_option("--out-dir", cmp->out_dir, "output directory");
        sub->callback([&action, cmp] { action = [cmp] { return run_compare(*cmp); }; });
    }

    auto run = std::make_shared<RunOpts>();
    {
        CLI::App* sub = app.add_subcommand("run", "end-to-end pipeline into a run directory");
        add_config_flags(sub, run->config);
        sub->add_option("--out-dir", run->out_dir, "output directory");
        sub->callback([&action, run] { action = [run] { return run_run(*run); }; });
    }

    CLI11_PARSE(app, argc, argv);
    try {
        return action ? action() : 1;
    } catch (const NumericalFailure& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
