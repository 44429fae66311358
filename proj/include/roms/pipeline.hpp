#pragma once

#include "roms/brute.hpp"
#include "roms/config.hpp"
#include "roms/cqgle.hpp"
#include "roms/deim.hpp"
#include "roms/ga.hpp"
#include "roms/gappy.hpp"
#include "roms/matrix_io.hpp"
#include "roms/regime_library.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace roms {

// External snapshot data (e.g. cylinder pressure fields) enters through the
// same matrix format the rest of the tooling writes. field_kind pins the
// expected header field ("real", "complex", or "any").
inline SnapshotSet<Cplx> ingest_snapshots(const std::string& path,
                                          const std::string& field_kind,
                                          const std::string& regime_label) {
    if (regime_label.empty())
        throw InvalidInput("ingest: empty regime label");
    MatrixHeader h = read_matrix_header(path);
    if (field_kind == "real" && h.complex_field)
        throw IoError(path + ": header mismatch, expected field=real, file says complex");
    if (field_kind == "complex" && !h.complex_field)
        throw IoError(path + ": header mismatch, expected field=complex, file says real");
    if (field_kind != "real" && field_kind != "complex" && field_kind != "any")
        throw InvalidInput("ingest: unknown field kind '" + field_kind + "'");
    Matrix<Cplx> M = read_matrix<Cplx>(path);
    std::vector<double> times(static_cast<std::size_t>(M.cols()));
    for (std::size_t j = 0; j < times.size(); ++j) times[j] = static_cast<double>(j);
    return build_snapshots(std::move(M), std::move(times), {}, regime_label);
}

// A regime library plus everything the comparison strategies consume: the
// held-out validation states and, for simulated bundles, the snapshots of
// the nonlinear term (used by the joint-DEIM strategy).
struct LibraryBundle {
    RegimeLibrary<Cplx> lib;
    std::vector<LabeledState<Cplx>> validation;
    Matrix<Cplx> nl_concat;  // n x (sum of training counts); empty when ingested
    std::vector<std::string> labels;
};

namespace detail {

inline std::pair<SnapshotSet<Cplx>, SnapshotSet<Cplx>> trim_and_split(
    const SnapshotSet<Cplx>& s, double transient_fraction, Index holdout) {
    if (transient_fraction < 0.0 || transient_fraction >= 1.0)
        throw ConfigError("pipeline: transient_fraction must be in [0, 1)");
    Index drop = static_cast<Index>(static_cast<double>(s.count()) * transient_fraction);
    if (s.count() - drop < holdout + 2)
        throw InvalidInput("pipeline: regime '" + s.regime + "' has " +
                           std::to_string(s.count()) + " snapshots, too few after " +
                           "transient removal for " + std::to_string(holdout) +
                           " held-out states");
    SnapshotSet<Cplx> settled = drop > 0 ? drop_leading(s, drop) : s;
    return split_holdout(settled, holdout);
}

}  // namespace detail

// Simulates every configured regime (or ingests labelled files), discards
// the leading transient, holds out validation snapshots, and builds the
// per-regime POD library at the configured energy level.
inline LibraryBundle build_bundle(const ExperimentConfig& cfg) {
    const double energy = cfg.get_double("energy");
    const double frac = cfg.get_double("transient_fraction");
    const Index holdout = cfg.get_int("holdout");
    if (holdout < 1)
        throw ConfigError("pipeline: holdout must be >= 1");

    std::vector<SnapshotSet<Cplx>> raw;
    const std::vector<std::string> ingest = cfg.list("ingest");
    if (!ingest.empty()) {
        for (const std::string& item : ingest) {
            std::size_t colon = item.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == item.size())
                throw ConfigError("config: ingest entries must be label:path, got '" +
                                  item + "'");
            raw.push_back(ingest_snapshots(item.substr(colon + 1), "any",
                                           item.substr(0, colon)));
        }
    } else {
        GLDomain domain;
        domain.x_min = cfg.get_double("x_min");
        domain.x_max = cfg.get_double("x_max");
        domain.n = cfg.get_int("grid_n");
        domain.t_final = cfg.get_double("t_final");
        domain.snapshot_count = static_cast<int>(cfg.get_int("snapshots"));
        domain.initial.profile = cfg.get("profile");
        domain.initial.amplitude = cfg.get_double("amplitude");
        domain.initial.mode = static_cast<int>(cfg.get_int("ic_mode"));
        SimulateOptions opts;
        opts.rtol = cfg.get_double("rtol");
        opts.atol = cfg.get_double("atol");
        std::uint64_t seed = cfg.get_seed();
        std::uint64_t ordinal = 0;
        for (const std::string& label : cfg.list("regimes")) {
            opts.regime = label;
            raw.push_back(simulate(regime_params(label), domain,
                                   mix64(seed ^ ++ordinal), opts));
        }
    }
    if (raw.size() < 2)
        throw ConfigError("pipeline: need at least two regimes");

    LibraryBundle bundle;
    std::vector<SnapshotSet<Cplx>> training;
    std::vector<Matrix<Cplx>> nl_blocks;
    Index nl_cols = 0;
    for (const SnapshotSet<Cplx>& s : raw) {
        auto [train, held] = detail::trim_and_split(s, frac, holdout);
        for (Index j = 0; j < held.count(); ++j)
            bundle.validation.push_back({s.regime, held.data.col(j)});
        if (ingest.empty()) {
            GLParams params = regime_params(s.regime);
            Matrix<Cplx> nl(train.dim(), train.count());
            Vector<Cplx> col;
            for (Index j = 0; j < train.count(); ++j) {
                nonlinear_term(Vector<Cplx>(train.data.col(j)), params, col);
                nl.col(j) = col;
            }
            nl_cols += nl.cols();
            nl_blocks.push_back(std::move(nl));
        }
        bundle.labels.push_back(s.regime);
        training.push_back(std::move(train));
    }
    bundle.lib = build_library(training, energy);
    if (!nl_blocks.empty()) {
        bundle.nl_concat.resize(bundle.lib.dim(), nl_cols);
        Index at = 0;
        for (const Matrix<Cplx>& b : nl_blocks) {
            bundle.nl_concat.middleCols(at, b.cols()) = b;
            at += b.cols();
        }
    }
    return bundle;
}

// Reflects out-of-window picks through the window's left edge before
// clamping. The candidate band starts at the domain center and the library
// modes are symmetric about it, so a pick at center-d carries the same
// information as one at center+d.
inline IndexSet project_into_window(const IndexSet& idx, IndexWindow window) {
    if (!window.valid()) return idx;
    std::vector<int> vals;
    for (int v : idx.values) {
        int folded = window.lo + std::abs(v - window.lo);
        folded = std::min(folded, window.hi);
        while (std::find(vals.begin(), vals.end(), folded) != vals.end()) {
            ++folded;
            if (folded > window.hi) {
                folded = window.lo;
                while (std::find(vals.begin(), vals.end(), folded) != vals.end())
                    ++folded;
                break;
            }
        }
        vals.push_back(folded);
    }
    return make_index_set(std::move(vals), idx.ambient);
}

struct StrategyRow {
    std::string name;
    IndexSet indices;
    double error = std::numeric_limits<double>::infinity();
    double misclassification = 1.0;
    bool feasible = false;
};

struct Scorecard {
    std::vector<StrategyRow> rows;
    BruteResult brute;
};

namespace detail {

// Scorecard errors are reconstruction-only: every validation state is fitted
// against its own regime's sub-basis, so a strategy that misclassifies still
// gets a finite error bar next to its misclassification rate.
inline StrategyRow score_selection(const std::string& name, const IndexSet& idx,
                                   const LibraryBundle& bundle,
                                   const ExperimentConfig& cfg) {
    StrategyRow row;
    row.name = name;
    row.indices = idx;
    row.error = reconstruction_score(bundle.lib, idx, bundle.validation);
    row.feasible = evaluate_selection(bundle.lib, idx, bundle.validation,
                                      cfg.get_double("margin_min"))
                       .feasible;
    try {
        TrialResult tr = noisy_trials(bundle.lib, idx, bundle.validation,
                                      cfg.get_double("noise_frac"),
                                      static_cast<int>(cfg.get_int("noise_rounds")),
                                      cfg.get_seed());
        row.misclassification = 1.0 - tr.min_accuracy;
    } catch (const ClassificationError&) {
        row.misclassification = 1.0;
    }
    return row;
}

// Deterministic selectors compete against the exhaustive optimum, so when a
// candidate window is configured they choose among its rows only; their picks
// are then mapped back to grid indices.
inline PODBasis<Cplx> window_basis(const Matrix<Cplx>& modes, IndexWindow w) {
    Matrix<Cplx> rows(w.size(), modes.cols());
    for (int i = 0; i < w.size(); ++i) rows.row(i) = modes.row(w.lo - 1 + i);
    return {std::move(rows), Eigen::VectorXd::Ones(modes.cols()), 1.0};
}

inline IndexSet unwindow(const IndexSet& local, IndexWindow w, int n) {
    std::vector<int> vals;
    for (int v : local.values) vals.push_back(w.lo + v - 1);
    return make_index_set(std::move(vals), n);
}

}  // namespace detail

// The ten selection strategies of the comparison figure, in its order:
// random-in-window, random-anywhere, condition-number greedy with k and with
// 10 points, mode extrema, DEIM on the joint nonlinear snapshots, DEIM on
// the library, DEIM+1 on the library, the genetic search, and the
// exhaustive-search optimum.
inline Scorecard compare_strategies(const LibraryBundle& bundle,
                                    const ExperimentConfig& cfg) {
    const int n = static_cast<int>(bundle.lib.dim());
    const int k = static_cast<int>(cfg.get_int("subset_size"));
    const IndexWindow window = cfg.window();
    const bool windowed = window.valid();
    const std::uint64_t seed = cfg.get_seed();
    PODBasis<Cplx> lib_basis{bundle.lib.concat,
                             Eigen::VectorXd::Ones(bundle.lib.concat.cols()), 1.0};
    PODBasis<Cplx> sel_basis =
        windowed ? detail::window_basis(bundle.lib.concat, window) : lib_basis;
    auto grid = [&](const IndexSet& local) {
        return windowed ? detail::unwindow(local, window, n) : local;
    };

    Scorecard card;
    auto add = [&](const std::string& name, const IndexSet& idx) {
        card.rows.push_back(detail::score_selection(name, idx, bundle, cfg));
    };

    add("gappy1_random_window", select_random(n, k, window, mix64(seed ^ 1)));
    add("gappy2_random_domain", select_random(n, k, IndexWindow{}, mix64(seed ^ 2)));
    add("gappy3_condition_k", grid(select_condition_number(sel_basis, k)));
    const int dense_m = std::min(10, windowed ? window.size() : n);
    add("gappy4_condition_10", grid(select_condition_number(sel_basis, dense_m)));
    add("gappy5_extrema", grid(select_extrema(sel_basis, k)));
    if (bundle.nl_concat.size() > 0) {
        PODBasis<Cplx> nl_basis = compute_pod(bundle.nl_concat, Truncation::rank(k));
        PODBasis<Cplx> nl_sel =
            windowed ? detail::window_basis(nl_basis.modes, window) : nl_basis;
        add("deim_nl_all", grid(deim_indices(nl_sel, k)));
    }
    IndexSet deim_pre = grid(deim_indices(sel_basis, k));
    add("deim_pre", deim_pre);
    IndexSet deim_plus1 = grid(deim_plus_k(sel_basis, k, 1));
    add("deim_plus1_pre", deim_plus1);

    GAConfig ga_cfg;
    ga_cfg.population = static_cast<int>(cfg.get_int("ga_population"));
    ga_cfg.elite = static_cast<int>(cfg.get_int("ga_elite"));
    ga_cfg.generations = static_cast<int>(cfg.get_int("ga_generations"));
    ga_cfg.mutation_prob = cfg.get_double("ga_mutation");
    ga_cfg.mutation_radius = static_cast<int>(cfg.get_int("ga_radius"));
    ga_cfg.window = window;
    ga_cfg.seed = seed;
    ga_cfg.margin_min = cfg.get_double("margin_min");
    EvolveResult ga = evolve(project_into_window(deim_plus1, window), bundle.lib,
                             bundle.validation, ga_cfg);
    add("ga", ga.best.index_set);

    NoiseSpec noise{cfg.get_double("noise_frac"),
                    static_cast<int>(cfg.get_int("noise_rounds")),
                    cfg.get_double("accuracy_min"), seed,
                    cfg.get_double("margin_min")};
    card.brute = exhaustive_search(bundle.lib, k, window, bundle.validation, noise);
    if (card.brute.ranked.empty()) {
        StrategyRow row;
        row.name = "brute_force";
        card.rows.push_back(row);
    } else {
        const RankedSet& top = card.brute.ranked.front();
        StrategyRow row;
        row.name = "brute_force";
        row.indices = top.indices;
        row.error = top.error;
        row.misclassification = 1.0 - top.min_accuracy;
        row.feasible = true;
        card.rows.push_back(row);
    }
    return card;
}

inline std::string join_indices(const IndexSet& idx) {
    std::string out;
    for (std::size_t i = 0; i < idx.values.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(idx.values[i]);
    }
    return out;
}

inline void write_scorecard(const std::string& path, const std::vector<StrategyRow>& rows,
                            const ExperimentConfig& cfg) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for writing: " + path);
    out << provenance_header(cfg) << "\n";
    out << "strategy,indices,error,misclassification\n";
    for (const StrategyRow& row : rows) {
        out << row.name << ',' << join_indices(row.indices) << ','
            << format_value(row.error) << ',' << format_value(row.misclassification)
            << "\n";
    }
    if (!out)
        throw IoError("write failed: " + path);
}

inline void write_brute_csv(const std::string& path, const BruteResult& result,
                            const ExperimentConfig& cfg) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for writing: " + path);
    out << provenance_header(cfg) << "\n";
    out << "rank,indices,error,min_regime_accuracy\n";
    for (std::size_t i = 0; i < result.ranked.size(); ++i) {
        const RankedSet& r = result.ranked[i];
        out << (i + 1) << ',' << join_indices(r.indices) << ',' << format_value(r.error)
            << ',' << format_value(r.min_accuracy) << "\n";
    }
    if (!out)
        throw IoError("write failed: " + path);
}

inline void write_ga_trace(const std::string& path, const std::vector<TraceEntry>& trace,
                           const ExperimentConfig& cfg) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for writing: " + path);
    out << provenance_header(cfg) << "\n";
    out << "generation,best_error,feasible_count\n";
    for (const TraceEntry& t : trace)
        out << t.generation << ',' << format_value(t.best_error) << ','
            << t.feasible_count << "\n";
    if (!out)
        throw IoError("write failed: " + path);
}

struct RunStatus {
    bool ok = false;
    std::string stage;    // last stage entered
    std::string message;  // diagnostic when failed
    int exit_code = 0;
};

namespace detail {

inline void write_status(const std::filesystem::path& dir, const RunStatus& st) {
    nlohmann::json j;
    j["status"] = st.ok ? std::string("ok") : ("failed: " + st.stage);
    if (!st.ok) j["error"] = st.message;
    std::ofstream out(dir / "status.json");
    out << j.dump(2) << "\n";
}

}  // namespace detail

// The whole offline pipeline as one deterministic artifact-producing run:
// data -> POD library -> DEIM / DEIM+1 -> genetic refinement -> reports.
// Every failure is recorded in status.json with the stage that failed.
inline RunStatus end_to_end(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    RunStatus st;
    fs::path dir(cfg.get("out_dir"));
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        st.stage = "setup";
        st.message = "cannot create " + dir.string() + ": " + ec.message();
        st.exit_code = 1;
        return st;
    }
    {
        std::ofstream out(dir / "config.txt");
        out << config_text(cfg);
    }

    auto fail = [&](const std::string& stage, const std::exception& e, int code) {
        st.ok = false;
        st.stage = stage;
        st.message = e.what();
        st.exit_code = code;
        detail::write_status(dir, st);
        return st;
    };

    LibraryBundle bundle;
    st.stage = cfg.list("ingest").empty() ? "simulate" : "ingest";
    try {
        bundle = build_bundle(cfg);
    } catch (const NumericalFailure& e) {
        return fail(st.stage, e, 2);
    } catch (const Error& e) {
        return fail(st.stage, e, 1);
    }

    try {
        st.stage = "pod";
        {
            std::ofstream out(dir / "library.csv");
            out << provenance_header(cfg) << "\n";
            out << "regime,rank,energy_captured\n";
            for (int r = 0; r < bundle.lib.regime_count(); ++r) {
                const auto& label = bundle.lib.regime_ids[static_cast<std::size_t>(r)];
                const auto& sub = bundle.lib.sublibraries[static_cast<std::size_t>(r)];
                out << label << ',' << sub.rank() << ','
                    << format_value(sub.energy_captured) << "\n";
                write_matrix((dir / ("modes_" + label + ".txt")).string(), sub.modes);
                Matrix<Cplx> held(bundle.lib.dim(), 0);
                for (const auto& v : bundle.validation)
                    if (v.regime == label) {
                        held.conservativeResize(Eigen::NoChange, held.cols() + 1);
                        held.col(held.cols() - 1) = v.state;
                    }
                write_matrix((dir / ("states_" + label + ".txt")).string(), held);
            }
        }

        st.stage = "deim";
        const int k = static_cast<int>(cfg.get_int("subset_size"));
        PODBasis<Cplx> lib_basis{bundle.lib.concat,
                                 Eigen::VectorXd::Ones(bundle.lib.concat.cols()), 1.0};
        IndexSet deim_pre = deim_indices(lib_basis, k);
        IndexSet deim_plus1 = deim_plus_k(lib_basis, k, 1);
        write_index_set((dir / "deim.idx").string(), deim_pre);
        write_index_set((dir / "deim_plus1.idx").string(), deim_plus1);
        {
            std::ofstream out(dir / "deim.csv");
            out << provenance_header(cfg) << "\n";
            out << "strategy,indices\n";
            out << "deim_pre," << join_indices(deim_pre) << "\n";
            out << "deim_plus1_pre," << join_indices(deim_plus1) << "\n";
        }

        st.stage = "ga";
        GAConfig ga_cfg;
        ga_cfg.population = static_cast<int>(cfg.get_int("ga_population"));
        ga_cfg.elite = static_cast<int>(cfg.get_int("ga_elite"));
        ga_cfg.generations = static_cast<int>(cfg.get_int("ga_generations"));
        ga_cfg.mutation_prob = cfg.get_double("ga_mutation");
        ga_cfg.mutation_radius = static_cast<int>(cfg.get_int("ga_radius"));
        ga_cfg.seed = cfg.get_seed();
        ga_cfg.margin_min = cfg.get_double("margin_min");
        // Refinement roams the whole axis; the candidate window only scopes
        // the exhaustive comparison, not the genetic search itself.
        EvolveResult ga = evolve(deim_pre, bundle.lib, bundle.validation, ga_cfg);
        write_ga_trace((dir / "ga_trace.csv").string(), ga.trace, cfg);
        write_index_set((dir / "ga_best.idx").string(), ga.best.index_set);

        std::vector<StrategyRow> rows;
        rows.push_back(detail::score_selection("deim_pre", deim_pre, bundle, cfg));
        rows.push_back(detail::score_selection("deim_plus1_pre", deim_plus1, bundle, cfg));
        rows.push_back(detail::score_selection("ga", ga.best.index_set, bundle, cfg));
        write_scorecard((dir / "summary.csv").string(), rows, cfg);
    } catch (const NumericalFailure& e) {
        return fail(st.stage, e, 2);
    } catch (const Error& e) {
        return fail(st.stage, e, 1);
    }

    st.ok = true;
    st.stage = "done";
    detail::write_status(dir, st);
    return st;
}

}  // namespace roms
