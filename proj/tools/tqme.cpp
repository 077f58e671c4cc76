// tqme: two-photon quantum module evaluation toolkit.
//
// Subcommands: evaluate, sweep, table, plan, qubit, gen. Every report embeds
// seed, shots, tool version and the exact command line; all randomness flows
// from --seed, so re-running a command reproduces its output byte for byte.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tqme/chip.hpp"
#include "tqme/choi.hpp"
#include "tqme/errors.hpp"
#include "tqme/hom.hpp"
#include "tqme/qubit.hpp"
#include "tqme/sampling.hpp"
#include "tqme/unitary_io.hpp"
#include "tqme/version.hpp"

namespace {

using nlohmann::json;
using namespace tqme;

// Default unitarity tolerance for user-supplied files; loose enough for
// matrices printed to four decimals.
constexpr double kCliLoadTol = 5e-3;

struct Common {
    std::uint64_t seed = 0;
    std::string command_line;
};

std::string join_args(int argc, char** argv) {
    std::string joined;
    for (int i = 0; i < argc; ++i) {
        if (i) {
            joined += ' ';
        }
        joined += argv[i];
    }
    return joined;
}

json provenance(const Common& common, std::uint64_t shots) {
    return {{"version", kVersion},
            {"seed", common.seed},
            {"shots", shots},
            {"command", common.command_line}};
}

void emit_text(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open output file: " + out_path);
    }
    out << text;
    if (!out) {
        throw IoError("write failed: " + out_path);
    }
}

void emit_json(const json& j, const std::string& out_path) {
    emit_text(j.dump(1) + "\n", out_path);
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::string default_dataset_path() {
    if (const char* dir = std::getenv("TQME_DATA_DIR")) {
        return (std::filesystem::path(dir) / "pairs21.json").string();
    }
    return "data/pairs21.json";
}

OutcomeDistribution pipeline_distribution(const UnitaryMatrix& w, const UnitaryMatrix& v) {
    const TransferMatrix network = build_hom_network(w.dim());
    return outcome_distribution(evolve(network, product_input(encode_choi(w), encode_choi(v))));
}

void merge_estimate(json& report, const FidelityEstimate& est) {
    report["p_hat"] = est.p_hat;
    report["f_gate_hat"] = est.f_gate_hat;
    report["ci_low"] = est.ci_low;
    report["ci_high"] = est.ci_high;
    report["confidence"] = est.confidence;
    report["shots"] = est.shots;
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const Common& common, const std::string& w_path, const std::string& v_path,
                 bool exact, std::uint64_t shots, double confidence, double tol, bool project,
                 const std::string& out_path) {
    const UnitaryMatrix w = load_unitary(w_path, tol, project);
    const UnitaryMatrix v = load_unitary(v_path, tol, project);
    if (w.dim() != v.dim()) {
        throw DimensionError("W and V have different dimensions");
    }
    json report;
    report["d"] = w.dim();
    const FidelityReport chain = fidelity_chain(w, v);
    if (exact) {
        report["mode"] = "exact";
        report["overlap"] = {chain.overlap.real(), chain.overlap.imag()};
        report["f_choi"] = chain.f_choi;
        report["p_bunch"] = chain.p_bunch;
        report["p_antibunch"] = 1.0 - chain.p_bunch;
        report["f_gate"] = chain.f_gate;
        report["provenance"] = provenance(common, 0);
    } else {
        RandomStream rng = RandomStream(common.seed).derive("evaluate");
        const EventTally tally = sample_from_distribution(pipeline_distribution(w, v), shots, rng);
        const FidelityEstimate est = estimate_fidelity(tally, w.dim(), confidence);
        report["mode"] = "sampled";
        report["seed"] = common.seed;
        report["n_bunch"] = tally.n_bunch;
        report["n_anti"] = tally.n_anti;
        merge_estimate(report, est);
        report["p_antibunch_hat"] = 1.0 - est.p_hat;
        report["provenance"] = provenance(common, shots);
    }
    emit_json(report, out_path);
    return 0;
}

int cmd_sweep(const Common& common, const std::string& family, const std::string& w_path,
              std::size_t steps, std::uint64_t shots, double confidence, std::size_t column,
              double tol, bool project, const std::string& out_path) {
    if (steps == 0) {
        throw RangeError("--steps must be >= 1");
    }
    std::optional<UnitaryMatrix> w;
    if (family == "column") {
        if (w_path.empty()) {
            throw ValidationError("--family column requires --w");
        }
        w = load_unitary(w_path, tol, project);
    } else if (!w_path.empty()) {
        w = load_unitary(w_path, tol, project);
    } else {
        w = hadamard2();
    }
    if (family == "column" && column >= w->dim()) {
        throw RangeError("--column index out of range");
    }

    const bool sampled = shots > 0;
    std::ostringstream csv;
    csv << "# tqme " << kVersion << " seed=" << common.seed << " shots=" << shots
        << " command=\"" << common.command_line << "\"\n";
    csv << "theta,p_exact,p_antibunch_exact,f_gate_exact";
    if (sampled) {
        csv << ",p_hat,f_gate_hat,ci_low,ci_high";
    }
    csv << "\n";

    const RandomStream root = RandomStream(common.seed).derive("sweep");
    for (std::size_t k = 0; k < steps; ++k) {
        const double theta = static_cast<double>(k) * 2.0 * 3.14159265358979323846 /
                             static_cast<double>(steps);
        const UnitaryMatrix v = family == "column"
                                    ? phase_family_column(*w, theta, column)
                                    : phase_family_a(theta);
        const FidelityReport chain = fidelity_chain(*w, v);
        csv << fmt(theta) << ',' << fmt(chain.p_bunch) << ',' << fmt(1.0 - chain.p_bunch) << ','
            << fmt(chain.f_gate);
        if (sampled) {
            RandomStream rng = root.derive(k);
            const EventTally tally =
                sample_from_distribution(pipeline_distribution(*w, v), shots, rng);
            const FidelityEstimate est = estimate_fidelity(tally, w->dim(), confidence);
            csv << ',' << fmt(est.p_hat) << ',' << fmt(est.f_gate_hat) << ','
                << fmt(est.ci_low) << ',' << fmt(est.ci_high);
        }
        csv << "\n";
    }
    emit_text(csv.str(), out_path);
    return 0;
}

int cmd_table(const Common& common, const std::string& data_path, std::uint64_t shots,
              double confidence, bool project, const std::string& format,
              const std::string& out_path) {
    const auto records = load_pair_table(data_path, project);
    const bool sampled = shots > 0;
    const RandomStream root = RandomStream(common.seed).derive("table");

    struct Row {
        std::size_t index;
        FidelityReport chain;
        std::optional<FidelityEstimate> est;
    };
    std::vector<Row> rows;
    rows.reserve(records.size());
    double f_choi_min = 1.0, f_choi_max = 0.0, f_gate_min = 1.0, f_gate_max = 0.0;
    for (const auto& rec : records) {
        Row row{rec.index, fidelity_chain(rec.w, rec.v), std::nullopt};
        if (sampled) {
            RandomStream rng = root.derive(rec.index);
            const EventTally tally =
                sample_from_distribution(pipeline_distribution(rec.w, rec.v), shots, rng);
            row.est = estimate_fidelity(tally, rec.w.dim(), confidence);
        }
        f_choi_min = std::min(f_choi_min, row.chain.f_choi);
        f_choi_max = std::max(f_choi_max, row.chain.f_choi);
        f_gate_min = std::min(f_gate_min, row.chain.f_gate);
        f_gate_max = std::max(f_gate_max, row.chain.f_gate);
        rows.push_back(std::move(row));
    }

    if (format == "csv") {
        std::ostringstream csv;
        csv << "# tqme " << kVersion << " seed=" << common.seed << " shots=" << shots
            << " command=\"" << common.command_line << "\"\n";
        csv << "index,f_choi_exact,p_bunch_exact,p_antibunch_exact,f_gate_exact";
        if (sampled) {
            csv << ",p_hat,f_gate_hat,ci_low,ci_high";
        }
        csv << "\n";
        for (const auto& row : rows) {
            csv << row.index << ',' << fmt(row.chain.f_choi) << ',' << fmt(row.chain.p_bunch)
                << ',' << fmt(1.0 - row.chain.p_bunch) << ',' << fmt(row.chain.f_gate);
            if (row.est) {
                csv << ',' << fmt(row.est->p_hat) << ',' << fmt(row.est->f_gate_hat) << ','
                    << fmt(row.est->ci_low) << ',' << fmt(row.est->ci_high);
            }
            csv << "\n";
        }
        emit_text(csv.str(), out_path);
        return 0;
    }

    json pairs = json::array();
    for (const auto& row : rows) {
        json item = {{"index", row.index},
                     {"f_choi_exact", row.chain.f_choi},
                     {"p_bunch_exact", row.chain.p_bunch},
                     {"p_antibunch_exact", 1.0 - row.chain.p_bunch},
                     {"f_gate_exact", row.chain.f_gate}};
        if (row.est) {
            merge_estimate(item, *row.est);
        }
        pairs.push_back(std::move(item));
    }
    json report = {{"pairs", std::move(pairs)},
                   {"summary",
                    {{"f_choi_min", f_choi_min},
                     {"f_choi_max", f_choi_max},
                     {"f_gate_min", f_gate_min},
                     {"f_gate_max", f_gate_max}}},
                   {"provenance", provenance(common, shots)}};
    emit_json(report, out_path);
    return 0;
}

int cmd_plan(const Common& common, double p, std::size_t d, double epsilon, double confidence,
             bool empirical, std::uint64_t trials, unsigned threads,
             const std::string& grid_out, const std::string& out_path) {
    if (!grid_out.empty()) {
        // Plot-ready analytic grid over (P, d); d = 0 is the infinite-
        // dimension limit.
        static const std::size_t dims[] = {1, 2, 4, 16, 64, 256, 1024, 0};
        std::ostringstream csv;
        csv << "# tqme " << kVersion << " seed=" << common.seed << " shots=0 command=\""
            << common.command_line << "\"\n";
        csv << "p,d,n_required\n";
        for (int pc = 51; pc <= 99; pc += 2) {
            const double pv = pc / 100.0;
            for (const std::size_t dim : dims) {
                const SamplePlan plan = required_samples_analytic(pv, dim, epsilon, confidence);
                csv << fmt(pv) << ',' << dim << ',' << plan.n_required << "\n";
            }
        }
        emit_text(csv.str(), grid_out);
        return 0;
    }

    SamplePlan plan;
    if (empirical) {
        const RandomStream root = RandomStream(common.seed).derive("plan");
        plan = required_samples_empirical(p, d, epsilon, confidence, trials, root, threads);
    } else {
        plan = required_samples_analytic(p, d, epsilon, confidence);
    }
    json report = {{"n_required", plan.n_required},
                   {"P", plan.p},
                   {"d", plan.d},
                   {"epsilon", plan.epsilon},
                   {"confidence", plan.confidence},
                   {"method", plan.method == PlanMethod::Analytic ? "analytic" : "empirical"},
                   {"provenance", provenance(common, 0)}};
    if (plan.degenerate) {
        report["degenerate"] = true;
    }
    if (empirical) {
        report["trials"] = trials;
        report["seed"] = common.seed;
    }
    emit_json(report, out_path);
    return 0;
}

int cmd_qubit(const Common& common, std::size_t n, const std::string& w_path,
              const std::string& v_path, bool exact, std::uint64_t shots, double confidence,
              const std::string& readout, bool mitigate, double tol, bool project,
              const std::string& dump_circuit, const std::string& dump_counts,
              const std::string& out_path) {
    if (n == 0 || n > 6) {
        throw ResourceError("--n must lie in 1..6 (state size guard)");
    }
    const UnitaryMatrix w = load_unitary(w_path, tol, project);
    const UnitaryMatrix v = load_unitary(v_path, tol, project);
    const std::size_t module_dim = std::size_t{1} << n;
    if (w.dim() != module_dim || v.dim() != module_dim) {
        throw DimensionError("module unitaries must have dimension 2^n");
    }

    std::optional<ConfusionModel> noise;
    if (!readout.empty()) {
        double p01 = 0.0, p10 = 0.0;
        if (std::sscanf(readout.c_str(), "%lf,%lf", &p01, &p10) != 2) {
            throw ValidationError("--readout expects \"p01,p10\"");
        }
        noise = ConfusionModel::uniform(4 * n, p01, p10);
    }

    if (!dump_circuit.empty()) {
        emit_json(circuit_to_json(tqme_qubit_circuit(n, w, v)), dump_circuit);
    }

    json report;
    report["n"] = n;
    report["d"] = module_dim;
    if (exact) {
        const double p_bunch = exact_bunching(n, w, v);
        const double f_choi = 2.0 * p_bunch - 1.0;
        report["mode"] = "exact";
        report["p_bunch"] = p_bunch;
        report["f_choi"] = f_choi;
        report["f_gate"] = gate_fidelity_from_p(p_bunch, module_dim);
        report["provenance"] = provenance(common, 0);
    } else {
        RandomStream rng = RandomStream(common.seed).derive("qubit");
        std::map<std::string, std::uint64_t> counts;
        const FidelityEstimate est =
            run_protocol(n, w, v, shots, rng, noise, mitigate, confidence,
                         dump_counts.empty() ? nullptr : &counts);
        report["mode"] = "sampled";
        report["seed"] = common.seed;
        report["mitigated"] = mitigate;
        report["f_choi_hat"] = 2.0 * est.p_hat - 1.0;
        merge_estimate(report, est);
        report["provenance"] = provenance(common, shots);
        if (!dump_counts.empty()) {
            emit_json(json(counts), dump_counts);
        }
    }
    emit_json(report, out_path);
    return 0;
}

int cmd_gen(const Common& common, std::size_t d, bool pair, const std::string& out_path) {
    if (d == 0) {
        throw RangeError("--d must be >= 1");
    }
    if (out_path.empty()) {
        throw ValidationError("--out is required");
    }
    RandomStream rng = RandomStream(common.seed).derive("gen");
    json report;
    report["d"] = d;
    report["seed"] = common.seed;
    if (pair) {
        const std::filesystem::path base(out_path);
        const std::string stem = (base.parent_path() / base.stem()).string();
        const std::string ext = base.extension().string();
        const std::string w_path = stem + "_w" + (ext.empty() ? ".json" : ext);
        const std::string v_path = stem + "_v" + (ext.empty() ? ".json" : ext);
        save_unitary(w_path, haar_random_unitary(d, rng));
        save_unitary(v_path, haar_random_unitary(d, rng));
        report["files"] = {w_path, v_path};
    } else {
        save_unitary(out_path, haar_random_unitary(d, rng));
        report["files"] = {out_path};
    }
    report["provenance"] = provenance(common, 0);
    std::cout << report.dump(1) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-photon quantum module evaluation toolkit"};
    app.require_subcommand(1);

    Common common;
    common.command_line = join_args(argc, argv);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "fidelity between two module unitaries");
    std::string ev_w, ev_v, ev_out;
    bool ev_exact = false;
    std::uint64_t ev_shots = 0;
    double ev_conf = 0.95, ev_tol = kCliLoadTol;
    bool ev_project = false;
    evaluate->add_option("--w", ev_w, "standard module unitary (JSON)")->required();
    evaluate->add_option("--v", ev_v, "module under evaluation (JSON)")->required();
    auto* ev_exact_flag = evaluate->add_flag("--exact", ev_exact, "closed-form report (default)");
    evaluate->add_option("--shots", ev_shots, "simulate N coincidence events")
        ->excludes(ev_exact_flag);
    evaluate->add_option("--conf", ev_conf, "confidence level (default 0.95)");
    evaluate->add_option("--seed", common.seed, "random seed (default 0)");
    evaluate->add_option("--tol", ev_tol, "unitarity tolerance for loaded files");
    evaluate->add_flag("--project-unitary", ev_project, "snap inputs to the nearest unitary");
    evaluate->add_option("--out", ev_out, "output file (default stdout)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "theta sweep of a phase family, CSV output");
    std::string sw_family, sw_w, sw_out;
    std::size_t sw_steps = 8, sw_column = 1;
    std::uint64_t sw_shots = 0;
    double sw_conf = 0.95, sw_tol = kCliLoadTol;
    bool sw_project = false;
    sweep->add_option("--family", sw_family, "a | column")
        ->required()
        ->check(CLI::IsMember({"a", "column"}));
    sweep->add_option("--w", sw_w, "standard module unitary (JSON; Hadamard for family a)");
    sweep->add_option("--steps", sw_steps, "grid points k*2pi/K (default 8)");
    sweep->add_option("--shots", sw_shots, "also simulate N events per point");
    sweep->add_option("--column", sw_column, "phased column for family column (default 1)");
    sweep->add_option("--conf", sw_conf, "confidence level (default 0.95)");
    sweep->add_option("--seed", common.seed, "random seed (default 0)");
    sweep->add_option("--tol", sw_tol, "unitarity tolerance for loaded files");
    sweep->add_flag("--project-unitary", sw_project, "snap inputs to the nearest unitary");
    sweep->add_option("--out", sw_out, "output CSV file")->required();

    // table
    auto* table = app.add_subcommand("table", "evaluate the bundled 21-pair dataset");
    std::string tb_data, tb_out, tb_format = "json";
    std::uint64_t tb_shots = 0;
    double tb_conf = 0.95;
    bool tb_project = false;
    table->add_option("--data", tb_data, "dataset path (default $TQME_DATA_DIR/pairs21.json)");
    table->add_option("--shots", tb_shots, "also simulate N events per pair");
    table->add_option("--conf", tb_conf, "confidence level (default 0.95)");
    table->add_option("--seed", common.seed, "random seed (default 0)");
    table->add_flag("--project-unitary", tb_project, "snap dataset to nearest unitaries");
    table->add_option("--format", tb_format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}));
    table->add_option("--out", tb_out, "output file (default stdout)");

    // plan
    auto* plan = app.add_subcommand("plan", "required event count for a target precision");
    double pl_p = 0.95, pl_eps = 0.01, pl_conf = 0.95;
    std::size_t pl_d = 0;
    bool pl_empirical = false;
    std::uint64_t pl_trials = 10000;
    unsigned pl_threads = 1;
    std::string pl_grid_out, pl_out;
    plan->add_option("--p", pl_p, "true bunching probability")->required();
    plan->add_option("--d", pl_d, "module dimension, 0 = infinite limit")->required();
    plan->add_option("--eps", pl_eps, "fidelity precision (CI half-width)")->required();
    plan->add_option("--conf", pl_conf, "confidence level")->required();
    plan->add_flag("--empirical", pl_empirical, "search n by Monte Carlo coverage");
    plan->add_option("--trials", pl_trials, "coverage trials per probe (default 10000)");
    plan->add_option("--seed", common.seed, "random seed (default 0)");
    plan->add_option("--threads", pl_threads, "worker threads for coverage trials");
    plan->add_option("--grid-out", pl_grid_out, "write an analytic (P,d) grid CSV instead");
    plan->add_option("--out", pl_out, "output file (default stdout)");

    // qubit
    auto* qubit = app.add_subcommand("qubit", "generalized SWAP-test protocol on n-qubit modules");
    std::size_t qb_n = 1;
    std::string qb_w, qb_v, qb_readout, qb_dump_circuit, qb_dump_counts, qb_out;
    bool qb_exact = false, qb_mitigate = false, qb_project = false;
    std::uint64_t qb_shots = 0;
    double qb_conf = 0.95, qb_tol = kCliLoadTol;
    qubit->add_option("--n", qb_n, "qubits per module")->required();
    qubit->add_option("--w", qb_w, "standard module unitary (JSON, dim 2^n)")->required();
    qubit->add_option("--v", qb_v, "module under evaluation (JSON, dim 2^n)")->required();
    auto* qb_exact_flag = qubit->add_flag("--exact", qb_exact, "exact outcome probabilities");
    qubit->add_option("--shots", qb_shots, "sampled shots")->excludes(qb_exact_flag);
    qubit->add_option("--conf", qb_conf, "confidence level (default 0.95)");
    qubit->add_option("--readout", qb_readout, "per-qubit flip probabilities \"p01,p10\"");
    qubit->add_flag("--mitigate", qb_mitigate, "unfold readout errors before classifying");
    qubit->add_option("--seed", common.seed, "random seed (default 0)");
    qubit->add_option("--tol", qb_tol, "unitarity tolerance for loaded files");
    qubit->add_flag("--project-unitary", qb_project, "snap inputs to the nearest unitary");
    qubit->add_option("--dump-circuit", qb_dump_circuit, "write the protocol circuit as JSON");
    qubit->add_option("--dump-counts", qb_dump_counts, "write the measured histogram as JSON");
    qubit->add_option("--out", qb_out, "output file (default stdout)");

    // gen
    auto* gen = app.add_subcommand("gen", "generate Haar-random module unitaries");
    std::size_t gn_d = 2;
    bool gn_pair = false;
    std::string gn_out;
    gen->add_option("--d", gn_d, "dimension")->required();
    gen->add_option("--seed", common.seed, "random seed (default 0)");
    gen->add_flag("--pair", gn_pair, "write a W/V pair (<out>_w, <out>_v)");
    gen->add_option("--out", gn_out, "output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*evaluate) {
            const bool exact = ev_exact || ev_shots == 0;
            return cmd_evaluate(common, ev_w, ev_v, exact, ev_shots, ev_conf, ev_tol, ev_project,
                                ev_out);
        }
        if (*sweep) {
            return cmd_sweep(common, sw_family, sw_w, sw_steps, sw_shots, sw_conf, sw_column,
                             sw_tol, sw_project, sw_out);
        }
        if (*table) {
            const std::string data = tb_data.empty() ? default_dataset_path() : tb_data;
            return cmd_table(common, data, tb_shots, tb_conf, tb_project, tb_format, tb_out);
        }
        if (*plan) {
            return cmd_plan(common, pl_p, pl_d, pl_eps, pl_conf, pl_empirical, pl_trials,
                            pl_threads, pl_grid_out, pl_out);
        }
        if (*qubit) {
            const bool exact = qb_exact || qb_shots == 0;
            return cmd_qubit(common, qb_n, qb_w, qb_v, exact, qb_shots, qb_conf, qb_readout,
                             qb_mitigate, qb_tol, qb_project, qb_dump_circuit, qb_dump_counts,
                             qb_out);
        }
        if (*gen) {
            return cmd_gen(common, gn_d, gn_pair, gn_out);
        }
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DatasetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ResourceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 6;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
