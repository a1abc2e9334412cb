// torsmink: solver and verification lab for the discrete planar L_p
// torsional Minkowski problem.
//
// Exit codes: 0 success, 1 input/config error, 2 numerical non-convergence.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "torsmink/io.hpp"

using namespace torsmink;

namespace {

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw InputError("cannot parse number '" + item + "'");
        }
    }
    return out;
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty())
        std::cout << text;
    else
        io::write_text(out_path, text);
}

int run(int argc, char** argv) {
    CLI::App app{"L_p torsional Minkowski problem lab"};
    app.require_subcommand(1);

    double p = 0.0, mesh_h = 0.02, tol = 1e-2, lambda = 0.5;
    int max_iters = 500, k_starts = 8;
    std::uint64_t seed = 0;
    std::string out_path, json_path, input, mode, eps_csv, pseq_csv, y_csv, dump_mesh;
    std::vector<std::string> pair_paths, seq_paths;
    std::string limit_path;
    bool normalized = false;

    auto* solve = app.add_subcommand("solve", "solve the L_p problem for a measure file");
    solve->add_option("measure", input, "measure JSON file")->required();
    solve->add_option("--p", p, "exponent p > 1")->required();
    solve->add_flag("--normalized", normalized, "solve the normalized problem (mu/T = c h^(p-1))");
    solve->add_option("--mesh-h", mesh_h, "FEM mesh size (default 0.02)");
    solve->add_option("--tol", tol, "optimality residual tolerance (default 1e-2)");
    solve->add_option("--max-iters", max_iters, "iteration cap (default 500)");
    solve->add_option("--seed", seed, "seed (default 0)");
    solve->add_option("--out", out_path, "write the report here instead of stdout");

    auto* torsion =
        app.add_subcommand("torsion", "torsional rigidity and facet measures of a polygon");
    torsion->add_option("polygon", input, "polygon JSON file")->required();
    torsion->add_option("--mesh-h", mesh_h, "FEM mesh size (default 0.02)");
    torsion->add_option("--dump-mesh", dump_mesh, "write the triangulation as JSON (debugging)");
    torsion->add_option("--out", out_path, "write the report here instead of stdout");

    auto* wulff = app.add_subcommand("wulff", "Wulff shape of a measure's normals and supports");
    wulff->add_option("measure", input, "measure JSON file")->required();
    wulff->add_option("--y", y_csv, "comma-separated support numbers (default: all 1)");
    wulff->add_option("--out", out_path, "write the polygon here instead of stdout");

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    std::string suite;
    verify->add_option("suite", suite,
                       "one of: identities, hadamard, bm, minkowski, uniqueness, weak")
        ->required();
    verify->add_option("inputs", seq_paths, "input files (suite-specific)");
    verify->add_option("--pair", pair_paths, "two polygon files")->expected(2);
    verify->add_option("--lambda", lambda, "convex combination weight (bm)");
    verify->add_option("--limit", limit_path, "limit polygon (weak)");
    verify->add_option("--p", p, "exponent p (uniqueness)");
    verify->add_option("--k", k_starts, "number of random starts (uniqueness, default 8)");
    verify->add_option("--t", eps_csv, "comma-separated t values (hadamard)");
    verify->add_option("--mesh-h", mesh_h, "FEM mesh size (default 0.02)");
    verify->add_option("--tol", tol, "solver tolerance where a solve is involved");
    verify->add_option("--max-iters", max_iters, "solver iteration cap");
    verify->add_option("--seed", seed, "seed (default 0)");
    verify->add_option("--out", out_path, "write the reports here instead of stdout");

    auto* continuity = app.add_subcommand("continuity", "convergence experiment");
    continuity->add_option("measure", input, "measure JSON file")->required();
    continuity->add_option("--mode", mode, "measure | p")->required();
    continuity->add_option("--p", p, "limit exponent p")->required();
    continuity->add_option("--eps", eps_csv, "comma-separated weight perturbations (mode measure)");
    continuity->add_option("--p-seq", pseq_csv, "comma-separated p_i values (mode p)");
    continuity->add_option("--mesh-h", mesh_h, "FEM mesh size (default 0.02)");
    continuity->add_option("--tol", tol, "solver tolerance (default 1e-2)");
    continuity->add_option("--max-iters", max_iters, "solver iteration cap");
    continuity->add_option("--seed", seed, "seed (default 0)");
    continuity->add_option("--out", out_path, "write the CSV here instead of stdout");
    continuity->add_option("--json", json_path, "also write a JSON summary here");

    CLI11_PARSE(app, argc, argv);

    SolveConfig cfg;
    cfg.mesh_h = mesh_h;
    cfg.tol_residual = tol;
    cfg.max_iters = max_iters;
    cfg.seed = seed;

    if (solve->parsed()) {
        if (!(p > 1.0)) {
            std::cerr << "error: require p > 1\n";
            return 1;
        }
        if (!normalized && std::fabs(p - 4.0) < 1e-12) {
            std::cerr << "error: p equals n+2 = 4; the original problem is excluded there "
                         "(use --normalized)\n";
            return 1;
        }
        cfg.p = p;
        const DiscreteMeasure m = io::read_measure(input);
        const SolveReport rep = normalized ? solve_normalized(m, cfg) : solve_original(m, cfg);
        emit(out_path, io::report_to_json(rep, m));
        return 0;
    }

    if (torsion->parsed()) {
        const ConvexPolygon poly = io::read_polygon(input);
        const TriMesh mesh = triangulate(poly, mesh_h);
        if (!dump_mesh.empty()) io::write_text(dump_mesh, io::mesh_to_json(mesh));
        const TorsionField field = solve_torsion(mesh);
        const TorsionData data = facet_torsion_measure(field, poly);
        nlohmann::json j;
        j["T"] = data.T;
        j["T_int"] = data.T_int;
        j["facet_measures"] = data.facet_measures;
        j["facet_measures_trace"] = data.facet_measures_trace;
        j["support_identity_residual"] = data.support_identity_residual;
        j["divergence_residual"] = data.divergence_residual;
        j["flux"] = data.flux;
        j["max_gradient"] = max_gradient(field);
        j["interior_dofs"] = field.interior_dof_count;
        emit(out_path, j.dump(2) + "\n");
        return 0;
    }

    if (wulff->parsed()) {
        const DiscreteMeasure m = io::read_measure(input);
        SupportVector y(m.size(), 1.0);
        if (!y_csv.empty()) {
            const std::vector<double> vals = parse_list(y_csv);
            if (vals.size() != m.size())
                throw InputError("--y needs exactly " + std::to_string(m.size()) + " values");
            y = vals;
        }
        emit(out_path, io::polygon_to_json(wulff_shape(m.normals, y)));
        return 0;
    }

    if (verify->parsed()) {
        VerifyConfig vcfg;
        vcfg.mesh_h = mesh_h;
        vcfg.seed = seed;
        std::vector<CheckReport> checks;
        if (suite == "identities") {
            if (seq_paths.size() != 1) throw InputError("verify identities: need one polygon file");
            checks = identity_suite(io::read_polygon(seq_paths[0]), vcfg);
        } else if (suite == "hadamard") {
            if (pair_paths.size() != 2) throw InputError("verify hadamard: need --pair A B");
            const ConvexPolygon a = io::read_polygon(pair_paths[0]);
            const ConvexPolygon b = io::read_polygon(pair_paths[1]);
            std::vector<double> ts =
                eps_csv.empty() ? std::vector<double>{0.04 * a.diameter(), 0.02 * a.diameter()}
                                : parse_list(eps_csv);
            checks.push_back(hadamard_check(a, b, ts, vcfg));
        } else if (suite == "bm") {
            if (pair_paths.size() != 2) throw InputError("verify bm: need --pair A B");
            checks.push_back(bm_check(io::read_polygon(pair_paths[0]),
                                      io::read_polygon(pair_paths[1]), lambda, vcfg));
        } else if (suite == "minkowski") {
            if (pair_paths.size() != 2) throw InputError("verify minkowski: need --pair A B");
            checks.push_back(minkowski_ineq_check(io::read_polygon(pair_paths[0]),
                                                  io::read_polygon(pair_paths[1]), vcfg));
        } else if (suite == "uniqueness") {
            if (seq_paths.size() != 1) throw InputError("verify uniqueness: need one measure file");
            if (!(p > 1.0)) throw InputError("verify uniqueness: need --p > 1");
            checks.push_back(uniqueness_probe(io::read_measure(seq_paths[0]), p, k_starts, cfg));
        } else if (suite == "weak") {
            if (limit_path.empty() || seq_paths.empty())
                throw InputError("verify weak: need --limit L and sequence polygon files");
            std::vector<ConvexPolygon> seq;
            for (const std::string& s : seq_paths) seq.push_back(io::read_polygon(s));
            std::vector<DirectionFunction> fns = {
                [](UnitVector) { return 1.0; },
                [](UnitVector u) { return u.x; },
                [](UnitVector u) { return u.y; },
            };
            checks.push_back(weak_convergence_probe(seq, io::read_polygon(limit_path), fns, vcfg));
        } else {
            std::cerr << "error: unknown suite '" << suite << "'\n";
            return 1;
        }
        emit(out_path, io::checks_to_json(checks));
        for (const CheckReport& c : checks)
            if (!c.passed) return 2;
        return 0;
    }

    if (continuity->parsed()) {
        if (!(p > 1.0)) throw InputError("continuity: need --p > 1");
        cfg.p = p;
        const DiscreteMeasure m = io::read_measure(input);
        ConvergenceTable table;
        if (mode == "measure") {
            const std::vector<double> eps = parse_list(eps_csv);
            if (eps.empty()) throw InputError("continuity --mode measure: empty --eps schedule");
            std::vector<DiscreteMeasure> perturbed;
            for (double e : eps) {
                std::vector<double> w = m.weights;
                w[0] *= 1.0 + e;
                perturbed.push_back(build_measure(m.normals, w));
            }
            table = continuity_in_measure(m, perturbed, eps, p, cfg);
        } else if (mode == "p") {
            const std::vector<double> ps = parse_list(pseq_csv);
            if (ps.empty()) throw InputError("continuity --mode p: empty --p-seq schedule");
            table = continuity_in_p(m, ps, p, cfg);
        } else {
            throw InputError("continuity: --mode must be 'measure' or 'p'");
        }
        emit(out_path, io::table_to_csv(table));
        if (!json_path.empty()) io::write_text(json_path, io::table_to_json(table));
        return table.passed ? 0 : 2;
    }

    return 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const PCritical& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const MaxItersExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
