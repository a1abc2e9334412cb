#include "torsmink/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace torsmink::io {

using nlohmann::json;

namespace {

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

json vec_to_json(Vec2 v) { return json::array({v.x, v.y}); }

} // namespace

DiscreteMeasure read_measure(const std::string& path) {
    const json j = parse_file(path);
    if (!j.contains("weights"))
        throw InputError(path + ": missing field \"weights\"");
    std::vector<double> weights;
    try {
        weights = j.at("weights").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw InputError(path + ": field \"weights\": " + e.what());
    }

    std::vector<UnitVector> normals;
    if (j.contains("normals")) {
        try {
            for (const auto& row : j.at("normals"))
                normals.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
        } catch (const json::exception& e) {
            throw InputError(path + ": field \"normals\": " + e.what());
        }
    } else if (j.contains("angles")) {
        try {
            for (const auto& a : j.at("angles"))
                normals.push_back(UnitVector::from_angle(a.get<double>()));
        } catch (const json::exception& e) {
            throw InputError(path + ": field \"angles\": " + e.what());
        }
    } else {
        throw InputError(path + ": need field \"normals\" or \"angles\"");
    }
    return build_measure(normals, weights);
}

ConvexPolygon read_polygon(const std::string& path) {
    const json j = parse_file(path);
    if (!j.contains("vertices"))
        throw InputError(path + ": missing field \"vertices\"");
    std::vector<Vec2> vertices;
    try {
        for (const auto& row : j.at("vertices"))
            vertices.push_back({row.at(0).get<double>(), row.at(1).get<double>()});
    } catch (const json::exception& e) {
        throw InputError(path + ": field \"vertices\": " + e.what());
    }
    return ConvexPolygon::from_vertices(vertices);
}

std::string measure_to_json(const DiscreteMeasure& m) {
    json j;
    j["normals"] = json::array();
    for (const UnitVector& n : m.normals) j["normals"].push_back(json::array({n.x, n.y}));
    j["weights"] = m.weights;
    return j.dump(2) + "\n";
}

std::string polygon_to_json(const ConvexPolygon& p) {
    json j;
    j["vertices"] = json::array();
    for (const Vec2& v : p.vertices()) j["vertices"].push_back(vec_to_json(v));
    return j.dump(2) + "\n";
}

std::string report_to_json(const SolveReport& rep, const DiscreteMeasure& m) {
    json j;
    j["p"] = rep.p;
    j["residual"] = rep.residual;
    j["Fp_value"] = rep.Fp_value;
    j["T_value"] = rep.T_value;
    j["lagrange_b"] = rep.lagrange_b;
    if (rep.normalized_solution) {
        j["normalized_solution"]["vertices"] = json::array();
        for (const Vec2& v : rep.normalized_solution->vertices())
            j["normalized_solution"]["vertices"].push_back(vec_to_json(v));
    }
    if (rep.original_solution) {
        j["original_solution"]["vertices"] = json::array();
        for (const Vec2& v : rep.original_solution->vertices())
            j["original_solution"]["vertices"].push_back(vec_to_json(v));
    }
    j["facets"] = json::array();
    for (std::size_t i = 0; i < rep.atom_h.size(); ++i) {
        json f;
        f["normal"] = json::array({m.normals[i].x, m.normals[i].y});
        f["c"] = m.weights[i];
        f["h"] = rep.atom_h[i];
        f["mu"] = rep.atom_mu[i];
        f["target"] = rep.atom_target[i];
        f["ratio"] = rep.atom_target[i] > 0.0 ? rep.atom_mu[i] / rep.atom_target[i] : 0.0;
        j["facets"].push_back(f);
    }
    j["iterations"] = json::array();
    for (const IterationRecord& it : rep.iterations) {
        json r;
        r["objective"] = it.objective;
        r["residual"] = it.residual;
        r["step"] = it.step;
        r["polish"] = it.polish;
        j["iterations"].push_back(r);
    }
    return j.dump(2) + "\n";
}

std::string checks_to_json(const std::vector<CheckReport>& checks) {
    json j = json::array();
    for (const CheckReport& c : checks) {
        json r;
        r["name"] = c.name;
        r["passed"] = c.passed;
        r["measured"] = c.measured;
        r["bound"] = c.bound;
        r["tolerance"] = c.tolerance;
        r["relation"] = c.relation;
        r["details"] = c.details;
        j.push_back(r);
    }
    return j.dump(2) + "\n";
}

std::string table_to_json(const ConvergenceTable& t) {
    json j;
    j["passed"] = t.passed;
    j["criterion"] = t.criterion;
    j["limit_T"] = t.limit_T;
    j["limit_residual"] = t.limit_residual;
    j["rows"] = json::array();
    for (const ConvergenceRow& r : t.rows) {
        json row;
        row["i"] = r.index;
        row["perturbation"] = r.perturbation;
        row["hausdorff"] = r.hausdorff;
        row["residual"] = r.residual;
        row["T"] = r.T;
        row["failed"] = r.failed;
        if (r.failed) row["error"] = r.error;
        j["rows"].push_back(row);
    }
    return j.dump(2) + "\n";
}

std::string table_to_csv(const ConvergenceTable& t) {
    std::ostringstream out;
    out << "i,perturbation,hausdorff,residual,T\n";
    out.precision(17);
    for (const ConvergenceRow& r : t.rows) {
        if (r.failed) {
            out << r.index << "," << r.perturbation << ",failed,failed,failed\n";
        } else {
            out << r.index << "," << r.perturbation << "," << r.hausdorff << "," << r.residual
                << "," << r.T << "\n";
        }
    }
    return out.str();
}

std::string mesh_to_json(const TriMesh& mesh) {
    json j;
    j["target_h"] = mesh.target_h;
    j["nodes"] = json::array();
    for (const Vec2& v : mesh.nodes) j["nodes"].push_back(vec_to_json(v));
    j["triangles"] = json::array();
    for (const auto& t : mesh.triangles) j["triangles"].push_back(json::array({t[0], t[1], t[2]}));
    j["boundary_edges"] = json::array();
    for (const BoundaryEdge& e : mesh.boundary_edges)
        j["boundary_edges"].push_back(json::array({e.a, e.b, e.facet}));
    return j.dump() + "\n";
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

void write_measure(const std::string& path, const DiscreteMeasure& m) {
    write_text(path, measure_to_json(m));
}

void write_polygon(const std::string& path, const ConvexPolygon& p) {
    write_text(path, polygon_to_json(p));
}

} // namespace torsmink::io
