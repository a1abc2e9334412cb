#pragma once

#include <string>

#include "torsmink/mesh.hpp"
#include "torsmink/solver.hpp"
#include "torsmink/verify.hpp"

// File formats:
//   measure:  {"normals": [[x,y],...], "weights": [w,...]}
//             or {"angles": [rad,...], "weights": [w,...]}
//   polygon:  {"vertices": [[x,y],...]}
// Reports serialize as JSON, convergence tables as CSV
// (columns i, perturbation, hausdorff, residual, T).

namespace torsmink::io {

DiscreteMeasure read_measure(const std::string& path);
ConvexPolygon read_polygon(const std::string& path);

std::string measure_to_json(const DiscreteMeasure& m);
std::string polygon_to_json(const ConvexPolygon& p);
std::string report_to_json(const SolveReport& rep, const DiscreteMeasure& m);
std::string checks_to_json(const std::vector<CheckReport>& checks);
std::string table_to_json(const ConvergenceTable& t);
std::string table_to_csv(const ConvergenceTable& t);
std::string mesh_to_json(const TriMesh& mesh);

void write_measure(const std::string& path, const DiscreteMeasure& m);
void write_polygon(const std::string& path, const ConvexPolygon& p);
void write_text(const std::string& path, const std::string& text);

} // namespace torsmink::io
