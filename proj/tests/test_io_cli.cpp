#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "torsmink/io.hpp"
#include "torsmink/verify.hpp"

using namespace torsmink;

namespace {

std::string tmp_path(const std::string& name) { return "/tmp/torsmink_test_" + name; }

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

int run_cli(const std::string& args, std::string* stdout_path = nullptr) {
    const std::string out = tmp_path("cli_stdout");
    const std::string cmd = std::string(TORSMINK_CLI_PATH) + " " + args + " > " + out + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    if (stdout_path) *stdout_path = out;
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("measure files: normals or angles form") {
    const std::string p1 = tmp_path("m1.json");
    write_file(p1, R"({"normals": [[1,0],[0,1],[-1,0],[0,-1]], "weights": [1,1,1,1]})");
    const DiscreteMeasure m1 = io::read_measure(p1);
    CHECK(m1.size() == 4);

    const std::string p2 = tmp_path("m2.json");
    write_file(p2, R"({"angles": [0, 1.5707963267948966, 3.141592653589793, -1.5707963267948966],
                       "weights": [1,1,1,1]})");
    const DiscreteMeasure m2 = io::read_measure(p2);
    CHECK(m2.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(angular_distance(m1.normals[i], m2.normals[i]) <= 1e-12);

    // round trip through the writer
    const std::string p3 = tmp_path("m3.json");
    io::write_measure(p3, m1);
    const DiscreteMeasure m3 = io::read_measure(p3);
    for (std::size_t i = 0; i < 4; ++i) CHECK(m3.weights[i] == m1.weights[i]);
}

TEST_CASE("measure files: diagnostics carry the offending field") {
    const std::string bad1 = tmp_path("bad1.json");
    write_file(bad1, R"({"weights": [1,1,1]})");
    CHECK_THROWS_WITH_AS(io::read_measure(bad1),
                         doctest::Contains("normals"), InputError);

    const std::string bad2 = tmp_path("bad2.json");
    write_file(bad2, "{not json");
    CHECK_THROWS_AS(io::read_measure(bad2), InputError);
}

TEST_CASE("polygon round trip is exact") {
    const ConvexPolygon p = random_polygon(5);
    const std::string path = tmp_path("poly.json");
    io::write_polygon(path, p);
    const ConvexPolygon q = io::read_polygon(path);
    CHECK(hausdorff_distance(p, q).distance <= 1e-12);
}

TEST_CASE("cli: solve writes a report and respects exit codes") {
    const std::string mfile = tmp_path("axes.json");
    write_file(mfile, R"({"normals": [[1,0],[0,1],[-1,0],[0,-1]], "weights": [1,1,1,1]})");

    std::string out;
    const int rc = run_cli("solve --p 2 --mesh-h 0.06 --tol 2e-2 " + mfile, &out);
    CHECK(rc == 0);
    const std::string report = slurp(out);
    CHECK(report.find("original_solution") != std::string::npos);
    CHECK(report.find("normalized_solution") != std::string::npos);
    CHECK(report.find("iterations") != std::string::npos);

    // p = 4 without --normalized is a configuration error
    CHECK(run_cli("solve --p 4 " + mfile) == 1);
    // with --normalized p = 4 is allowed
    CHECK(run_cli("solve --p 4 --normalized --mesh-h 0.06 --tol 2e-2 " + mfile) == 0);
    // malformed input
    const std::string bad = tmp_path("badm.json");
    write_file(bad, "{");
    CHECK(run_cli("solve --p 2 " + bad) == 1);
}

TEST_CASE("cli: determinism of solve reports") {
    const std::string mfile = tmp_path("axes_det.json");
    write_file(mfile, R"({"normals": [[1,0],[0,1],[-1,0],[0,-1]], "weights": [1.3,1,0.8,1]})");
    std::string o1, o2;
    CHECK(run_cli("solve --p 2.5 --mesh-h 0.06 --tol 1e-2 --seed 9 " + mfile, &o1) == 0);
    const std::string r1 = slurp(o1);
    CHECK(run_cli("solve --p 2.5 --mesh-h 0.06 --tol 1e-2 --seed 9 " + mfile, &o2) == 0);
    const std::string r2 = slurp(o2);
    CHECK(r1 == r2);
    CHECK(!r1.empty());
}

TEST_CASE("cli: torsion and wulff") {
    const std::string pfile = tmp_path("sq.json");
    write_file(pfile, R"({"vertices": [[-1,-1],[1,-1],[1,1],[-1,1]]})");
    std::string out;
    CHECK(run_cli("torsion --mesh-h 0.06 --dump-mesh " + tmp_path("mesh.json") + " " + pfile,
                  &out) == 0);
    CHECK(slurp(out).find("facet_measures") != std::string::npos);
    CHECK(slurp(tmp_path("mesh.json")).find("triangles") != std::string::npos);

    const std::string mfile = tmp_path("axes_w.json");
    write_file(mfile, R"({"normals": [[1,0],[0,1],[-1,0],[0,-1]], "weights": [1,1,1,1]})");
    CHECK(run_cli("wulff --y 1,1,1,1 " + mfile, &out) == 0);
    CHECK(slurp(out).find("vertices") != std::string::npos);
}

TEST_CASE("cli: verify suite dispatch") {
    const std::string pfile = tmp_path("sqv.json");
    write_file(pfile, R"({"vertices": [[-1,-1],[1,-1],[1,1],[-1,1]]})");
    CHECK(run_cli("verify identities --mesh-h 0.06 " + pfile) == 0);
    CHECK(run_cli("verify bm --pair " + pfile + " " + pfile + " --lambda 0.5 --mesh-h 0.06") == 0);
    CHECK(run_cli("verify nosuch " + pfile) == 1);
}

TEST_CASE("cli: continuity experiment emits a CSV table") {
    const std::string mfile = tmp_path("axes_c.json");
    write_file(mfile, R"({"normals": [[1,0],[0,1],[-1,0],[0,-1]], "weights": [1,1,1,1]})");
    std::string out;
    const int rc = run_cli(
        "continuity --mode measure --p 2 --eps 0.2,0.1 --mesh-h 0.06 --tol 5e-3 " + mfile, &out);
    CHECK(rc == 0);
    const std::string csv = slurp(out);
    CHECK(csv.rfind("i,perturbation,hausdorff,residual,T", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    // empty schedule is a configuration error
    CHECK(run_cli("continuity --mode measure --p 2 --eps '' " + mfile) == 1);
}
