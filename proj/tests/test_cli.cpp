#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "odecert/io.hpp"

namespace fs = std::filesystem;

namespace {

std::string fixture_path(const std::string& name) {
    return std::string(FIXTURE_DIR) + "/" + name;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status < 0) return -1;
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("odecert_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("certify: example 1 with the origin Jacobian is certified") {
    const fs::path out = fresh_dir("certify_ex1");
    const int rc = run_cli("certify --system " + fixture_path("example1.sys") +
                           " --mode origin --lambdas auto --box \"-1:1,-1:1\" --out " +
                           out.string());
    CHECK(rc == 0);
    const std::string report = odecert::read_file((out / "certificate.txt").string());
    CHECK(report.find("verdict=certified") != std::string::npos);
    CHECK(report.find("F =") != std::string::npos);
    CHECK(report.find("P =") != std::string::npos);
}

TEST_CASE("certify: krasovskii is not applicable (exit 3)") {
    const fs::path out = fresh_dir("certify_kras");
    const int rc = run_cli("certify --system " + fixture_path("krasovskii.sys") +
                           " --mode origin --lambdas auto --box \"-1:1,-1:1\" --out " +
                           out.string());
    CHECK(rc == 3);
    const int rc2 = run_cli("certify --system " + fixture_path("krasovskii.sys") +
                            " --mode pointwise --out " + out.string());
    CHECK(rc2 == 3);
}

TEST_CASE("certify: garbled input exits 2") {
    const fs::path out = fresh_dir("certify_bad");
    const fs::path bad = out / "bad.sys";
    odecert::write_file(bad.string(), "this is not\na system definition\n");
    CHECK(run_cli("certify --system " + bad.string() + " --mode pointwise") == 2);
    CHECK(run_cli("certify --system " + (out / "missing.sys").string() + " --mode pointwise") == 2);
    CHECK(run_cli("certify") == 2); // missing --system
}

TEST_CASE("region: van der pol pointwise scan writes the artifact set") {
    const fs::path out = fresh_dir("region_vdp");
    const int rc = run_cli("region --system " + fixture_path("vanderpol.sys") +
                           " --mode pointwise --box \"-1:1,-1:1\" --res 41,41 --out " +
                           out.string());
    CHECK(rc == 0);
    CHECK(fs::exists(out / "region.csv"));
    CHECK(fs::exists(out / "boundary.csv"));
    CHECK(fs::exists(out / "region.svg"));
    const auto pts = odecert::read_certified_points_csv((out / "region.csv").string());
    CHECK(!pts.empty());
}

TEST_CASE("region: resolution below 2 is rejected") {
    const fs::path out = fresh_dir("region_res");
    const int rc = run_cli("region --system " + fixture_path("vanderpol.sys") +
                           " --mode pointwise --box \"-1:1,-1:1\" --res 1,1 --out " +
                           out.string());
    CHECK(rc == 2);
}

TEST_CASE("region: identical seeds give byte-identical CSV output") {
    const fs::path out1 = fresh_dir("region_rep1");
    const fs::path out2 = fresh_dir("region_rep2");
    const std::string common = "region --system " + fixture_path("hopf.sys") +
                               " --mode origin --lambdas auto --box \"-0.3:0.3,-0.3:0.3\" "
                               "--res 21,21 --seed 7 --out ";
    REQUIRE(run_cli(common + out1.string()) == 0);
    REQUIRE(run_cli(common + out2.string()) == 0);
    CHECK(odecert::read_file((out1 / "region.csv").string()) ==
          odecert::read_file((out2 / "region.csv").string()));
    CHECK(odecert::read_file((out1 / "boundary.csv").string()) ==
          odecert::read_file((out2 / "boundary.csv").string()));
}

TEST_CASE("validate: example 1 region has no failures; corrupt region fails") {
    const fs::path out = fresh_dir("validate_ex1");
    REQUIRE(run_cli("region --system " + fixture_path("example1.sys") +
                    " --mode pointwise --box \"-1:1,-1:1\" --res 31,31 --out " +
                    out.string()) == 0);
    const int rc = run_cli("validate --system " + fixture_path("example1.sys") +
                           " --region " + (out / "region.csv").string() +
                           " --box \"-1:1,-1:1\" --samples 50 --seed 3 --out " + out.string());
    CHECK(rc == 0);

    // corrupt region claiming divergent points (x1 x2 > 1) are certified
    const fs::path bad = out / "bad_region.csv";
    odecert::write_file(bad.string(),
                        "x1,x2,in_omega,lambda_R,hurwitz_ok,reason\n"
                        "2.0,0.9,1,0.5,1,none\n"
                        "1.5,1.5,1,0.5,1,none\n");
    const int rc2 = run_cli("validate --system " + fixture_path("example1.sys") +
                            " --region " + bad.string() +
                            " --box \"-2:2,-2:2\" --horizon 20 --out " + out.string());
    CHECK(rc2 == 1);

    // an empty region passes vacuously
    const fs::path empty = out / "empty_region.csv";
    odecert::write_file(empty.string(), "x1,x2,in_omega,lambda_R,hurwitz_ok,reason\n");
    CHECK(run_cli("validate --system " + fixture_path("example1.sys") + " --region " +
                  empty.string() + " --out " + out.string()) == 0);

    // a missing region file is a configuration error
    CHECK(run_cli("validate --system " + fixture_path("example1.sys") + " --region " +
                  (out / "nope.csv").string()) == 2);
}

TEST_CASE("certify: fixed F with an explicit lambda-pair file") {
    const fs::path out = fresh_dir("certify_fixed");
    const fs::path f_csv = out / "F.csv";
    const fs::path lam = out / "lambdas.txt";
    odecert::write_file(f_csv.string(), "-1,0\n0,-1\n");
    odecert::write_file(lam.string(),
                        "0.5, inf\ninf, 0.5\n\n0.25, inf\ninf, 0.25\n");
    const int rc = run_cli("certify --system " + fixture_path("example1.sys") +
                           " --mode fixed --F " + f_csv.string() + " --lambdas " +
                           lam.string() + " --out " + out.string());
    CHECK(rc == 0);
    const std::string report = odecert::read_file((out / "certificate.txt").string());
    CHECK(report.find("verdict=certified") != std::string::npos);
    CHECK(report.find("lambda_bar") != std::string::npos);

    // a non-Hurwitz fixed F is not applicable
    odecert::write_file(f_csv.string(), "0,1\n-1,0\n");
    CHECK(run_cli("certify --system " + fixture_path("example1.sys") + " --mode fixed --F " +
                  f_csv.string() + " --lambdas " + lam.string() + " --out " +
                  out.string()) == 3);
}

TEST_CASE("cpwl-check: linear system certifies with zero lambda") {
    const fs::path out = fresh_dir("cpwl_linear");
    // offset box keeps the equilibrium off every simplex frontier
    const int rc = run_cli("cpwl-check --system " + fixture_path("linear.sys") +
                           " --box \"-0.5625:0.4375,-0.53125:0.46875\" --divisions 4,4 "
                           "--seed 2 --out " +
                           out.string());
    CHECK(rc == 0);
    const std::string report = odecert::read_file((out / "cpwl_report.txt").string());
    CHECK(report.find("theorem1=certified") != std::string::npos);
    CHECK(report.find("sandwich_violations=0") != std::string::npos);
    CHECK(fs::exists(out / "pieces.csv"));
}

TEST_CASE("cpwl-check: van der pol on a coarse grid is deterministic") {
    const fs::path out1 = fresh_dir("cpwl_vdp1");
    const fs::path out2 = fresh_dir("cpwl_vdp2");
    const std::string common = "cpwl-check --system " + fixture_path("vanderpol.sys") +
                               " --box \"-0.5:0.5,-0.5:0.5\" --divisions 2,2 --seed 11 --out ";
    const int rc1 = run_cli(common + out1.string());
    const int rc2 = run_cli(common + out2.string());
    CHECK(rc1 == rc2);
    CHECK(odecert::read_file((out1 / "cpwl_report.txt").string()) ==
          odecert::read_file((out2 / "cpwl_report.txt").string()));
    // the report names a failing simplex when not certified
    const std::string report = odecert::read_file((out1 / "cpwl_report.txt").string());
    if (report.find("theorem1=not-certified") != std::string::npos)
        CHECK(report.find("failing_simplex=") != std::string::npos);
}
