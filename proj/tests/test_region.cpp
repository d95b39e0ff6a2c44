#include <catch2/catch_amalgamated.hpp>

#include "odecert/io.hpp"
#include "odecert/ode.hpp"
#include "odecert/region.hpp"
#include "support.hpp"

using namespace odecert;
using namespace testsupport;

namespace {

VectorField fixture(const std::string& name) {
    return VectorField::parse(read_file(std::string(FIXTURE_DIR) + "/" + name));
}

} // namespace

TEST_CASE("systematic scan of the linear field matches the closed form") {
    // f = -x: P = I/2, w = |x|/2, lambda_R = ||x||_1 + sqrt(2) ||x||_2
    const VectorField lin = fixture("linear.sys");
    const Box box{{{-1.0, 1.0}, {-1.0, 1.0}}};
    const RegionEstimate est = scan_region(lin, Certificate::systematic(), box, {21, 21});
    std::vector<int> cell(2);
    for (cell[0] = 0; cell[0] < 21; ++cell[0])
        for (cell[1] = 0; cell[1] < 21; ++cell[1]) {
            const PointVerdict& v = est.verdicts[est.index(cell)];
            const Vec x = est.cell_center(cell);
            const double lam = std::abs(x[0]) + std::abs(x[1]) +
                               std::sqrt(2.0) * norm2(x);
            CHECK(v.lambda_R == Catch::Approx(lam).margin(1e-9));
            CHECK(v.in_omega == (lam < 1.0 - kRayleighTol));
        }
    // the origin cell is certified
    CHECK(est.verdicts[est.index({10, 10})].in_omega);
    CHECK(est.certified_fraction > 0.0);
}

TEST_CASE("scans are deterministic") {
    const VectorField vdp = fixture("vanderpol.sys");
    const Box box{{{-1.0, 1.0}, {-1.0, 1.0}}};
    const RegionEstimate a = scan_region(vdp, Certificate::systematic(), box, {31, 31});
    const RegionEstimate b = scan_region(vdp, Certificate::systematic(), box, {31, 31});
    REQUIRE(a.verdicts.size() == b.verdicts.size());
    for (std::size_t i = 0; i < a.verdicts.size(); ++i) {
        CHECK(a.verdicts[i].in_omega == b.verdicts[i].in_omega);
        CHECK(a.verdicts[i].lambda_R == b.verdicts[i].lambda_R);
    }
    CHECK(region_csv(a) == region_csv(b));
}

TEST_CASE("van der pol systematic region is nonempty and within the basin") {
    const VectorField vdp = fixture("vanderpol.sys");
    const Box box{{{-1.0, 1.0}, {-1.0, 1.0}}};
    const RegionEstimate est = scan_region(vdp, Certificate::systematic(), box, {41, 41});
    CHECK(est.certified_fraction > 0.0);
    CHECK(est.verdicts[est.index({20, 20})].in_omega); // origin cell
    // a known basin point far from the origin is not certified
    const PointVerdict far = systematic_test(vdp, {0.95, 0.0});
    CHECK_FALSE(far.in_omega);
}

TEST_CASE("scan resolutions below 2 are rejected") {
    const VectorField lin = fixture("linear.sys");
    const Box box{{{-1.0, 1.0}, {-1.0, 1.0}}};
    CHECK_THROWS_AS(scan_region(lin, Certificate::systematic(), box, {1, 5}), InputError);
    CHECK_THROWS_AS(scan_region(lin, Certificate::systematic(), box, {5}), InputError);
    const RegionEstimate tiny = scan_region(lin, Certificate::systematic(), box, {2, 2});
    CHECK(tiny.verdicts.size() == 4);
}

TEST_CASE("domain errors at individual points do not abort a scan") {
    // sqrt makes the Jacobian singular along x1 = 0; those columns must be
    // recorded, not thrown
    const VectorField vf = VectorField::parse("dim = 1\nf1 = -x1 * sqrt(abs(x1))\n");
    const Box box{{{-1.0, 1.0}}};
    const RegionEstimate est = scan_region(vf, Certificate::systematic(), box, {4});
    CHECK(est.verdicts.size() == 4);
}

TEST_CASE("refining the resolution moves the fraction less than the boundary mass") {
    const VectorField vdp = fixture("vanderpol.sys");
    const Box box{{{-0.4, 0.4}, {-0.4, 0.4}}};
    const RegionEstimate coarse = scan_region(vdp, Certificate::systematic(), box, {20, 20});
    const RegionEstimate fine = scan_region(vdp, Certificate::systematic(), box, {40, 40});
    // boundary cells at the coarse level: certified with an uncertified
    // 4-neighbor or vice versa
    auto member = [&](int i, int j) { return coarse.verdicts[coarse.index({i, j})].in_omega; };
    int boundary_cells = 0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const bool m = member(i, j);
            bool edge = false;
            if (i > 0 && member(i - 1, j) != m) edge = true;
            if (i < 19 && member(i + 1, j) != m) edge = true;
            if (j > 0 && member(i, j - 1) != m) edge = true;
            if (j < 19 && member(i, j + 1) != m) edge = true;
            if (edge) ++boundary_cells;
        }
    const double boundary_mass = static_cast<double>(boundary_cells) / 400.0;
    CHECK(std::abs(fine.certified_fraction - coarse.certified_fraction) <= boundary_mass);
}

TEST_CASE("boundary extraction: fully certified grid has no boundary") {
    const VectorField lin = fixture("linear.sys");
    const Box box{{{-0.05, 0.05}, {-0.05, 0.05}}};
    RegionEstimate est = scan_region(lin, Certificate::systematic(), box, {8, 8});
    REQUIRE(est.certified_fraction == 1.0);
    const auto lines = extract_boundary_2d(est);
    CHECK(lines.empty());
    CHECK(est.boundary.empty());
}

TEST_CASE("half-plane membership produces one horizontal polyline") {
    RegionEstimate est;
    est.box = Box{{{-1.0, 1.0}, {-1.0, 1.0}}};
    est.resolution = {10, 10};
    est.verdicts.resize(100);
    std::vector<int> cell(2);
    for (cell[0] = 0; cell[0] < 10; ++cell[0])
        for (cell[1] = 0; cell[1] < 10; ++cell[1]) {
            PointVerdict v;
            v.x = est.cell_center(cell);
            v.in_omega = v.x[1] < 0.0;
            est.verdicts[est.index(cell)] = v;
        }
    const auto lines = extract_boundary_2d(est);
    REQUIRE(lines.size() == 1);
    for (const auto& p : lines[0]) CHECK(std::abs(p[1]) <= 0.2 + 1e-12); // one cell height
}

TEST_CASE("example 1 boundary encloses the origin") {
    const VectorField vf = fixture("example1.sys");
    const Box box{{{-2.0, 2.0}, {-1.0, 1.0}}};
    RegionEstimate est = scan_region(vf, Certificate::systematic(), box, {60, 60});
    extract_boundary_2d(est);
    REQUIRE_FALSE(est.boundary.empty());
    CHECK(encloses_point(est.boundary, 0.0, 0.0));
    CHECK_FALSE(encloses_point(est.boundary, 1.9, 0.9));
}

TEST_CASE("certified cells pass the simulation oracle on a sample") {
    const VectorField vdp = fixture("vanderpol.sys");
    const Box box{{{-1.0, 1.0}, {-1.0, 1.0}}};
    const RegionEstimate est = scan_region(vdp, Certificate::systematic(), box, {41, 41});
    std::vector<Vec> certified;
    for (const PointVerdict& v : est.verdicts)
        if (v.in_omega) certified.push_back(v.x);
    REQUIRE_FALSE(certified.empty());
    auto g = rng(99);
    std::shuffle(certified.begin(), certified.end(), g);
    if (certified.size() > 30) certified.resize(30);
    IntegrationControls c;
    c.method = IntegrationControls::Method::rkf45_adaptive;
    c.escape_box = box.scaled(10.0);
    const OracleReport rep = attraction_oracle(vdp, certified, 100.0, c);
    CHECK(rep.failures.empty());
}

TEST_CASE("asymptotic stability set of example 1 matches the two-inequality form") {
    const VectorField vf = fixture("example1.sys");
    // feasible diagonal pattern: P = I/2 gives lambda_R = 1.5 * 0.5 < 1
    const CertificateParams params =
        make_certificate(Matrix{{-1.0, 0.0}, {0.0, -1.0}},
                         BoundMatrix::diagonal_pattern(2, 0.5),
                         BoundMatrix::diagonal_pattern(2, 0.25),
                         CertificateMode::jacobian_origin);
    REQUIRE(params.rayleigh_ok());
    const Box box{{{-2.0, 2.0}, {-1.0, 1.0}}};
    const AsymptoticStabilityRegion asr = asymptotic_stability_set(vf, params, box, {40, 40});
    std::vector<int> cell(2);
    for (cell[0] = 0; cell[0] < 40; ++cell[0])
        for (cell[1] = 0; cell[1] < 40; ++cell[1]) {
            const Vec x = asr.region.cell_center(cell);
            // |J(x) x| <= row minima: |x1||-1+6 x1 x2| <= 1/4 and |x2| <= 1/4
            const bool closed = std::abs(x[0]) * std::abs(-1.0 + 6.0 * x[0] * x[1]) <= 0.25 &&
                                std::abs(x[1]) <= 0.25;
            CHECK(asr.region.verdicts[asr.region.index(cell)].in_omega == closed);
        }
}

TEST_CASE("asymptotic stability set is the condition-1 sub-region") {
    const VectorField vf = fixture("hopf.sys");
    Matrix lb(2, 2), lt(2, 2);
    std::vector<std::uint8_t> ub{0, 1, 1, 0};
    lb(0, 0) = lb(1, 1) = 1.0 / 3.0;
    lt(0, 0) = lt(1, 1) = 1.0 / 6.0;
    const CertificateParams params =
        make_certificate(Matrix{{-1.0, -1.0}, {1.0, -1.0}}, BoundMatrix(lb, ub),
                         BoundMatrix(lt, ub), CertificateMode::jacobian_origin);
    const Box box{{{-0.4, 0.4}, {-0.4, 0.4}}};
    const AsymptoticStabilityRegion asr = asymptotic_stability_set(vf, params, box, {21, 21});
    CHECK((asr.P - params.P).max_abs() == 0.0);
    const RegionEstimate full = scan_region(vf, Certificate::with_params(params), box, {21, 21});
    // condition-1 region contains the full membership region
    for (std::size_t i = 0; i < full.verdicts.size(); ++i) {
        if (full.verdicts[i].in_omega) CHECK(asr.region.verdicts[i].in_omega);
    }
    CHECK(asr.region.certified_fraction >= full.certified_fraction);
    // and for a linear stable system the whole grid qualifies
    const VectorField lin = fixture("linear.sys");
    const CertificateParams lp =
        make_certificate(Matrix{{-1.0, 0.0}, {0.0, -1.0}},
                         BoundMatrix::diagonal_pattern(2, 0.5),
                         BoundMatrix::diagonal_pattern(2, 0.25),
                         CertificateMode::jacobian_origin);
    const Box small{{{-0.2, 0.2}, {-0.2, 0.2}}};
    const AsymptoticStabilityRegion lin_asr = asymptotic_stability_set(lin, lp, small, {11, 11});
    CHECK(lin_asr.region.certified_fraction == 1.0);
}

TEST_CASE("3D systems scan as point clouds") {
    const VectorField vf = VectorField::parse(
        "dim = 3\n"
        "f1 = -x1 + 0.1 * x2^2\n"
        "f2 = -2 * x2 + 0.05 * x1 * x3\n"
        "f3 = -3 * x3\n");
    const Box box{{{-0.5, 0.5}, {-0.5, 0.5}, {-0.5, 0.5}}};
    const RegionEstimate est = scan_region(vf, Certificate::systematic(), box, {5, 5, 5});
    CHECK(est.verdicts.size() == 125);
    CHECK(est.verdicts[est.index({2, 2, 2})].in_omega); // origin cell
    CHECK(est.certified_fraction > 0.0);
    RegionEstimate copy = est;
    CHECK_THROWS_AS(extract_boundary_2d(copy), InputError);
    const std::string csv = region_csv(est);
    CHECK(csv.rfind("x1,x2,x3,in_omega", 0) == 0);
}

TEST_CASE("tuning on the Hopf system reproduces a usable box") {
    const VectorField vf = fixture("hopf.sys");
    const Matrix f{{-1.0, -1.0}, {1.0, -1.0}};
    const Box box{{{-0.3, 0.3}, {-0.3, 0.3}}};
    const CertificateParams params = tune_parameters(vf, f, box);
    CHECK(params.rayleigh_ok());
    // the certified square should reach at least half-width 0.07
    bool all = true;
    for (double x = -0.07; x <= 0.07; x += 0.01)
        for (double y = -0.07; y <= 0.07; y += 0.01)
            all = all && omega_membership(vf, params, {x, y}).in_omega;
    CHECK(all);
}

TEST_CASE("tuning on the linear field selects the largest feasible scale") {
    const VectorField lin = fixture("linear.sys");
    const Matrix f{{-1.0, 0.0}, {0.0, -1.0}};
    const Box box{{{-1.0, 1.0}, {-1.0, 1.0}}};
    const CertificateParams params = tune_parameters(lin, f, box);
    // P = I/2 makes lambda_R = 1.5 s; the largest power of two under 2/3 is 1/2
    CHECK(params.lambda_tilde.value(0, 0) == Catch::Approx(0.25));
    CHECK(params.lambda_bar.value(0, 0) == Catch::Approx(0.5));
}

TEST_CASE("tuning is not applicable without a Hurwitz F") {
    const VectorField kr = fixture("krasovskii.sys");
    const Matrix j0 = kr.jacobian({0.0, 0.0});
    const Box box{{{-1.0, 1.0}, {-1.0, 1.0}}};
    CHECK_THROWS_AS(tune_parameters(kr, j0, box), NotApplicableError);
}
