#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "odecert/partition.hpp"
#include "support.hpp"

using namespace odecert;
using namespace testsupport;

namespace {

double simplex_volume(const Simplex& s) {
    const std::size_t n = s.vertices.size() - 1;
    Matrix edges(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            edges(i, j) = s.vertices[i + 1][j] - s.vertices[0][j];
    // determinant by elimination
    double det = 1.0;
    Matrix a = edges;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (std::abs(a(piv, col)) < 1e-300) return 0.0;
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            det = -det;
        }
        det *= a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
        }
    }
    double fact = 1.0;
    for (std::size_t k = 2; k <= n; ++k) fact *= static_cast<double>(k);
    return std::abs(det) / fact;
}

} // namespace

TEST_CASE("1D partition of [0,1] with N=2 gives the two halves") {
    const auto part = SimplicialPartition::build(Box{{{0.0, 1.0}}}, {2});
    REQUIRE(part.size() == 2);
    CHECK(part.simplex(0).vertices[0][0] == 0.0);
    CHECK(part.simplex(0).vertices[1][0] == 0.5);
    CHECK(part.simplex(1).vertices[0][0] == 0.5);
    CHECK(part.simplex(1).vertices[1][0] == 1.0);
}

TEST_CASE("2D unit cell splits into the two Kuhn triangles") {
    const auto part = SimplicialPartition::build(Box{{{0.0, 1.0}, {0.0, 1.0}}}, {1, 1});
    REQUIRE(part.size() == 2);
    auto vset = [](const Simplex& s) {
        std::set<std::pair<double, double>> v;
        for (const Vec& p : s.vertices) v.insert({p[0], p[1]});
        return v;
    };
    const std::set<std::pair<double, double>> t0{{0, 0}, {1, 0}, {1, 1}};
    const std::set<std::pair<double, double>> t1{{0, 0}, {0, 1}, {1, 1}};
    CHECK(vset(part.simplex(0)) == t0);
    CHECK(vset(part.simplex(1)) == t1);
}

TEST_CASE("3D unit cell gives six tetrahedra of volume 1/6") {
    const auto part =
        SimplicialPartition::build(Box{{{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}}, {1, 1, 1});
    REQUIRE(part.size() == 6);
    double total = 0.0;
    for (std::size_t i = 0; i < part.size(); ++i) {
        const double v = simplex_volume(part.simplex(i));
        CHECK(v == Catch::Approx(1.0 / 6.0).margin(1e-12));
        total += v;
    }
    CHECK(total == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("simplex count is n! times the cell count") {
    const auto part =
        SimplicialPartition::build(Box{{{-1.0, 1.0}, {-2.0, 0.0}, {0.0, 3.0}}}, {2, 3, 4});
    CHECK(part.size() == 6u * 24u);
}

TEST_CASE("vertex chain realizes the axis-step identity") {
    const auto part = SimplicialPartition::build(Box{{{-1.0, 1.0}, {0.0, 1.0}}}, {4, 2});
    for (std::size_t id = 0; id < part.size(); ++id) {
        const Simplex& s = part.simplex(id);
        std::set<int> axes;
        for (std::size_t k = 0; k + 1 < s.vertices.size(); ++k) {
            // each consecutive difference is a single positive axis step
            int axis = -1;
            for (std::size_t j = 0; j < s.vertices[k].size(); ++j) {
                const double d = s.vertices[k + 1][j] - s.vertices[k][j];
                if (d != 0.0) {
                    CHECK(d == Catch::Approx(part.delta()[j]).margin(1e-15));
                    CHECK(axis == -1);
                    axis = static_cast<int>(j);
                }
            }
            REQUIRE(axis >= 0);
            CHECK(!axes.count(axis));
            axes.insert(axis);
        }
        CHECK(axes.size() == s.vertices.size() - 1);
    }
}

TEST_CASE("partition volumes cover the box") {
    const Box box{{{-0.5, 0.5}, {-0.25, 0.75}}};
    const auto part = SimplicialPartition::build(box, {3, 5});
    double total = 0.0;
    for (std::size_t i = 0; i < part.size(); ++i) total += simplex_volume(part.simplex(i));
    CHECK(total == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("locate returns a containing simplex, deterministically") {
    const Box box{{{-1.0, 1.0}, {-1.0, 1.0}}};
    const auto part = SimplicialPartition::build(box, {4, 4});
    auto g = rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        Vec x{uniform(g, -1.0, 1.0), uniform(g, -1.0, 1.0)};
        const std::size_t id = part.locate(x);
        CHECK(id == part.locate(x));
        const Vec beta = part.barycentric(id, x);
        for (double b : beta) CHECK(b >= -1e-12);
    }
    // a shared-face point resolves to the lexicographically smallest id
    const std::size_t a = part.locate({0.25, 0.25});
    CHECK(a == part.locate({0.25, 0.25}));
}

TEST_CASE("degenerate boxes and divisions are rejected") {
    CHECK_THROWS_AS(SimplicialPartition::build(Box{{{1.0, 1.0}}}, {1}), InputError);
    CHECK_THROWS_AS(SimplicialPartition::build(Box{{{1.0, 0.0}}}, {1}), InputError);
    CHECK_THROWS_AS(SimplicialPartition::build(Box{{{0.0, 1.0}}}, {0}), InputError);
    CHECK_THROWS_AS(SimplicialPartition::build(Box{{{0.0, 1.0}}}, {1, 1}), InputError);
}
