#include <cse/grid.hpp>

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace cse;

namespace {

double tiles_volume(const Platten& p) {
    double v = 0.0;
    for (const auto& t : p.tiles) v += t.volume();
    return v;
}

}  // namespace

TEST_CASE("1-D grid on [-1, 0] with 16 cells") {
    const std::vector<std::size_t> counts{16};
    const auto p = build_platten(Box{{-1.0}, {0.0}}, counts, {{0, 0.0, NullDirection::le}}, 1000);
    REQUIRE(p.size() == 16);
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(p.tiles[i].half_widths[0] * 2.0 == doctest::Approx(1.0 / 16.0));
        CHECK(p.tiles[i].config == NullConfig{1});
        CHECK(p.tiles[i].sim_point == p.tiles[i].center);
        CHECK(p.tiles[i].sim_count == 1000);
    }
    CHECK(p.tiles[0].center[0] == doctest::Approx(-1.0 + 1.0 / 32.0));
}

TEST_CASE("2-D quadrants drop the all-alternative tile") {
    const std::vector<std::size_t> counts{2, 2};
    const auto p = build_platten(Box{{-1.0, -1.0}, {1.0, 1.0}}, counts,
                                 {{0, 0.0, NullDirection::le}, {1, 0.0, NullDirection::le}}, 10);
    REQUIRE(p.size() == 3);
    // Row-major, last axis fastest: (-,-), (-,+), (+,-)
    CHECK(p.tiles[0].config == NullConfig{1, 1});
    CHECK(p.tiles[1].config == NullConfig{1, 0});
    CHECK(p.tiles[2].config == NullConfig{0, 1});
    CHECK(p.tiles[1].center[1] == doctest::Approx(0.5));
}

TEST_CASE("a cell straddling a threshold is split before config assignment") {
    const std::vector<std::size_t> counts{1};
    const auto p = build_platten(Box{{-1.0}, {1.0}}, counts, {{0, 0.25, NullDirection::le}}, 10);
    REQUIRE(p.size() == 1);
    const auto e = p.tiles[0].extent();
    CHECK(e.lower[0] == -1.0);
    CHECK(e.upper[0] == doctest::Approx(0.25));
    CHECK(p.tiles[0].config == NullConfig{1});
    const auto ge = build_platten(Box{{-1.0}, {1.0}}, counts, {{0, 0.25, NullDirection::ge}}, 10);
    REQUIRE(ge.size() == 1);
    CHECK(ge.tiles[0].extent().lower[0] == doctest::Approx(0.25));
}

TEST_CASE("assign_config and straddles") {
    const std::vector<NullHypothesis> h{{0, 0.0, NullDirection::le}, {1, 1.0, NullDirection::ge}};
    CHECK(assign_config(Box{{-1.0, 1.0}, {0.0, 2.0}}, h) == NullConfig{1, 1});
    CHECK(assign_config(Box{{0.0, 0.0}, {1.0, 1.0}}, h) == NullConfig{0, 0});
    CHECK_THROWS(assign_config(Box{{-1.0, 0.0}, {1.0, 1.0}}, h));
    CHECK_FALSE(straddles(Box{{0.0}, {1.0}}, NullHypothesis{0, 1e-14, NullDirection::le}));
}

TEST_CASE("tiles cover exactly the null region") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t d = 1 + trial % 3;
        Box bounds;
        std::vector<std::size_t> counts;
        std::vector<NullHypothesis> hyps;
        for (std::size_t i = 0; i < d; ++i) {
            bounds.lower.push_back(-1.0);
            bounds.upper.push_back(1.0);
            counts.push_back(1 + static_cast<std::size_t>(rng() % 5));
            hyps.push_back({i, 0.9 * u(rng), rng() % 2 ? NullDirection::le : NullDirection::ge});
        }
        const auto p = build_platten(bounds, counts, hyps, 5);
        CHECK(tiles_volume(p) == doctest::Approx(null_region_volume(bounds, hyps)).epsilon(1e-12));
        for (const auto& t : p.tiles) CHECK(assign_config(t.extent(), hyps) == t.config);

        std::vector<double> scores(p.size());
        for (auto& s : scores) s = u(rng);
        const auto r = refine(p, scores, 3, 2.0);
        CHECK(tiles_volume(r) == doctest::Approx(tiles_volume(p)).epsilon(1e-12));
        CHECK(r.size() == p.size() + std::min<std::size_t>(3, p.size()));
    }
}

TEST_CASE("vertices are in lexicographic order, first coordinate most significant") {
    Tile t = make_tile(Box{{0.0, 10.0}, {1.0, 12.0}}, {1}, 1);
    const auto v = vertices(t);
    REQUIRE(v.size() == 4);
    CHECK(v[0] == ParamPoint{0.0, 10.0});
    CHECK(v[1] == ParamPoint{0.0, 12.0});
    CHECK(v[2] == ParamPoint{1.0, 10.0});
    CHECK(v[3] == ParamPoint{1.0, 12.0});
    t.sim_point = ParamPoint{0.5, 10.0};
    const auto disp = vertex_displacements(t);
    CHECK(disp[3] == Displacement{0.5, 2.0});
}

TEST_CASE("refine bisects the highest-scoring tiles along their widest axis") {
    const std::vector<std::size_t> counts{2, 1};
    auto p = build_platten(Box{{0.0, 0.0}, {2.0, 3.0}}, counts, {{0, 5.0, NullDirection::le}}, 100);
    REQUIRE(p.size() == 2);
    // Equal scores: the lower index wins.
    const std::vector<double> tied{1.0, 1.0};
    const auto r = refine(p, tied, 1, 1.5);
    REQUIRE(r.size() == 3);
    // Tile 0 is [0,1] x [0,3]: axis 1 is widest; children replace the parent, lower half first.
    CHECK(r.tiles[0].extent().upper[1] == doctest::Approx(1.5));
    CHECK(r.tiles[1].extent().lower[1] == doctest::Approx(1.5));
    CHECK(r.tiles[0].sim_count == 150);
    CHECK(r.tiles[0].sim_point == r.tiles[0].center);
    CHECK(r.tiles[2].sim_count == 100);
    const std::vector<double> prefer_last{0.0, 2.0};
    const auto r2 = refine(p, prefer_last, 1, 1.0);
    CHECK(r2.tiles[0].extent().upper[1] == 3.0);
    CHECK(r2.tiles[1].extent().upper[1] == doctest::Approx(1.5));
    CHECK_THROWS(refine(p, std::vector<double>{1.0}, 1, 1.0));
}

TEST_CASE("containing reports every tile on a shared boundary") {
    const std::vector<std::size_t> counts{4};
    const auto p = build_platten(Box{{0.0}, {1.0}}, counts, {{0, 1.0, NullDirection::le}}, 1);
    CHECK(p.containing(std::vector<double>{0.5}) == std::vector<std::size_t>{1, 2});
    CHECK(p.containing(std::vector<double>{0.1}) == std::vector<std::size_t>{0});
    CHECK(p.containing(std::vector<double>{1.5}).empty());
}

TEST_CASE("invalid grids are rejected") {
    const std::vector<std::size_t> one{1};
    CHECK_THROWS(build_platten(Box{{1.0}, {0.0}}, one, {}, 1));
    CHECK_THROWS(build_platten(Box{{0.0}, {1.0}}, one, {{1, 0.0, NullDirection::le}}, 1));
    CHECK_THROWS(build_platten(Box{{0.0}, {1.0}}, one, {}, 0));
}
