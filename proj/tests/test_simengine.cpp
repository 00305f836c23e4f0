#include <cse/simengine.hpp>
#include <cse/special.hpp>

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

using namespace cse;

namespace {

Platten ztest_platten(std::size_t cells, std::int64_t n) {
    const std::vector<std::size_t> counts{cells};
    return build_platten(Box{{-1.0}, {0.0}}, counts, {{0, 0.0, NullDirection::le}}, n);
}

}  // namespace

TEST_CASE("results do not depend on thread count or chunking") {
    const auto fam = ModelFamily::bernoulli({15, 15});
    const MultiArmBetaBinomialDesign design({15, 15}, {0.0, 0.0});
    const std::vector<std::size_t> counts{3, 2};
    const auto p = build_platten(Box{{-1.0, -1.0}, {0.5, 0.5}}, counts,
                                 {{0, 0.0, NullDirection::le}, {1, 0.0, NullDirection::le}}, 3001);
    const SeedSpec seed{99};
    EngineOptions one;
    one.lambda = 0.1;
    const auto ref = run_platten(design, fam, p, seed, one);
    for (std::size_t threads : {2, 8}) {
        for (std::size_t chunk : {1, 7, 100000}) {
            EngineOptions opt;
            opt.threads = threads;
            opt.chunk = chunk;
            opt.lambda = 0.1;
            const auto got = run_platten(design, fam, p, seed, opt);
            REQUIRE(got.size() == ref.size());
            for (std::size_t t = 0; t < got.size(); ++t) {
                CHECK(got[t].stats == ref[t].stats);
                CHECK(got[t].false_rejections == ref[t].false_rejections);
            }
        }
    }
}

TEST_CASE("batches are sorted and count rejections below lambda") {
    const auto fam = ModelFamily::normal(1);
    const ZTestDesign design(1);
    const auto p = ztest_platten(4, 5000);
    EngineOptions opt;
    opt.lambda = 0.025;
    opt.keep_rejections = true;
    const auto batches = run_platten(design, fam, p, SeedSpec{1}, opt);
    for (const auto& b : batches) {
        CHECK(std::is_sorted(b.stats.begin(), b.stats.end()));
        const auto below = std::lower_bound(b.stats.begin(), b.stats.end(), 0.025) - b.stats.begin();
        CHECK(b.false_rejections == below);
        std::int64_t bits = 0;
        for (const auto& r : b.rejections) bits += r[0];
        CHECK(bits == b.false_rejections);
        CHECK(b.lambda == 0.025);
        CHECK(b.seed.master_seed == 1);
    }
}

TEST_CASE("rejection rate at the simulation point matches the analytic power") {
    const auto fam = ModelFamily::normal(1);
    const ZTestDesign design(1);
    Tile tile = make_tile(Box{{-0.3}, {-0.1}}, {1}, 200000);
    EngineOptions opt;
    opt.lambda = 0.025;
    const auto b = run_batch(design, fam, tile, 0, SeedSpec{2}, opt);
    const double f = normal_sf(normal_quantile(0.975) - tile.sim_point[0]);
    const double se = std::sqrt(f * (1.0 - f) / 200000.0);
    CHECK(std::abs(static_cast<double>(b.false_rejections) / 200000.0 - f) < 5.0 * se);
}

TEST_CASE("common random numbers: sorted normal statistics are translates across tiles") {
    const auto fam = ModelFamily::normal(1);
    const ZTestDesign design(1);
    const auto p = ztest_platten(8, 4000);
    const auto batches = run_platten(design, fam, p, SeedSpec{5});
    for (std::size_t t = 1; t < p.size(); ++t) {
        const double shift = p.tiles[t].sim_point[0] - p.tiles[0].sim_point[0];
        // S = 1 - Phi(X) reverses order, so equal ranks hold equal noise.
        for (std::size_t i = 100; i < 3900; i += 97) {
            const double x0 = -normal_quantile(batches[0].stats[i]);
            const double xt = -normal_quantile(batches[t].stats[i]);
            CHECK(xt - x0 == doctest::Approx(shift).epsilon(1e-8));
        }
    }
}

TEST_CASE("a single-tile run equals that tile's batch in a full run") {
    const auto fam = ModelFamily::normal(1);
    const ZTestDesign design(1);
    const auto p = ztest_platten(3, 777);
    const auto all = run_platten(design, fam, p, SeedSpec{8});
    const auto one = run_batch(design, fam, p.tiles[2], 2, SeedSpec{8});
    CHECK(one.stats == all[2].stats);
    CHECK(one.tile_id == 2);
}

TEST_CASE("batch files round-trip with a little-endian layout") {
    SimBatch b;
    b.tile_id = 3;
    b.seed = SeedSpec{0x0102030405060708ULL};
    b.stats = {0.25, -1.5, 1e-300};
    std::stringstream ss;
    write_batch(ss, b);
    const std::string bytes = ss.str();
    CHECK(bytes.size() == 8 + 4 + 4 + 8 * 4 + 8 * 3);
    CHECK(bytes.substr(0, 8) == "CSEBATCH");
    CHECK(static_cast<unsigned char>(bytes[8]) == 1);
    CHECK(static_cast<unsigned char>(bytes[16]) == 3);
    CHECK(static_cast<unsigned char>(bytes[32]) == 0x08);
    // 0.25 = 0x3FD0000000000000
    CHECK(static_cast<unsigned char>(bytes[55]) == 0x3F);
    CHECK(static_cast<unsigned char>(bytes[54]) == 0xD0);
    const auto back = read_batch(ss);
    CHECK(back.tile_id == 3);
    CHECK(back.seed.master_seed == b.seed.master_seed);
    CHECK(back.stats == b.stats);
    std::stringstream bad("CSEBATCX");
    CHECK_THROWS(read_batch(bad));
    std::stringstream truncated(bytes.substr(0, 40));
    CHECK_THROWS(read_batch(truncated));
}

TEST_CASE("engine rejects inconsistent inputs") {
    const auto fam = ModelFamily::normal(1);
    const ZTestDesign design(1);
    auto p = ztest_platten(2, 10);
    p.tiles[0].config = {1, 1};
    CHECK_THROWS(run_platten(design, fam, p, SeedSpec{1}));
    CHECK_THROWS(run_platten(design, ModelFamily::normal(2), ztest_platten(2, 10), SeedSpec{1}));
}

TEST_CASE("thread count resolution") {
    CHECK(resolve_threads(3) == 3);
    setenv("CSE_THREADS", "5", 1);
    CHECK(resolve_threads(std::nullopt) == 5);
    setenv("CSE_THREADS", "junk", 1);
    CHECK(resolve_threads(std::nullopt) >= 1);
    unsetenv("CSE_THREADS");
}

TEST_CASE("unsorted batches keep simulation order") {
    const auto fam = ModelFamily::normal(1);
    const ZTestDesign design(1);
    const auto p = ztest_platten(2, 300);
    EngineOptions opt;
    opt.sort_stats = false;
    opt.lambda = 0.3;
    const auto raw = run_platten(design, fam, p, SeedSpec{12}, opt);
    const auto sorted = run_platten(design, fam, p, SeedSpec{12}, EngineOptions{1, 2048, 0.3});
    for (std::size_t t = 0; t < p.size(); ++t) {
        for (std::uint64_t k = 0; k < 300; k += 29) {
            const auto x = sample_outcomes(fam, p.tiles[t].sim_point.coords(), SeedSpec{12}.stream(k));
            CHECK(raw[t].stats[k] == ZTestDesign::p_value(x.sufficient[0]));
        }
        CHECK(raw[t].false_rejections == sorted[t].false_rejections);
        auto copy = raw[t].stats;
        std::stable_sort(copy.begin(), copy.end());
        CHECK(copy == sorted[t].stats);
    }
}
