#include <cse/calibration.hpp>
#include <cse/special.hpp>
#include <cse/tiltbound.hpp>

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

using namespace cse;

namespace {

const double z975 = 1.959963984540054;

SimBatch batch_of(std::vector<double> stats) {
    SimBatch b;
    std::sort(stats.begin(), stats.end());
    b.stats = std::move(stats);
    return b;
}

Platten ztest_platten(std::size_t cells, std::int64_t n, double lo = -1.0, double hi = 0.0) {
    const std::vector<std::size_t> counts{cells};
    return build_platten(Box{{lo}, {hi}}, counts, {{0, hi, NullDirection::le}}, n);
}

}  // namespace

TEST_CASE("thresholds order REJECT_NOTHING below every value") {
    const auto none = Threshold::reject_nothing();
    CHECK(none < Threshold::at(-1e300));
    CHECK(Threshold::at(0.1) < Threshold::at(0.2));
    CHECK(none == Threshold::reject_nothing());
    CHECK_FALSE(none.rejects(-INFINITY));
    CHECK(Threshold::at(0.1).rejects(0.05));
    CHECK_FALSE(Threshold::at(0.1).rejects(0.1));
}

TEST_CASE("pointwise order-statistic threshold") {
    const std::vector<double> three{0.1, 0.2, 0.3};
    CHECK(pointwise_threshold(three, 0.5) == Threshold::at(0.2));
    std::vector<double> u(999);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = static_cast<double>(i + 1) / 1000.0;
    CHECK(order_statistic_index(999, 0.025) == 25);
    CHECK(pointwise_threshold(u, 0.025) == Threshold::at(u[24]));
    CHECK(order_statistic_index(10, 0.025) == 0);
    CHECK(pointwise_threshold(std::vector<double>(10, 0.5), 0.025).is_reject_nothing());
    CHECK(order_statistic_index(5, 1.0) == 5);
    CHECK_THROWS(pointwise_threshold(std::vector<double>{}, 0.1));
    CHECK_THROWS(pointwise_threshold(std::vector<double>{0.3, 0.1}, 0.5));
    CHECK_THROWS(order_statistic_index(10, 1.5));
}

TEST_CASE("tile targets") {
    const auto fam = ModelFamily::normal(1);
    CHECK(tile_alpha_target(fam, make_tile(Box{{0.0}, {0.0}}, {1}, 1), 0.025) == 0.025);
    const double a = tile_alpha_target(fam, make_tile(Box{{-0.1}, {0.1}}, {1}, 1), 0.025);
    // Analytic optimum q* = 1 + sqrt(-2 ln alpha) / v of the normal inverse bound.
    const double q = 1.0 + std::sqrt(-2.0 * std::log(0.025)) / 0.1;
    CHECK(a == doctest::Approx(std::exp(q / (q - 1.0) * std::log(0.025) - q * 0.01 / 2.0)).epsilon(1e-9));
    CHECK(std::abs(a - 0.018975) < 5e-5);
    double prev = 0.025;
    for (double h : {0.05, 0.1, 0.2}) {
        const double t = tile_alpha_target(fam, make_tile(Box{{-h}, {h}}, {1}, 1), 0.025);
        CHECK(t < prev);
        CHECK(t > 0.0);
        prev = t;
    }
    const auto p = ztest_platten(8, 10);
    const auto serial = tile_alpha_targets(fam, p, 0.05, 1);
    CHECK(tile_alpha_targets(fam, p, 0.05, 4) == serial);
    for (double t : serial) CHECK(t < 0.05);
}

TEST_CASE("global threshold is the minimum with ties to the lowest tile") {
    const auto p = ztest_platten(3, 4);
    const std::vector<double> targets{0.5, 0.5, 0.5};
    const std::vector<SimBatch> batches{batch_of({0.4, 0.3, 0.9, 0.8}), batch_of({0.1, 0.2, 0.3, 0.4}),
                                        batch_of({0.2, 0.1, 0.35, 0.5})};
    const auto r = calibrate_from_batches(p, targets, batches, 0.05);
    CHECK(r.tiles[0].k == 2);
    CHECK(r.tiles[0].lambda == Threshold::at(0.4));
    CHECK(r.lambda_star == Threshold::at(0.2));
    CHECK(r.argmin_tile == 1);
    for (const auto& t : r.tiles) CHECK(r.lambda_star <= t.lambda);

    const std::vector<double> with_zero{0.5, 0.1, 0.5};
    const auto s = calibrate_from_batches(p, with_zero, batches, 0.05);
    CHECK(s.tiles[1].k == 0);
    CHECK(s.lambda_star.is_reject_nothing());
    CHECK(s.argmin_tile == 1);

    CHECK_THROWS(calibrate_from_batches(p, std::vector<double>{0.5}, batches, 0.05));
}

TEST_CASE("adding tiles never raises the global threshold") {
    const auto fam = ModelFamily::normal(1);
    const ZTestDesign design(1);
    const auto p = ztest_platten(12, 1000);
    std::vector<SimBatch> batches;
    const auto full = calibrate(p, design, fam, 0.025, SeedSpec{21}, {}, &batches);
    const auto targets = tile_alpha_targets(fam, p, 0.025);
    for (std::size_t m = 1; m <= p.size(); ++m) {
        Platten sub = p;
        sub.tiles.resize(m);
        const std::vector<SimBatch> sb(batches.begin(), batches.begin() + static_cast<std::ptrdiff_t>(m));
        const auto r = calibrate_from_batches(sub, std::span<const double>(targets).first(m), sb, 0.025);
        CHECK(full.lambda_star <= r.lambda_star);
    }
    for (const auto& t : full.tiles) {
        CHECK(t.alpha_prime < 0.025);
        CHECK(t.k >= 1);
    }
}

TEST_CASE("calibrated threshold is valid for the analytic z-test error") {
    const auto fam = ModelFamily::normal(1);
    const ZTestDesign design(1);
    const auto p = ztest_platten(16, 1000);
    // f_lambda(theta) = P(1 - Phi(X) < lambda) = Phi(theta - z_{1-lambda})
    double sum = 0.0;
    const int reps = 60;
    for (int rep = 0; rep < reps; ++rep) {
        const auto r = calibrate(p, design, fam, 0.025, SeedSpec{static_cast<std::uint64_t>(500 + rep)});
        REQUIRE_FALSE(r.lambda_star.is_reject_nothing());
        sum += normal_cdf(0.0 - normal_quantile(1.0 - r.lambda_star.value()));
    }
    CHECK(sum / reps < 0.025);
    CHECK(sum / reps > 0.015);
}

TEST_CASE("discretization loss") {
    CHECK(discretization_loss(999, 0.025) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(discretization_loss(1000, 0.025) == doctest::Approx(0.025 / 25.025));
    CHECK(discretization_loss(10, 0.0) == 0.0);
}

TEST_CASE("bootstrap diagnostic") {
    const auto fam = ModelFamily::normal(1);
    const ZTestDesign design(1);
    const auto p = ztest_platten(8, 400);
    std::vector<SimBatch> batches;
    const auto cal = calibrate(p, design, fam, 0.05, SeedSpec{3}, {}, &batches);

    SUBCASE("identity resample reproduces the empirical slack") {
        const Resampler identity = [](std::size_t, std::size_t, std::span<const double> original,
                                      std::vector<double>& out) { out.assign(original.begin(), original.end()); };
        const auto d = bootstrap_bias(p, fam, batches, cal, 1, identity);
        REQUIRE(d.used == 1);
        CHECK(d.slack[0] == doctest::Approx(0.05 - empirical_worst_error(p, fam, batches, cal.lambda_star)).epsilon(1e-14));
        CHECK(d.argmin_trace[0] == cal.argmin_tile);
        CHECK(d.sd_slack == 0.0);
    }
    SUBCASE("seeded resampling is reproducible") {
        const auto a = bootstrap_bias(p, fam, batches, cal, 10, with_replacement_resampler(SeedSpec{3}));
        const auto b = bootstrap_bias(p, fam, batches, cal, 10, with_replacement_resampler(SeedSpec{3}));
        CHECK(a.slack == b.slack);
        CHECK(a.argmin_trace == b.argmin_trace);
        CHECK(a.used == 10);
    }
    SUBCASE("REJECT_NOTHING tiles stay out of the argmin trace") {
        auto forced = cal;
        forced.tiles[2].k = 0;
        forced.tiles[2].lambda = Threshold::reject_nothing();
        const auto d = bootstrap_bias(p, fam, batches, forced, 20, with_replacement_resampler(SeedSpec{9}));
        for (auto i : d.argmin_trace) CHECK(i != 2);
        for (auto& t : forced.tiles) t.k = 0;
        CHECK(bootstrap_bias(p, fam, batches, forced, 5, with_replacement_resampler(SeedSpec{9})).used == 0);
    }
}

TEST_CASE("bootstrap slack is positive and shrinks with more simulations") {
    const auto fam = ModelFamily::normal(1);
    const ZTestDesign design(1);
    std::vector<double> slack;
    for (std::int64_t n : {1000, 4000}) {
        const auto p = ztest_platten(64, n);
        std::vector<SimBatch> batches;
        const auto cal = calibrate(p, design, fam, 0.025, SeedSpec{11}, {}, &batches);
        slack.push_back(bootstrap_bias(p, fam, batches, cal, 50, with_replacement_resampler(SeedSpec{11})).mean_slack);
    }
    CHECK(slack[0] > 0.0);
    CHECK(slack[1] > 0.0);
    CHECK(slack[1] < slack[0]);
}

TEST_CASE("confidence sets from tile-wise tests") {
    const auto p = ztest_platten(40, 1, -1.0, 1.0);
    const auto e = AffineEstimand::coordinate(0, 1);
    const std::vector<Threshold> thresholds(p.size(), Threshold::at(0.025));

    const std::vector<double> keep_all(p.size(), 1.0);
    const auto all = confidence_set(p, keep_all, thresholds, e);
    CHECK(all.retained.size() == p.size());
    REQUIRE(all.image.has_value());
    CHECK(all.image->first == -1.0);
    CHECK(all.image->second == doctest::Approx(1.0));

    for (double x : {0.5, 2.0, 2.5}) {
        // s_i: p-value of the null "theta <= tile max" given X = x.
        std::vector<double> s(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) s[i] = normal_sf(x - p.tiles[i].extent().upper[0]);
        const auto cs = confidence_set(p, s, thresholds, e);
        const double textbook = x - z975;
        if (textbook >= 1.0) {
            CHECK(cs.retained.empty());
            CHECK_FALSE(cs.image.has_value());
            continue;
        }
        REQUIRE(cs.image.has_value());
        // Retained tiles form an upper interval of theta.
        for (std::size_t j = 1; j < cs.retained.size(); ++j) CHECK(cs.retained[j] == cs.retained[j - 1] + 1);
        CHECK(cs.retained.back() == p.size() - 1);
        CHECK(std::abs(cs.image->first - std::max(-1.0, textbook)) <= 2.0 / 40.0 + 1e-12);
        CHECK(cs.image->second == doctest::Approx(1.0));
        CHECK(confidence_set(p, s, thresholds, e).retained == cs.retained);
    }
    AffineEstimand twice{1.0, {2.0}};
    CHECK(twice(std::vector<double>{0.5}) == 2.0);
    CHECK_THROWS(confidence_set(p, std::vector<double>{1.0}, thresholds, e));
}
