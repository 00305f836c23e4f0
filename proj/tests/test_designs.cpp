#include <cse/designs.hpp>
#include <cse/special.hpp>

#include <boost/math/special_functions/beta.hpp>
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

using namespace cse;

namespace {

OutcomeMatrix normal_outcome(std::vector<double> x) { return {FamilyKind::normal, std::move(x), {}}; }

// Outcome for the two-stage design from a 3 x (s1 + s2) bit table packed into `bits`, arm-major.
OutcomeMatrix table_outcome(unsigned bits, std::size_t per_arm) {
    OutcomeMatrix o;
    o.kind = FamilyKind::bernoulli;
    o.rows.assign(3, std::vector<std::uint8_t>(per_arm));
    o.sufficient.assign(3, 0.0);
    for (std::size_t arm = 0; arm < 3; ++arm) {
        for (std::size_t j = 0; j < per_arm; ++j) {
            const auto y = static_cast<std::uint8_t>((bits >> (arm * per_arm + j)) & 1U);
            o.rows[arm][j] = y;
            o.sufficient[arm] += y;
        }
    }
    return o;
}

}  // namespace

TEST_CASE("z-test statistics are upper-tail p-values") {
    const ZTestDesign z(2);
    const auto s = z.hypothesis_statistics(normal_outcome({1.959963984540054, -0.3}));
    CHECK(s[0] == doctest::Approx(0.025).epsilon(1e-12));
    CHECK(s[1] == doctest::Approx(normal_sf(-0.3)));
    CHECK(z.reject(normal_outcome({2.5, 0.0}), 0.025) == std::vector<std::uint8_t>{1, 0});
}

TEST_CASE("calibration statistic is the minimum over true nulls") {
    const ZTestDesign z(3);
    const auto o = normal_outcome({0.1, 2.2, 1.0});
    const auto s = z.hypothesis_statistics(o);
    CHECK(z.statistic(o, NullConfig{1, 1, 1}) == std::min(s[0], std::min(s[1], s[2])));
    CHECK(z.statistic(o, NullConfig{1, 0, 1}) == std::min(s[0], s[2]));
    CHECK(std::isinf(z.statistic(o, NullConfig{0, 0, 0})));
    CHECK_THROWS(z.statistic(o, NullConfig{1, 0}));
    // {S_b < lambda} is the event that some true null is rejected.
    for (double lambda : {0.01, 0.05, 0.3, 0.6}) {
        const auto r = z.reject(o, lambda);
        CHECK((z.statistic(o, NullConfig{1, 0, 1}) < lambda) == (r[0] || r[2]));
    }
}

TEST_CASE("rejection sets are nested in lambda") {
    const ZTestDesign z(1);
    const MultiArmBetaBinomialDesign m({12, 12}, {0.0, -0.5});
    const std::vector<double> ladder{0.0, 0.001, 0.01, 0.025, 0.05, 0.1, 0.5, 1.0};
    for (double x = -3.0; x <= 4.0; x += 0.25) {
        const auto o = normal_outcome({x});
        for (std::size_t i = 1; i < ladder.size(); ++i) {
            CHECK(z.reject(o, ladder[i - 1])[0] <= z.reject(o, ladder[i])[0]);
        }
    }
    for (int y0 = 0; y0 <= 12; y0 += 3) {
        for (int y1 = 0; y1 <= 12; y1 += 4) {
            const OutcomeMatrix o{FamilyKind::bernoulli, {double(y0), double(y1)}, {}};
            for (std::size_t i = 1; i < ladder.size(); ++i) {
                const auto lo = m.reject(o, ladder[i - 1]);
                const auto hi = m.reject(o, ladder[i]);
                CHECK(lo[0] <= hi[0]);
                CHECK(lo[1] <= hi[1]);
            }
        }
    }
}

TEST_CASE("beta-binomial posterior null mass") {
    const MultiArmBetaBinomialDesign m({10, 40}, {0.0, -1.0});
    // Beta(8, 4) CDF at 1/2 = P(Binomial(11, 1/2) >= 8) = 232 / 2048
    CHECK(m.posterior_null_mass(0, 7) == doctest::Approx(232.0 / 2048.0).epsilon(1e-13));
    for (std::int64_t y = 0; y <= 40; y += 5) {
        CHECK(m.posterior_null_mass(1, y) ==
              doctest::Approx(boost::math::ibeta(1.0 + y, 41.0 - y, sigmoid(-1.0))).epsilon(1e-11));
    }
    // More successes, less posterior mass on the null.
    for (std::int64_t y = 1; y <= 40; ++y) CHECK(m.posterior_null_mass(1, y) < m.posterior_null_mass(1, y - 1));
    CHECK_THROWS(MultiArmBetaBinomialDesign({10}, {0.0, 1.0}));
    CHECK_THROWS(m.check_family(ModelFamily::bernoulli({10, 41})));
}

TEST_CASE("two-stage selection matches full enumeration of raw tables") {
    const TwoStageSelectionDesign d(2, 2);
    for (const std::array<double, 3>& probs :
         {std::array<double, 3>{0.3, 0.3, 0.3}, std::array<double, 3>{0.2, 0.5, 0.35}, std::array<double, 3>{0.6, 0.1, 0.9}}) {
        std::map<std::pair<int, double>, double> enumerated;
        double total = 0.0;
        for (unsigned bits = 0; bits < (1U << 12); ++bits) {
            const auto o = table_outcome(bits, 4);
            double p = 1.0;
            for (std::size_t arm = 0; arm < 3; ++arm) {
                for (auto y : o.rows[arm]) p *= y ? probs[arm] : 1.0 - probs[arm];
            }
            const auto s = d.hypothesis_statistics(o);
            const int arm = std::isinf(s[1]) ? 1 : 2;
            enumerated[std::pair{arm, arm == 1 ? s[0] : s[1]}] += p;
            total += p;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
        const auto exact = d.exact_distribution(probs);
        CHECK(exact.size() == enumerated.size());
        for (const auto& [key, p] : enumerated) {
            const auto it = exact.find(key);
            REQUIRE(it != exact.end());
            CHECK(std::abs(it->second - p) <= 1e-12);
        }
    }
}

TEST_CASE("two-stage selection never reads the dropped arm's stage-2 rows") {
    const TwoStageSelectionDesign d(3, 2);
    for (unsigned bits = 0; bits < (1U << 15); bits += 37) {
        auto o = table_outcome(bits, 5);
        const auto before = d.hypothesis_statistics(o);
        const int selected = std::isinf(before[1]) ? 1 : 2;
        const int dropped = 3 - selected;
        for (std::size_t j = 3; j < 5; ++j) o.rows[static_cast<std::size_t>(dropped)][j] ^= 1U;
        CHECK(d.hypothesis_statistics(o) == before);
    }
}

TEST_CASE("two-stage decision rule") {
    const TwoStageSelectionDesign d(4, 4);
    // Tie in stage 1 keeps arm 1.
    auto dec = d.decide({{{{1, 1}}, {{2, 3}}, {{2, 0}}}});
    CHECK(dec.selected_arm == 1);
    // (5/8 - 2/8) / sqrt(7/16 * 9/16 * 2/8)
    CHECK(dec.p_value == doctest::Approx(normal_sf(0.375 / std::sqrt(7.0 / 16.0 * 9.0 / 16.0 * 0.25))).epsilon(1e-14));
    dec = d.decide({{{{0, 0}}, {{0, 0}}, {{0, 0}}}});
    CHECK(dec.p_value == doctest::Approx(0.5));
    CHECK(d.decide({{{{0, 0}}, {{1, 0}}, {{2, 0}}}}).selected_arm == 2);
}

TEST_CASE("registry builds designs by name and validates families") {
    const auto z = make_design("ztest", {}, ModelFamily::normal(2));
    CHECK(z->n_hypotheses() == 2);
    const auto m = make_design("multiarm_betabinomial", {{"null_logits", {0.0, 0.0}}, {"prior", {2.0, 3.0}}},
                               ModelFamily::bernoulli({5, 6}));
    CHECK(m->params()["prior"][1] == 3.0);
    const auto t = make_design("two_stage_selection", {{"stage1", 3}, {"stage2", 4}}, ModelFamily::bernoulli({7, 7, 7}));
    CHECK(t->needs_raw_rows());
    CHECK_THROWS(make_design("nope", {}, ModelFamily::normal(1)));
    CHECK_THROWS(make_design("ztest", {}, ModelFamily::bernoulli({3})));
    CHECK_THROWS(make_design("two_stage_selection", {{"stage1", 3}, {"stage2", 4}}, ModelFamily::bernoulli({7, 7})));
}

TEST_CASE("beta-binomial closed-form examples") {
    const MultiArmBetaBinomialDesign m({4}, {0.0});
    // Beta(5, 1) CDF at 1/2 is 0.5^5.
    CHECK(m.posterior_null_mass(0, 4) == doctest::Approx(0.03125).epsilon(1e-14));
    CHECK(m.posterior_null_mass(0, 0) == doctest::Approx(0.96875).epsilon(1e-14));
    const OutcomeMatrix all{FamilyKind::bernoulli, {4.0}, {}};
    const OutcomeMatrix none{FamilyKind::bernoulli, {0.0}, {}};
    CHECK(m.reject(all, 0.05) == std::vector<std::uint8_t>{1});
    CHECK(m.reject(none, 0.05) == std::vector<std::uint8_t>{0});
    CHECK(m.reject(all, 0.0) == std::vector<std::uint8_t>{0});
}
