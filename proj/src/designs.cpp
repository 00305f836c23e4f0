#include <cse/designs.hpp>
#include <cse/special.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cse {

std::vector<double> Design::hypothesis_statistics(const OutcomeMatrix& outcome) const {
    std::vector<double> out(n_hypotheses());
    hypothesis_statistics(outcome, out);
    return out;
}

std::vector<std::uint8_t> Design::reject(const OutcomeMatrix& outcome, double lambda) const {
    const auto stats = hypothesis_statistics(outcome);
    std::vector<std::uint8_t> out(stats.size());
    for (std::size_t j = 0; j < stats.size(); ++j) out[j] = stats[j] < lambda ? 1 : 0;
    return out;
}

double Design::statistic(const OutcomeMatrix& outcome, const NullConfig& config) const {
    std::vector<double> scratch;
    return statistic(outcome, config, scratch);
}

double Design::statistic(const OutcomeMatrix& outcome, const NullConfig& config, std::vector<double>& scratch) const {
    if (config.size() != n_hypotheses()) {
        throw std::invalid_argument("null configuration has " + std::to_string(config.size()) +
                                    " entries, design '" + name() + "' has " + std::to_string(n_hypotheses()) +
                                    " hypotheses");
    }
    scratch.resize(n_hypotheses());
    hypothesis_statistics(outcome, scratch);
    double s = kNeverRejects;
    for (std::size_t j = 0; j < scratch.size(); ++j) {
        if (config[j]) s = std::min(s, scratch[j]);
    }
    return s;
}

// ---------------------------------------------------------------- z-test

double ZTestDesign::p_value(double x) { return normal_sf(x); }

void ZTestDesign::check_family(const ModelFamily& family) const {
    if (family.kind() != FamilyKind::normal || family.dim() != dim_) {
        throw std::invalid_argument("ztest needs a normal location family of dimension " + std::to_string(dim_));
    }
}

void ZTestDesign::hypothesis_statistics(const OutcomeMatrix& outcome, std::span<double> out) const {
    for (std::size_t j = 0; j < dim_; ++j) out[j] = p_value(outcome.sufficient[j]);
}

// ------------------------------------------------------ beta-binomial arms

MultiArmBetaBinomialDesign::MultiArmBetaBinomialDesign(std::vector<std::int64_t> arm_sizes,
                                                       std::vector<double> null_logits, double prior_a,
                                                       double prior_b)
    : arm_sizes_(std::move(arm_sizes)), null_logits_(std::move(null_logits)), prior_a_(prior_a), prior_b_(prior_b) {
    if (arm_sizes_.empty() || arm_sizes_.size() != null_logits_.size()) {
        throw std::invalid_argument("multiarm_betabinomial: need one null logit per arm");
    }
    if (!(prior_a_ > 0.0 && prior_b_ > 0.0)) throw std::invalid_argument("multiarm_betabinomial: prior must be > 0");
    table_.resize(arm_sizes_.size());
    for (std::size_t i = 0; i < arm_sizes_.size(); ++i) {
        if (arm_sizes_[i] <= 0) throw std::invalid_argument("multiarm_betabinomial: arm sizes must be positive");
        if (!std::isfinite(null_logits_[i])) throw std::invalid_argument("multiarm_betabinomial: null logit not finite");
        const double p0 = sigmoid(null_logits_[i]);
        const auto n = arm_sizes_[i];
        table_[i].resize(static_cast<std::size_t>(n) + 1);
        for (std::int64_t y = 0; y <= n; ++y) {
            table_[i][static_cast<std::size_t>(y)] =
                ibeta(prior_a_ + static_cast<double>(y), prior_b_ + static_cast<double>(n - y), p0);
        }
    }
}

double MultiArmBetaBinomialDesign::posterior_null_mass(std::size_t arm, std::int64_t successes) const {
    return table_.at(arm).at(static_cast<std::size_t>(successes));
}

void MultiArmBetaBinomialDesign::check_family(const ModelFamily& family) const {
    const auto* arms = std::get_if<BernoulliArms>(&family.spec());
    if (arms == nullptr || arms->arm_sizes != arm_sizes_) {
        throw std::invalid_argument("multiarm_betabinomial needs a bernoulli family with matching arm sizes");
    }
}

void MultiArmBetaBinomialDesign::hypothesis_statistics(const OutcomeMatrix& outcome, std::span<double> out) const {
    for (std::size_t i = 0; i < arm_sizes_.size(); ++i) {
        out[i] = table_[i][static_cast<std::size_t>(outcome.sufficient[i])];
    }
}

nlohmann::json MultiArmBetaBinomialDesign::params() const {
    return {{"null_logits", null_logits_}, {"prior", {prior_a_, prior_b_}}};
}

// --------------------------------------------------- two-stage selection

TwoStageSelectionDesign::TwoStageSelectionDesign(std::int64_t stage1, std::int64_t stage2)
    : stage1_(stage1), stage2_(stage2) {
    if (stage1_ < 1 || stage2_ < 0) throw std::invalid_argument("two_stage_selection: invalid stage sizes");
}

void TwoStageSelectionDesign::check_family(const ModelFamily& family) const {
    const auto* arms = std::get_if<BernoulliArms>(&family.spec());
    if (arms == nullptr || arms->arm_sizes.size() < 3) {
        throw std::invalid_argument("two_stage_selection needs a bernoulli family with 3 arms");
    }
    if (arms->arm_sizes.size() != 3) throw std::invalid_argument("two_stage_selection: expected exactly 3 arms");
    for (auto n : arms->arm_sizes) {
        if (n != stage1_ + stage2_) {
            throw std::invalid_argument("two_stage_selection: every arm needs stage1 + stage2 rows");
        }
    }
}

TwoStageSelectionDesign::Decision TwoStageSelectionDesign::decide(
    const std::array<std::array<std::int64_t, 2>, 3>& counts) const {
    const int selected = counts[2][0] > counts[1][0] ? 2 : 1;
    const double n = static_cast<double>(stage1_ + stage2_);
    const double y_t = static_cast<double>(counts[selected][0] + counts[selected][1]);
    const double y_c = static_cast<double>(counts[0][0] + counts[0][1]);
    const double pooled = (y_t + y_c) / (2.0 * n);
    const double var = pooled * (1.0 - pooled) * 2.0 / n;
    const double z = var > 0.0 ? (y_t / n - y_c / n) / std::sqrt(var) : 0.0;
    return {selected, normal_sf(z)};
}

void TwoStageSelectionDesign::hypothesis_statistics(const OutcomeMatrix& outcome, std::span<double> out) const {
    if (outcome.rows.size() < 3) throw std::invalid_argument("two_stage_selection: raw rows required");
    const auto s1 = static_cast<std::size_t>(stage1_);
    const auto total = static_cast<std::size_t>(stage1_ + stage2_);
    auto count = [&](std::size_t arm, std::size_t from, std::size_t to) {
        std::int64_t c = 0;
        for (std::size_t j = from; j < to; ++j) c += outcome.rows[arm][j];
        return c;
    };
    std::array<std::array<std::int64_t, 2>, 3> counts{};
    // Interim look: stage-1 rows of every arm.
    for (std::size_t arm = 0; arm < 3; ++arm) counts[arm][0] = count(arm, 0, s1);
    const int selected = counts[2][0] > counts[1][0] ? 2 : 1;
    // Final look: stage-2 rows only for control and the kept arm.
    counts[0][1] = count(0, s1, total);
    counts[static_cast<std::size_t>(selected)][1] = count(static_cast<std::size_t>(selected), s1, total);
    const auto d = decide(counts);
    out[0] = d.selected_arm == 1 ? d.p_value : kNeverRejects;
    out[1] = d.selected_arm == 2 ? d.p_value : kNeverRejects;
}

std::map<std::pair<int, double>, double> TwoStageSelectionDesign::exact_distribution(
    const std::array<double, 3>& probs) const {
    auto pmf = [](std::int64_t n, double p) {
        std::vector<double> out(static_cast<std::size_t>(n) + 1);
        for (std::int64_t k = 0; k <= n; ++k) {
            const double log_choose =
                std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(static_cast<double>(n - k) + 1.0);
            out[static_cast<std::size_t>(k)] =
                std::exp(log_choose) * std::pow(p, static_cast<double>(k)) * std::pow(1.0 - p, static_cast<double>(n - k));
        }
        return out;
    };
    std::array<std::vector<double>, 3> first{};
    std::array<std::vector<double>, 3> second{};
    for (std::size_t arm = 0; arm < 3; ++arm) {
        first[arm] = pmf(stage1_, probs[arm]);
        second[arm] = pmf(stage2_, probs[arm]);
    }
    std::map<std::pair<int, double>, double> law;
    std::array<std::array<std::int64_t, 2>, 3> counts{};
    for (std::int64_t c1 = 0; c1 <= stage1_; ++c1) {
        for (std::int64_t a1 = 0; a1 <= stage1_; ++a1) {
            for (std::int64_t b1 = 0; b1 <= stage1_; ++b1) {
                const int selected = b1 > a1 ? 2 : 1;
                const auto sel = static_cast<std::size_t>(selected);
                const double p_interim = first[0][static_cast<std::size_t>(c1)] *
                                         first[1][static_cast<std::size_t>(a1)] *
                                         first[2][static_cast<std::size_t>(b1)];
                for (std::int64_t c2 = 0; c2 <= stage2_; ++c2) {
                    for (std::int64_t t2 = 0; t2 <= stage2_; ++t2) {
                        counts = {};
                        counts[0] = {c1, c2};
                        counts[1][0] = a1;
                        counts[2][0] = b1;
                        counts[sel][1] = t2;
                        const auto d = decide(counts);
                        law[{d.selected_arm, d.p_value}] += p_interim * second[0][static_cast<std::size_t>(c2)] *
                                                            second[sel][static_cast<std::size_t>(t2)];
                    }
                }
            }
        }
    }
    return law;
}

// ---------------------------------------------------------------- registry

namespace {

std::vector<std::int64_t> arm_sizes_of(const ModelFamily& family, const std::string& design) {
    const auto* arms = std::get_if<BernoulliArms>(&family.spec());
    if (arms == nullptr) throw std::invalid_argument(design + " needs a bernoulli family");
    return arms->arm_sizes;
}

}  // namespace

const std::map<std::string, DesignFactory>& design_registry() {
    static const std::map<std::string, DesignFactory> registry{
        {"ztest",
         [](const nlohmann::json&, const ModelFamily& family) -> std::unique_ptr<Design> {
             return std::make_unique<ZTestDesign>(family.dim());
         }},
        {"multiarm_betabinomial",
         [](const nlohmann::json& params, const ModelFamily& family) -> std::unique_ptr<Design> {
             auto sizes = arm_sizes_of(family, "multiarm_betabinomial");
             auto logits = params.at("null_logits").get<std::vector<double>>();
             double a = 1.0;
             double b = 1.0;
             if (params.contains("prior")) {
                 const auto prior = params.at("prior").get<std::vector<double>>();
                 if (prior.size() != 2) throw std::invalid_argument("prior must be [a, b]");
                 a = prior[0];
                 b = prior[1];
             }
             return std::make_unique<MultiArmBetaBinomialDesign>(std::move(sizes), std::move(logits), a, b);
         }},
        {"two_stage_selection",
         [](const nlohmann::json& params, const ModelFamily&) -> std::unique_ptr<Design> {
             return std::make_unique<TwoStageSelectionDesign>(params.at("stage1").get<std::int64_t>(),
                                                              params.at("stage2").get<std::int64_t>());
         }},
    };
    return registry;
}

std::unique_ptr<Design> make_design(const std::string& name, const nlohmann::json& params,
                                    const ModelFamily& family) {
    const auto& registry = design_registry();
    const auto it = registry.find(name);
    if (it == registry.end()) throw std::invalid_argument("unknown design '" + name + "'");
    auto design = it->second(params, family);
    design->check_family(family);
    return design;
}

}  // namespace cse
