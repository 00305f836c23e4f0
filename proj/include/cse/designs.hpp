#pragma once
#include <cse/grid.hpp>
#include <cse/model.hpp>

#include <json.hpp>

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cse {

inline constexpr double kNeverRejects = std::numeric_limits<double>::infinity();

/*
 * Design contract.
 *
 * A design maps one simulated outcome to a statistic per hypothesis;
 * hypothesis j is rejected at threshold lambda iff its statistic is
 * < lambda, so the rejection sets are nested in lambda by construction.
 * The calibration statistic for a null configuration b is the minimum
 * over hypotheses with b_j = 1: {S_b < lambda} is exactly the event
 * that some true null is rejected.
 *
 * Designs must be pure: the statistics depend only on the outcome.
 * Sequential designs receive the full outcome matrix and must only read
 * the entries their sampling rule would have observed.
 */
class Design {
   public:
    virtual ~Design() = default;

    virtual std::string name() const = 0;
    virtual std::size_t n_hypotheses() const = 0;
    virtual bool needs_raw_rows() const { return false; }
    // Throws std::invalid_argument if the family cannot feed this design.
    virtual void check_family(const ModelFamily& family) const = 0;
    virtual void hypothesis_statistics(const OutcomeMatrix& outcome, std::span<double> out) const = 0;
    virtual nlohmann::json params() const = 0;

    std::vector<double> hypothesis_statistics(const OutcomeMatrix& outcome) const;
    std::vector<std::uint8_t> reject(const OutcomeMatrix& outcome, double lambda) const;
    double statistic(const OutcomeMatrix& outcome, const NullConfig& config) const;
    // Allocation-free variant; `scratch` is resized as needed.
    double statistic(const OutcomeMatrix& outcome, const NullConfig& config, std::vector<double>& scratch) const;
};

// One-sided z-test per coordinate of a normal location family: S_j = 1 - Phi(X_j).
class ZTestDesign final : public Design {
   public:
    explicit ZTestDesign(std::size_t dim = 1) : dim_(dim) {}

    std::string name() const override { return "ztest"; }
    std::size_t n_hypotheses() const override { return dim_; }
    void check_family(const ModelFamily& family) const override;
    using Design::hypothesis_statistics;
    void hypothesis_statistics(const OutcomeMatrix& outcome, std::span<double> out) const override;
    nlohmann::json params() const override { return {{"dim", dim_}}; }

    static double p_value(double x);

   private:
    std::size_t dim_;
};

/*
 * Independent conjugate Beta-Binomial arms. Arm i rejects its null
 * p_i <= sigmoid(null_logit_i) when the posterior tail
 * P(p_i > sigmoid(null_logit_i) | y_i) exceeds 1 - lambda, i.e. when
 * S_i = P(p_i <= sigmoid(null_logit_i) | y_i) < lambda.
 */
class MultiArmBetaBinomialDesign final : public Design {
   public:
    MultiArmBetaBinomialDesign(std::vector<std::int64_t> arm_sizes, std::vector<double> null_logits,
                               double prior_a = 1.0, double prior_b = 1.0);

    std::string name() const override { return "multiarm_betabinomial"; }
    std::size_t n_hypotheses() const override { return arm_sizes_.size(); }
    void check_family(const ModelFamily& family) const override;
    using Design::hypothesis_statistics;
    void hypothesis_statistics(const OutcomeMatrix& outcome, std::span<double> out) const override;
    nlohmann::json params() const override;

    // Posterior P(p_i <= p0_i) for y successes in arm i.
    double posterior_null_mass(std::size_t arm, std::int64_t successes) const;

   private:
    std::vector<std::int64_t> arm_sizes_;
    std::vector<double> null_logits_;
    double prior_a_;
    double prior_b_;
    std::vector<std::vector<double>> table_;  // table_[arm][y]
};

/*
 * Two-stage selection: arm 0 is control, arms 1 and 2 treatments, each
 * with stage1 + stage2 Bernoulli rows. Stage 1 keeps the treatment with
 * more stage-1 successes (arm 1 on ties); the final analysis pools both
 * stages of the kept arm against control with a one-sided pooled
 * two-proportion z-test. Hypothesis j (0-based) is treatment arm j + 1;
 * only the selected arm's hypothesis can be rejected.
 */
class TwoStageSelectionDesign final : public Design {
   public:
    TwoStageSelectionDesign(std::int64_t stage1, std::int64_t stage2);

    std::string name() const override { return "two_stage_selection"; }
    std::size_t n_hypotheses() const override { return 2; }
    bool needs_raw_rows() const override { return true; }
    void check_family(const ModelFamily& family) const override;
    using Design::hypothesis_statistics;
    void hypothesis_statistics(const OutcomeMatrix& outcome, std::span<double> out) const override;
    nlohmann::json params() const override { return {{"stage1", stage1_}, {"stage2", stage2_}}; }

    struct Decision {
        int selected_arm;  // 1 or 2
        double p_value;
    };

    // Decision from stage-wise success counts: counts[arm] = {stage1, stage2}.
    Decision decide(const std::array<std::array<std::int64_t, 2>, 3>& counts) const;

    /*
     * Exact law of (selected arm, p-value) under success probabilities
     * `probs`, by summing binomial stage counts. Keys are the design's
     * own doubles, so they compare exactly with simulated values.
     */
    std::map<std::pair<int, double>, double> exact_distribution(const std::array<double, 3>& probs) const;

    std::int64_t stage1() const { return stage1_; }
    std::int64_t stage2() const { return stage2_; }

   private:
    std::int64_t stage1_;
    std::int64_t stage2_;
};

using DesignFactory = std::function<std::unique_ptr<Design>(const nlohmann::json& params, const ModelFamily& family)>;

// Name -> factory. Adding a design means registering one more entry.
const std::map<std::string, DesignFactory>& design_registry();

std::unique_ptr<Design> make_design(const std::string& name, const nlohmann::json& params,
                                    const ModelFamily& family);

}  // namespace cse
