#pragma once
#include <cse/designs.hpp>
#include <cse/grid.hpp>
#include <cse/model.hpp>
#include <cse/simengine.hpp>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace cse {

/*
 * Rejection threshold: the design rejects when S < threshold.
 * REJECT_NOTHING orders below every real threshold and rejects nothing.
 */
class Threshold {
   public:
    static Threshold reject_nothing() { return Threshold(); }
    static Threshold at(double value) { return Threshold(value); }

    bool is_reject_nothing() const { return !value_.has_value(); }
    double value() const { return value_.value(); }
    bool rejects(double statistic) const { return value_.has_value() && statistic < *value_; }

    friend bool operator==(const Threshold&, const Threshold&) = default;
    friend std::partial_ordering operator<=>(const Threshold& a, const Threshold& b) {
        if (a.is_reject_nothing() || b.is_reject_nothing()) {
            return static_cast<int>(!a.is_reject_nothing()) <=> static_cast<int>(!b.is_reject_nothing());
        }
        return *a.value_ <=> *b.value_;
    }

   private:
    Threshold() = default;
    explicit Threshold(double v) : value_(v) {}
    std::optional<double> value_;
};

// k = floor((N+1) alpha'), clamped to N; k = 0 gives REJECT_NOTHING, else the k-th smallest statistic.
Threshold pointwise_threshold(std::span<const double> sorted_stats, double alpha_prime);

std::int64_t order_statistic_index(std::int64_t n, double alpha_prime);

// sup_q min_v of the inverted bound over the tile's vertices: the level to target at the simulation point.
double tile_alpha_target(const ModelFamily& family, const Tile& tile, double alpha);

struct TileCalibration {
    double alpha_prime = 0.0;
    std::int64_t k = 0;
    Threshold lambda = Threshold::reject_nothing();
};

struct CalibrationResult {
    double alpha = 0.0;
    std::vector<TileCalibration> tiles;
    Threshold lambda_star = Threshold::reject_nothing();
    std::size_t argmin_tile = 0;
};

struct CalibrationOptions {
    std::size_t threads = 1;
};

// Per-tile targets are fixed before any statistic is looked at.
std::vector<double> tile_alpha_targets(const ModelFamily& family, const Platten& platten, double alpha,
                                       std::size_t threads = 1);

// Thresholds from already simulated batches (sorted stats), one per tile.
CalibrationResult calibrate_from_batches(const Platten& platten, std::span<const double> alpha_primes,
                                         const std::vector<SimBatch>& batches, double alpha);

CalibrationResult calibrate(const Platten& platten, const Design& design, const ModelFamily& family, double alpha,
                            const SeedSpec& seed, const CalibrationOptions& options = {},
                            std::vector<SimBatch>* batches_out = nullptr);

/*
 * Relative shortfall of (N+1) alpha from its floor. Large values mean the
 * order-statistic index discards a sizeable part of the level.
 */
double discretization_loss(std::int64_t n, double alpha);

// ------------------------------------------------------------------ bootstrap

struct BootstrapDiagnostic {
    std::size_t replicates = 0;
    std::size_t used = 0;  // replicates with at least one real tile threshold
    double mean_slack = 0.0;
    double sd_slack = 0.0;
    std::vector<double> slack;              // one per used replicate
    std::vector<std::size_t> argmin_trace;  // argmin tile per used replicate
};

/*
 * Resampler hook: fills `out` with a resample of `original` for
 * replicate b of tile `tile`. The default draws with replacement from
 * the (seed, bootstrap, b) stream.
 */
using Resampler = std::function<void(std::size_t b, std::size_t tile, std::span<const double> original,
                                     std::vector<double>& out)>;

Resampler with_replacement_resampler(const SeedSpec& seed);

/*
 * Estimated worst-case Type I Error of threshold `lambda` over the
 * platten: each tile's empirical rejection rate at lambda, extended over
 * the tile with the optimized forward bound, maximized over tiles.
 */
double empirical_worst_error(const Platten& platten, const ModelFamily& family, const std::vector<SimBatch>& batches,
                             const Threshold& lambda);

/*
 * For b = 1..B: resample every tile, recompute the global threshold over
 * tiles with a real threshold, and record alpha minus the empirical
 * worst-case error of that threshold on the original simulations.
 */
BootstrapDiagnostic bootstrap_bias(const Platten& platten, const ModelFamily& family,
                                   const std::vector<SimBatch>& batches, const CalibrationResult& calibration,
                                   std::size_t replicates, const Resampler& resampler);

// ------------------------------------------------------------ confidence sets

// e(theta) = offset + weights . theta; coordinate projections are unit weights.
struct AffineEstimand {
    double offset = 0.0;
    std::vector<double> weights;

    static AffineEstimand coordinate(std::size_t axis, std::size_t dim);
    double operator()(std::span<const double> theta) const;
};

struct ConfidenceSet {
    std::vector<std::size_t> retained;
    // [min, max] of the estimand over retained tiles; empty when nothing is retained.
    std::optional<std::pair<double, double>> image;
};

// Retains tile i iff observed_stats[i] >= thresholds[i].
ConfidenceSet confidence_set(const Platten& platten, std::span<const double> observed_stats,
                             std::span<const Threshold> thresholds, const AffineEstimand& estimand);

}  // namespace cse
