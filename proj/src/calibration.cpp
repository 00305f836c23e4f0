#include <cse/calibration.hpp>
#include <cse/parallel.hpp>
#include <cse/tiltbound.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cse {

std::int64_t order_statistic_index(std::int64_t n, double alpha_prime) {
    if (n < 1) throw std::invalid_argument("order statistic: need at least one statistic");
    if (!(alpha_prime >= 0.0 && alpha_prime <= 1.0)) throw std::invalid_argument("alpha' must lie in [0, 1]");
    const auto k = static_cast<std::int64_t>(std::floor(static_cast<double>(n + 1) * alpha_prime));
    return std::min(k, n);
}

Threshold pointwise_threshold(std::span<const double> sorted_stats, double alpha_prime) {
    if (sorted_stats.empty()) throw std::invalid_argument("pointwise_threshold: empty statistics");
    if (!std::is_sorted(sorted_stats.begin(), sorted_stats.end())) {
        throw std::invalid_argument("pointwise_threshold: statistics must be sorted ascending");
    }
    const auto k = order_statistic_index(static_cast<std::int64_t>(sorted_stats.size()), alpha_prime);
    if (k < 1) return Threshold::reject_nothing();
    return Threshold::at(sorted_stats[static_cast<std::size_t>(k - 1)]);
}

double tile_alpha_target(const ModelFamily& family, const Tile& tile, double alpha) {
    const BoundQuery query{tile.sim_point, vertex_displacements(tile), alpha};
    return optimize_inverse(family, query).bound;
}

std::vector<double> tile_alpha_targets(const ModelFamily& family, const Platten& platten, double alpha,
                                       std::size_t threads) {
    std::vector<double> out(platten.tiles.size());
    parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = tile_alpha_target(family, platten.tiles[i], alpha); });
    return out;
}

CalibrationResult calibrate_from_batches(const Platten& platten, std::span<const double> alpha_primes,
                                         const std::vector<SimBatch>& batches, double alpha) {
    if (alpha_primes.size() != platten.tiles.size() || batches.size() != platten.tiles.size()) {
        throw std::invalid_argument("calibrate: one target and one batch per tile required");
    }
    CalibrationResult result;
    result.alpha = alpha;
    result.tiles.resize(platten.tiles.size());
    for (std::size_t i = 0; i < platten.tiles.size(); ++i) {
        auto& t = result.tiles[i];
        t.alpha_prime = alpha_primes[i];
        t.k = order_statistic_index(batches[i].size(), t.alpha_prime);
        t.lambda = pointwise_threshold(batches[i].stats, t.alpha_prime);
        // Strict < keeps the lowest tile index on ties.
        if (i == 0 || t.lambda < result.lambda_star) {
            result.lambda_star = t.lambda;
            result.argmin_tile = i;
        }
    }
    return result;
}

CalibrationResult calibrate(const Platten& platten, const Design& design, const ModelFamily& family, double alpha,
                            const SeedSpec& seed, const CalibrationOptions& options,
                            std::vector<SimBatch>* batches_out) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("calibrate: alpha must lie in [0, 1]");
    if (platten.tiles.empty()) throw std::invalid_argument("calibrate: empty platten");
    const auto targets = tile_alpha_targets(family, platten, alpha, options.threads);
    EngineOptions engine;
    engine.threads = options.threads;
    auto batches = run_platten(design, family, platten, seed, engine);
    auto result = calibrate_from_batches(platten, targets, batches, alpha);
    if (batches_out != nullptr) *batches_out = std::move(batches);
    return result;
}

double discretization_loss(std::int64_t n, double alpha) {
    const double exact = static_cast<double>(n + 1) * alpha;
    if (exact <= 0.0) return 0.0;
    return (exact - std::floor(exact)) / exact;
}

// ------------------------------------------------------------------ bootstrap

Resampler with_replacement_resampler(const SeedSpec& seed) {
    return [seed](std::size_t b, std::size_t tile, std::span<const double> original, std::vector<double>& out) {
        // One stream per replicate; tiles draw from disjoint, fixed offsets so the
        // result does not depend on the order tiles are processed in.
        RandomStream stream = seed.tagged_stream(kBootstrapTag, b);
        const auto n = original.size();
        out.resize(n);
        const std::uint64_t offset = static_cast<std::uint64_t>(tile) << 40;
        for (std::size_t j = 0; j < n; ++j) {
            const double u = stream.uniform_at(offset + j);
            const auto idx = std::min(static_cast<std::size_t>(u * static_cast<double>(n)), n - 1);
            out[j] = original[idx];
        }
    };
}

double empirical_worst_error(const Platten& platten, const ModelFamily& family, const std::vector<SimBatch>& batches,
                             const Threshold& lambda) {
    if (lambda.is_reject_nothing()) return 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < platten.tiles.size(); ++i) {
        const auto& stats = batches[i].stats;
        const auto below = std::lower_bound(stats.begin(), stats.end(), lambda.value()) - stats.begin();
        const double rate = static_cast<double>(below) / static_cast<double>(stats.size());
        const BoundQuery query{platten.tiles[i].sim_point, vertex_displacements(platten.tiles[i]), rate};
        worst = std::max(worst, optimize_forward(family, query).bound);
    }
    return worst;
}

BootstrapDiagnostic bootstrap_bias(const Platten& platten, const ModelFamily& family,
                                   const std::vector<SimBatch>& batches, const CalibrationResult& calibration,
                                   std::size_t replicates, const Resampler& resampler) {
    if (replicates < 1) throw std::invalid_argument("bootstrap_bias: need at least one replicate");
    if (batches.size() != platten.tiles.size() || calibration.tiles.size() != platten.tiles.size()) {
        throw std::invalid_argument("bootstrap_bias: batches and calibration must match the platten");
    }
    BootstrapDiagnostic diag;
    diag.replicates = replicates;
    std::vector<double> resampled;
    for (std::size_t b = 0; b < replicates; ++b) {
        std::optional<Threshold> best;
        std::size_t argmin = 0;
        for (std::size_t i = 0; i < platten.tiles.size(); ++i) {
            const auto k = calibration.tiles[i].k;
            if (k < 1) continue;  // REJECT_NOTHING tiles stay out of the trace
            resampler(b, i, batches[i].stats, resampled);
            const auto kth = resampled.begin() + (k - 1);
            std::nth_element(resampled.begin(), kth, resampled.end());
            const auto lambda = Threshold::at(*kth);
            if (!best || lambda < *best) {
                best = lambda;
                argmin = i;
            }
        }
        if (!best) continue;
        diag.slack.push_back(calibration.alpha - empirical_worst_error(platten, family, batches, *best));
        diag.argmin_trace.push_back(argmin);
    }
    diag.used = diag.slack.size();
    if (diag.used > 0) {
        const double n = static_cast<double>(diag.used);
        diag.mean_slack = std::accumulate(diag.slack.begin(), diag.slack.end(), 0.0) / n;
        double ss = 0.0;
        for (double s : diag.slack) ss += (s - diag.mean_slack) * (s - diag.mean_slack);
        diag.sd_slack = diag.used > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    }
    return diag;
}

// ------------------------------------------------------------ confidence sets

AffineEstimand AffineEstimand::coordinate(std::size_t axis, std::size_t dim) {
    AffineEstimand e;
    e.weights.assign(dim, 0.0);
    e.weights.at(axis) = 1.0;
    return e;
}

double AffineEstimand::operator()(std::span<const double> theta) const {
    if (theta.size() != weights.size()) throw std::invalid_argument("estimand dimension mismatch");
    double s = offset;
    for (std::size_t i = 0; i < theta.size(); ++i) s += weights[i] * theta[i];
    return s;
}

ConfidenceSet confidence_set(const Platten& platten, std::span<const double> observed_stats,
                             std::span<const Threshold> thresholds, const AffineEstimand& estimand) {
    if (observed_stats.size() != platten.tiles.size() || thresholds.size() != platten.tiles.size()) {
        throw std::invalid_argument("confidence_set: one statistic and one threshold per tile required");
    }
    ConfidenceSet out;
    for (std::size_t i = 0; i < platten.tiles.size(); ++i) {
        if (thresholds[i].rejects(observed_stats[i])) continue;
        out.retained.push_back(i);
        // An affine estimand attains its range over a box at the corners.
        for (const auto& corner : vertices(platten.tiles[i])) {
            const double e = estimand(corner.coords());
            if (!out.image) {
                out.image = std::pair{e, e};
            } else {
                out.image->first = std::min(out.image->first, e);
                out.image->second = std::max(out.image->second, e);
            }
        }
    }
    return out;
}

}  // namespace cse
