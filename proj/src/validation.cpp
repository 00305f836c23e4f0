#include <cse/special.hpp>
#include <cse/tiltbound.hpp>
#include <cse/validation.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cse {

namespace {

void check_counts(std::int64_t rejections, std::int64_t n, double delta) {
    if (n < 1) throw std::invalid_argument("Clopper-Pearson: N must be >= 1");
    if (rejections < 0 || rejections > n) throw std::invalid_argument("Clopper-Pearson: R must lie in [0, N]");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("Clopper-Pearson: delta must lie in (0, 1)");
}

}  // namespace

double clopper_pearson_upper(std::int64_t rejections, std::int64_t n, double delta) {
    check_counts(rejections, n, delta);
    if (rejections == n) return 1.0;
    return beta_quantile(1.0 - delta, static_cast<double>(rejections + 1), static_cast<double>(n - rejections),
                         Rounding::up);
}

double clopper_pearson_lower(std::int64_t rejections, std::int64_t n, double delta) {
    check_counts(rejections, n, delta);
    if (rejections == 0) return 0.0;
    return beta_quantile(delta, static_cast<double>(rejections), static_cast<double>(n - rejections + 1),
                         Rounding::down);
}

double hoeffding_upper(double sample_mean, std::int64_t n, double delta, double range_width) {
    if (n < 1) throw std::invalid_argument("hoeffding_upper: N must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("hoeffding_upper: delta must lie in (0, 1)");
    if (!(range_width > 0.0)) throw std::invalid_argument("hoeffding_upper: range_width must be > 0");
    const double band = range_width * std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
    return std::min(range_width, sample_mean + band);
}

TileValidation validate_tile(const ModelFamily& family, const Tile& tile, std::int64_t rejections, double delta,
                             bool lower) {
    TileValidation out;
    out.theta = tile.sim_point;
    out.n = tile.sim_count;
    out.rejections = rejections;
    out.cp_upper = clopper_pearson_upper(rejections, tile.sim_count, delta);
    BoundQuery query{tile.sim_point, vertex_displacements(tile), out.cp_upper};
    const auto fwd = optimize_forward(family, query);
    out.tile_upper = fwd.bound;
    out.q_star = fwd.q_star;
    if (lower) {
        query.value = clopper_pearson_lower(rejections, tile.sim_count, delta);
        out.tile_lower = optimize_lower(family, query).bound;
    }
    return out;
}

ValidationReport validate(const Platten& platten, const Design& design, const ModelFamily& family, double delta,
                          const SeedSpec& seed, const ValidationOptions& options) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("validate: delta must lie in (0, 1)");
    EngineOptions engine;
    engine.threads = options.threads;
    engine.lambda = options.lambda;
    engine.sort_stats = false;
    const auto batches = run_platten(design, family, platten, seed, engine);

    ValidationReport report;
    report.delta = delta;
    report.lambda = options.lambda;
    report.tiles.resize(platten.tiles.size());
    for (std::size_t i = 0; i < platten.tiles.size(); ++i) {
        report.tiles[i] = validate_tile(family, platten.tiles[i], batches[i].false_rejections, delta, options.lower);
    }
    return report;
}

std::optional<double> ValidationReport::upper_at(const Platten& platten, std::span<const double> theta) const {
    std::optional<double> best;
    for (std::size_t i : platten.containing(theta)) {
        best = std::max(best.value_or(0.0), tiles[i].tile_upper);
    }
    return best;
}

}  // namespace cse
