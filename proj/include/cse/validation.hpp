#pragma once
#include <cse/designs.hpp>
#include <cse/grid.hpp>
#include <cse/model.hpp>
#include <cse/simengine.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cse {

// (1 - delta) quantile of Beta(R + 1, N - R); exactly 1 when R = N. Rounded up.
double clopper_pearson_upper(std::int64_t rejections, std::int64_t n, double delta);

// delta quantile of Beta(R, N - R + 1); exactly 0 when R = 0. Rounded down.
double clopper_pearson_lower(std::int64_t rejections, std::int64_t n, double delta);

// One-sided Hoeffding upper band for the mean of [0, range_width]-valued draws.
double hoeffding_upper(double sample_mean, std::int64_t n, double delta, double range_width);

struct TileValidation {
    ParamPoint theta;  // simulation point
    std::int64_t n = 0;
    std::int64_t rejections = 0;
    double cp_upper = 0.0;
    double tile_upper = 0.0;
    std::optional<double> tile_lower;
    double q_star = 1.0;
};

struct ValidationReport {
    double delta = 0.0;
    double lambda = 0.0;
    std::vector<TileValidation> tiles;

    /*
     * Bound reported at theta: the flat tile bound of the tile containing
     * theta, the maximum over tiles when theta is on a shared boundary.
     * Empty when no tile contains theta.
     */
    std::optional<double> upper_at(const Platten& platten, std::span<const double> theta) const;
};

struct ValidationOptions {
    double lambda = 0.025;  // the design's fixed rejection threshold
    bool lower = false;
    std::size_t threads = 1;
};

// Extends one tile's simulation evidence to the whole tile.
TileValidation validate_tile(const ModelFamily& family, const Tile& tile, std::int64_t rejections, double delta,
                             bool lower);

ValidationReport validate(const Platten& platten, const Design& design, const ModelFamily& family, double delta,
                          const SeedSpec& seed, const ValidationOptions& options = {});

}  // namespace cse
