#pragma once
#include <cse/model.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cse {

enum class NullDirection { le, ge };

// Axis-aligned null half-space {theta : theta[axis] <= threshold} (or >=).
struct NullHypothesis {
    std::size_t axis = 0;
    double threshold = 0.0;
    NullDirection direction = NullDirection::le;

    bool contains(std::span<const double> theta) const {
        return direction == NullDirection::le ? theta[axis] <= threshold : theta[axis] >= threshold;
    }
};

using NullConfig = std::vector<std::uint8_t>;

struct Box {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dim() const { return lower.size(); }
    double volume() const;
};

/*
 * Closed hyperrectangle tile with its null configuration and the point
 * at which it is simulated. The simulation point need not lie inside.
 */
struct Tile {
    ParamPoint center;
    std::vector<double> half_widths;
    NullConfig config;
    ParamPoint sim_point;
    std::int64_t sim_count = 0;

    std::size_t dim() const { return center.dim(); }
    Box extent() const;
    double volume() const;
    bool contains(std::span<const double> theta) const;
};

Tile make_tile(const Box& extent, NullConfig config, std::int64_t sim_count);

struct Platten {
    std::vector<Tile> tiles;
    std::vector<NullHypothesis> hypotheses;
    Box bounds;

    std::size_t size() const { return tiles.size(); }
    // Indices of every tile whose closed box contains theta.
    std::vector<std::size_t> containing(std::span<const double> theta) const;
};

/*
 * Uniform grid of prod(per_axis_counts) cells over `bounds`, each split
 * at any hypothesis threshold crossing its interior, simulated at its
 * center. Tiles lying entirely in the alternative are dropped.
 */
Platten build_platten(const Box& bounds, std::span<const std::size_t> per_axis_counts,
                      std::vector<NullHypothesis> hypotheses, std::int64_t default_sim_count);

// b_j = 1 iff the tile's interior lies in null j. Throws if the tile straddles a threshold.
NullConfig assign_config(const Box& extent, std::span<const NullHypothesis> hypotheses);

bool straddles(const Box& extent, const NullHypothesis& h);

inline constexpr std::size_t kMaxVertexDim = 20;

// All 2^d corners; bit j of the index (first coordinate most significant) selects +half_width.
std::vector<ParamPoint> vertices(const Tile& tile);

// Corners minus the tile's simulation point.
std::vector<Displacement> vertex_displacements(const Tile& tile);

/*
 * Bisects the `budget` highest-scoring tiles along their widest axis.
 * Ties in score go to the lower tile index; ties in width to the lower
 * axis. Children replace the parent in place (lower half first), are
 * simulated at their own centers, and get ceil(parent * sim_growth) sims.
 */
Platten refine(const Platten& platten, std::span<const double> scores, std::size_t budget, double sim_growth);

// Volume of bounds intersected with the union of the null half-spaces.
double null_region_volume(const Box& bounds, std::span<const NullHypothesis> hypotheses);

}  // namespace cse
