#pragma once
#include <cse/designs.hpp>
#include <cse/grid.hpp>
#include <cse/model.hpp>
#include <cse/random.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace cse {

/*
 * Simulation results for one tile. `stats` holds S_b for simulation
 * k = 0..N-1 evaluated at the tile's simulation point, sorted
 * ascending (stable) once the batch is finalized.
 */
struct SimBatch {
    std::size_t tile_id = 0;
    std::vector<double> stats;
    // Filled when a validation threshold was supplied.
    std::optional<double> lambda;
    std::int64_t false_rejections = 0;
    // Per-simulation rejection bits at `lambda`, kept only on request.
    std::vector<NullConfig> rejections;
    SeedSpec seed;

    std::int64_t size() const { return static_cast<std::int64_t>(stats.size()); }
};

struct EngineOptions {
    std::size_t threads = 1;
    // Work-item size; a tuning knob only, results do not depend on it.
    std::size_t chunk = 2048;
    std::optional<double> lambda;
    bool keep_rejections = false;
    // Off leaves stats in simulation order; for callers that only need counts.
    bool sort_stats = true;
};

SimBatch run_batch(const Design& design, const ModelFamily& family, const Tile& tile, std::size_t tile_id,
                   const SeedSpec& seed, const EngineOptions& options = {});

// One batch per tile, in tile order. Simulation k of every tile uses stream(seed, k).
std::vector<SimBatch> run_platten(const Design& design, const ModelFamily& family, const Platten& platten,
                                  const SeedSpec& seed, const EngineOptions& options = {});

/*
 * Binary dump of a batch's sorted statistics, all integers and doubles
 * little-endian:
 *   8 bytes  magic "CSEBATCH"
 *   u32      format version (1)
 *   u32      reserved (0)
 *   u64      tile_id
 *   u64      N
 *   u64      master seed
 *   u64      length of the statistics array (= N)
 *   f64 x N  statistics
 */
void write_batch(std::ostream& os, const SimBatch& batch);
SimBatch read_batch(std::istream& is);

// Worker count: explicit request, else CSE_THREADS, else hardware concurrency.
std::size_t resolve_threads(std::optional<std::size_t> requested);

}  // namespace cse
