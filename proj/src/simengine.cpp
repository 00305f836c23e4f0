#include <cse/parallel.hpp>
#include <cse/simengine.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

namespace cse {

namespace {

struct WorkItem {
    std::size_t tile;
    std::int64_t begin;
    std::int64_t end;
};

void check_tile(const Design& design, const ModelFamily& family, const Tile& tile) {
    family.check_dim(tile.sim_point.coords());
    if (tile.config.size() != design.n_hypotheses()) {
        throw std::invalid_argument("tile has " + std::to_string(tile.config.size()) + " hypotheses, design '" +
                                    design.name() + "' has " + std::to_string(design.n_hypotheses()));
    }
    if (tile.sim_count < 1) throw std::invalid_argument("tile sim_count must be >= 1");
}

void simulate_range(const Design& design, const ModelFamily& family, const Tile& tile, const SeedSpec& seed,
                    const EngineOptions& options, SimBatch& batch, std::int64_t begin, std::int64_t end) {
    OutcomeMatrix outcome;
    std::vector<double> scratch;
    const bool raw = design.needs_raw_rows();
    const auto theta = tile.sim_point.coords();
    for (std::int64_t k = begin; k < end; ++k) {
        RandomStream stream = seed.stream(static_cast<std::uint64_t>(k));
        family.sample(theta, stream, outcome, raw);
        const auto slot = static_cast<std::size_t>(k);
        batch.stats[slot] = design.statistic(outcome, tile.config, scratch);
        if (options.keep_rejections && options.lambda) {
            auto& bits = batch.rejections[slot];
            bits.resize(scratch.size());
            for (std::size_t j = 0; j < scratch.size(); ++j) bits[j] = scratch[j] < *options.lambda ? 1 : 0;
        }
    }
}

void finalize(SimBatch& batch, const EngineOptions& options) {
    if (options.lambda) {
        batch.lambda = options.lambda;
        batch.false_rejections = std::count_if(batch.stats.begin(), batch.stats.end(),
                                               [&](double s) { return s < *options.lambda; });
    }
    if (options.sort_stats) std::stable_sort(batch.stats.begin(), batch.stats.end());
}

}  // namespace

SimBatch run_batch(const Design& design, const ModelFamily& family, const Tile& tile, std::size_t tile_id,
                   const SeedSpec& seed, const EngineOptions& options) {
    Platten single;
    single.tiles.push_back(tile);
    auto batches = run_platten(design, family, single, seed, options);
    batches[0].tile_id = tile_id;
    return std::move(batches[0]);
}

std::vector<SimBatch> run_platten(const Design& design, const ModelFamily& family, const Platten& platten,
                                  const SeedSpec& seed, const EngineOptions& options) {
    design.check_family(family);
    const std::int64_t chunk = static_cast<std::int64_t>(std::max<std::size_t>(options.chunk, 1));
    std::vector<SimBatch> batches(platten.tiles.size());
    std::vector<WorkItem> items;
    for (std::size_t t = 0; t < platten.tiles.size(); ++t) {
        const Tile& tile = platten.tiles[t];
        check_tile(design, family, tile);
        auto& batch = batches[t];
        batch.tile_id = t;
        batch.seed = seed;
        batch.stats.assign(static_cast<std::size_t>(tile.sim_count), 0.0);
        if (options.keep_rejections && options.lambda) batch.rejections.resize(batch.stats.size());
        for (std::int64_t b = 0; b < tile.sim_count; b += chunk) {
            items.push_back({t, b, std::min(b + chunk, tile.sim_count)});
        }
    }
    parallel_for(items.size(), options.threads, [&](std::size_t i) {
        const auto& item = items[i];
        simulate_range(design, family, platten.tiles[item.tile], seed, options, batches[item.tile], item.begin,
                       item.end);
    });
    parallel_for(batches.size(), options.threads, [&](std::size_t t) { finalize(batches[t], options); });
    return batches;
}

namespace {

constexpr std::array<char, 8> kMagic{'C', 'S', 'E', 'B', 'A', 'T', 'C', 'H'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void put_le(std::ostream& os, T value) {
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    os.write(bytes.data(), bytes.size());
}

template <class T>
T get_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> bytes{};
    if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
        throw std::runtime_error("read_batch: truncated input");
    }
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
    return value;
}

}  // namespace

void write_batch(std::ostream& os, const SimBatch& batch) {
    os.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(os, kFormatVersion);
    put_le<std::uint32_t>(os, 0);
    put_le<std::uint64_t>(os, batch.tile_id);
    put_le<std::uint64_t>(os, batch.stats.size());
    put_le<std::uint64_t>(os, batch.seed.master_seed);
    put_le<std::uint64_t>(os, batch.stats.size());
    for (double s : batch.stats) put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(s));
    if (!os) throw std::runtime_error("write_batch: stream error");
}

SimBatch read_batch(std::istream& is) {
    std::array<char, 8> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw std::runtime_error("read_batch: bad magic");
    if (get_le<std::uint32_t>(is) != kFormatVersion) throw std::runtime_error("read_batch: unsupported version");
    get_le<std::uint32_t>(is);
    SimBatch batch;
    batch.tile_id = get_le<std::uint64_t>(is);
    const auto n = get_le<std::uint64_t>(is);
    batch.seed.master_seed = get_le<std::uint64_t>(is);
    const auto len = get_le<std::uint64_t>(is);
    if (len != n) throw std::runtime_error("read_batch: length prefix disagrees with N");
    batch.stats.resize(len);
    for (auto& s : batch.stats) s = std::bit_cast<double>(get_le<std::uint64_t>(is));
    return batch;
}

std::size_t resolve_threads(std::optional<std::size_t> requested) {
    if (requested && *requested > 0) return *requested;
    if (const char* env = std::getenv("CSE_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

}  // namespace cse
