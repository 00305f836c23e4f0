#include <cse/grid.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cse {

double Box::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) v *= std::max(0.0, upper[i] - lower[i]);
    return v;
}

Box Tile::extent() const {
    Box b;
    b.lower.resize(dim());
    b.upper.resize(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        b.lower[i] = center[i] - half_widths[i];
        b.upper[i] = center[i] + half_widths[i];
    }
    return b;
}

double Tile::volume() const {
    double v = 1.0;
    for (double h : half_widths) v *= 2.0 * h;
    return v;
}

bool Tile::contains(std::span<const double> theta) const {
    for (std::size_t i = 0; i < dim(); ++i) {
        if (std::abs(theta[i] - center[i]) > half_widths[i]) return false;
    }
    return true;
}

Tile make_tile(const Box& extent, NullConfig config, std::int64_t sim_count) {
    Tile t;
    std::vector<double> center(extent.dim());
    t.half_widths.resize(extent.dim());
    for (std::size_t i = 0; i < extent.dim(); ++i) {
        center[i] = 0.5 * (extent.lower[i] + extent.upper[i]);
        t.half_widths[i] = 0.5 * (extent.upper[i] - extent.lower[i]);
    }
    t.center = ParamPoint(center);
    t.sim_point = t.center;
    t.config = std::move(config);
    t.sim_count = sim_count;
    return t;
}

std::vector<std::size_t> Platten::containing(std::span<const double> theta) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        if (tiles[i].contains(theta)) out.push_back(i);
    }
    return out;
}

bool straddles(const Box& extent, const NullHypothesis& h) {
    const double lo = extent.lower[h.axis];
    const double hi = extent.upper[h.axis];
    const double tol = 1e-12 * (hi - lo);
    return h.threshold > lo + tol && h.threshold < hi - tol;
}

NullConfig assign_config(const Box& extent, std::span<const NullHypothesis> hypotheses) {
    NullConfig b(hypotheses.size(), 0);
    std::vector<double> mid(extent.dim());
    for (std::size_t i = 0; i < extent.dim(); ++i) mid[i] = 0.5 * (extent.lower[i] + extent.upper[i]);
    for (std::size_t j = 0; j < hypotheses.size(); ++j) {
        if (hypotheses[j].axis >= extent.dim()) throw std::invalid_argument("hypothesis axis out of range");
        if (straddles(extent, hypotheses[j])) {
            throw std::invalid_argument("assign_config: tile straddles the threshold of hypothesis " +
                                        std::to_string(j));
        }
        b[j] = hypotheses[j].contains(mid) ? 1 : 0;
    }
    return b;
}

namespace {

void check_hypotheses(std::size_t dim, std::span<const NullHypothesis> hypotheses) {
    for (std::size_t j = 0; j < hypotheses.size(); ++j) {
        if (hypotheses[j].axis >= dim) {
            throw std::invalid_argument("hypothesis " + std::to_string(j) + " references axis " +
                                        std::to_string(hypotheses[j].axis) + " but d=" + std::to_string(dim));
        }
        if (!std::isfinite(hypotheses[j].threshold)) throw std::invalid_argument("hypothesis threshold not finite");
    }
}

// Splits `box` at every threshold crossing its interior; pieces come out lower-first.
void split_on_thresholds(const Box& box, std::span<const NullHypothesis> hypotheses, std::vector<Box>& out) {
    for (const auto& h : hypotheses) {
        if (straddles(box, h)) {
            Box below = box;
            Box above = box;
            below.upper[h.axis] = h.threshold;
            above.lower[h.axis] = h.threshold;
            split_on_thresholds(below, hypotheses, out);
            split_on_thresholds(above, hypotheses, out);
            return;
        }
    }
    out.push_back(box);
}

bool any_null(const NullConfig& b) {
    return std::any_of(b.begin(), b.end(), [](std::uint8_t x) { return x != 0; });
}

void emit_tiles(const Box& cell, std::span<const NullHypothesis> hypotheses, std::int64_t sim_count,
                std::vector<Tile>& tiles) {
    std::vector<Box> pieces;
    split_on_thresholds(cell, hypotheses, pieces);
    for (const auto& piece : pieces) {
        auto config = assign_config(piece, hypotheses);
        if (!any_null(config)) continue;
        tiles.push_back(make_tile(piece, std::move(config), sim_count));
    }
}

}  // namespace

Platten build_platten(const Box& bounds, std::span<const std::size_t> per_axis_counts,
                      std::vector<NullHypothesis> hypotheses, std::int64_t default_sim_count) {
    const std::size_t d = bounds.dim();
    if (d == 0 || bounds.upper.size() != d) throw std::invalid_argument("build_platten: malformed bounds");
    if (per_axis_counts.size() != d) throw std::invalid_argument("build_platten: need one cell count per axis");
    for (std::size_t i = 0; i < d; ++i) {
        if (!(std::isfinite(bounds.lower[i]) && std::isfinite(bounds.upper[i]) && bounds.lower[i] < bounds.upper[i])) {
            throw std::invalid_argument("build_platten: degenerate bounds on axis " + std::to_string(i));
        }
        if (per_axis_counts[i] < 1) throw std::invalid_argument("build_platten: cell counts must be >= 1");
    }
    if (default_sim_count < 1) throw std::invalid_argument("build_platten: sim_count must be >= 1");
    check_hypotheses(d, hypotheses);

    Platten platten;
    platten.bounds = bounds;
    platten.hypotheses = std::move(hypotheses);

    std::vector<std::size_t> idx(d, 0);
    const std::size_t total = std::accumulate(per_axis_counts.begin(), per_axis_counts.end(), std::size_t{1},
                                              std::multiplies<>());
    for (std::size_t flat = 0; flat < total; ++flat) {
        // Row-major: the last axis varies fastest.
        std::size_t rem = flat;
        for (std::size_t i = d; i-- > 0;) {
            idx[i] = rem % per_axis_counts[i];
            rem /= per_axis_counts[i];
        }
        Box cell;
        cell.lower.resize(d);
        cell.upper.resize(d);
        for (std::size_t i = 0; i < d; ++i) {
            const double span = bounds.upper[i] - bounds.lower[i];
            const auto n = static_cast<double>(per_axis_counts[i]);
            cell.lower[i] = bounds.lower[i] + span * static_cast<double>(idx[i]) / n;
            cell.upper[i] = idx[i] + 1 == per_axis_counts[i]
                                ? bounds.upper[i]
                                : bounds.lower[i] + span * static_cast<double>(idx[i] + 1) / n;
        }
        emit_tiles(cell, platten.hypotheses, default_sim_count, platten.tiles);
    }
    return platten;
}

std::vector<ParamPoint> vertices(const Tile& tile) {
    const std::size_t d = tile.dim();
    if (d > kMaxVertexDim) throw std::invalid_argument("vertices: dimension exceeds 20");
    const std::size_t count = std::size_t{1} << d;
    std::vector<ParamPoint> out;
    out.reserve(count);
    std::vector<double> corner(d);
    for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t i = 0; i < d; ++i) {
            const bool plus = (k >> (d - 1 - i)) & 1U;
            corner[i] = plus ? tile.center[i] + tile.half_widths[i] : tile.center[i] - tile.half_widths[i];
        }
        out.emplace_back(corner);
    }
    return out;
}

std::vector<Displacement> vertex_displacements(const Tile& tile) {
    std::vector<Displacement> out;
    for (const auto& v : vertices(tile)) {
        Displacement disp(tile.dim());
        for (std::size_t i = 0; i < tile.dim(); ++i) disp[i] = v[i] - tile.sim_point[i];
        out.push_back(std::move(disp));
    }
    return out;
}

Platten refine(const Platten& platten, std::span<const double> scores, std::size_t budget, double sim_growth) {
    if (scores.size() != platten.tiles.size()) throw std::invalid_argument("refine: one score per tile required");
    if (!(sim_growth > 0.0) || !std::isfinite(sim_growth)) throw std::invalid_argument("refine: sim_growth must be > 0");
    budget = std::min(budget, platten.tiles.size());

    std::vector<std::size_t> order(platten.tiles.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<std::uint8_t> selected(platten.tiles.size(), 0);
    for (std::size_t i = 0; i < budget; ++i) selected[order[i]] = 1;

    Platten out;
    out.bounds = platten.bounds;
    out.hypotheses = platten.hypotheses;
    for (std::size_t t = 0; t < platten.tiles.size(); ++t) {
        const Tile& tile = platten.tiles[t];
        if (!selected[t]) {
            out.tiles.push_back(tile);
            continue;
        }
        const auto& hw = tile.half_widths;
        const auto axis = static_cast<std::size_t>(std::max_element(hw.begin(), hw.end()) - hw.begin());
        const Box box = tile.extent();
        Box lower_half = box;
        Box upper_half = box;
        lower_half.upper[axis] = tile.center[axis];
        upper_half.lower[axis] = tile.center[axis];
        const auto child_sims = static_cast<std::int64_t>(std::ceil(static_cast<double>(tile.sim_count) * sim_growth));
        for (const Box& child : {lower_half, upper_half}) {
            emit_tiles(child, out.hypotheses, std::max<std::int64_t>(child_sims, 1), out.tiles);
        }
    }
    return out;
}

double null_region_volume(const Box& bounds, std::span<const NullHypothesis> hypotheses) {
    // The alternative region (every null false) is itself a box.
    Box alternative = bounds;
    for (const auto& h : hypotheses) {
        if (h.direction == NullDirection::le) {
            alternative.lower[h.axis] = std::max(alternative.lower[h.axis], h.threshold);
        } else {
            alternative.upper[h.axis] = std::min(alternative.upper[h.axis], h.threshold);
        }
    }
    if (hypotheses.empty()) return 0.0;
    return bounds.volume() - alternative.volume();
}

}  // namespace cse
