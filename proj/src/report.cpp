#include <cse/report.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace cse {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

namespace {

nlohmann::json q_json(double q) {
    if (std::isinf(q)) return "inf";
    return q;
}

std::string config_string(const NullConfig& b) {
    std::string s;
    for (auto bit : b) s.push_back(bit ? '1' : '0');
    return s;
}

void provenance_line(std::ostream& os, const nlohmann::json& provenance) {
    os << "# provenance: " << provenance.dump() << '\n';
}

void center_header(std::ostream& os, std::size_t dim) {
    for (std::size_t i = 0; i < dim; ++i) os << "tile_center_" << i << ',';
}

void center_cells(std::ostream& os, const Tile& tile) {
    for (double c : tile.center) os << format_double(c) << ',';
}

std::string lambda_cell(const Threshold& t) { return t.is_reject_nothing() ? "REJECT_NOTHING" : format_double(t.value()); }

}  // namespace

nlohmann::json to_json(const Tile& tile) {
    std::vector<int> config(tile.config.begin(), tile.config.end());
    return {{"center", std::vector<double>(tile.center.begin(), tile.center.end())},
            {"half_widths", tile.half_widths},
            {"config", config},
            {"sim_point", std::vector<double>(tile.sim_point.begin(), tile.sim_point.end())},
            {"sim_count", tile.sim_count}};
}

nlohmann::json to_json(const Platten& platten) {
    nlohmann::json hyps = nlohmann::json::array();
    for (const auto& h : platten.hypotheses) {
        hyps.push_back({{"axis", h.axis},
                        {"threshold", h.threshold},
                        {"direction", h.direction == NullDirection::le ? "le" : "ge"}});
    }
    nlohmann::json tiles = nlohmann::json::array();
    for (const auto& t : platten.tiles) tiles.push_back(to_json(t));
    return {{"bounds", {{"lower", platten.bounds.lower}, {"upper", platten.bounds.upper}}},
            {"hypotheses", hyps},
            {"tiles", tiles}};
}

Platten platten_from_json(const nlohmann::json& j) {
    Platten p;
    p.bounds.lower = j.at("bounds").at("lower").get<std::vector<double>>();
    p.bounds.upper = j.at("bounds").at("upper").get<std::vector<double>>();
    for (const auto& h : j.at("hypotheses")) {
        const auto dir = h.at("direction").get<std::string>();
        if (dir != "le" && dir != "ge") throw std::invalid_argument("hypothesis direction must be le or ge");
        p.hypotheses.push_back({h.at("axis").get<std::size_t>(), h.at("threshold").get<double>(),
                                dir == "le" ? NullDirection::le : NullDirection::ge});
    }
    for (const auto& t : j.at("tiles")) {
        Tile tile;
        tile.center = ParamPoint(t.at("center").get<std::vector<double>>());
        tile.half_widths = t.at("half_widths").get<std::vector<double>>();
        for (int b : t.at("config").get<std::vector<int>>()) tile.config.push_back(b ? 1 : 0);
        tile.sim_point = ParamPoint(t.at("sim_point").get<std::vector<double>>());
        tile.sim_count = t.at("sim_count").get<std::int64_t>();
        p.tiles.push_back(std::move(tile));
    }
    return p;
}

nlohmann::json to_json(const Threshold& t) {
    if (t.is_reject_nothing()) return "REJECT_NOTHING";
    return t.value();
}

Threshold threshold_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() != "REJECT_NOTHING") throw std::invalid_argument("unknown threshold sentinel");
        return Threshold::reject_nothing();
    }
    return Threshold::at(j.get<double>());
}

nlohmann::json to_json(const ValidationReport& report) {
    nlohmann::json tiles = nlohmann::json::array();
    for (std::size_t i = 0; i < report.tiles.size(); ++i) {
        const auto& t = report.tiles[i];
        nlohmann::json row{{"tile_id", i},
                           {"theta", std::vector<double>(t.theta.begin(), t.theta.end())},
                           {"N", t.n},
                           {"R", t.rejections},
                           {"cp_upper", t.cp_upper},
                           {"tile_upper", t.tile_upper},
                           {"q_star", q_json(t.q_star)}};
        if (t.tile_lower) row["tile_lower"] = *t.tile_lower;
        tiles.push_back(std::move(row));
    }
    double worst = 0.0;
    for (const auto& t : report.tiles) worst = std::max(worst, t.tile_upper);
    return {{"delta", report.delta}, {"lambda", report.lambda}, {"max_tile_upper", worst}, {"tiles", tiles}};
}

nlohmann::json to_json(const CalibrationResult& result) {
    nlohmann::json tiles = nlohmann::json::array();
    for (std::size_t i = 0; i < result.tiles.size(); ++i) {
        const auto& t = result.tiles[i];
        tiles.push_back(
            {{"tile_id", i}, {"alpha_prime", t.alpha_prime}, {"k", t.k}, {"lambda_hat", to_json(t.lambda)}});
    }
    return {{"alpha", result.alpha},
            {"lambda_star", to_json(result.lambda_star)},
            {"argmin_tile", result.argmin_tile},
            {"tiles", tiles}};
}

nlohmann::json to_json(const BootstrapDiagnostic& diag) {
    return {{"replicates", diag.replicates}, {"used", diag.used},     {"mean_slack", diag.mean_slack},
            {"sd_slack", diag.sd_slack},     {"slack", diag.slack}, {"argmin_trace", diag.argmin_trace}};
}

nlohmann::json to_json(const ConfidenceSet& set) {
    nlohmann::json j{{"retained", set.retained}, {"empty", set.retained.empty()}};
    if (set.image) {
        j["image"] = {set.image->first, set.image->second};
    } else {
        j["image"] = nullptr;
    }
    return j;
}

void write_validation_csv(std::ostream& os, const Platten& platten, const ValidationReport& report,
                          const nlohmann::json& provenance) {
    provenance_line(os, provenance);
    const bool lower = !report.tiles.empty() && report.tiles.front().tile_lower.has_value();
    center_header(os, platten.bounds.dim());
    os << "R,N,cp_upper,tile_upper,q_star" << (lower ? ",tile_lower" : "") << '\n';
    for (std::size_t i = 0; i < report.tiles.size(); ++i) {
        const auto& t = report.tiles[i];
        center_cells(os, platten.tiles[i]);
        os << t.rejections << ',' << t.n << ',' << format_double(t.cp_upper) << ',' << format_double(t.tile_upper)
           << ',' << format_double(t.q_star);
        if (lower) os << ',' << format_double(t.tile_lower.value_or(0.0));
        os << '\n';
    }
}

void write_calibration_csv(std::ostream& os, const Platten& platten, const CalibrationResult& result,
                           const nlohmann::json& provenance) {
    provenance_line(os, provenance);
    center_header(os, platten.bounds.dim());
    os << "alpha_prime,k,lambda_hat\n";
    for (std::size_t i = 0; i < result.tiles.size(); ++i) {
        const auto& t = result.tiles[i];
        center_cells(os, platten.tiles[i]);
        os << format_double(t.alpha_prime) << ',' << t.k << ',' << lambda_cell(t.lambda) << '\n';
    }
}

void write_tiles_csv(std::ostream& os, const Platten& platten, const nlohmann::json& provenance) {
    provenance_line(os, provenance);
    const std::size_t d = platten.bounds.dim();
    os << "tile_id,";
    center_header(os, d);
    for (std::size_t i = 0; i < d; ++i) os << "half_width_" << i << ',';
    os << "config,sim_count,volume\n";
    for (std::size_t t = 0; t < platten.tiles.size(); ++t) {
        const auto& tile = platten.tiles[t];
        os << t << ',';
        center_cells(os, tile);
        for (double h : tile.half_widths) os << format_double(h) << ',';
        os << config_string(tile.config) << ',' << tile.sim_count << ',' << format_double(tile.volume()) << '\n';
    }
}

}  // namespace cse
