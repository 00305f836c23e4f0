#include <cse/config.hpp>
#include <cse/special.hpp>

#include <cmath>
#include <set>

namespace cse {

using nlohmann::json;

std::optional<Command> parse_command(const std::string& name) {
    if (name == "validate") return Command::validate;
    if (name == "calibrate") return Command::calibrate;
    if (name == "bound") return Command::bound;
    if (name == "grid") return Command::grid;
    if (name == "confset") return Command::confset;
    return std::nullopt;
}

std::string to_string(Command command) {
    switch (command) {
        case Command::validate: return "validate";
        case Command::calibrate: return "calibrate";
        case Command::bound: return "bound";
        case Command::grid: return "grid";
        case Command::confset: return "confset";
    }
    return "?";
}

namespace {

std::string child(const std::string& pointer, const std::string& key) {
    // RFC 6901 escaping
    std::string escaped;
    for (char c : key) {
        if (c == '~') {
            escaped += "~0";
        } else if (c == '/') {
            escaped += "~1";
        } else {
            escaped += c;
        }
    }
    return pointer + "/" + escaped;
}

std::string child(const std::string& pointer, std::size_t index) { return pointer + "/" + std::to_string(index); }

const json& object_at(const json& j, const std::string& pointer) {
    if (!j.is_object()) throw ConfigError(pointer, "must be an object");
    return j;
}

void allow_keys(const json& j, const std::string& pointer, std::initializer_list<const char*> keys) {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ConfigError(child(pointer, key), "unknown property");
    }
}

const json& require(const json& obj, const std::string& pointer, const char* key) {
    if (!obj.contains(key)) throw ConfigError(child(pointer, key), "required property is missing");
    return obj.at(key);
}

double number(const json& j, const std::string& pointer) {
    if (!j.is_number()) throw ConfigError(pointer, "must be a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) throw ConfigError(pointer, "must be finite");
    return x;
}

double probability_open(const json& j, const std::string& pointer) {
    const double x = number(j, pointer);
    if (!(x > 0.0 && x < 1.0)) throw ConfigError(pointer, "must lie in (0, 1)");
    return x;
}

std::uint64_t unsigned_integer(const json& j, const std::string& pointer) {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
        throw ConfigError(pointer, "must be a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

std::uint64_t positive_integer(const json& j, const std::string& pointer) {
    const auto x = unsigned_integer(j, pointer);
    if (x == 0) throw ConfigError(pointer, "must be a positive integer");
    return x;
}

std::vector<double> number_array(const json& j, const std::string& pointer) {
    if (!j.is_array()) throw ConfigError(pointer, "must be an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], child(pointer, i)));
    return out;
}

bool boolean(const json& j, const std::string& pointer) {
    if (!j.is_boolean()) throw ConfigError(pointer, "must be a boolean");
    return j.get<bool>();
}

GridConfig parse_grid(const json& j, const std::string& pointer, std::size_t dim) {
    object_at(j, pointer);
    allow_keys(j, pointer, {"lower", "upper", "counts", "sim_count", "hypotheses"});
    GridConfig g;
    g.bounds.lower = number_array(require(j, pointer, "lower"), child(pointer, "lower"));
    g.bounds.upper = number_array(require(j, pointer, "upper"), child(pointer, "upper"));
    if (g.bounds.lower.size() != dim) throw ConfigError(child(pointer, "lower"), "length must equal the family dimension");
    if (g.bounds.upper.size() != dim) throw ConfigError(child(pointer, "upper"), "length must equal the family dimension");
    for (std::size_t i = 0; i < dim; ++i) {
        if (!(g.bounds.lower[i] < g.bounds.upper[i])) {
            throw ConfigError(child(child(pointer, "upper"), i), "must exceed the matching lower bound");
        }
    }
    const auto& counts = require(j, pointer, "counts");
    const auto counts_ptr = child(pointer, "counts");
    if (!counts.is_array() || counts.size() != dim) throw ConfigError(counts_ptr, "must be an array of length dim");
    for (std::size_t i = 0; i < dim; ++i) g.counts.push_back(positive_integer(counts[i], child(counts_ptr, i)));
    g.sim_count = static_cast<std::int64_t>(positive_integer(require(j, pointer, "sim_count"), child(pointer, "sim_count")));
    const auto hyp_ptr = child(pointer, "hypotheses");
    const auto& hyps = require(j, pointer, "hypotheses");
    if (!hyps.is_array() || hyps.empty()) throw ConfigError(hyp_ptr, "must be a non-empty array");
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        const auto hp = child(hyp_ptr, i);
        object_at(hyps[i], hp);
        allow_keys(hyps[i], hp, {"axis", "threshold", "direction"});
        NullHypothesis h;
        h.axis = unsigned_integer(require(hyps[i], hp, "axis"), child(hp, "axis"));
        if (h.axis >= dim) throw ConfigError(child(hp, "axis"), "must be below the family dimension");
        h.threshold = number(require(hyps[i], hp, "threshold"), child(hp, "threshold"));
        if (hyps[i].contains("direction")) {
            const auto& d = hyps[i].at("direction");
            if (d == "le") {
                h.direction = NullDirection::le;
            } else if (d == "ge") {
                h.direction = NullDirection::ge;
            } else {
                throw ConfigError(child(hp, "direction"), "must be \"le\" or \"ge\"");
            }
        }
        g.hypotheses.push_back(h);
    }
    return g;
}

BoundConfig parse_bound(const json& j, const std::string& pointer) {
    object_at(j, pointer);
    allow_keys(j, pointer, {"theta0", "critical", "a", "v_min", "v_max", "v_steps", "fixed_q"});
    BoundConfig b;
    b.theta0 = number(require(j, pointer, "theta0"), child(pointer, "theta0"));
    b.critical = j.contains("critical") ? number(j.at("critical"), child(pointer, "critical")) : normal_quantile(0.975);
    if (j.contains("a")) b.a = probability_open(j.at("a"), child(pointer, "a"));
    b.v_min = j.contains("v_min") ? number(j.at("v_min"), child(pointer, "v_min")) : 0.0;
    b.v_max = number(require(j, pointer, "v_max"), child(pointer, "v_max"));
    if (!(b.v_max >= b.v_min)) throw ConfigError(child(pointer, "v_max"), "must be >= v_min");
    b.v_steps = j.contains("v_steps") ? positive_integer(j.at("v_steps"), child(pointer, "v_steps")) : 31;
    if (j.contains("fixed_q")) {
        b.fixed_q = number_array(j.at("fixed_q"), child(pointer, "fixed_q"));
        for (std::size_t i = 0; i < b.fixed_q.size(); ++i) {
            if (!(b.fixed_q[i] > 1.0)) throw ConfigError(child(child(pointer, "fixed_q"), i), "must be > 1");
        }
    }
    return b;
}

}  // namespace

ModelFamily parse_family(const json& j, const std::string& pointer) {
    object_at(j, pointer);
    const auto& name_j = require(j, pointer, "name");
    if (!name_j.is_string()) throw ConfigError(child(pointer, "name"), "must be a string");
    const auto name = name_j.get<std::string>();
    if (name == "normal") {
        allow_keys(j, pointer, {"name", "dim"});
        const auto dim = j.contains("dim") ? positive_integer(j.at("dim"), child(pointer, "dim")) : 1;
        return ModelFamily::normal(dim);
    }
    if (name == "bernoulli") {
        allow_keys(j, pointer, {"name", "arm_sizes"});
        const auto ptr = child(pointer, "arm_sizes");
        const auto& sizes = require(j, pointer, "arm_sizes");
        if (!sizes.is_array() || sizes.empty()) throw ConfigError(ptr, "must be a non-empty array");
        std::vector<std::int64_t> arms;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            arms.push_back(static_cast<std::int64_t>(positive_integer(sizes[i], child(ptr, i))));
        }
        return ModelFamily::bernoulli(std::move(arms));
    }
    if (name == "glm") {
        allow_keys(j, pointer, {"name", "covariates"});
        const auto ptr = child(pointer, "covariates");
        const auto& rows = require(j, pointer, "covariates");
        if (!rows.is_array() || rows.empty()) throw ConfigError(ptr, "must be a non-empty array of rows");
        std::vector<double> flat;
        std::size_t dim = 0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto row = number_array(rows[r], child(ptr, r));
            if (r == 0) dim = row.size();
            if (row.empty() || row.size() != dim) throw ConfigError(child(ptr, r), "rows must share a non-zero length");
            flat.insert(flat.end(), row.begin(), row.end());
        }
        return ModelFamily::glm(rows.size(), dim, std::move(flat));
    }
    throw ConfigError(child(pointer, "name"), "unknown family '" + name + "'");
}

RunConfig parse_config(const json& doc, Command command, const ConfigOverrides& overrides) {
    object_at(doc, "");
    allow_keys(doc, "",
               {"$schema", "family", "design", "grid", "alpha", "delta", "master_seed", "adaptive", "validation",
                "bootstrap", "confset", "bound", "output"});
    RunConfig cfg;
    cfg.command = command;

    if (overrides.seed) {
        cfg.master_seed = *overrides.seed;
    } else {
        cfg.master_seed = unsigned_integer(require(doc, "", "master_seed"), "/master_seed");
    }

    cfg.family_json = require(doc, "", "family");
    cfg.family = std::make_shared<const ModelFamily>(parse_family(cfg.family_json, "/family"));
    const std::size_t dim = cfg.family->dim();

    if (doc.contains("output")) {
        const auto& out = object_at(doc.at("output"), "/output");
        allow_keys(out, "/output", {"dir"});
        if (out.contains("dir")) {
            if (!out.at("dir").is_string()) throw ConfigError("/output/dir", "must be a string");
            cfg.output_dir = out.at("dir").get<std::string>();
        }
    }
    if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;

    if (command == Command::bound) {
        cfg.bound = parse_bound(require(doc, "", "bound"), "/bound");
        if (cfg.family->kind() != FamilyKind::normal || dim != 1) {
            throw ConfigError("/family", "bound requires the 1-dimensional normal family");
        }
        return cfg;
    }

    // Every other command simulates a design over a platten.
    const auto& design = object_at(require(doc, "", "design"), "/design");
    allow_keys(design, "/design", {"name", "params"});
    const auto& name = require(design, "/design", "name");
    if (!name.is_string()) throw ConfigError("/design/name", "must be a string");
    cfg.design_name = name.get<std::string>();
    if (!design_registry().count(cfg.design_name)) {
        throw ConfigError("/design/name", "unknown design '" + cfg.design_name + "'");
    }
    cfg.design_params = design.contains("params") ? design.at("params") : json::object();
    object_at(cfg.design_params, "/design/params");
    try {
        cfg.design = make_design(cfg.design_name, cfg.design_params, *cfg.family);
    } catch (const json::exception& e) {
        throw ConfigError("/design/params", e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError("/design", e.what());
    }

    cfg.grid = parse_grid(require(doc, "", "grid"), "/grid", dim);
    if (cfg.grid->hypotheses.size() != cfg.design->n_hypotheses()) {
        throw ConfigError("/grid/hypotheses", "count must equal the design's number of hypotheses (" +
                                                  std::to_string(cfg.design->n_hypotheses()) + ")");
    }

    const bool has_alpha = doc.contains("alpha");
    const bool has_delta = doc.contains("delta");
    if (command == Command::validate) {
        if (has_alpha) throw ConfigError("/alpha", "validate takes delta, not alpha");
        cfg.delta = probability_open(require(doc, "", "delta"), "/delta");
        const auto& lam = require(cfg.design_params, "/design/params", "lambda");
        cfg.lambda = number(lam, "/design/params/lambda");
        if (doc.contains("validation")) {
            const auto& v = object_at(doc.at("validation"), "/validation");
            allow_keys(v, "/validation", {"lower"});
            if (v.contains("lower")) cfg.lower = boolean(v.at("lower"), "/validation/lower");
        }
    } else if (command == Command::calibrate) {
        if (has_delta) throw ConfigError("/delta", "calibrate takes alpha, not delta");
        cfg.alpha = probability_open(require(doc, "", "alpha"), "/alpha");
        if (doc.contains("bootstrap")) {
            const auto& b = object_at(doc.at("bootstrap"), "/bootstrap");
            allow_keys(b, "/bootstrap", {"replicates"});
            cfg.bootstrap_replicates = unsigned_integer(require(b, "/bootstrap", "replicates"), "/bootstrap/replicates");
        }
    } else {
        if (has_alpha) cfg.alpha = probability_open(doc.at("alpha"), "/alpha");
        if (has_delta) cfg.delta = probability_open(doc.at("delta"), "/delta");
    }

    if (doc.contains("adaptive")) {
        const auto& a = object_at(doc.at("adaptive"), "/adaptive");
        allow_keys(a, "/adaptive", {"rounds", "budget", "sim_growth"});
        AdaptiveConfig ad;
        ad.rounds = a.contains("rounds") ? unsigned_integer(a.at("rounds"), "/adaptive/rounds") : 0;
        ad.budget = positive_integer(require(a, "/adaptive", "budget"), "/adaptive/budget");
        ad.sim_growth = a.contains("sim_growth") ? number(a.at("sim_growth"), "/adaptive/sim_growth") : 1.0;
        if (!(ad.sim_growth > 0.0)) throw ConfigError("/adaptive/sim_growth", "must be > 0");
        cfg.adaptive = ad;
    }
    if (overrides.adaptive_rounds) {
        if (!cfg.adaptive) {
            if (*overrides.adaptive_rounds > 0) throw ConfigError("/adaptive", "--adaptive-rounds needs an adaptive section with a budget");
        } else {
            cfg.adaptive->rounds = *overrides.adaptive_rounds;
        }
    }

    if (command == Command::confset) {
        const auto& c = object_at(require(doc, "", "confset"), "/confset");
        allow_keys(c, "/confset", {"estimand"});
        const auto& e = object_at(require(c, "/confset", "estimand"), "/confset/estimand");
        allow_keys(e, "/confset/estimand", {"offset", "weights"});
        AffineEstimand est;
        est.offset = e.contains("offset") ? number(e.at("offset"), "/confset/estimand/offset") : 0.0;
        est.weights = number_array(require(e, "/confset/estimand", "weights"), "/confset/estimand/weights");
        if (est.weights.size() != dim) throw ConfigError("/confset/estimand/weights", "length must equal the family dimension");
        cfg.estimand = est;
    }
    return cfg;
}

nlohmann::json RunConfig::resolved() const {
    json j;
    j["master_seed"] = master_seed;
    j["family"] = family_json;
    if (bound) {
        json b{{"theta0", bound->theta0},
               {"critical", bound->critical},
               {"v_min", bound->v_min},
               {"v_max", bound->v_max},
               {"v_steps", bound->v_steps},
               {"fixed_q", bound->fixed_q}};
        if (bound->a) b["a"] = *bound->a;
        j["bound"] = b;
        return j;
    }
    j["design"] = {{"name", design_name}, {"params", design_params}};
    if (grid) {
        json hyps = json::array();
        for (const auto& h : grid->hypotheses) {
            hyps.push_back({{"axis", h.axis},
                            {"threshold", h.threshold},
                            {"direction", h.direction == NullDirection::le ? "le" : "ge"}});
        }
        j["grid"] = {{"lower", grid->bounds.lower},
                     {"upper", grid->bounds.upper},
                     {"counts", grid->counts},
                     {"sim_count", grid->sim_count},
                     {"hypotheses", hyps}};
    }
    if (alpha) j["alpha"] = *alpha;
    if (delta) j["delta"] = *delta;
    if (command == Command::validate) j["validation"] = {{"lower", lower}};
    if (command == Command::calibrate && bootstrap_replicates > 0) {
        j["bootstrap"] = {{"replicates", bootstrap_replicates}};
    }
    if (adaptive) {
        j["adaptive"] = {{"rounds", adaptive->rounds}, {"budget", adaptive->budget}, {"sim_growth", adaptive->sim_growth}};
    }
    if (estimand) j["confset"] = {{"estimand", {{"offset", estimand->offset}, {"weights", estimand->weights}}}};
    return j;
}

}  // namespace cse
