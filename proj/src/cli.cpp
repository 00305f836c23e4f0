#include <cse/calibration.hpp>
#include <cse/cli.hpp>
#include <cse/report.hpp>
#include <cse/simengine.hpp>
#include <cse/special.hpp>
#include <cse/tiltbound.hpp>
#include <cse/validation.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace cse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Input problems that are not part of the config document itself.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw InputError(std::string("cannot open ") + what + " '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed ") + what + " '" + path + "': " + e.what());
    }
}

json provenance(const RunConfig& cfg) {
    return {{"tool", "cse"},
            {"version", kToolVersion},
            {"command", to_string(cfg.command)},
            {"master_seed", cfg.master_seed},
            {"config", cfg.resolved()}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::int64_t total_sims(const Platten& p) {
    std::int64_t s = 0;
    for (const auto& t : p.tiles) s += t.sim_count;
    return s;
}

json round_entry(std::size_t round, const Platten& p) {
    return {{"round", round}, {"tiles", p.size()}, {"total_sims", total_sims(p)}};
}

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw std::runtime_error(std::string("non-finite ") + what);
}

Platten initial_platten(const RunConfig& cfg) {
    const auto& g = *cfg.grid;
    return build_platten(g.bounds, g.counts, g.hypotheses, g.sim_count);
}

std::size_t rounds_of(const RunConfig& cfg) { return cfg.adaptive ? cfg.adaptive->rounds : 0; }

int run_validate(const RunConfig& cfg, std::size_t threads, std::ostream& log) {
    auto platten = initial_platten(cfg);
    const SeedSpec seed{cfg.master_seed};
    ValidationOptions options;
    options.lambda = cfg.lambda;
    options.lower = cfg.lower;
    options.threads = threads;

    json rounds = json::array();
    ValidationReport report;
    for (std::size_t r = 0;; ++r) {
        report = validate(platten, *cfg.design, *cfg.family, *cfg.delta, seed, options);
        rounds.push_back(round_entry(r, platten));
        if (r == rounds_of(cfg)) break;
        // Refine where the tile extension costs the most over the pointwise bound.
        std::vector<double> scores(platten.size());
        for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = report.tiles[i].tile_upper - report.tiles[i].cp_upper;
        platten = refine(platten, scores, cfg.adaptive->budget, cfg.adaptive->sim_growth);
        log << "round " << r + 1 << ": " << platten.size() << " tiles\n";
    }
    for (const auto& t : report.tiles) {
        require_finite(t.tile_upper, "tile bound");
        require_finite(t.cp_upper, "Clopper-Pearson bound");
    }

    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const auto prov = provenance(cfg);
    write_json(dir / "validation.json",
               {{"provenance", prov}, {"platten", to_json(platten)}, {"validation", to_json(report)}, {"rounds", rounds}});
    std::ostringstream csv;
    write_validation_csv(csv, platten, report, prov);
    write_text(dir / "validation.csv", csv.str());
    return kExitOk;
}

int run_calibrate(const RunConfig& cfg, std::size_t threads, std::ostream& log) {
    auto platten = initial_platten(cfg);
    const SeedSpec seed{cfg.master_seed};
    CalibrationOptions options;
    options.threads = threads;

    json rounds = json::array();
    CalibrationResult result;
    std::vector<SimBatch> batches;
    for (std::size_t r = 0;; ++r) {
        result = calibrate(platten, *cfg.design, *cfg.family, *cfg.alpha, seed, options, &batches);
        rounds.push_back(round_entry(r, platten));
        if (r == rounds_of(cfg)) break;
        // Refine the tiles that pin the global minimum; REJECT_NOTHING tiles first.
        std::vector<double> scores(platten.size());
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const auto& lam = result.tiles[i].lambda;
            if (lam.is_reject_nothing()) {
                scores[i] = std::numeric_limits<double>::infinity();
            } else if (result.lambda_star.is_reject_nothing()) {
                scores[i] = -lam.value();
            } else {
                scores[i] = -std::abs(lam.value() - result.lambda_star.value());
            }
        }
        platten = refine(platten, scores, cfg.adaptive->budget, cfg.adaptive->sim_growth);
        log << "round " << r + 1 << ": " << platten.size() << " tiles\n";
    }

    std::size_t coarse = 0;
    for (std::size_t i = 0; i < result.tiles.size(); ++i) {
        require_finite(result.tiles[i].alpha_prime, "tile target");
        if (discretization_loss(platten.tiles[i].sim_count, result.tiles[i].alpha_prime) > 0.01) ++coarse;
    }
    if (coarse > 0) {
        log << "warning: on " << coarse << " tile(s) (N+1)*alpha' is far from an integer; "
            << "the order statistic gives up more than 1% of the level. Choose N so that (N+1)*alpha' is near an integer.\n";
    }
    if (result.lambda_star.is_reject_nothing()) log << "warning: global threshold is REJECT_NOTHING\n";

    const auto prov = provenance(cfg);
    json doc{{"provenance", prov}, {"platten", to_json(platten)}, {"calibration", to_json(result)}, {"rounds", rounds}};
    if (cfg.bootstrap_replicates > 0) {
        const auto diag = bootstrap_bias(platten, *cfg.family, batches, result, cfg.bootstrap_replicates,
                                         with_replacement_resampler(seed));
        doc["bootstrap"] = to_json(diag);
    }
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    write_json(dir / "calibration.json", doc);
    std::ostringstream csv;
    write_calibration_csv(csv, platten, result, prov);
    write_text(dir / "calibration.csv", csv.str());
    return kExitOk;
}

int run_grid(const RunConfig& cfg) {
    const auto platten = initial_platten(cfg);
    const auto prov = provenance(cfg);
    double covered = 0.0;
    for (const auto& t : platten.tiles) covered += t.volume();
    json summary{{"tiles", platten.size()},
                 {"total_sims", total_sims(platten)},
                 {"covered_volume", covered},
                 {"null_region_volume", null_region_volume(platten.bounds, platten.hypotheses)}};
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    write_json(dir / "platten.json", {{"provenance", prov}, {"summary", summary}, {"platten", to_json(platten)}});
    std::ostringstream csv;
    write_tiles_csv(csv, platten, prov);
    write_text(dir / "tiles.csv", csv.str());
    return kExitOk;
}

int run_bound(const RunConfig& cfg) {
    const auto& b = *cfg.bound;
    const auto& family = *cfg.family;
    const double a = b.a.value_or(normal_sf(b.critical - b.theta0));
    const std::vector<double> theta0{b.theta0};

    std::ostringstream csv;
    csv << "# provenance: " << provenance(cfg).dump() << '\n';
    csv << "theta,true_f,tilt_opt,taylor,pinsker,q_star";
    for (double q : b.fixed_q) csv << ",tilt_q" << format_double(q);
    csv << '\n';
    for (std::size_t s = 0; s < b.v_steps; ++s) {
        const double v = b.v_steps == 1 ? b.v_min
                                        : b.v_min + (b.v_max - b.v_min) * static_cast<double>(s) /
                                                        static_cast<double>(b.v_steps - 1);
        const double theta = b.theta0 + v;
        const std::vector<double> disp{v};
        const auto opt = optimize_forward(family, BoundQuery{ParamPoint(theta0), {disp}, a});
        // F = 1{X > critical}: f(theta) = Phi(theta - c), f' = phi, |f''| <= 1 is not tight but valid
        const double taylor = taylor_bound(a, normal_pdf(b.critical - b.theta0) * v, 1.0, v * v);
        const double pinsker = pinsker_bound(a, 0.5 * v * v);
        require_finite(opt.bound, "optimized bound");
        csv << format_double(theta) << ',' << format_double(normal_sf(b.critical - theta)) << ','
            << format_double(opt.bound) << ',' << format_double(taylor) << ',' << format_double(pinsker) << ','
            << format_double(opt.q_star);
        for (double q : b.fixed_q) csv << ',' << format_double(forward_bound(family, theta0, disp, q, a));
        csv << '\n';
    }
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    write_text(dir / "bound.csv", csv.str());
    return kExitOk;
}

OutcomeMatrix parse_observed(const json& j, const ModelFamily& family) {
    if (!j.is_object() || !j.contains("sufficient")) throw InputError("observed data needs a \"sufficient\" array");
    OutcomeMatrix out;
    out.kind = family.kind();
    try {
        out.sufficient = j.at("sufficient").get<std::vector<double>>();
        if (j.contains("rows")) {
            for (const auto& row : j.at("rows")) {
                std::vector<std::uint8_t> r;
                for (int x : row.get<std::vector<int>>()) {
                    if (x != 0 && x != 1) throw InputError("observed rows must be 0/1");
                    r.push_back(static_cast<std::uint8_t>(x));
                }
                out.rows.push_back(std::move(r));
            }
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed observed data: ") + e.what());
    }
    return out;
}

int run_confset(const RunConfig& cfg, const CliFlags& flags) {
    if (!flags.observed_path) throw InputError("confset needs --observed PATH");
    if (!flags.calibration_path) throw InputError("confset needs --calibration PATH");
    const auto observed = parse_observed(read_json_file(*flags.observed_path, "observed data"), *cfg.family);
    const auto cal = read_json_file(*flags.calibration_path, "calibration");

    Platten platten;
    std::vector<Threshold> thresholds;
    try {
        platten = platten_from_json(cal.at("platten"));
        for (const auto& t : cal.at("calibration").at("tiles")) thresholds.push_back(threshold_from_json(t.at("lambda_hat")));
    } catch (const std::exception& e) {
        throw InputError(std::string("malformed calibration file: ") + e.what());
    }
    if (thresholds.size() != platten.size()) throw InputError("calibration file: one threshold per tile required");
    if (platten.bounds.dim() != cfg.family->dim()) throw InputError("calibration file: dimension differs from the family");
    if (platten.hypotheses.size() != cfg.design->n_hypotheses()) {
        throw InputError("calibration file: hypothesis count differs from the design");
    }
    if (cfg.design->needs_raw_rows() && observed.rows.empty()) throw InputError("design needs raw observed rows");

    std::vector<double> stats(platten.size());
    std::vector<double> scratch;
    for (std::size_t i = 0; i < platten.size(); ++i) {
        stats[i] = cfg.design->statistic(observed, platten.tiles[i].config, scratch);
    }
    const auto set = confidence_set(platten, stats, thresholds, *cfg.estimand);
    auto doc = to_json(set);
    doc["provenance"] = provenance(cfg);
    doc["observed_statistics"] = stats;
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    write_json(dir / "confset.json", doc);
    return kExitOk;
}

}  // namespace

int run(Command command, const CliFlags& flags, std::ostream& log) {
    RunConfig cfg;
    try {
        const auto doc = read_json_file(flags.config_path, "config");
        cfg = parse_config(doc, command, ConfigOverrides{flags.seed, flags.adaptive_rounds, flags.out_dir});
    } catch (const ConfigError& e) {
        log << "config error at " << e.what() << '\n';
        return kExitConfig;
    } catch (const InputError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    const std::size_t threads = resolve_threads(flags.threads);
    try {
        switch (command) {
            case Command::validate: return run_validate(cfg, threads, log);
            case Command::calibrate: return run_calibrate(cfg, threads, log);
            case Command::grid: return run_grid(cfg);
            case Command::bound: return run_bound(cfg);
            case Command::confset: return run_confset(cfg, flags);
        }
    } catch (const InputError& e) {
        log << "input error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        log << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitNumeric;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"Continuous simulation extension: region-wide Type I Error validation and calibration"};
    app.require_subcommand(1);
    CliFlags flags;
    std::string seed_text;
    std::size_t threads = 0;
    std::size_t rounds = 0;
    std::string out_dir;
    std::string observed;
    std::string calibration;

    const std::vector<std::pair<const char*, const char*>> commands{
        {"validate", "pointwise upper confidence bounds on Type I Error over every tile"},
        {"calibrate", "level-alpha rejection threshold from per-tile order statistics"},
        {"bound", "optimized Tilt-Bound against Taylor and Pinsker baselines for the normal z-test"},
        {"grid", "build and write the platten only"},
        {"confset", "confidence set for an observed dataset from a calibration file"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config_path, "run configuration (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
        sub->add_option("--seed", seed_text, "master seed (overrides master_seed)");
        sub->add_option("--threads", threads, "worker threads; never changes outputs (default: CSE_THREADS)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--adaptive-rounds", rounds, "refinement rounds (overrides adaptive.rounds)");
        if (std::string(name) == "confset") {
            sub->add_option("--observed", observed, "observed data (JSON)")->required();
            sub->add_option("--calibration", calibration, "calibration.json from `calibrate`")->required();
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    auto* sub = app.get_subcommands().front();
    const auto command = *parse_command(sub->get_name());
    if (sub->count("--out")) flags.out_dir = out_dir;
    if (sub->count("--threads")) flags.threads = threads;
    if (sub->count("--adaptive-rounds")) flags.adaptive_rounds = rounds;
    if (sub->count("--seed")) {
        std::uint64_t seed = 0;
        std::istringstream in(seed_text);
        if (!(in >> seed) || !in.eof() || seed_text.find('-') != std::string::npos) {
            std::cerr << "config error: --seed must be a non-negative 64-bit integer\n";
            return kExitConfig;
        }
        flags.seed = seed;
    }
    if (command == Command::confset) {
        flags.observed_path = observed;
        flags.calibration_path = calibration;
    }
    return run(command, flags, std::cerr);
}

}  // namespace cse
