#pragma once
#include <cse/calibration.hpp>
#include <cse/designs.hpp>
#include <cse/grid.hpp>
#include <cse/model.hpp>

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cse {

enum class Command { validate, calibrate, bound, grid, confset };

std::optional<Command> parse_command(const std::string& name);
std::string to_string(Command command);

// A schema violation, located by a JSON pointer into the config document.
class ConfigError : public std::runtime_error {
   public:
    ConfigError(std::string pointer, const std::string& message)
        : std::runtime_error((pointer.empty() ? std::string("/") : pointer) + ": " + message),
          pointer_(std::move(pointer)) {}
    const std::string& pointer() const { return pointer_; }

   private:
    std::string pointer_;
};

struct AdaptiveConfig {
    std::size_t rounds = 0;
    std::size_t budget = 0;
    double sim_growth = 1.0;
};

struct GridConfig {
    Box bounds;
    std::vector<std::size_t> counts;
    std::vector<NullHypothesis> hypotheses;
    std::int64_t sim_count = 0;
};

struct BoundConfig {
    double theta0 = 0.0;
    double critical = 0.0;  // z-test cutoff; fixes a = 1 - Phi(critical - theta0) unless `a` is given
    std::optional<double> a;
    double v_min = 0.0;
    double v_max = 0.0;
    std::size_t v_steps = 0;
    std::vector<double> fixed_q;
};

/*
 * Parsed and defaulted run configuration. `resolved()` is the canonical
 * JSON form embedded in every artifact; re-running from it reproduces
 * the artifact exactly.
 */
struct RunConfig {
    Command command = Command::validate;
    nlohmann::json family_json;
    std::shared_ptr<const ModelFamily> family;
    std::string design_name;
    nlohmann::json design_params;
    std::shared_ptr<const Design> design;
    std::optional<GridConfig> grid;
    std::optional<double> alpha;
    std::optional<double> delta;
    std::uint64_t master_seed = 0;
    std::optional<AdaptiveConfig> adaptive;
    double lambda = 0.0;  // validation threshold, from design.params.lambda
    bool lower = false;
    std::size_t bootstrap_replicates = 0;
    std::optional<AffineEstimand> estimand;
    std::optional<BoundConfig> bound;
    std::string output_dir = ".";

    nlohmann::json resolved() const;
};

struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> adaptive_rounds;
    std::optional<std::string> output_dir;
};

// Throws ConfigError on any violation.
RunConfig parse_config(const nlohmann::json& doc, Command command, const ConfigOverrides& overrides = {});

ModelFamily parse_family(const nlohmann::json& j, const std::string& pointer = "/family");

}  // namespace cse
