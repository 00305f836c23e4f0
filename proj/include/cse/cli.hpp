#pragma once
#include <cse/config.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace cse {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

inline constexpr const char* kToolVersion = "0.1.0";

struct CliFlags {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::optional<std::size_t> adaptive_rounds;
    std::optional<std::string> observed_path;      // confset
    std::optional<std::string> calibration_path;  // confset
};

/*
 * Runs one command end to end and writes its artifacts under the output
 * directory. Diagnostics go to `log`. Returns 0, kExitConfig for any
 * configuration or input-file problem, kExitNumeric for failures during
 * computation.
 */
int run(Command command, const CliFlags& flags, std::ostream& log);

// argv front-end: `cse <command> [flags]`.
int cli_main(int argc, char** argv);

}  // namespace cse
