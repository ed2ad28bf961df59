#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "simlmc/config.hpp"

namespace simlmc::commands {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int input = 2;           // configuration, mesh or other input error
inline constexpr int no_convergence = 3;
inline constexpr int check_failed = 4;    // validate: an invariant check failed
}  // namespace exit_code

struct CommandOptions {
    std::string config_path;               // empty: built-in defaults
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::string synthetic;                 // screen: JSON file with injected rates
};

// Loads the config, applies command-line overrides and validates it.
config::ExperimentConfig resolve_config(const CommandOptions& options);

// Each writes its CSV files into the output directory and returns an exit code.
// Messages go to `log`.
int cmd_screen(const CommandOptions& options, std::ostream& log);
int cmd_run(const CommandOptions& options, std::ostream& log);
int cmd_mc(const CommandOptions& options, std::ostream& log);
int cmd_validate(const CommandOptions& options, std::ostream& log);

}  // namespace simlmc::commands
