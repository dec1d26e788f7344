#pragma once

// Figure-reproduction subcommands. Each reads its keys from the config,
// rejects leftovers, computes, and writes CSV (+ optional SVG) and a
// manifest into the output directory.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "serfsim/config.hpp"
#include "serfsim/dual_species.hpp"

namespace serf::cli {

enum ExitCode { ok = 0, usage_error = 1, config_error = 2, numerical_failure = 3 };

struct GlobalOptions {
    std::optional<std::uint64_t> seed;  // overrides the config's seed key
    int threads = 0;                    // 0: OpenMP default
    bool plot = false;
    std::string out = "out";
};

const std::vector<std::string>& command_names();

/// Runs one subcommand. Errors are reported on `err` and mapped to exit codes.
int run(const std::string& command, const config::ConfigFile& file, const GlobalOptions& global, std::ostream& err);

/// Dual-species keys shared by fig3b, fig4 and sensitivity. Keys listed in
/// `skip` are left unread (and therefore rejected if present).
dual::DualSpeciesParams read_dual_params(config::ConfigReader& reader, const std::vector<std::string>& skip,
                                         std::vector<std::string>& warnings);

} // namespace serf::cli
