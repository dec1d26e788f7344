#pragma once

// Run configuration files.
//
//   # comment
//   B_z      = 50 uT
//   k_HK     = 5.4e-10 cm3/s
//   P_grid   = 0, 0.05, 0.5     # comma-separated list
//   spins    = 1/2, 3/2
//   q_K_mode = self_consistent
//
// One `key = value` per line. Dimensionful values need a unit suffix; cyclic
// frequency units (Hz, MHz/mT, ...) are converted to angular units. Every key
// present must be read by the subcommand; anything left over is rejected by
// ConfigReader::finish().

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace serf::config {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Dimension {
    none,         // plain number
    field,        // T
    rate,         // 1/s
    frequency,    // rad/s; Hz-type units are multiplied by 2 pi
    density,      // 1/cm^3
    rate_coeff,   // cm^3/s
    volume,       // cm^3
    time,         // s
    gyromagnetic, // rad/(s T)
    angle,        // rad
};

const char* to_string(Dimension d);

/// Parses "value [unit]" into SI-like internal units for the dimension.
double parse_quantity(const std::string& text, Dimension dim);

struct Entry {
    std::string value;
    int line = 0;
};

struct ConfigFile {
    std::string source;  // path or label, for messages
    std::map<std::string, Entry> entries;
};

ConfigFile parse_config(const std::string& text, const std::string& source = "<config>");
ConfigFile load_config(const std::string& path);

/// Typed access to a ConfigFile. Reads record the resolved value for the run
/// manifest and mark the key as known.
class ConfigReader {
public:
    explicit ConfigReader(ConfigFile file);

    double quantity(const std::string& key, Dimension dim, double fallback);
    std::vector<double> quantity_list(const std::string& key, Dimension dim, std::vector<double> fallback);
    long long integer(const std::string& key, long long fallback, long long min, long long max);
    std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback);
    bool boolean(const std::string& key, bool fallback);
    std::string choice(const std::string& key, const std::vector<std::string>& allowed, const std::string& fallback);
    /// Nuclear spins written as fractions ("1/2, 3/2"); returns 2I.
    std::vector<int> spins(const std::string& key, std::vector<int> fallback);

    bool has(const std::string& key) const { return file_.entries.contains(key); }

    /// Throws ConfigError listing any key that was never read.
    void finish() const;

    /// Resolved key -> text, in key order (defaults included).
    const std::map<std::string, std::string>& resolved() const { return resolved_; }

private:
    const Entry* find(const std::string& key);
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

    ConfigFile file_;
    std::map<std::string, bool> used_;
    std::map<std::string, std::string> resolved_;
};

} // namespace serf::config
