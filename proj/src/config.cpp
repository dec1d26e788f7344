#include "serfsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <utility>

namespace serf::config {

namespace {

constexpr double tau = 2.0 * std::numbers::pi;

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    if (trim(s).empty())
        return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(trim(item));
    return out;
}

using UnitTable = std::vector<std::pair<const char*, double>>;

const UnitTable& units(Dimension d)
{
    static const UnitTable none{{"", 1.0}};
    static const UnitTable field{{"T", 1.0},   {"mT", 1e-3},  {"uT", 1e-6}, {"nT", 1e-9},
                                 {"pT", 1e-12}, {"fT", 1e-15}, {"G", 1e-4},  {"mG", 1e-7}};
    static const UnitTable rate{{"/s", 1.0}, {"1/s", 1.0}, {"s^-1", 1.0}};
    static const UnitTable frequency{{"rad/s", 1.0}, {"Hz", tau}, {"kHz", tau * 1e3}, {"MHz", tau * 1e6}};
    static const UnitTable density{{"cm^-3", 1.0}, {"/cm3", 1.0}, {"/cm^3", 1.0}, {"1/cm3", 1.0}, {"1/cm^3", 1.0}};
    static const UnitTable rate_coeff{{"cm3/s", 1.0}, {"cm^3/s", 1.0}};
    static const UnitTable volume{{"cm3", 1.0}, {"cm^3", 1.0}, {"mm3", 1e-3}, {"mm^3", 1e-3}};
    static const UnitTable time{{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}};
    static const UnitTable gyro{{"rad/s/T", 1.0}, {"Hz/T", tau}, {"MHz/T", tau * 1e6}, {"MHz/mT", tau * 1e9},
                                {"kHz/uT", tau * 1e9}, {"Hz/nT", tau * 1e9}};
    static const UnitTable angle{{"rad", 1.0}, {"deg", std::numbers::pi / 180.0}};
    switch (d) {
    case Dimension::none: return none;
    case Dimension::field: return field;
    case Dimension::rate: return rate;
    case Dimension::frequency: return frequency;
    case Dimension::density: return density;
    case Dimension::rate_coeff: return rate_coeff;
    case Dimension::volume: return volume;
    case Dimension::time: return time;
    case Dimension::gyromagnetic: return gyro;
    case Dimension::angle: return angle;
    }
    return none;
}

std::string format(double v)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

} // namespace

const char* to_string(Dimension d)
{
    switch (d) {
    case Dimension::none: return "";
    case Dimension::field: return "T";
    case Dimension::rate: return "1/s";
    case Dimension::frequency: return "rad/s";
    case Dimension::density: return "1/cm^3";
    case Dimension::rate_coeff: return "cm^3/s";
    case Dimension::volume: return "cm^3";
    case Dimension::time: return "s";
    case Dimension::gyromagnetic: return "rad/(s T)";
    case Dimension::angle: return "rad";
    }
    return "";
}

double parse_quantity(const std::string& raw, Dimension dim)
{
    const std::string text = trim(raw);
    double value = 0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
    if (r.ec != std::errc() || !std::isfinite(value))
        throw ConfigError("not a number: '" + text + "'");
    const std::string unit = trim(std::string(r.ptr, text.data() + text.size()));
    for (const auto& [name, factor] : units(dim))
        if (unit == name)
            return value * factor;
    std::string expected;
    for (const auto& [name, factor] : units(dim))
        expected += expected.empty() ? name : std::string(", ") + name;
    if (unit.empty())
        throw ConfigError("'" + text + "' needs a unit (" + expected + ")");
    throw ConfigError("unknown unit '" + unit + "' in '" + text + "' (expected " +
                      (expected.empty() ? std::string("no unit") : expected) + ")");
}

ConfigFile parse_config(const std::string& text, const std::string& source)
{
    ConfigFile file;
    file.source = source;
    std::stringstream ss(text);
    std::string line;
    int number = 0;
    while (std::getline(ss, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(number) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key.find_first_of(" \t") != std::string::npos)
            throw ConfigError(source + ":" + std::to_string(number) + ": bad key '" + key + "'");
        if (file.entries.contains(key))
            throw ConfigError(source + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
        file.entries[key] = Entry{value, number};
    }
    return file;
}

ConfigFile load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

ConfigReader::ConfigReader(ConfigFile file) : file_(std::move(file)) {}

const Entry* ConfigReader::find(const std::string& key)
{
    used_[key] = true;
    const auto it = file_.entries.find(key);
    return it == file_.entries.end() ? nullptr : &it->second;
}

void ConfigReader::fail(const std::string& key, const std::string& what) const
{
    const auto it = file_.entries.find(key);
    const std::string where = it == file_.entries.end() ? file_.source : file_.source + ":" + std::to_string(it->second.line);
    throw ConfigError(where + ": " + key + ": " + what);
}

double ConfigReader::quantity(const std::string& key, Dimension dim, double fallback)
{
    double v = fallback;
    if (const Entry* e = find(key)) {
        try {
            v = parse_quantity(e->value, dim);
        } catch (const ConfigError& err) {
            fail(key, err.what());
        }
    }
    const char* unit = to_string(dim);
    resolved_[key] = format(v) + (*unit ? std::string(" ") + unit : std::string());
    return v;
}

std::vector<double> ConfigReader::quantity_list(const std::string& key, Dimension dim, std::vector<double> fallback)
{
    std::vector<double> v = std::move(fallback);
    if (const Entry* e = find(key)) {
        v.clear();
        for (const std::string& item : split_list(e->value)) {
            try {
                v.push_back(parse_quantity(item, dim));
            } catch (const ConfigError& err) {
                fail(key, err.what());
            }
        }
    }
    std::string text;
    for (double x : v)
        text += (text.empty() ? "" : ", ") + format(x);
    const char* unit = to_string(dim);
    resolved_[key] = text + (*unit && !v.empty() ? std::string(" ") + unit : std::string());
    return v;
}

long long ConfigReader::integer(const std::string& key, long long fallback, long long min, long long max)
{
    long long v = fallback;
    if (const Entry* e = find(key)) {
        const std::string& t = e->value;
        const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
        if (r.ec != std::errc() || r.ptr != t.data() + t.size())
            fail(key, "expected an integer, got '" + t + "'");
    }
    if (v < min || v > max)
        fail(key, "must lie in [" + std::to_string(min) + ", " + std::to_string(max) + "]");
    resolved_[key] = std::to_string(v);
    return v;
}

std::uint64_t ConfigReader::unsigned64(const std::string& key, std::uint64_t fallback)
{
    std::uint64_t v = fallback;
    if (const Entry* e = find(key)) {
        const std::string& t = e->value;
        const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
        if (r.ec != std::errc() || r.ptr != t.data() + t.size())
            fail(key, "expected an unsigned integer, got '" + t + "'");
    }
    resolved_[key] = std::to_string(v);
    return v;
}

bool ConfigReader::boolean(const std::string& key, bool fallback)
{
    bool v = fallback;
    if (const Entry* e = find(key)) {
        if (e->value == "true" || e->value == "yes" || e->value == "1")
            v = true;
        else if (e->value == "false" || e->value == "no" || e->value == "0")
            v = false;
        else
            fail(key, "expected true or false, got '" + e->value + "'");
    }
    resolved_[key] = v ? "true" : "false";
    return v;
}

std::string ConfigReader::choice(const std::string& key, const std::vector<std::string>& allowed,
                                 const std::string& fallback)
{
    std::string v = fallback;
    if (const Entry* e = find(key))
        v = e->value;
    bool ok = false;
    std::string list;
    for (const auto& a : allowed) {
        ok = ok || a == v;
        list += (list.empty() ? "" : ", ") + a;
    }
    if (!ok)
        fail(key, "'" + v + "' is not one of " + list);
    resolved_[key] = v;
    return v;
}

std::vector<int> ConfigReader::spins(const std::string& key, std::vector<int> fallback)
{
    std::vector<int> v = std::move(fallback);
    if (const Entry* e = find(key)) {
        v.clear();
        for (const std::string& item : split_list(e->value)) {
            int num = 0;
            const auto slash = item.find('/');
            const std::string head = item.substr(0, slash);
            const auto r = std::from_chars(head.data(), head.data() + head.size(), num);
            if (slash == std::string::npos || item.substr(slash + 1) != "2" || r.ec != std::errc() ||
                r.ptr != head.data() + head.size() || num < 1 || num % 2 == 0)
                fail(key, "nuclear spins are written as half-integers like 3/2, got '" + item + "'");
            v.push_back(num);
        }
    }
    std::string text;
    for (int s : v)
        text += (text.empty() ? "" : ", ") + std::to_string(s) + "/2";
    resolved_[key] = text;
    return v;
}

void ConfigReader::finish() const
{
    std::string unknown;
    for (const auto& [key, entry] : file_.entries)
        if (!used_.contains(key))
            unknown += (unknown.empty() ? "" : ", ") + key + " (line " + std::to_string(entry.line) + ")";
    if (!unknown.empty())
        throw ConfigError(file_.source + ": unknown keys: " + unknown);
}

} // namespace serf::config
