#pragma once

// CSV tables, SVG plots and the JSON run manifest. Files are written through
// a temporary name and renamed into place.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace serf::output {

/// Shortest round-trip decimal form, so identical doubles give identical CSVs.
std::string number(double v);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    CsvTable& add_row(std::vector<std::string> cells);
    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string sha256_hex(const std::string& data);

void write_atomic(const std::filesystem::path& path, const std::string& content);

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::optional<double> x_marker;  // vertical dashed line
};

std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series);

/// values[i][j] at (x[j], y[i]) on log axes; non-finite cells are grey.
std::string heatmap_svg(const PlotSpec& spec, const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<std::vector<double>>& values, std::optional<std::pair<double, double>> star);

/// Collects the files of one run and writes manifest.json last.
class RunOutput {
public:
    explicit RunOutput(std::filesystem::path dir);

    void write(const std::string& name, const std::string& content);
    /// Adds checksums of everything written so far and writes manifest.json.
    void finish(nlohmann::json manifest);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> checksums_;
};

} // namespace serf::output
