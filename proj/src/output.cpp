#include "serfsim/output.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace serf::output {

std::string number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::add_row(std::vector<std::string> cells)
{
    if (cells.size() != header_.size())
        throw std::logic_error("CSV row width does not match the header");
    rows_.push_back(std::move(cells));
    return *this;
}

std::string CsvTable::str() const
{
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k)
                out += ',';
            out += cells[k];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_)
        line(r);
    return out;
}

std::string sha256_hex(const std::string& data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[digest[k] >> 4];
        out += hex[digest[k] & 15];
    }
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double W = 720, H = 480, ML = 80, MR = 160, MT = 40, MB = 60;
const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#17becf", "#8c564b", "#e377c2"};

std::string esc(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string fmt(double v)
{
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

struct Axis {
    double lo = 0, hi = 1;
    bool log = false;
    double pixel_lo = 0, pixel_hi = 1;

    double t(double v) const { return log ? std::log10(v) : v; }
    double map(double v) const { return pixel_lo + (t(v) - t(lo)) / (t(hi) - t(lo)) * (pixel_hi - pixel_lo); }

    std::vector<double> ticks() const
    {
        std::vector<double> out;
        if (log) {
            for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1.0) {
                const double v = std::pow(10.0, e);
                if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9))
                    out.push_back(v);
            }
            return out;
        }
        const double span = hi - lo;
        const double raw = span / 5;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        const double step = raw / mag < 2 ? 2 * mag : raw / mag < 5 ? 5 * mag : 10 * mag;
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
            out.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
        return out;
    }
};

Axis fit_axis(std::vector<double> v, bool log, double p0, double p1)
{
    Axis a;
    a.log = log;
    a.pixel_lo = p0;
    a.pixel_hi = p1;
    v.erase(std::remove_if(v.begin(), v.end(), [&](double x) { return !std::isfinite(x) || (log && x <= 0); }), v.end());
    if (v.empty()) {
        a.lo = log ? 1 : 0;
        a.hi = log ? 10 : 1;
        return a;
    }
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    a.lo = *mn;
    a.hi = *mx;
    if (a.hi <= a.lo) {
        a.lo = log ? a.lo / 2 : a.lo - 0.5 - 0.05 * std::abs(a.lo);
        a.hi = log ? a.hi * 2 : a.hi + 0.5 + 0.05 * std::abs(a.hi);
    } else if (!log) {
        const double pad = 0.05 * (a.hi - a.lo);
        a.lo -= pad;
        a.hi += pad;
    }
    return a;
}

void frame(std::ostringstream& s, const PlotSpec& spec, const Axis& x, const Axis& y)
{
    s << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << W - ML - MR << "\" height=\"" << H - MT - MB
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double v : x.ticks()) {
        const double px = x.map(v);
        s << "<line x1=\"" << px << "\" y1=\"" << H - MB << "\" x2=\"" << px << "\" y2=\"" << H - MB + 5
          << "\" stroke=\"black\"/>\n<text x=\"" << px << "\" y=\"" << H - MB + 18
          << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(v) << "</text>\n";
    }
    for (double v : y.ticks()) {
        const double py = y.map(v);
        s << "<line x1=\"" << ML - 5 << "\" y1=\"" << py << "\" x2=\"" << ML << "\" y2=\"" << py
          << "\" stroke=\"black\"/>\n<text x=\"" << ML - 8 << "\" y=\"" << py + 4
          << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
    }
    s << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 15 << "\" font-size=\"13\" text-anchor=\"middle\">"
      << esc(spec.x_label) << "</text>\n";
    s << "<text x=\"18\" y=\"" << (MT + H - MB) / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (MT + H - MB) / 2 << ")\">" << esc(spec.y_label) << "</text>\n";
    s << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">" << esc(spec.title)
      << "</text>\n";
}

} // namespace

std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series)
{
    std::vector<double> xs, ys;
    for (const auto& s : series) {
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        ys.insert(ys.end(), s.y.begin(), s.y.end());
    }
    const Axis x = fit_axis(xs, spec.log_x, ML, W - MR);
    const Axis y = fit_axis(ys, spec.log_y, H - MB, MT);

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    frame(s, spec, x, y);
    if (spec.x_marker && *spec.x_marker >= x.lo && *spec.x_marker <= x.hi) {
        const double px = x.map(*spec.x_marker);
        s << "<line x1=\"" << px << "\" y1=\"" << MT << "\" x2=\"" << px << "\" y2=\"" << H - MB
          << "\" stroke=\"grey\" stroke-dasharray=\"4 4\"/>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& sr = series[k];
        const char* colour = palette[k % std::size(palette)];
        std::string path;
        bool pen = false;
        for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i) {
            const bool ok = std::isfinite(sr.x[i]) && std::isfinite(sr.y[i]) && (!x.log || sr.x[i] > 0) &&
                            (!y.log || sr.y[i] > 0);
            if (!ok) {
                pen = false;
                continue;
            }
            path += (pen ? " L" : " M") + fmt(x.map(sr.x[i])) + " " + fmt(y.map(sr.y[i]));
            pen = true;
        }
        s << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.6\""
          << (sr.dashed ? " stroke-dasharray=\"6 3\"" : "") << "/>\n";
        const double ly = MT + 16 + 18 * static_cast<double>(k);
        s << "<line x1=\"" << W - MR + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - MR + 34 << "\" y2=\"" << ly - 4
          << "\" stroke=\"" << colour << "\" stroke-width=\"2\"" << (sr.dashed ? " stroke-dasharray=\"6 3\"" : "")
          << "/>\n<text x=\"" << W - MR + 40 << "\" y=\"" << ly << "\" font-size=\"11\">" << esc(sr.label) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::string heatmap_svg(const PlotSpec& spec, const std::vector<double>& xv, const std::vector<double>& yv,
                        const std::vector<std::vector<double>>& values, std::optional<std::pair<double, double>> star)
{
    std::vector<double> all;
    for (const auto& row : values)
        for (double v : row)
            if (std::isfinite(v) && v > 0)
                all.push_back(std::log10(v));
    double vmin = 0, vmax = 1;
    if (!all.empty()) {
        vmin = *std::min_element(all.begin(), all.end());
        vmax = *std::max_element(all.begin(), all.end());
        if (vmax <= vmin)
            vmax = vmin + 1;
    }
    // cell edges at geometric midpoints
    auto edges = [](const std::vector<double>& c) {
        std::vector<double> e;
        if (c.empty())
            return e;
        if (c.size() == 1)
            return std::vector<double>{c[0] / 1.5, c[0] * 1.5};
        e.push_back(c[0] * std::sqrt(c[0] / c[1]));
        for (std::size_t k = 1; k < c.size(); ++k)
            e.push_back(std::sqrt(c[k - 1] * c[k]));
        e.push_back(c.back() * std::sqrt(c.back() / c[c.size() - 2]));
        return e;
    };
    const auto ex = edges(xv);
    const auto ey = edges(yv);
    const Axis x = fit_axis(ex, true, ML, W - MR);
    const Axis y = fit_axis(ey, true, H - MB, MT);

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    auto colour = [&](double v) {
        if (!std::isfinite(v) || v <= 0)
            return std::string("#bbbbbb");
        const double t = std::clamp((std::log10(v) - vmin) / (vmax - vmin), 0.0, 1.0);
        // dark blue (good) to yellow (poor)
        const int r = static_cast<int>(20 + 235 * t);
        const int g = static_cast<int>(30 + 200 * t);
        const int b = static_cast<int>(120 - 90 * t);
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
        return std::string(buf);
    };
    for (std::size_t i = 0; i < yv.size(); ++i)
        for (std::size_t j = 0; j < xv.size(); ++j) {
            const double x0 = x.map(ex[j]), x1 = x.map(ex[j + 1]);
            const double y0 = y.map(ey[i + 1]), y1 = y.map(ey[i]);
            s << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(x1 - x0 + 0.3) << "\" height=\""
              << fmt(y1 - y0 + 0.3) << "\" fill=\"" << colour(values[i][j]) << "\"/>\n";
        }
    frame(s, spec, x, y);
    if (star) {
        s << "<text x=\"" << fmt(x.map(star->first)) << "\" y=\"" << fmt(y.map(star->second) + 6)
          << "\" font-size=\"18\" text-anchor=\"middle\" fill=\"cyan\">&#9733;</text>\n";
    }
    // colour bar
    for (int k = 0; k < 50; ++k) {
        const double t = k / 49.0;
        const double py = H - MB - (H - MB - MT) * (k + 1) / 50.0;
        s << "<rect x=\"" << W - MR + 20 << "\" y=\"" << fmt(py) << "\" width=\"20\" height=\""
          << fmt((H - MB - MT) / 50.0 + 0.5) << "\" fill=\"" << colour(std::pow(10.0, vmin + t * (vmax - vmin)))
          << "\"/>\n";
    }
    s << "<text x=\"" << W - MR + 46 << "\" y=\"" << H - MB << "\" font-size=\"11\">" << fmt(std::pow(10.0, vmin))
      << "</text>\n<text x=\"" << W - MR + 46 << "\" y=\"" << MT + 10 << "\" font-size=\"11\">"
      << fmt(std::pow(10.0, vmax)) << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

// ---------------------------------------------------------------------------

RunOutput::RunOutput(std::filesystem::path dir) : dir_(std::move(dir)) {}

void RunOutput::write(const std::string& name, const std::string& content)
{
    std::filesystem::create_directories(dir_);
    write_atomic(dir_ / name, content);
    checksums_.emplace_back(name, sha256_hex(content));
}

void RunOutput::finish(nlohmann::json manifest)
{
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [name, sum] : checksums_)
        files[name] = {{"sha256", sum}};
    manifest["files"] = files;
    std::filesystem::create_directories(dir_);
    write_atomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
}

} // namespace serf::output
