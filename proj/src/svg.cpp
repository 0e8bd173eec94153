#include "shockpinn/svg.hpp"

#include "shockpinn/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace shockpinn::plot {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double number(const std::string& s, const fs::path& file) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw AnalysisError(file.string() + ": '" + s + "' is not a number");
    }
}

/// Piecewise-linear approximation of the viridis colormap.
std::string colour(double s) {
    static constexpr std::array<std::array<double, 3>, 5> stops{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140},
                                                                  {94, 201, 98}, {253, 231, 37}}};
    s = std::clamp(std::isfinite(s) ? s : 0.0, 0.0, 1.0) * 4.0;
    const std::size_t i = std::min<std::size_t>(3, static_cast<std::size_t>(s));
    const double f = s - static_cast<double>(i);
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(stops[i][0] + f * (stops[i + 1][0] - stops[i][0])),
                  static_cast<int>(stops[i][1] + f * (stops[i + 1][1] - stops[i][1])),
                  static_cast<int>(stops[i][2] + f * (stops[i + 1][2] - stops[i][2])));
    return buf;
}

class Svg {
public:
    Svg(double w, double h) : w_(w), h_(h) {}
    void rect(double x, double y, double w, double h, const std::string& fill) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n", x, y,
                      w, h, fill.c_str());
        body_ << buf;
    }
    void text(double x, double y, const std::string& s, double size = 12, const char* anchor = "middle") {
        char buf[96];
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"%.0f\" text-anchor=\"%s\">", x, y, size,
                      anchor);
        body_ << buf << s << "</text>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
        if (pts.empty()) return;
        body_ << "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" << stroke << "\" points=\"";
        char buf[48];
        for (const auto& [x, y] : pts) {
            std::snprintf(buf, sizeof buf, "%.1f,%.1f ", x, y);
            body_ << buf;
        }
        body_ << "\"/>\n";
    }
    void frame(double x, double y, double w, double h) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"black\"/>\n", x,
                      y, w, h);
        body_ << buf;
    }
    void save(const fs::path& path) const {
        std::ofstream out(path);
        if (!out) throw AnalysisError("cannot write " + path.string());
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
            << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << body_.str() << "</svg>\n";
    }

private:
    double w_, h_;
    std::ostringstream body_;
};

struct FieldRow {
    double x, y, pred, ref, err;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

void heatmap(Svg& svg, const std::vector<FieldRow>& rows, int which, double x0, double y0, double size,
             const std::string& title) {
    const auto value = [which](const FieldRow& r) { return which == 0 ? r.pred : which == 1 ? r.ref : r.err; };
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        xs.push_back(r.x);
        ys.push_back(r.y);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    const std::size_t stride = std::max<std::size_t>(1, (std::max(xs.size(), ys.size()) + 99) / 100);
    const double xmin = xs.front(), xmax = xs.back(), ymin = ys.front(), ymax = ys.back();
    const double span = std::max(xmax - xmin, ymax - ymin);
    const double scale = span > 0.0 ? size / span : 1.0;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& r : rows) {
        lo = std::min(lo, value(r));
        hi = std::max(hi, value(r));
    }
    const double range = hi > lo ? hi - lo : 1.0;
    const double dx = xs.size() > 1 ? (xmax - xmin) / static_cast<double>(xs.size() - 1) : 1.0;
    const double dy = ys.size() > 1 ? (ymax - ymin) / static_cast<double>(ys.size() - 1) : 1.0;
    for (const auto& r : rows) {
        const auto i = static_cast<std::size_t>(std::llround((r.x - xmin) / dx));
        const auto j = static_cast<std::size_t>(std::llround((r.y - ymin) / dy));
        if (i % stride != 0 || j % stride != 0) continue;
        const double cw = dx * static_cast<double>(stride) * scale, ch = dy * static_cast<double>(stride) * scale;
        svg.rect(x0 + (r.x - xmin) * scale - 0.5 * cw, y0 + (ymax - r.y) * scale - 0.5 * ch, cw + 0.3, ch + 0.3,
                 colour((value(r) - lo) / range));
    }
    svg.frame(x0, y0, (xmax - xmin) * scale, (ymax - ymin) * scale);
    svg.text(x0 + 0.5 * size, y0 - 8, title);
    svg.text(x0 + 0.5 * size, y0 + size + 16, "[" + fmt(lo) + ", " + fmt(hi) + "]", 10);
}

std::vector<fs::path> field_figures(const fs::path& run_dir, const fs::path& out_dir) {
    const fs::path file = run_dir / "fields.csv";
    std::ifstream in(file);
    if (!in) throw AnalysisError("cannot read " + file.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("x,y,t,var,predicted,reference,abs_error", 0) != 0) throw AnalysisError(file.string() + ": unexpected header");
    std::map<double, std::map<std::string, std::vector<FieldRow>>> by_time;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split(line);
        if (c.size() < 7) throw AnalysisError(file.string() + ": short row");
        by_time[number(c[2], file)][c[3]].push_back(
            {number(c[0], file), number(c[1], file), number(c[4], file), number(c[5], file), number(c[6], file)});
    }
    std::vector<fs::path> written;
    static constexpr std::array<const char*, 4> vars{"rho", "u", "v", "p"};
    static constexpr std::array<const char*, 3> columns{"predicted", "reference", "|error|"};
    const double size = 220, gap = 60;
    for (const auto& [t, fields] : by_time) {
        Svg svg(3 * (size + gap) + gap, 4 * (size + gap) + gap);
        for (std::size_t v = 0; v < vars.size(); ++v) {
            const auto it = fields.find(vars[v]);
            if (it == fields.end()) continue;
            for (int k = 0; k < 3; ++k)
                heatmap(svg, it->second, k, gap + k * (size + gap), gap + static_cast<double>(v) * (size + gap), size,
                        std::string(vars[v]) + " " + columns[k]);
        }
        char name[64];
        if (by_time.size() > 1)
            std::snprintf(name, sizeof name, "fields_t%.3f.svg", t);
        else
            std::snprintf(name, sizeof name, "fields.svg");
        svg.save(out_dir / name);
        written.push_back(out_dir / name);
    }
    return written;
}

void line_chart(const fs::path& path, const std::string& title, const std::vector<double>& x,
                const std::vector<std::pair<std::string, std::vector<double>>>& series, bool log_scale) {
    static constexpr std::array<const char*, 10> palette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    const double W = 760, H = 420, left = 70, right = 190, top = 40, bottom = 50;
    Svg svg(W, H);
    const auto tr = [log_scale](double v) { return log_scale ? std::log10(std::max(v, 1e-300)) : v; };
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& [name, ys] : series)
        for (double y : ys)
            if (std::isfinite(y) && (!log_scale || y > 0.0)) {
                lo = std::min(lo, tr(y));
                hi = std::max(hi, tr(y));
            }
    if (!(hi > lo)) {
        lo = std::isfinite(lo) ? lo - 1.0 : 0.0;
        hi = lo + 2.0;
    }
    const double xmax = x.empty() ? 1.0 : std::max(1.0, x.back());
    const double pw = W - left - right, ph = H - top - bottom;
    svg.frame(left, top, pw, ph);
    svg.text(left + 0.5 * pw, 24, title, 14);
    svg.text(left + 0.5 * pw, H - 12, "iteration");
    svg.text(left - 6, top + 10, log_scale ? "1e" + fmt(hi) : fmt(hi), 10, "end");
    svg.text(left - 6, top + ph, log_scale ? "1e" + fmt(lo) : fmt(lo), 10, "end");
    svg.text(left + pw, top + ph + 16, fmt(xmax), 10);
    for (std::size_t s = 0; s < series.size(); ++s) {
        std::vector<std::pair<double, double>> pts;
        const auto& ys = series[s].second;
        const std::size_t stride = std::max<std::size_t>(1, ys.size() / 1500);
        for (std::size_t i = 0; i < ys.size(); i += stride) {
            if (!std::isfinite(ys[i]) || (log_scale && ys[i] <= 0.0)) continue;
            pts.emplace_back(left + pw * x[i] / xmax, top + ph * (hi - tr(ys[i])) / (hi - lo));
        }
        const std::string colour_s = palette[s % palette.size()];
        svg.polyline(pts, colour_s);
        svg.rect(W - right + 12, top + 14.0 * static_cast<double>(s), 10, 10, colour_s);
        svg.text(W - right + 28, top + 9 + 14.0 * static_cast<double>(s), series[s].first, 10, "start");
    }
    svg.save(path);
}

std::vector<fs::path> history_figures(const fs::path& run_dir, const fs::path& out_dir) {
    const fs::path file = run_dir / "loss_history.csv";
    std::ifstream in(file);
    if (!in) throw AnalysisError("cannot read " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw AnalysisError(file.string() + ": empty file");
    const auto header = split(line);
    std::vector<std::vector<double>> cols(header.size());
    std::size_t lbfgs_start = 0, row = 0;
    std::vector<double> x;
    double offset = 0.0, last = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split(line);
        if (c.size() != header.size()) throw AnalysisError(file.string() + ": row width differs from header");
        double it = number(c[0], file);
        if (c[1] == "lbfgs" && lbfgs_start == 0) {
            lbfgs_start = row;
            offset = last;
        }
        if (c[1] == "lbfgs") it += offset;
        last = it;
        x.push_back(it);
        for (std::size_t k = 2; k < header.size(); ++k) cols[k].push_back(number(c[k], file));
        ++row;
    }
    std::vector<std::pair<std::string, std::vector<double>>> losses, weights;
    for (std::size_t k = 2; k < header.size(); ++k) {
        const std::string& h = header[k];
        if (h.rfind("w_", 0) == 0 || h.rfind("W_", 0) == 0)
            weights.emplace_back(h, cols[k]);
        else if (h != "best")
            losses.emplace_back(h, cols[k]);
    }
    std::vector<fs::path> written{out_dir / "loss_history.svg", out_dir / "weights.svg"};
    line_chart(written[0], "loss history (Adam then L-BFGS)", x, losses, true);
    line_chart(written[1], "loss weights", x, weights, false);
    return written;
}

}  // namespace

std::vector<fs::path> plot_run(const fs::path& run_dir, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::vector<fs::path> out = field_figures(run_dir, out_dir);
    for (auto& p : history_figures(run_dir, out_dir)) out.push_back(p);
    return out;
}

}  // namespace shockpinn::plot
