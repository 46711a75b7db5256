#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "almgp/harness.hpp"

namespace almgp {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string fmt(double v, const char* pattern = "%.2f") {
    char buf[48];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Style {
    const char* color;
    const char* dash;
};

Style style_for(Strategy s) {
    return s == Strategy::alc ? Style{"#1b9e3a", "none"} : Style{"#d62728", "6,4"};
}

} // namespace

std::string render_rmse_svg(const std::vector<AggregateRow>& rows, std::string_view title) {
    std::map<Strategy, std::vector<AggregateRow>> series;
    for (const auto& r : rows) {
        series[r.strategy].push_back(r);
    }

    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;
    if (!rows.empty()) {
        x_min = x_max = static_cast<double>(rows.front().iteration);
        y_min = rows.front().min;
        y_max = rows.front().max;
        for (const auto& r : rows) {
            x_min = std::min(x_min, static_cast<double>(r.iteration));
            x_max = std::max(x_max, static_cast<double>(r.iteration));
            y_min = std::min(y_min, r.min);
            y_max = std::max(y_max, r.max);
        }
    }
    if (x_max <= x_min) x_max = x_min + 1.0;

    // RMSE curves often fall over decades; switch to log10 when they do.
    const bool log_y = y_min > 0.0 && std::isfinite(y_max) && y_max / y_min > 20.0;
    double lo = log_y ? std::floor(std::log10(y_min)) : y_min;
    double hi = log_y ? std::ceil(std::log10(y_max)) : y_max;
    if (!log_y) {
        const double pad = 0.05 * std::max(hi - lo, 1e-12);
        lo = std::max(0.0, lo - pad);
        hi += pad;
    }
    if (hi <= lo) hi = lo + 1.0;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto px = [&](double it) { return kLeft + (it - x_min) / (x_max - x_min) * plot_w; };
    const auto py = [&](double v) {
        const double t = log_y ? std::log10(std::max(v, 1e-300)) : v;
        return kTop + (1.0 - (t - lo) / (hi - lo)) * plot_h;
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth, "%.0f") + "\" height=\"" +
           fmt(kHeight, "%.0f") + "\" data-y-scale=\"" + (log_y ? "log" : "linear") + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt(kLeft) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" + escape(title) +
           "</text>\n";

    // axes and ticks
    svg += "<g stroke=\"#333\" stroke-width=\"1\">\n";
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + plot_h) + "\" x2=\"" + fmt(kLeft + plot_w) +
           "\" y2=\"" + fmt(kTop + plot_h) + "\"/>\n";
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" +
           fmt(kTop + plot_h) + "\"/>\n";
    svg += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    const int x_ticks = 5;
    for (int k = 0; k <= x_ticks; ++k) {
        const double it = x_min + (x_max - x_min) * k / x_ticks;
        svg += "<text x=\"" + fmt(px(it)) + "\" y=\"" + fmt(kTop + plot_h + 18) + "\" text-anchor=\"middle\">" +
               fmt(std::round(it), "%.0f") + "</text>\n";
    }
    if (log_y) {
        for (double e = lo; e <= hi + 1e-9; e += 1.0) {
            svg += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(py(std::pow(10.0, e)) + 4) +
                   "\" text-anchor=\"end\">1e" + fmt(e, "%.0f") + "</text>\n";
        }
    } else {
        for (int k = 0; k <= 4; ++k) {
            const double v = lo + (hi - lo) * k / 4;
            svg += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(py(v) + 4) + "\" text-anchor=\"end\">" +
                   fmt(v, "%.3g") + "</text>\n";
        }
    }
    svg += "<text x=\"" + fmt(kLeft + plot_w / 2) + "\" y=\"" + fmt(kHeight - 16) +
           "\" text-anchor=\"middle\">iteration</text>\n";
    svg += "<text x=\"18\" y=\"" + fmt(kTop + plot_h / 2) + "\" transform=\"rotate(-90 18 " +
           fmt(kTop + plot_h / 2) + ")\" text-anchor=\"middle\">test RMSE" + (log_y ? " (log)" : "") + "</text>\n";
    svg += "</g>\n";

    double legend_y = kTop + 10;
    for (const auto& [strategy, pts] : series) {
        const Style st = style_for(strategy);
        const std::string name(to_string(strategy));

        std::string band;
        for (const auto& r : pts) {
            band += (band.empty() ? "" : " ") + fmt(px(static_cast<double>(r.iteration))) + "," + fmt(py(r.max));
        }
        for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
            band += " " + fmt(px(static_cast<double>(it->iteration))) + "," + fmt(py(it->min));
        }
        svg += "<polygon class=\"band\" data-strategy=\"" + name + "\" points=\"" + band + "\" fill=\"" + st.color +
               "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";

        std::string line;
        for (const auto& r : pts) {
            line += (line.empty() ? "" : " ") + fmt(px(static_cast<double>(r.iteration))) + "," + fmt(py(r.mean));
        }
        svg += "<polyline class=\"mean\" data-strategy=\"" + name + "\" points=\"" + line + "\" fill=\"none\" stroke=\"" +
               st.color + "\" stroke-width=\"2\" stroke-dasharray=\"" + st.dash + "\"/>\n";

        svg += "<g class=\"data\" data-strategy=\"" + name + "\">\n";
        for (const auto& r : pts) {
            svg += "<circle cx=\"" + fmt(px(static_cast<double>(r.iteration))) + "\" cy=\"" + fmt(py(r.mean)) +
                   "\" r=\"1.5\" fill=\"" + st.color + "\" data-iteration=\"" + std::to_string(r.iteration) +
                   "\" data-mean=\"" + format_number(r.mean) + "\" data-min=\"" + format_number(r.min) +
                   "\" data-max=\"" + format_number(r.max) + "\" data-runs=\"" + std::to_string(r.runs) + "\"/>\n";
        }
        svg += "</g>\n";

        const double lx = kLeft + plot_w + 16;
        svg += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(legend_y) + "\" x2=\"" + fmt(lx + 30) + "\" y2=\"" +
               fmt(legend_y) + "\" stroke=\"" + st.color + "\" stroke-width=\"2\" stroke-dasharray=\"" + st.dash +
               "\"/>\n";
        svg += "<text x=\"" + fmt(lx + 36) + "\" y=\"" + fmt(legend_y + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + name + "</text>\n";
        legend_y += 20;
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace almgp
