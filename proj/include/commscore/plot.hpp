#pragma once

// Standalone SVG renderings of the interference heatmap and the duplicate
// score bars. Output depends only on the inputs.

#include "commscore/duplicate_scorer.hpp"
#include "commscore/parasite_scorer.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace commscore {

namespace svg {

inline std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Rgb {
    int r, g, b;
};

// Five-stop viridis approximation, linear between stops.
inline Rgb colormap(double x) {
    static constexpr std::array<Rgb, 5> stops{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    x = std::clamp(x, 0.0, 1.0) * (stops.size() - 1);
    auto i = std::min(static_cast<std::size_t>(x), stops.size() - 2);
    double t = x - static_cast<double>(i);
    auto lerp = [t](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
    return {lerp(stops[i].r, stops[i + 1].r), lerp(stops[i].g, stops[i + 1].g), lerp(stops[i].b, stops[i + 1].b)};
}

inline std::string hex(Rgb c) { return fmt::format("#{:02x}{:02x}{:02x}", c.r, c.g, c.b); }

inline std::string header(int width, int height) {
    return fmt::format("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                       "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
                       "font-family=\"sans-serif\">\n"
                       "<rect width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
                       width, height);
}

} // namespace svg

inline constexpr std::string_view highlight_color = "#00ffff";

/// Phrasing rows by utterance columns, colored 0 -> 1. The column maximum is
/// outlined in cyan when it reaches `threshold`.
inline std::string emit_heatmap_plot(const InterferenceMatrix& m, double threshold = 0.6) {
    if (m.rows() == 0 || m.cols() == 0) fail(ErrorKind::Argument, "cannot plot an empty interference matrix");
    constexpr int cell_w = 40, cell_h = 26, left = 150, top = 48, legend_w = 70, bottom = 56;
    const int rows = static_cast<int>(m.rows()), cols = static_cast<int>(m.cols());
    const int width = left + cols * cell_w + legend_w, height = top + rows * cell_h + bottom;

    std::string out = svg::header(width, height);
    out += fmt::format("<text class=\"title\" x=\"{}\" y=\"24\" font-size=\"15\">Interference heatmap: {}</text>\n", left,
                       svg::escape(m.speaker));

    std::string highlights;
    for (int k = 0; k < cols; ++k) {
        int best = 0;
        for (int j = 1; j < rows; ++j)
            if (m.at(j, k) > m.at(best, k) + tie_tolerance) best = j;
        for (int j = 0; j < rows; ++j) {
            const double v = m.at(j, k);
            const int x = left + k * cell_w, y = top + j * cell_h;
            out += fmt::format("<rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", x, y,
                               cell_w, cell_h, svg::hex(svg::colormap(v)));
            out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\" fill=\"{}\">{:.2f}</text>\n",
                               x + cell_w / 2, y + cell_h / 2 + 4, v > 0.6 ? "#000000" : "#ffffff", v);
        }
        if (m.at(best, k) >= threshold)
            highlights += fmt::format("<rect class=\"highlight\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
                                      "stroke=\"{}\" stroke-width=\"3\"/>\n",
                                      left + k * cell_w + 1, top + best * cell_h + 1, cell_w - 2, cell_h - 2,
                                      highlight_color);
    }
    out += highlights;

    for (int j = 0; j < rows; ++j)
        out += fmt::format("<text class=\"row-label\" x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                           left - 6, top + j * cell_h + cell_h / 2 + 4, svg::escape(m.phrasings[j]));
    for (int k = 0; k < cols; ++k) {
        const bool refined = m.refined(m.utterance_indices[k]);
        out += fmt::format("<text class=\"col-label\" x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{:03d}{}</text>\n",
                           left + k * cell_w + cell_w / 2, top + rows * cell_h + 16, m.utterance_indices[k],
                           refined ? "*" : "");
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\">utterance (* = context-refined)</text>\n", left,
                       top + rows * cell_h + 38);

    // Legend: 0 at the bottom, 1 at the top.
    const int lx = left + cols * cell_w + 20, lh = rows * cell_h;
    constexpr int steps = 20;
    for (int i = 0; i < steps; ++i) {
        const double v = 1.0 - (i + 0.5) / steps;
        out += fmt::format("<rect x=\"{}\" y=\"{:.2f}\" width=\"14\" height=\"{:.2f}\" fill=\"{}\"/>\n", lx,
                           top + i * lh / double(steps), lh / double(steps) + 0.5, svg::hex(svg::colormap(v)));
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\">1.0</text>\n", lx + 18, top + 8);
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\">0.0</text>\n", lx + 18, top + lh);
    out += "</svg>\n";
    return out;
}

/// One bar per utterance, grouped by speaker, with the flag threshold drawn
/// across the plot.
inline std::string emit_score_plot(std::span<const DuplicateScore> scores, double threshold = 0.6) {
    std::map<std::string, std::vector<const DuplicateScore*>> groups;
    for (const auto& s : scores) groups[s.speaker].push_back(&s);

    constexpr int bar_w = 14, bar_gap = 4, group_gap = 30, left = 56, right = 20, top = 40, plot_h = 240,
                  bottom = 64;
    int plot_w = 0;
    for (const auto& [speaker, list] : groups) plot_w += static_cast<int>(list.size()) * (bar_w + bar_gap) + group_gap;
    plot_w = std::max(plot_w, 200);
    const int width = left + plot_w + right, height = top + plot_h + bottom;
    auto y_of = [&](double v) { return top + plot_h * (1.0 - std::clamp(v, 0.0, 1.0)); };

    std::string out = svg::header(width, height);
    out += fmt::format("<text class=\"title\" x=\"{}\" y=\"22\" font-size=\"15\">Duplicate communication scores</text>\n",
                       left);
    // Axes and y ticks.
    out += fmt::format("<line class=\"axis\" x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#000000\"/>\n", left, top,
                       top + plot_h);
    out += fmt::format("<line class=\"axis\" x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#000000\"/>\n", left,
                       top + plot_h, left + plot_w);
    for (int i = 0; i <= 5; ++i) {
        const double v = i / 5.0;
        out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" font-size=\"10\" text-anchor=\"end\">{:.1f}</text>\n", left - 6,
                           y_of(v) + 3, v);
    }

    int x = left + group_gap / 2;
    for (const auto& [speaker, list] : groups) {
        const int group_start = x;
        for (const auto* s : list) {
            const double y = y_of(s->score);
            out += fmt::format("<rect class=\"bar\" x=\"{}\" y=\"{:.2f}\" width=\"{}\" height=\"{:.2f}\" fill=\"{}\"/>\n", x,
                               y, bar_w, top + plot_h - y, s->flagged ? "#d62728" : "#1f77b4");
            out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"8\" text-anchor=\"middle\">{:03d}</text>\n",
                               x + bar_w / 2, top + plot_h + 12, s->utterance_index);
            x += bar_w + bar_gap;
        }
        out += fmt::format("<text class=\"group-label\" x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                           (group_start + x - bar_gap) / 2, top + plot_h + 32, svg::escape(speaker));
        x += group_gap;
    }

    out += fmt::format("<line class=\"threshold\" x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#ff7f0e\" "
                       "stroke-dasharray=\"6 4\"/>\n",
                       left, y_of(threshold), left + plot_w, y_of(threshold));
    out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" font-size=\"10\" text-anchor=\"end\" fill=\"#ff7f0e\">threshold {:.2f}</text>\n",
                       left + plot_w, y_of(threshold) - 4, threshold);
    out += "</svg>\n";
    return out;
}

} // namespace commscore
