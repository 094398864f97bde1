#ifndef THERMOFUSE_CLI_CHART_HPP
#define THERMOFUSE_CLI_CHART_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "thermofuse/core/image.hpp"

namespace thermofuse::cli {

namespace detail {

// 5x7 bitmap font, enough for axis labels and legends
inline const std::map<char, std::array<const char*, 7>>& glyphs() {
    static const std::map<char, std::array<const char*, 7>> g = {
        {'0', {" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "}},
        {'1', {"  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}},
        {'2', {" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"}},
        {'3', {" ### ", "#   #", "    #", "  ## ", "    #", "#   #", " ### "}},
        {'4', {"   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "}},
        {'5', {"#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "}},
        {'6', {" ### ", "#    ", "#    ", "#### ", "#   #", "#   #", " ### "}},
        {'7', {"#####", "    #", "   # ", "  #  ", "  #  ", "  #  ", "  #  "}},
        {'8', {" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "}},
        {'9', {" ### ", "#   #", "#   #", " ####", "    #", "    #", " ### "}},
        {'.', {"     ", "     ", "     ", "     ", "     ", " ##  ", " ##  "}},
        {'%', {"##  #", "##  #", "   # ", "  #  ", " #   ", "#  ##", "#  ##"}},
        {'-', {"     ", "     ", "     ", "#####", "     ", "     ", "     "}},
        {'_', {"     ", "     ", "     ", "     ", "     ", "     ", "#####"}},
        {' ', {"     ", "     ", "     ", "     ", "     ", "     ", "     "}},
        {'A', {" ### ", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}},
        {'B', {"#### ", "#   #", "#   #", "#### ", "#   #", "#   #", "#### "}},
        {'C', {" ### ", "#   #", "#    ", "#    ", "#    ", "#   #", " ### "}},
        {'D', {"#### ", "#   #", "#   #", "#   #", "#   #", "#   #", "#### "}},
        {'E', {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#####"}},
        {'F', {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#    "}},
        {'G', {" ### ", "#   #", "#    ", "# ###", "#   #", "#   #", " ### "}},
        {'H', {"#   #", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}},
        {'I', {" ### ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}},
        {'J', {"  ###", "   # ", "   # ", "   # ", "   # ", "#  # ", " ##  "}},
        {'K', {"#   #", "#  # ", "# #  ", "##   ", "# #  ", "#  # ", "#   #"}},
        {'L', {"#    ", "#    ", "#    ", "#    ", "#    ", "#    ", "#####"}},
        {'M', {"#   #", "## ##", "# # #", "# # #", "#   #", "#   #", "#   #"}},
        {'N', {"#   #", "##  #", "# # #", "#  ##", "#   #", "#   #", "#   #"}},
        {'O', {" ### ", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}},
        {'P', {"#### ", "#   #", "#   #", "#### ", "#    ", "#    ", "#    "}},
        {'Q', {" ### ", "#   #", "#   #", "#   #", "# # #", "#  # ", " ## #"}},
        {'R', {"#### ", "#   #", "#   #", "#### ", "# #  ", "#  # ", "#   #"}},
        {'S', {" ####", "#    ", "#    ", " ### ", "    #", "    #", "#### "}},
        {'T', {"#####", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  "}},
        {'U', {"#   #", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}},
        {'V', {"#   #", "#   #", "#   #", "#   #", "#   #", " # # ", "  #  "}},
        {'W', {"#   #", "#   #", "#   #", "# # #", "# # #", "## ##", "#   #"}},
        {'X', {"#   #", "#   #", " # # ", "  #  ", " # # ", "#   #", "#   #"}},
        {'Y', {"#   #", "#   #", " # # ", "  #  ", "  #  ", "  #  ", "  #  "}},
        {'Z', {"#####", "    #", "   # ", "  #  ", " #   ", "#    ", "#####"}},
    };
    return g;
}

inline void fill_rect(ImageF& img, int x0, int y0, int x1, int y1, const float rgb[3]) {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, img.width);
    y1 = std::min(y1, img.height);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            for (int c = 0; c < 3; ++c) img.at(c, y, x) = rgb[c];
}

inline void draw_text(ImageF& img, int x, int y, const std::string& text, const float rgb[3],
                      int scale = 1) {
    int cx = x;
    const auto& font = glyphs();
    for (char raw : text) {
        const char ch = char(std::toupper(static_cast<unsigned char>(raw)));
        auto it = font.find(ch);
        if (it == font.end()) {
            cx += 6 * scale;
            continue;
        }
        for (int r = 0; r < 7; ++r)
            for (int cc = 0; cc < 5; ++cc)
                if (it->second[std::size_t(r)][cc] == '#')
                    fill_rect(img, cx + cc * scale, y + r * scale, cx + (cc + 1) * scale,
                              y + (r + 1) * scale, rgb);
        cx += 6 * scale;
    }
}

inline int text_width(const std::string& text, int scale = 1) {
    return int(text.size()) * 6 * scale;
}

}  // namespace detail

struct BarChart {
    std::string title;
    std::vector<std::string> groups;            // x-axis clusters
    std::vector<std::string> series;            // bars within a cluster
    std::vector<std::vector<double>> values;    // [series][group], percent 0..100
};

// Grouped-bar accuracy chart. Pure pixel pushing — no plotting dependency.
inline ImageF render_bar_chart(const BarChart& chart, int width = 880, int height = 480) {
    const float white[3] = {1, 1, 1};
    const float black[3] = {0.1f, 0.1f, 0.12f};
    const float grid[3] = {0.85f, 0.87f, 0.9f};
    const float palette[6][3] = {{0.86f, 0.47f, 0.20f}, {0.25f, 0.50f, 0.85f},
                                 {0.22f, 0.65f, 0.36f}, {0.72f, 0.30f, 0.66f},
                                 {0.85f, 0.75f, 0.25f}, {0.35f, 0.70f, 0.70f}};
    ImageF img(3, height, width);
    detail::fill_rect(img, 0, 0, width, height, white);

    const int left = 64, right = width - 16, top = 44, bottom = height - 56;
    detail::draw_text(img, left, 14, chart.title, black, 2);

    for (int v = 0; v <= 100; v += 10) {
        const int y = bottom - (bottom - top) * v / 100;
        detail::fill_rect(img, left, y, right, y + 1, v == 0 ? black : grid);
        const std::string label = std::to_string(v);
        detail::draw_text(img, left - 10 - detail::text_width(label), y - 3, label, black);
    }
    detail::fill_rect(img, left - 1, top, left, bottom + 1, black);

    const std::size_t ng = chart.groups.size(), ns = chart.series.size();
    if (ng == 0 || ns == 0) return img;
    const double group_w = double(right - left) / double(ng);
    const double bar_w = std::max(4.0, group_w * 0.8 / double(ns));

    for (std::size_t gi = 0; gi < ng; ++gi) {
        const double gx = left + group_w * (double(gi) + 0.1);
        for (std::size_t si = 0; si < ns; ++si) {
            const double v =
                si < chart.values.size() && gi < chart.values[si].size() ? chart.values[si][gi] : 0;
            const int x0 = int(gx + bar_w * double(si));
            const int x1 = int(gx + bar_w * double(si + 1)) - 2;
            const int y0 = bottom - int((bottom - top) * std::clamp(v, 0.0, 100.0) / 100.0);
            detail::fill_rect(img, x0, y0, x1, bottom, palette[si % 6]);
            char lbl[16];
            std::snprintf(lbl, sizeof lbl, "%.1f", v);
            detail::draw_text(img, x0 + (x1 - x0 - detail::text_width(lbl)) / 2, y0 - 10, lbl,
                              black);
        }
        const int gw = detail::text_width(chart.groups[gi]);
        detail::draw_text(img, int(left + group_w * double(gi) + (group_w - gw) / 2), bottom + 10,
                          chart.groups[gi], black);
    }

    int lx = left + 8;
    for (std::size_t si = 0; si < ns; ++si) {
        detail::fill_rect(img, lx, 30, lx + 10, 40, palette[si % 6]);
        detail::draw_text(img, lx + 14, 32, chart.series[si], black);
        lx += 14 + detail::text_width(chart.series[si]) + 18;
    }
    return img;
}

}  // namespace thermofuse::cli

#endif
