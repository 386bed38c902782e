// Copyright 2025 The qscene developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * CSV table reading and minimal self-contained SVG line plots for the
 * `report` command. No simulation happens here.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "util.hpp"

namespace qscene {

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows; // NaN for non-numeric cells

    [[nodiscard]] int column_index(const std::string &name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) {
                return static_cast<int>(i);
            }
        }
        return -1;
    }

    [[nodiscard]] std::vector<double> column(const std::string &name) const {
        const int idx = column_index(name);
        QSCENE_REQUIRE(idx >= 0, "CSV has no column '" + name + "'");
        std::vector<double> values;
        values.reserve(rows.size());
        for (const auto &row : rows) {
            values.push_back(row[static_cast<std::size_t>(idx)]);
        }
        return values;
    }
};

inline CsvTable read_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("empty CSV " + path);
    }
    std::istringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) {
        table.columns.push_back(cell);
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream row_in(line);
        std::vector<double> row;
        while (std::getline(row_in, cell, ',')) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                row.push_back(used == cell.size()
                                  ? v
                                  : std::numeric_limits<double>::quiet_NaN());
            } catch (const std::exception &) {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
        row.resize(table.columns.size(),
                   std::numeric_limits<double>::quiet_NaN());
        table.rows.push_back(std::move(row));
    }
    return table;
}

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/**
 * @brief Write a fixed-size standalone SVG line chart (820x500) with axes,
 * tick labels, and a legend. Non-finite points are skipped.
 */
inline void write_svg_plot(const std::string &path, const std::string &title,
                           const std::string &x_label,
                           const std::string &y_label,
                           const std::vector<PlotSeries> &series) {
    QSCENE_REQUIRE(!series.empty(), "plot needs at least one series");
    static const char *kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};
    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -x_min;
    double y_min = x_min;
    double y_max = -x_min;
    for (const PlotSeries &s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                continue;
            }
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            y_min = std::min(y_min, s.y[i]);
            y_max = std::max(y_max, s.y[i]);
        }
    }
    if (!std::isfinite(x_min) || x_max == x_min) {
        x_min -= 0.5;
        x_max = x_min + 1.0;
    }
    if (!std::isfinite(y_min) || y_max == y_min) {
        y_min -= 0.5;
        y_max = y_min + 1.0;
    }
    const double width = 820;
    const double height = 500;
    const double left = 70;
    const double right = width - 30;
    const double top = 45;
    const double bottom = height - 55;
    auto sx = [&](double x) {
        return left + (x - x_min) / (x_max - x_min) * (right - left);
    };
    auto sy = [&](double y) {
        return bottom - (y - y_min) / (y_max - y_min) * (bottom - top);
    };

    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title
        << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";

    for (int t = 0; t <= 5; ++t) {
        const double fx = x_min + (x_max - x_min) * t / 5.0;
        const double fy = y_min + (y_max - y_min) * t / 5.0;
        char buf[32];
        out << "<line x1=\"" << sx(fx) << "\" y1=\"" << bottom << "\" x2=\""
            << sx(fx) << "\" y2=\"" << bottom + 5 << "\" stroke=\"black\"/>\n";
        std::snprintf(buf, sizeof(buf), "%.4g", fx);
        out << "<text x=\"" << sx(fx) << "\" y=\"" << bottom + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"11\">"
            << buf << "</text>\n";
        out << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(fy) << "\" x2=\""
            << left << "\" y2=\"" << sy(fy) << "\" stroke=\"black\"/>\n";
        std::snprintf(buf, sizeof(buf), "%.4g", fy);
        out << "<text x=\"" << left - 9 << "\" y=\"" << sy(fy) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"11\">"
            << buf << "</text>\n";
    }
    out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\">"
        << x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << (top + bottom) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\" transform=\"rotate(-90 18 "
        << (top + bottom) / 2 << ")\">" << y_label << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const char *color = kColors[k % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t i = 0; i < series[k].x.size(); ++i) {
            if (!std::isfinite(series[k].x[i]) ||
                !std::isfinite(series[k].y[i])) {
                continue;
            }
            out << sx(series[k].x[i]) << "," << sy(series[k].y[i]) << " ";
        }
        out << "\"/>\n";
        const double ly = top + 18.0 * static_cast<double>(k);
        out << "<line x1=\"" << right - 150 << "\" y1=\"" << ly << "\" x2=\""
            << right - 125 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << right - 118 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">"
            << series[k].label << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace qscene
