#include "credit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "credit/error.hpp"

namespace credit {

namespace {

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
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

} // namespace

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) return kNaN;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ImportanceReport build_importance_report(std::span<const BoostedModel> models, ImportanceKind kind) {
    if (models.size() < 2) throw Error(ErrorCode::InvalidConfig, "importance report needs at least two fold models");
    for (const auto& m : models) {
        if (m.feature_names != models.front().feature_names) {
            throw Error(ErrorCode::ColumnSetMismatch, "fold models were trained on different column sets");
        }
    }
    ImportanceReport report;
    report.kind = kind;
    std::set<std::string> used;
    for (const auto& m : models) {
        report.per_fold.push_back(importance(m, kind));
        for (const auto& [name, v] : report.per_fold.back()) used.insert(name);
    }

    std::vector<std::map<std::string, double>> normalized;
    for (const auto& fold : report.per_fold) normalized.push_back(normalize_importance(fold));

    std::vector<std::pair<std::string, double>> shares;
    double grand = 0.0;
    for (const auto& name : used) {
        std::vector<double> values;
        std::vector<double> norm;
        for (std::size_t f = 0; f < models.size(); ++f) {
            auto it = report.per_fold[f].find(name);
            values.push_back(it == report.per_fold[f].end() ? 0.0 : it->second);
            auto jt = normalized[f].find(name);
            norm.push_back(jt == normalized[f].end() ? 0.0 : jt->second);
        }
        std::sort(values.begin(), values.end());
        report.columns.push_back({name, values.front(), quantile_sorted(values, 0.25), quantile_sorted(values, 0.5),
                                  quantile_sorted(values, 0.75), values.back()});
        // Sorted before summing so fold order cannot change the total.
        std::sort(norm.begin(), norm.end());
        double total = 0.0;
        for (double v : norm) total += v;
        shares.emplace_back(name, total);
        grand += total;
    }
    std::stable_sort(shares.begin(), shares.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    double running = 0.0;
    for (const auto& [name, v] : shares) {
        running += v;
        report.cumulative.emplace_back(name, grand > 0.0 ? running / grand : 0.0);
    }
    return report;
}

Json to_json(const ImportanceReport& report) {
    Json doc;
    doc["kind"] = to_string(report.kind);
    doc["folds"] = Json::array();
    for (const auto& fold : report.per_fold) {
        Json j = Json::object();
        for (const auto& [name, v] : fold) j[name] = v;
        doc["folds"].push_back(std::move(j));
    }
    doc["columns"] = Json::array();
    for (const auto& c : report.columns) {
        Json j;
        j["column"] = c.column;
        j["min"] = c.min;
        j["q1"] = c.q1;
        j["median"] = c.median;
        j["q3"] = c.q3;
        j["max"] = c.max;
        doc["columns"].push_back(std::move(j));
    }
    doc["cumulative"] = Json::array();
    for (const auto& [name, share] : report.cumulative) doc["cumulative"].push_back(Json::array({name, share}));
    return doc;
}

std::string summary_to_csv(const ImportanceReport& report) {
    std::string out = "column,min,q1,median,q3,max\n";
    for (const auto& c : report.columns) {
        out += c.column + "," + format_g17(c.min) + "," + format_g17(c.q1) + "," + format_g17(c.median) + "," +
               format_g17(c.q3) + "," + format_g17(c.max) + "\n";
    }
    return out;
}

std::string render_box_plot(const ImportanceReport& report, std::size_t top_n) {
    if (report.columns.empty()) throw Error(ErrorCode::EmptyReport, "importance report has no columns");
    if (top_n == 0) throw Error(ErrorCode::InvalidConfig, "top_n must be >= 1");

    std::vector<const ColumnSummary*> ranked;
    for (const auto& c : report.columns) ranked.push_back(&c);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const ColumnSummary* a, const ColumnSummary* b) { return a->median > b->median; });
    ranked.resize(std::min(top_n, ranked.size()));

    double x_max = 0.0;
    for (const auto* c : ranked) x_max = std::max(x_max, c->max);
    if (!(x_max > 0.0)) x_max = 1.0;

    constexpr double kLeft = 220.0;
    constexpr double kPlotWidth = 520.0;
    constexpr double kTop = 50.0;
    constexpr double kRow = 28.0;
    const double height = kTop + kRow * static_cast<double>(ranked.size()) + 60.0;
    const double width = kLeft + kPlotWidth + 40.0;
    const auto sx = [&](double v) { return kLeft + kPlotWidth * v / x_max; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width) + "\" height=\"" + fixed(height) +
           "\" viewBox=\"0 0 " + fixed(width) + " " + fixed(height) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + fixed(width) + "\" height=\"" + fixed(height) + "\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fixed(width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
           "Feature importance (" + std::string(to_string(report.kind)) + ") across " +
           std::to_string(report.per_fold.size()) + " folds</text>\n";

    const double axis_y = kTop + kRow * static_cast<double>(ranked.size()) + 6.0;
    svg += "<line class=\"axis\" x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(axis_y) + "\" x2=\"" + fixed(kLeft + kPlotWidth) +
           "\" y2=\"" + fixed(axis_y) + "\" stroke=\"black\"/>\n";
    svg += "<line class=\"axis\" x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(kTop - 6.0) + "\" x2=\"" + fixed(kLeft) +
           "\" y2=\"" + fixed(axis_y) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = x_max * t / 4.0;
        svg += "<text x=\"" + fixed(sx(v)) + "\" y=\"" + fixed(axis_y + 16.0) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + format_shortest(std::stod(fixed(v))) +
               "</text>\n";
    }
    svg += "<text x=\"" + fixed(kLeft + kPlotWidth / 2) + "\" y=\"" + fixed(axis_y + 36.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + std::string(to_string(report.kind)) +
           "</text>\n";
    svg += "<text x=\"14\" y=\"" + fixed(kTop + kRow * static_cast<double>(ranked.size()) / 2) +
           "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 " +
           fixed(kTop + kRow * static_cast<double>(ranked.size()) / 2) + ")\" text-anchor=\"middle\">feature</text>\n";

    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const ColumnSummary& c = *ranked[i];
        const double cy = kTop + kRow * static_cast<double>(i) + kRow / 2;
        const double box_top = cy - 8.0;
        svg += "<g class=\"feature\" data-column=\"" + xml_escape(c.column) + "\">\n";
        svg += "  <text x=\"" + fixed(kLeft - 8.0) + "\" y=\"" + fixed(cy + 4.0) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + xml_escape(c.column) + "</text>\n";
        svg += "  <line class=\"whisker\" x1=\"" + fixed(sx(c.min)) + "\" y1=\"" + fixed(cy) + "\" x2=\"" + fixed(sx(c.max)) +
               "\" y2=\"" + fixed(cy) + "\" stroke=\"black\"/>\n";
        for (double v : {c.min, c.max}) {
            svg += "  <line class=\"cap\" x1=\"" + fixed(sx(v)) + "\" y1=\"" + fixed(cy - 5.0) + "\" x2=\"" + fixed(sx(v)) +
                   "\" y2=\"" + fixed(cy + 5.0) + "\" stroke=\"black\"/>\n";
        }
        svg += "  <rect class=\"box\" x=\"" + fixed(sx(c.q1)) + "\" y=\"" + fixed(box_top) + "\" width=\"" +
               fixed(sx(c.q3) - sx(c.q1)) + "\" height=\"16.00\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
        svg += "  <line class=\"median\" x1=\"" + fixed(sx(c.median)) + "\" y1=\"" + fixed(box_top) + "\" x2=\"" +
               fixed(sx(c.median)) + "\" y2=\"" + fixed(box_top + 16.0) + "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace credit
