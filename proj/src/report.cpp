#include "lobtrend/report.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lobtrend/csv.hpp"
#include "lobtrend/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lobtrend::report {

namespace {

const char* kClassNames[3] = {"D", "S", "U"};

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name)
        out += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace

std::string pr_curve_svg(const std::vector<std::pair<std::string, metrics::PrCurve>>& curves,
                         const std::string& title) {
    constexpr int W = 640, H = 480, M = 60;
    const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";

    auto px = [&](double recall) { return M + recall * (W - 2 * M); };
    auto py = [&](double precision) { return H - M - precision * (H - 2 * M); };

    // Axes with 0..1 ticks.
    svg << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\""
        << H - M << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << M << "\" y2=\"" << M
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double v = i / 5.0;
        svg << "<text x=\"" << px(v) << "\" y=\"" << H - M + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(v) << "</text>\n";
        svg << "<text x=\"" << M - 8 << "\" y=\"" << py(v) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(v) << "</text>\n";
    }
    svg << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">recall</text>\n";
    svg << "<text x=\"16\" y=\"" << H / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " << H / 2
        << ")\">precision</text>\n";

    size_t color = 0;
    int legend_y = M;
    for (const auto& [name, curve] : curves) {
        const char* stroke = palette[color % 6];
        ++color;
        std::ostringstream pts;
        for (const auto& p : curve.points)
            pts << px(p.recall) << "," << py(p.precision) << " ";
        svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\""
            << pts.str() << "\"/>\n";
        svg << "<text x=\"" << W - M - 4 << "\" y=\"" << legend_y
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << stroke << "\">" << name
            << (curve.degenerate ? " (degenerate)" : "") << "</text>\n";
        legend_y += 16;
    }
    svg << "</svg>\n";
    return svg.str();
}

void experiment_report(const std::string& dir, const std::vector<EvalCell>& cells) {
    if (cells.empty()) throw DataError("experiment_report: no evaluation cells supplied");
    for (const auto& c : cells) {
        if (c.truth.empty()) throw DataError("experiment_report: cell '" + c.model_name +
                                             "' has no truth labels");
        if (c.truth.size() != c.predictions.size())
            throw DataError("experiment_report: cell '" + c.model_name +
                            "' prediction count mismatch");
        if (c.probabilities.size() != 3 * c.truth.size())
            throw DataError("experiment_report: cell '" + c.model_name +
                            "' probability matrix mismatch");
    }
    fs::create_directories(dir);

    // F1 table, one row per (model, horizon).
    {
        std::ostringstream out;
        out << "model,horizon,macro_f1,weighted_f1,theta,samples\n";
        for (const auto& c : cells) {
            out << c.model_name << ',' << c.horizon << ','
                << csv::format_double(metrics::f1_macro(c.truth, c.predictions)) << ','
                << csv::format_double(metrics::f1_weighted(c.truth, c.predictions)) << ','
                << csv::format_double(c.theta) << ',' << c.truth.size() << '\n';
        }
        csv::write_text_file(dir + "/f1_table.csv", out.str());
    }

    // Confusion matrices and class distributions.
    {
        std::ostringstream dist;
        dist << "model,horizon,frac_D,frac_S,frac_U\n";
        for (const auto& c : cells) {
            auto cm = metrics::confusion(c.truth, c.predictions);
            std::ostringstream out;
            out << "true\\pred,D,S,U\n";
            for (int t = 0; t < 3; ++t) {
                out << kClassNames[t];
                for (int p = 0; p < 3; ++p) out << ',' << cm.counts[t][p];
                out << '\n';
            }
            csv::write_text_file(dir + "/confusion_" + sanitize(c.model_name) + "_h" +
                                     std::to_string(c.horizon) + ".csv",
                                 out.str());

            const double n = static_cast<double>(c.truth.size());
            dist << c.model_name << ',' << c.horizon;
            for (int cls = 0; cls < 3; ++cls)
                dist << ',' << csv::format_double(static_cast<double>(cm.true_count(cls)) / n);
            dist << '\n';
        }
        csv::write_text_file(dir + "/class_distribution.csv", dist.str());
    }

    // PR curves: one SVG per (horizon, class), one polyline per model.
    std::set<int> horizons;
    for (const auto& c : cells) horizons.insert(c.horizon);
    for (int h : horizons) {
        for (int cls = 0; cls < 3; ++cls) {
            std::vector<std::pair<std::string, metrics::PrCurve>> curves;
            for (const auto& c : cells) {
                if (c.horizon != h) continue;
                std::vector<double> scores(c.truth.size());
                for (size_t i = 0; i < c.truth.size(); ++i)
                    scores[i] = c.probabilities[3 * i + static_cast<size_t>(cls)];
                curves.emplace_back(c.model_name, metrics::pr_curve(c.truth, scores, cls));
            }
            csv::write_text_file(dir + "/pr_h" + std::to_string(h) + "_" + kClassNames[cls] +
                                     ".svg",
                                 pr_curve_svg(curves, "PR, class " +
                                                          std::string(kClassNames[cls]) +
                                                          ", h=" + std::to_string(h)));
        }
    }

    // Machine-readable summary.
    json summary;
    for (const auto& c : cells) {
        json cell;
        cell["model"] = c.model_name;
        cell["horizon"] = c.horizon;
        cell["theta"] = c.theta;
        cell["macro_f1"] = metrics::f1_macro(c.truth, c.predictions);
        cell["weighted_f1"] = metrics::f1_weighted(c.truth, c.predictions);
        cell["samples"] = c.truth.size();
        summary["cells"].push_back(cell);
    }
    csv::write_text_file(dir + "/report.json", summary.dump(2) + "\n");
}

} // namespace lobtrend::report
