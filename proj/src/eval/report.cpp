#include "threadforge/eval/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "threadforge/common/error.hpp"

namespace threadforge::eval {

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_header(std::ostream& out, const char* kind, std::uint64_t seed, const std::string& columns) {
    out << "# threadforge " << kind << "\n# seed=" << seed << '\n' << columns << '\n';
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return out;
}

double parse_double(const std::string& text, const std::string& where) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw DataError(where + ": '" + text + "' is not a number");
    return v;
}

}  // namespace

std::string format_delay(double hours) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, hours);
    return ec == std::errc{} ? std::string(buf, ptr) : fixed6(hours);
}

void write_results(std::ostream& out, const std::vector<LoocvResult>& results, std::uint64_t seed) {
    write_header(out, "results", seed, "variant\tmodel\tfold\taccuracy\tmicro_f1\tmacro_f1");
    auto row = [&](const LoocvResult& r, const std::string& fold, const Metrics& m) {
        out << to_string(r.variant) << '\t' << models::to_string(r.model) << '\t' << fold << '\t' << fixed6(m.accuracy)
            << '\t' << fixed6(m.micro_f1) << '\t' << fixed6(m.macro_f1) << '\n';
    };
    for (const auto& r : results) {
        for (const auto& f : r.folds) row(r, f.test_event, f.metrics);
        row(r, "aggregate", r.aggregate);
    }
}

void write_predictions(std::ostream& out, const std::vector<LoocvResult>& results, LabelScheme scheme,
                       std::uint64_t seed) {
    write_header(out, "predictions", seed, "variant\tmodel\tfold\tthread_id\ttruth\tprediction");
    for (const auto& r : results) {
        for (const auto& f : r.folds) {
            for (std::size_t i = 0; i < f.thread_ids.size(); ++i) {
                out << to_string(r.variant) << '\t' << models::to_string(r.model) << '\t' << f.test_event << '\t'
                    << f.thread_ids[i] << '\t' << to_string(label_from_index(scheme, f.truth[i]).value) << '\t'
                    << to_string(label_from_index(scheme, f.preds[i]).value) << '\n';
            }
        }
    }
}

void write_curve(std::ostream& out, const std::vector<EarlyResult>& results, std::uint64_t seed) {
    write_header(out, "curve", seed, "variant\tmodel\tfold\tdelay_hours\taccuracy\tmacro_f1");
    for (const auto& r : results) {
        for (const auto& p : r.points) {
            out << to_string(r.variant) << '\t' << models::to_string(r.model) << '\t' << p.fold << '\t'
                << format_delay(p.delay_hours) << '\t' << fixed6(p.metrics.accuracy) << '\t'
                << fixed6(p.metrics.macro_f1) << '\n';
        }
    }
}

std::vector<CurveRow> read_curve(std::istream& in, const std::string& source_name) {
    std::vector<CurveRow> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.starts_with('#')) continue;
        const auto where = source_name + ":" + std::to_string(line_no);
        const auto cells = split_tabs(line);
        if (!header_seen) {
            if (line != "variant\tmodel\tfold\tdelay_hours\taccuracy\tmacro_f1") {
                throw DataError(where + ": not a curve table header");
            }
            header_seen = true;
            continue;
        }
        if (cells.size() != 6) throw DataError(where + ": expected 6 columns, found " + std::to_string(cells.size()));
        rows.push_back({cells[0], cells[1], cells[2], parse_double(cells[3], where), parse_double(cells[4], where),
                        parse_double(cells[5], where)});
    }
    if (!header_seen) throw DataError(source_name + ": empty curve table");
    return rows;
}

std::string render_curve_svg(const std::vector<CurveRow>& rows, const std::string& title) {
    std::map<std::pair<std::string, std::string>, std::vector<const CurveRow*>> series;
    std::vector<double> delays;
    for (const auto& r : rows) {
        if (r.fold != "aggregate") continue;
        series[{r.variant, r.model}].push_back(&r);
        delays.push_back(r.delay_hours);
    }
    std::sort(delays.begin(), delays.end());
    delays.erase(std::unique(delays.begin(), delays.end()), delays.end());
    if (series.empty()) throw DataError("curve table has no aggregate rows to plot");

    const double width = 720, height = 420, left = 60, right = 170, top = 40, bottom = 50;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    auto x_of = [&](double delay) {
        const auto idx = std::lower_bound(delays.begin(), delays.end(), delay) - delays.begin();
        return delays.size() < 2 ? left + plot_w / 2
                                 : left + plot_w * static_cast<double>(idx) / static_cast<double>(delays.size() - 1);
    };
    auto y_of = [&](double acc) { return top + plot_h * (1.0 - acc); };
    auto escape = [](const std::string& s) {
        std::string o;
        for (char c : s) {
            if (c == '<') o += "&lt;";
            else if (c == '>') o += "&gt;";
            else if (c == '&') o += "&amp;";
            else o += c;
        }
        return o;
    };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << left << "\" y=\"22\" font-size=\"14\">" << escape(title) << "</text>\n";
    for (int i = 0; i <= 10; i += 2) {
        const double acc = i / 10.0;
        svg << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << y_of(acc) << "\" y2=\""
            << y_of(acc) << "\" stroke=\"#ddd\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << y_of(acc) + 4 << "\" text-anchor=\"end\">" << fixed6(acc).substr(0, 3)
            << "</text>\n";
    }
    for (double d : delays) {
        svg << "<text x=\"" << x_of(d) << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">"
            << format_delay(d) << "</text>\n";
    }
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\">delay (hours)</text>\n";
    svg << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 16 " << top + plot_h / 2
        << ")\" text-anchor=\"middle\">accuracy</text>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"#333\"/>\n";

    std::size_t color = 0;
    for (auto& [key, points] : series) {
        std::sort(points.begin(), points.end(),
                  [](const CurveRow* a, const CurveRow* b) { return a->delay_hours < b->delay_hours; });
        const char* stroke = palette[color % std::size(palette)];
        svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" points=\"";
        for (const CurveRow* p : points) svg << x_of(p->delay_hours) << ',' << y_of(p->accuracy) << ' ';
        svg << "\"/>\n";
        const double ly = top + 14 + 18 * static_cast<double>(color);
        svg << "<line x1=\"" << left + plot_w + 12 << "\" x2=\"" << left + plot_w + 32 << "\" y1=\"" << ly
            << "\" y2=\"" << ly << "\" stroke=\"" << stroke << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << left + plot_w + 38 << "\" y=\"" << ly + 4 << "\">" << escape(key.first + " " + key.second)
            << "</text>\n";
        ++color;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace threadforge::eval
