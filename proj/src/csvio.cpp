#include "fraccal/csvio.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fraccal/errors.hpp"

namespace fraccal {

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::ConfigError, "cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.flush())
            throw Error(ErrorCode::ConfigError, "write failed for " + tmp.string());
    }
    fs::rename(tmp, p);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string CsvTable::to_string() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    return out.str();
}

namespace {

std::string fmt_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

}  // namespace

std::string SvgChart::render(const std::vector<double>& xs, const std::vector<double>& ys) const {
    const double width = 640, height = 440;
    const double ml = 80, mr = 24, mt = 40, mb = 56;  // margins
    const double pw = width - ml - mr, ph = height - mt - mb;

    auto tx = [&](double v) { return logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return logy ? std::log10(v) : v; };

    std::vector<double> txs, tys;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double a = tx(xs[i]), b = ty(ys[i]);
        if (std::isfinite(a) && std::isfinite(b)) {
            txs.push_back(a);
            tys.push_back(b);
        }
    }

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";

    if (txs.size() >= 2) {
        double xmin = txs[0], xmax = txs[0], ymin = tys[0], ymax = tys[0];
        for (std::size_t i = 0; i < txs.size(); ++i) {
            xmin = std::min(xmin, txs[i]);
            xmax = std::max(xmax, txs[i]);
            ymin = std::min(ymin, tys[i]);
            ymax = std::max(ymax, tys[i]);
        }
        if (xmax == xmin) xmax = xmin + 1;
        if (ymax == ymin) ymax = ymin + 1;
        auto px = [&](double v) { return ml + pw * (v - xmin) / (xmax - xmin); };
        auto py = [&](double v) { return mt + ph * (1.0 - (v - ymin) / (ymax - ymin)); };

        svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
            << mt + ph << "\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
            << mt + ph << "\" stroke=\"black\"/>\n";

        for (int t = 0; t <= 4; ++t) {
            double fx = xmin + (xmax - xmin) * t / 4.0;
            double fy = ymin + (ymax - ymin) * t / 4.0;
            double vx = logx ? std::pow(10.0, fx) : fx;
            double vy = logy ? std::pow(10.0, fy) : fy;
            svg << "<text x=\"" << fmt_coord(px(fx)) << "\" y=\"" << fmt_coord(mt + ph + 18)
                << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_tick(vx) << "</text>\n";
            svg << "<text x=\"" << fmt_coord(ml - 6) << "\" y=\"" << fmt_coord(py(fy) + 4)
                << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_tick(vy) << "</text>\n";
        }
        svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < txs.size(); ++i) {
            if (i) svg << ' ';
            svg << fmt_coord(px(txs[i])) << ',' << fmt_coord(py(tys[i]));
        }
        svg << "\"/>\n";
        for (std::size_t i = 0; i < txs.size(); ++i)
            svg << "<circle cx=\"" << fmt_coord(px(txs[i])) << "\" cy=\"" << fmt_coord(py(tys[i]))
                << "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";
    }

    svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
    svg << "<text x=\"18\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " << mt + ph / 2
        << ")\">" << ylabel << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace fraccal
