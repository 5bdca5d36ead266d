#include "cexdex/charts.hpp"

#include "cexdex/calendar.hpp"
#include "cexdex/decimal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cexdex::charts {

namespace {

constexpr double kWidth = 640, kHeight = 360, kLeft = 70, kRight = 20, kTop = 30, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string fmt(double v) {
  // Two decimals keep the files small; coordinates need no more.
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << v;
  return ss.str();
}

std::string escape(const std::string& s) {
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

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

Frame frame(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  return Frame{x0, x1, y0 - pad, y1 + pad};
}

void open_svg(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << escape(title)
      << "</text>\n";
}

void axes(std::ostringstream& out, const Frame& f, const std::string& x_label, const std::string& y_label) {
  out << "<g stroke=\"#333\">\n";
  out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kHeight - kBottom) << "\" x2=\"" << fmt(kWidth - kRight)
      << "\" y2=\"" << fmt(kHeight - kBottom) << "\"/>\n";
  out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
      << fmt(kHeight - kBottom) << "\"/>\n";
  out << "</g>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    out << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(f.py(y) + 4) << "\" text-anchor=\"end\">"
        << format_double(std::round(y * 1e6) / 1e6) << "</text>\n";
  }
  out << "<text x=\"" << fmt((kLeft + kWidth - kRight) / 2) << "\" y=\"" << fmt(kHeight - 12)
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  out << "<text x=\"14\" y=\"" << fmt((kTop + kHeight - kBottom) / 2) << "\" transform=\"rotate(-90 14 "
      << fmt((kTop + kHeight - kBottom) / 2) << ")\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
}

std::string polyline(const Frame& f, const std::vector<std::pair<double, double>>& pts, const char* color) {
  std::ostringstream out;
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out << (i ? " " : "") << fmt(f.px(pts[i].first)) << "," << fmt(f.py(pts[i].second));
  }
  out << "\"/>\n";
  return out.str();
}

}  // namespace

std::string median_gr_chart(const horizon::MedianCurve& curve, const markout::MarkoutGrid& grid,
                            std::optional<double> t_star_s) {
  const auto offsets = grid.offsets();
  double lo = *std::min_element(curve.q25.begin(), curve.q25.end());
  double hi = *std::max_element(curve.q75.begin(), curve.q75.end());
  const Frame f = frame(offsets.front(), offsets.back(), lo * 1e4, hi * 1e4);
  std::ostringstream out;
  open_svg(out, curve.searcher_label + " (n=" + std::to_string(curve.n_trades) + ")");
  axes(out, f, "seconds after slot time", "gross return (bps)");
  out << "<polygon fill=\"#1f77b4\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    out << (i ? " " : "") << fmt(f.px(offsets[i])) << "," << fmt(f.py(curve.q75[i] * 1e4));
  }
  for (std::size_t i = offsets.size(); i-- > 0;) {
    out << " " << fmt(f.px(offsets[i])) << "," << fmt(f.py(curve.q25[i] * 1e4));
  }
  out << "\"/>\n";
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < offsets.size(); ++i) pts.emplace_back(offsets[i], curve.median[i] * 1e4);
  out << polyline(f, pts, "black");
  if (t_star_s) {
    if (auto idx = grid.index_of(*t_star_s)) {
      out << "<circle cx=\"" << fmt(f.px(*t_star_s)) << "\" cy=\"" << fmt(f.py(curve.median[*idx] * 1e4))
          << "\" r=\"4\" fill=\"#d62728\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string cumulative_ev_chart(const std::map<std::string, std::vector<estimate::EvBucket>>& series) {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool any = false;
  for (const auto& [label, buckets] : series) {
    for (const auto& b : buckets) {
      const auto x = static_cast<double>(b.start_day);
      x0 = any ? std::min(x0, x) : x;
      x1 = any ? std::max(x1, x) : x;
      y0 = std::min(y0, b.cumulative_ev_usd);
      y1 = std::max(y1, b.cumulative_ev_usd);
      any = true;
    }
  }
  const Frame f = frame(x0, x1, y0, y1);
  std::ostringstream out;
  open_svg(out, "Cumulative extracted value");
  axes(out, f, any ? iso_date(static_cast<std::int64_t>(x0)) + " .. " + iso_date(static_cast<std::int64_t>(x1)) : "",
       "USD");
  std::size_t k = 0;
  for (const auto& [label, buckets] : series) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& b : buckets) pts.emplace_back(static_cast<double>(b.start_day), b.cumulative_ev_usd);
    const char* color = kPalette[k % std::size(kPalette)];
    out << polyline(f, pts, color);
    out << "<text x=\"" << fmt(kLeft + 8) << "\" y=\"" << fmt(kTop + 12 + 12.0 * static_cast<double>(k))
        << "\" fill=\"" << color << "\">" << escape(label) << "</text>\n";
    ++k;
  }
  out << "</svg>\n";
  return out.str();
}

std::string hhi_chart(const std::string& title, std::int64_t first_day,
                      const std::vector<std::optional<double>>& hhi) {
  const Frame f = frame(0.0, static_cast<double>(hhi.size() > 1 ? hhi.size() - 1 : 1), 0.0, 1.0);
  std::ostringstream out;
  open_svg(out, title);
  axes(out, f, "days from " + iso_date(first_day), "HHI");
  std::vector<std::pair<double, double>> run;
  auto flush = [&] {
    if (!run.empty()) out << polyline(f, run, kPalette[0]);
    run.clear();
  };
  for (std::size_t d = 0; d < hhi.size(); ++d) {
    if (hhi[d]) {
      run.emplace_back(static_cast<double>(d), *hhi[d]);
    } else {
      flush();
    }
  }
  flush();
  out << "</svg>\n";
  return out.str();
}

std::string integration_heatmap(const market::IntegrationMatrix& matrix) {
  const double cell_w = 70, cell_h = 18, left = 150, top = 60;
  const double width = left + cell_w * static_cast<double>(matrix.builders.size()) + 20;
  const double height = top + cell_h * static_cast<double>(matrix.rows.size()) + 20;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(width / 2) << "\" y=\"16\" text-anchor=\"middle\" font-size=\"13\">"
      << "Searcher volume share by builder</text>\n";
  for (std::size_t c = 0; c < matrix.builders.size(); ++c) {
    out << "<text x=\"" << fmt(left + cell_w * (static_cast<double>(c) + 0.5)) << "\" y=\"" << fmt(top - 6)
        << "\" text-anchor=\"middle\">" << escape(matrix.builders[c]) << "</text>\n";
  }
  std::size_t r = 0;
  for (const auto& [searcher, row] : matrix.rows) {
    const double y = top + cell_h * static_cast<double>(r);
    out << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(y + 13) << "\" text-anchor=\"end\">" << escape(searcher)
        << "</text>\n";
    for (std::size_t c = 0; c < matrix.builders.size(); ++c) {
      const double share = matrix.cell(searcher, matrix.builders[c]);
      out << "<rect x=\"" << fmt(left + cell_w * static_cast<double>(c)) << "\" y=\"" << fmt(y) << "\" width=\""
          << fmt(cell_w) << "\" height=\"" << fmt(cell_h) << "\" fill=\"#08306b\" fill-opacity=\"" << fmt(share)
          << "\" stroke=\"#ddd\"/>\n";
    }
    ++r;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace cexdex::charts
