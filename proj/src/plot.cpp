#include "oscerr/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "oscerr/errors.hpp"
#include "oscerr/experiment.hpp"

namespace oscerr {

namespace {

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<double> resample(const std::vector<double>& t_src, const std::vector<double>& v_src,
                             const std::vector<double>& t_dst) {
  std::vector<double> out(t_dst.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < t_dst.size(); ++i) {
    const double t = t_dst[i];
    auto it = std::lower_bound(t_src.begin(), t_src.end(), t);
    if (it == t_src.end()) continue;
    const auto k = static_cast<std::size_t>(it - t_src.begin());
    if (t_src[k] == t || k == 0) {
      if (t_src[k] == t) out[i] = v_src[k];
      continue;
    }
    const double w = (t - t_src[k - 1]) / (t_src[k] - t_src[k - 1]);
    out[i] = (1 - w) * v_src[k - 1] + w * v_src[k];
  }
  return out;
}

struct Frame {
  double x0, y0, w, h;  // pixel box
  double xmin, xmax, ymin, ymax;
  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

void axes(std::ostream& out, const Frame& f, bool log_axes) {
  out << "<rect x=\"" << num(f.x0) << "\" y=\"" << num(f.y0) << "\" width=\"" << num(f.w) << "\" height=\""
      << num(f.h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.xmin + (f.xmax - f.xmin) * i / 4.0;
    const double yv = f.ymin + (f.ymax - f.ymin) * i / 4.0;
    const std::string xl = num(log_axes ? std::pow(10.0, xv) : xv);
    const std::string yl = num(log_axes ? std::pow(10.0, yv) : yv);
    out << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(f.y0 + f.h + 14)
        << "\" font-size=\"10\" text-anchor=\"middle\">" << xl << "</text>\n";
    out << "<text x=\"" << num(f.x0 - 4) << "\" y=\"" << num(f.py(yv) + 3)
        << "\" font-size=\"10\" text-anchor=\"end\">" << yl << "</text>\n";
  }
}

void polyline(std::ostream& out, const Frame& f, const std::vector<double>& x, const std::vector<double>& y,
              const char* color, bool dashed) {
  // Thin to at most ~4 points per pixel column, keeping extremes.
  const double per_px = static_cast<double>(x.size()) / std::max(1.0, f.w);
  const std::size_t bucket = per_px > 4 ? static_cast<std::size_t>(per_px / 2) : 1;
  std::ostringstream pts;
  bool open = false;
  auto flush = [&] {
    if (!open) return;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\""
        << (dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"" << pts.str() << "\"/>\n";
    pts.str("");
    open = false;
  };
  for (std::size_t i = 0; i < x.size(); i += bucket) {
    const std::size_t end = std::min(x.size(), i + bucket);
    std::size_t lo = i, hi = i;
    bool any = false;
    for (std::size_t k = i; k < end; ++k) {
      if (!std::isfinite(y[k]) || x[k] < f.xmin || x[k] > f.xmax) continue;
      if (!any || y[k] < y[lo]) lo = k;
      if (!any || y[k] > y[hi]) hi = k;
      any = true;
    }
    if (!any) {
      flush();
      continue;
    }
    for (std::size_t k : {std::min(lo, hi), std::max(lo, hi)}) {
      const double yc = std::clamp(y[k], f.ymin, f.ymax);
      pts << num(f.px(x[k])) << ',' << num(f.py(yc)) << ' ';
    }
    open = true;
  }
  flush();
}

}  // namespace

std::vector<std::string> emit_plot(const std::vector<PlotSeries>& series, const PlotStyle& style,
                                   const std::filesystem::path& output) {
  if (series.empty()) throw ArgumentError("nothing to plot");
  std::vector<std::string> warnings;
  std::vector<double> t;
  std::vector<std::vector<double>> values;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const CsvTable table = read_csv(series[i].csv);
    const auto& ts = table.column("t");
    const auto& vs = table.column(series[i].column);
    if (i == 0) {
      t = ts;
      values.push_back(vs);
    } else if (ts == t) {
      values.push_back(vs);
    } else {
      warnings.push_back("resampled " + series[i].csv.string() + " onto the time grid of " +
                         series[0].csv.string());
      values.push_back(resample(ts, vs, t));
    }
  }

  auto panels = style.panels;
  if (panels.empty()) panels.emplace_back(t.empty() ? 0.0 : t.front(), t.empty() ? 1.0 : t.back());

  const double margin_l = 70, margin_r = 20, top = 40, gap = 40;
  const double total_h = top + panels.size() * (style.panel_height + gap) + 30 * series.size();
  std::ofstream out(output);
  if (!out) throw ArgumentError("cannot write " + output.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(style.width) << "\" height=\""
      << num(total_h) << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(style.width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(style.title) << "</text>\n";

  for (std::size_t p = 0; p < panels.size(); ++p) {
    auto [lo, hi] = panels[p];
    if (!(hi > lo)) hi = lo + 1;
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    for (const auto& v : values)
      for (std::size_t k = 0; k < t.size(); ++k)
        if (t[k] >= lo && t[k] <= hi && std::isfinite(v[k])) {
          ymin = std::min(ymin, v[k]);
          ymax = std::max(ymax, v[k]);
        }
    if (!std::isfinite(ymin)) ymin = -1, ymax = 1;
    if (ymax == ymin) ymin -= 1, ymax += 1;
    const double pad = 0.05 * (ymax - ymin);
    const Frame f{margin_l, top + p * (style.panel_height + gap), style.width - margin_l - margin_r,
                  style.panel_height, lo, hi, ymin - pad, ymax + pad};
    axes(out, f, false);
    for (std::size_t s = 0; s < series.size(); ++s)
      polyline(out, f, t, values[s], kColors[s % 6], series[s].dashed);
  }

  double ly = top + panels.size() * (style.panel_height + gap);
  for (std::size_t s = 0; s < series.size(); ++s, ly += 24) {
    out << "<line x1=\"" << num(margin_l) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(margin_l + 40)
        << "\" y2=\"" << num(ly) << "\" stroke=\"" << kColors[s % 6] << "\""
        << (series[s].dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
    out << "<text x=\"" << num(margin_l + 50) << "\" y=\"" << num(ly + 4) << "\" font-size=\"12\">"
        << escape(series[s].label.empty() ? series[s].column : series[s].label) << "</text>\n";
  }
  out << "</svg>\n";
  return warnings;
}

void emit_envelope_plot(const std::vector<Peak>& peaks, const EnvelopeFit& fit, const std::string& title,
                        const std::filesystem::path& output) {
  std::vector<double> lx, ly;
  for (const auto& p : peaks)
    if (p.t > 0 && p.value > 0) {
      lx.push_back(std::log10(p.t));
      ly.push_back(std::log10(p.value));
    }
  if (lx.empty()) throw ArgumentError("no positive peaks to plot");
  const double xmin = *std::min_element(lx.begin(), lx.end()), xmax = *std::max_element(lx.begin(), lx.end());
  double ymin = *std::min_element(ly.begin(), ly.end()), ymax = *std::max_element(ly.begin(), ly.end());
  const auto line_at = [&](double x) { return std::log10(fit.amplitude) + fit.exponent * x; };
  ymin = std::min({ymin, line_at(xmin), line_at(xmax)});
  ymax = std::max({ymax, line_at(xmin), line_at(xmax)});
  const double pad = 0.05 * std::max(ymax - ymin, 1e-3);
  const double xpad = 0.02 * std::max(xmax - xmin, 1e-3);
  const Frame f{70, 40, 600, 400, xmin - xpad, xmax + xpad, ymin - pad, ymax + pad};

  std::ofstream out(output);
  if (!out) throw ArgumentError("cannot write " + output.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"700\" height=\"500\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"350\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  axes(out, f, true);
  for (std::size_t i = 0; i < lx.size(); ++i)
    out << "<circle cx=\"" << num(f.px(lx[i])) << "\" cy=\"" << num(f.py(ly[i])) << "\" r=\"1.5\" fill=\""
        << kColors[0] << "\"/>\n";
  out << "<line x1=\"" << num(f.px(xmin)) << "\" y1=\"" << num(f.py(line_at(xmin))) << "\" x2=\""
      << num(f.px(xmax)) << "\" y2=\"" << num(f.py(line_at(xmax))) << "\" stroke=\"" << kColors[1]
      << "\" stroke-width=\"1.5\"/>\n";
  out << "<text x=\"90\" y=\"60\" font-size=\"12\">slope " << num(fit.exponent) << " (" << fit.peaks
      << " peaks)</text>\n";
  out << "<text x=\"360\" y=\"470\" font-size=\"11\" text-anchor=\"middle\">t (log scale)</text>\n";
  out << "</svg>\n";
}

}  // namespace oscerr
