#pragma once

// SVG rendering of regret.csv: one figure per delay setting, panels laid out
// with loss regimes as rows and topologies as columns, mean curves with a
// shaded +-std band per algorithm.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "doco/config.hpp"
#include "doco/errors.hpp"

namespace doco {

struct CurveSeries {
  std::vector<double> t;
  std::vector<double> mean;
  std::vector<double> stdev;
};

struct RegretTable {
  // key: (delay, regime, topology, algorithm)
  std::map<std::vector<std::string>, CurveSeries> series;
  std::vector<std::string> delays, regimes, topologies, algorithms;  // first-seen order
};

inline RegretTable read_regret_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "algorithm,topology,regime,delay,t,mean_regret,std_regret")
    throw ConfigError("regret CSV: unexpected header");
  RegretTable tab;
  auto note = [](std::vector<std::string>& seen, const std::string& v) {
    if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
  };
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 7) throw ConfigError("regret CSV: row " + std::to_string(row) + " has " + std::to_string(f.size()) + " fields");
    CurveSeries& s = tab.series[{f[3], f[2], f[1], f[0]}];
    s.t.push_back(detail::parse_number<double>("t", f[4]));
    s.mean.push_back(detail::parse_number<double>("mean_regret", f[5]));
    s.stdev.push_back(detail::parse_number<double>("std_regret", f[6]));
    note(tab.algorithms, f[0]);
    note(tab.topologies, f[1]);
    note(tab.regimes, f[2]);
    note(tab.delays, f[3]);
  }
  if (tab.series.empty()) throw ConfigError("regret CSV has no rows");
  return tab;
}

namespace detail {

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  return colors[i % 6];
}

inline std::string fmt(double v) {
  std::ostringstream o;
  o.precision(6);
  o << v;
  return o.str();
}

}  // namespace detail

inline std::string render_svg(const RegretTable& tab, const std::string& delay) {
  const double pw = 320, ph = 220, ml = 60, mr = 15, mt = 30, mb = 40;
  const std::size_t cols = tab.topologies.size();
  const std::size_t rows = tab.regimes.size();
  const double legend = 24;
  const double width = cols * pw;
  const double height = rows * ph + legend + 24;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"16\" text-anchor=\"middle\" font-size=\"13\">delay " << delay
      << "</text>\n";

  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double x0 = c * pw + ml, y0 = 24 + r * ph + mt;
      const double w = pw - ml - mr, h = ph - mt - mb;
      double tmax = 1, ymin = 0, ymax = 0;
      bool any = false;
      for (const std::string& alg : tab.algorithms) {
        auto it = tab.series.find({delay, tab.regimes[r], tab.topologies[c], alg});
        if (it == tab.series.end()) continue;
        const CurveSeries& s = it->second;
        for (std::size_t i = 0; i < s.t.size(); ++i) {
          tmax = std::max(tmax, s.t[i]);
          ymin = std::min(ymin, s.mean[i] - s.stdev[i]);
          ymax = std::max(ymax, s.mean[i] + s.stdev[i]);
        }
        any = true;
      }
      if (ymax <= ymin) ymax = ymin + 1;
      auto px = [&](double t) { return x0 + w * t / tmax; };
      auto py = [&](double v) { return y0 + h - h * (v - ymin) / (ymax - ymin); };

      svg << "<g>\n<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << w << "\" height=\"" << h
          << "\" fill=\"none\" stroke=\"#444\"/>\n";
      svg << "<text x=\"" << x0 + w / 2 << "\" y=\"" << y0 - 6 << "\" text-anchor=\"middle\">" << tab.regimes[r]
          << " / " << tab.topologies[c] << "</text>\n";
      svg << "<text x=\"" << x0 << "\" y=\"" << y0 + h + 14 << "\" text-anchor=\"middle\">0</text>\n";
      svg << "<text x=\"" << x0 + w << "\" y=\"" << y0 + h + 14 << "\" text-anchor=\"middle\">" << detail::fmt(tmax)
          << "</text>\n";
      svg << "<text x=\"" << x0 + w / 2 << "\" y=\"" << y0 + h + 28 << "\" text-anchor=\"middle\">t</text>\n";
      svg << "<text x=\"" << x0 - 4 << "\" y=\"" << y0 + 4 << "\" text-anchor=\"end\">" << detail::fmt(ymax)
          << "</text>\n";
      svg << "<text x=\"" << x0 - 4 << "\" y=\"" << y0 + h << "\" text-anchor=\"end\">" << detail::fmt(ymin)
          << "</text>\n";
      if (!any) {
        svg << "</g>\n";
        continue;
      }
      for (std::size_t a = 0; a < tab.algorithms.size(); ++a) {
        auto it = tab.series.find({delay, tab.regimes[r], tab.topologies[c], tab.algorithms[a]});
        if (it == tab.series.end()) continue;
        const CurveSeries& s = it->second;
        std::ostringstream band, line;
        for (std::size_t i = 0; i < s.t.size(); ++i)
          band << (i ? " " : "") << detail::fmt(px(s.t[i])) << ',' << detail::fmt(py(s.mean[i] + s.stdev[i]));
        for (std::size_t i = s.t.size(); i-- > 0;)
          band << ' ' << detail::fmt(px(s.t[i])) << ',' << detail::fmt(py(s.mean[i] - s.stdev[i]));
        for (std::size_t i = 0; i < s.t.size(); ++i)
          line << (i ? " " : "") << detail::fmt(px(s.t[i])) << ',' << detail::fmt(py(s.mean[i]));
        svg << "<polygon class=\"band\" points=\"" << band.str() << "\" fill=\"" << detail::palette(a)
            << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
        svg << "<polyline class=\"mean\" points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << detail::palette(a)
            << "\" stroke-width=\"1.5\"/>\n";
      }
      svg << "</g>\n";
    }

  const double ly = height - 12;
  for (std::size_t a = 0; a < tab.algorithms.size(); ++a) {
    const double lx = 20 + a * 170;
    svg << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 20 << "\" y2=\"" << ly - 4
        << "\" stroke=\"" << detail::palette(a) << "\" stroke-width=\"2\"/>\n";
    svg << "<text class=\"legend\" x=\"" << lx + 26 << "\" y=\"" << ly << "\">" << tab.algorithms[a] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

// One figure per delay setting. With several settings the files are named
// <stem>_<delay>.svg next to `out_path`, ':' in the delay becoming '-'.
inline std::vector<std::pair<std::string, std::string>> render_figures(const RegretTable& tab,
                                                                        const std::string& out_path) {
  std::vector<std::pair<std::string, std::string>> out;
  if (tab.delays.size() == 1) {
    out.emplace_back(out_path, render_svg(tab, tab.delays.front()));
    return out;
  }
  std::string stem = out_path;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".svg") stem.resize(stem.size() - 4);
  for (const std::string& d : tab.delays) {
    std::string tag = d;
    std::replace(tag.begin(), tag.end(), ':', '-');
    out.emplace_back(stem + "_" + tag + ".svg", render_svg(tab, d));
  }
  return out;
}

}  // namespace doco
