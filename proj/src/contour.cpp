#include "fiberlin/contour.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace fiberlin {

namespace {

// Segment endpoints by cell edge: 0 bottom, 1 right, 2 top, 3 left.
using Seg = std::array<int, 2>;

std::vector<Seg> cell_segments(int index, bool center_above) {
  switch (index) {
    case 1: case 14: return {{3, 0}};
    case 2: case 13: return {{0, 1}};
    case 3: case 12: return {{3, 1}};
    case 4: case 11: return {{1, 2}};
    case 6: case 9: return {{0, 2}};
    case 7: case 8: return {{3, 2}};
    case 5: return center_above ? std::vector<Seg>{{0, 1}, {2, 3}} : std::vector<Seg>{{3, 0}, {1, 2}};
    case 10: return center_above ? std::vector<Seg>{{3, 0}, {1, 2}} : std::vector<Seg>{{0, 1}, {2, 3}};
    default: return {};
  }
}

std::string fixed2(double x) {
  if (std::fabs(x) < 0.005) x = 0.0;
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

std::string xml_escape(const std::string& s) {
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

}  // namespace

std::vector<Polyline> marching_squares(const PlaneFn& f, double level, const Window2& w, std::size_t n) {
  if (n < 1) throw ConfigError("contour resolution must be positive");
  const std::size_t stride = n + 1;
  const double du = (w.u_hi - w.u_lo) / static_cast<double>(n);
  const double dv = (w.v_hi - w.v_lo) / static_cast<double>(n);
  auto node_u = [&](std::size_t i) { return w.u_lo + du * static_cast<double>(i); };
  auto node_v = [&](std::size_t j) { return w.v_lo + dv * static_cast<double>(j); };
  auto eval = [&](double u, double v) {
    try {
      return f(u, v) - level;
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  std::vector<double> s(stride * stride);
  for (std::size_t j = 0; j <= n; ++j)
    for (std::size_t i = 0; i <= n; ++i) s[j * stride + i] = eval(node_u(i), node_v(j));

  // Edge ids: 2 * node + 0 for the edge to (i+1, j), 2 * node + 1 for the edge to (i, j+1).
  auto edge_point = [&](long id) {
    const std::size_t node = static_cast<std::size_t>(id / 2);
    const std::size_t i = node % stride, j = node / stride;
    const std::size_t other = id % 2 == 0 ? node + 1 : node + stride;
    const double a = s[node], b = s[other];
    const double t = a == b ? 0.5 : a / (a - b);
    if (id % 2 == 0) return std::array<double, 2>{node_u(i) + t * du, node_v(j)};
    return std::array<double, 2>{node_u(i), node_v(j) + t * dv};
  };

  std::vector<std::array<long, 2>> segs;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t n0 = j * stride + i;
      const double c[4] = {s[n0], s[n0 + 1], s[n0 + 1 + stride], s[n0 + stride]};
      if (std::isnan(c[0]) || std::isnan(c[1]) || std::isnan(c[2]) || std::isnan(c[3])) continue;
      int index = 0;
      for (int k = 0; k < 4; ++k)
        if (c[k] > 0.0) index |= 1 << k;
      if (index == 0 || index == 15) continue;
      bool center_above = false;
      if (index == 5 || index == 10) center_above = eval(node_u(i) + 0.5 * du, node_v(j) + 0.5 * dv) > 0.0;
      const long e[4] = {static_cast<long>(2 * n0), static_cast<long>(2 * (n0 + 1) + 1),
                         static_cast<long>(2 * (n0 + stride)), static_cast<long>(2 * n0 + 1)};
      for (const auto& sg : cell_segments(index, center_above)) segs.push_back({e[sg[0]], e[sg[1]]});
    }

  std::map<long, std::vector<std::size_t>> by_edge;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    by_edge[segs[k][0]].push_back(k);
    by_edge[segs[k][1]].push_back(k);
  }
  std::vector<char> used(segs.size(), 0);
  std::vector<Polyline> out;
  auto trace = [&](std::size_t first, long start_edge) {
    Polyline line;
    line.points.push_back(edge_point(start_edge));
    long at = start_edge;
    std::size_t seg = first;
    while (true) {
      used[seg] = 1;
      const long next = segs[seg][0] == at ? segs[seg][1] : segs[seg][0];
      const auto q = edge_point(next);
      if (q != line.points.back()) line.points.push_back(q);
      at = next;
      if (at == start_edge) {
        line.closed = true;
        break;
      }
      std::size_t follow = segs.size();
      for (std::size_t cand : by_edge[at])
        if (!used[cand]) follow = cand;
      if (follow == segs.size()) break;
      seg = follow;
    }
    out.push_back(std::move(line));
  };
  for (std::size_t k = 0; k < segs.size(); ++k) {
    if (used[k]) continue;
    for (long endpoint : segs[k])
      if (by_edge[endpoint].size() == 1) {
        trace(k, endpoint);
        break;
      }
  }
  for (std::size_t k = 0; k < segs.size(); ++k)
    if (!used[k]) trace(k, segs[k][0]);
  return out;
}

std::string render_svg(const std::vector<LevelContours>& levels, const Window2& w, const SvgStyle& style) {
  static const std::vector<std::string> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};
  const auto& colors = style.colors.empty() ? kPalette : style.colors;
  const int margin = 20;
  const int header = 18 * static_cast<int>((style.title.empty() ? 0 : 1) + style.notes.size());
  const double plot_w = style.width - 2 * margin;
  const double plot_h = plot_w * (w.v_hi - w.v_lo) / (w.u_hi - w.u_lo);
  const int height = static_cast<int>(std::ceil(plot_h)) + 2 * margin + header;
  auto X = [&](double u) { return margin + (u - w.u_lo) / (w.u_hi - w.u_lo) * plot_w; };
  auto Y = [&](double v) { return header + margin + (w.v_hi - v) / (w.v_hi - w.v_lo) * plot_h; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << style.width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  int line_y = 16;
  if (!style.title.empty()) {
    os << "<text x=\"" << margin << "\" y=\"" << line_y << "\" font-family=\"sans-serif\" font-size=\"14\">"
       << xml_escape(style.title) << "</text>\n";
    line_y += 18;
  }
  for (const auto& note : style.notes) {
    os << "<text x=\"" << margin << "\" y=\"" << line_y << "\" font-family=\"monospace\" font-size=\"11\">"
       << xml_escape(note) << "</text>\n";
    line_y += 18;
  }
  os << "<rect x=\"" << fixed2(X(w.u_lo)) << "\" y=\"" << fixed2(Y(w.v_hi)) << "\" width=\"" << fixed2(plot_w)
     << "\" height=\"" << fixed2(plot_h) << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  if (style.axes) {
    if (w.u_lo < 0.0 && w.u_hi > 0.0)
      os << "<line x1=\"" << fixed2(X(0)) << "\" y1=\"" << fixed2(Y(w.v_lo)) << "\" x2=\"" << fixed2(X(0)) << "\" y2=\""
         << fixed2(Y(w.v_hi)) << "\" stroke=\"#bbb\" stroke-width=\"0.5\"/>\n";
    if (w.v_lo < 0.0 && w.v_hi > 0.0)
      os << "<line x1=\"" << fixed2(X(w.u_lo)) << "\" y1=\"" << fixed2(Y(0)) << "\" x2=\"" << fixed2(X(w.u_hi)) << "\" y2=\""
         << fixed2(Y(0)) << "\" stroke=\"#bbb\" stroke-width=\"0.5\"/>\n";
  }
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const std::string& color = colors[k % colors.size()];
    char lv[64];
    auto res = std::to_chars(lv, lv + sizeof lv, levels[k].level);
    os << "<g stroke=\"" << color << "\" fill=\"none\" stroke-width=\"1.2\" data-level=\"" << std::string(lv, res.ptr)
       << "\">\n";
    for (const auto& line : levels[k].lines) {
      os << "<path d=\"";
      for (std::size_t p = 0; p < line.points.size(); ++p)
        os << (p == 0 ? "M" : " L") << fixed2(X(line.points[p][0])) << ',' << fixed2(Y(line.points[p][1]));
      if (line.closed) os << " Z";
      os << "\"/>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace fiberlin
