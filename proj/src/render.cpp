#include "mcdrop/projviz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "mcdrop/error.hpp"

namespace mcdrop {

namespace {

constexpr std::array<std::string_view, 4> kBinFill = {"#2c7bb6", "#abd9e9", "#fdae61", "#d7191c"};
constexpr std::string_view kStroke = "#222222";
constexpr std::string_view kContourStroke = "#7a7a7a";

std::string escape_xml(std::string_view s)
{
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        // Drop control characters other than tab/newline; XML 1.0 forbids them.
        if (static_cast<unsigned char>(c) < 0x20 && c != '\t' && c != '\n') out += ' ';
        else out += c;
    }
  }
  return out;
}

// Data-space to pixel mapping with equal aspect and y pointing up.
struct Frame
{
  double x0 = 0.0, y0 = 0.0, scale = 1.0;
  double px0 = 0.0, py1 = 0.0;

  double px(double x) const { return px0 + (x - x0) * scale; }
  double py(double y) const { return py1 - (y - y0) * scale; }
};

Frame make_frame(std::span<const VizPoint> points, const DensityGrid* density,
                 const RenderOptions& o)
{
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (density && density->size > 1) {
    x0 = density->box.x0;
    x1 = density->box.x1;
    y0 = density->box.y0;
    y1 = density->box.y1;
  } else if (!points.empty()) {
    x0 = x1 = points[0].x;
    y0 = y1 = points[0].y;
    for (const auto& p : points) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    const double pad = std::max({0.1 * (x1 - x0), 0.1 * (y1 - y0), 1.0});
    x0 -= pad;
    x1 += pad;
    y0 -= pad;
    y1 += pad;
  }
  const double plot_w = o.width - o.legend_width - 2.0 * o.margin;
  const double plot_h = o.height - 2.0 * o.margin;
  const double span_x = std::max(x1 - x0, 1e-12), span_y = std::max(y1 - y0, 1e-12);
  Frame f;
  f.scale = std::min(plot_w / span_x, plot_h / span_y);
  f.x0 = x0;
  f.y0 = y0;
  f.px0 = o.margin + (plot_w - span_x * f.scale) / 2.0;
  f.py1 = o.margin + plot_h - (plot_h - span_y * f.scale) / 2.0;
  return f;
}

std::string glyph_markup(Outcome o, double cx, double cy, double r, std::string_view fill)
{
  switch (o) {
    case Outcome::TP:
      return fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="{:.2f}" fill="{}" stroke="{}" stroke-width="0.8")",
                         cx, cy, r, fill, kStroke);
    case Outcome::FP:
      return fmt::format(R"(<rect x="{:.2f}" y="{:.2f}" width="{:.2f}" height="{:.2f}" fill="{}" stroke="{}" stroke-width="0.8")",
                         cx - r, cy - r, 2 * r, 2 * r, fill, kStroke);
    case Outcome::TN: {
      const double d = r * 0.7071067811865476;
      return fmt::format(R"(<path d="M{:.2f},{:.2f}L{:.2f},{:.2f}M{:.2f},{:.2f}L{:.2f},{:.2f}" fill="none" stroke="{}" stroke-width="2.5")",
                         cx - d, cy - d, cx + d, cy + d, cx - d, cy + d, cx + d, cy - d, fill);
    }
    case Outcome::FN:
      return fmt::format(R"(<path d="M{:.2f},{:.2f}L{:.2f},{:.2f}M{:.2f},{:.2f}L{:.2f},{:.2f}" fill="none" stroke="{}" stroke-width="2.5")",
                         cx - r, cy, cx + r, cy, cx, cy - r, cx, cy + r, fill);
  }
  return {};
}

}  // namespace

double glyph_radius(double mean, const RenderOptions& opts)
{
  const double m = std::clamp(mean, 0.0, 1.0);
  return opts.r_min + (opts.r_max - opts.r_min) * m;
}

std::string_view glyph_element(Outcome o)
{
  switch (o) {
    case Outcome::TP: return "circle";
    case Outcome::FP: return "rect";
    case Outcome::TN:
    case Outcome::FN: return "path";
  }
  return "path";
}

std::string render_svg(std::span<const VizPoint> points, const DensityGrid* density,
                       std::span<const ContourLevel> contours, const RenderOptions& opts)
{
  const Frame f = make_frame(points, density, opts);
  std::string s;
  auto out = std::back_inserter(s);

  fmt::format_to(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
  fmt::format_to(out,
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
                 "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\">\n",
                 opts.width, opts.height);
  fmt::format_to(out, "<title>{}</title>\n", escape_xml(opts.title));
  fmt::format_to(out, "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
                 opts.width, opts.height);

  fmt::format_to(out, "<g id=\"contours\" fill=\"none\" stroke=\"{}\" stroke-width=\"0.9\">\n",
                 kContourStroke);
  for (std::size_t li = 0; li < contours.size(); ++li) {
    const auto& level = contours[li];
    if (level.segments.empty()) continue;
    fmt::format_to(out, "<path class=\"contour\" data-level=\"{:.6g}\" stroke-opacity=\"{:.2f}\" d=\"",
                   level.level, 0.35 + 0.5 * static_cast<double>(li + 1) / static_cast<double>(contours.size()));
    for (const auto& seg : level.segments)
      fmt::format_to(out, "M{:.2f},{:.2f}L{:.2f},{:.2f}", f.px(seg.a.x), f.py(seg.a.y),
                     f.px(seg.b.x), f.py(seg.b.y));
    fmt::format_to(out, "\"/>\n");
  }
  fmt::format_to(out, "</g>\n");

  // Larger glyphs first so small ones stay visible on top.
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].mean != points[b].mean) return points[a].mean > points[b].mean;
    return points[a].id < points[b].id;
  });

  fmt::format_to(out, "<g id=\"points\">\n");
  for (std::size_t idx : order) {
    const auto& p = points[idx];
    const double cx = f.px(p.x), cy = f.py(p.y);
    const double r = glyph_radius(p.mean, opts);
    const auto fill = kBinFill[static_cast<std::size_t>(std::clamp(p.bin, 0, 3))];
    fmt::format_to(out,
                   "{} id=\"pt-{}\" class=\"glyph\" data-id=\"{}\" data-outcome=\"{}\" "
                   "data-mean=\"{:.4f}\" data-bin=\"{}\"><title>{}</title></{}>\n",
                   glyph_markup(p.outcome, cx, cy, r, fill), p.id, p.id, to_string(p.outcome),
                   p.mean, p.bin, escape_xml(p.label), glyph_element(p.outcome));
    fmt::format_to(out,
                   "<text class=\"id-label\" x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"8\" "
                   "fill=\"#333333\">{}</text>\n",
                   cx + r + 1.5, cy + 3.0, p.id);
  }
  fmt::format_to(out, "</g>\n");

  const double lx = opts.width - opts.legend_width + 10.0;
  double ly = opts.margin + 10.0;
  fmt::format_to(out, "<g id=\"legend\" font-size=\"11\" fill=\"#222222\">\n");
  fmt::format_to(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-weight=\"bold\">Outcome</text>\n", lx, ly);
  for (Outcome o : {Outcome::TP, Outcome::FP, Outcome::TN, Outcome::FN}) {
    ly += 20.0;
    fmt::format_to(out, "{} class=\"legend-glyph\" data-outcome=\"{}\"/>\n",
                   glyph_markup(o, lx + 8.0, ly - 4.0, 6.0, "#888888"), to_string(o));
    fmt::format_to(out, "<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", lx + 22.0, ly, to_string(o));
  }
  ly += 30.0;
  fmt::format_to(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-weight=\"bold\">Mean probability</text>\n",
                 lx, ly);
  for (std::size_t b = 0; b < kBinFill.size(); ++b) {
    ly += 20.0;
    fmt::format_to(out,
                   "<rect class=\"legend-bin\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"14\" height=\"12\" "
                   "fill=\"{}\" stroke=\"{}\" stroke-width=\"0.5\"/>\n",
                   lx + 1.0, ly - 10.0, kBinFill[b], kStroke);
    fmt::format_to(out, "<text x=\"{:.2f}\" y=\"{:.2f}\">{:.2f} to {:.2f}</text>\n", lx + 22.0, ly,
                   0.25 * static_cast<double>(b), 0.25 * static_cast<double>(b + 1));
  }
  ly += 30.0;
  fmt::format_to(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-weight=\"bold\">Glyph size</text>\n", lx, ly);
  for (double m : {0.0, 0.5, 1.0}) {
    ly += 24.0;
    fmt::format_to(out,
                   "<circle class=\"legend-size\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"none\" "
                   "stroke=\"{}\"/>\n",
                   lx + 8.0, ly - 4.0, glyph_radius(m, opts), kStroke);
    fmt::format_to(out, "<text x=\"{:.2f}\" y=\"{:.2f}\">mean {:.1f}</text>\n", lx + 22.0, ly, m);
  }
  fmt::format_to(out, "</g>\n</svg>\n");
  return s;
}

void render(std::span<const VizPoint> points, const DensityGrid* density,
            std::span<const ContourLevel> contours, const std::filesystem::path& path,
            const RenderOptions& opts)
{
  const std::string svg = render_svg(points, density, contours, opts);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
  out << svg;
  if (!out) throw InputError(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace mcdrop
