#include "mcdrop/projviz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mcdrop/error.hpp"
#include "mcdrop/parallel.hpp"
#include "mcdrop/random.hpp"

namespace mcdrop {

SampleMatrix SampleMatrix::from_samples(std::span<const SampleVector> samples)
{
  SampleMatrix m;
  if (samples.empty()) return m;
  m.cols = samples.front().samples.size();
  for (const auto& s : samples) {
    if (s.samples.size() != m.cols)
      throw InputError(fmt::format("document {} has {} samples, expected {}", s.doc_id,
                                   s.samples.size(), m.cols));
    m.ids.push_back(s.doc_id);
    m.values.insert(m.values.end(), s.samples.begin(), s.samples.end());
  }
  return m;
}

KnnGraph knn_graph(const SampleMatrix& m, std::size_t k_nn)
{
  const std::size_t n = m.rows();
  if (k_nn == 0) throw InputError("knn_graph: k_nn must be positive");
  if (n <= k_nn)
    throw InputError(fmt::format("knn_graph: need more than {} rows, got {}", k_nn, n));

  KnnGraph g;
  g.n = n;
  g.k = k_nn;
  g.neighbors.resize(n * k_nn);
  g.distances.resize(n * k_nn);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n - 1);
    const auto xi = m.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto xj = m.row(j);
      double sq = 0.0;
      for (std::size_t c = 0; c < m.cols; ++c) sq += (xi[c] - xj[c]) * (xi[c] - xj[c]);
      cand.emplace_back(std::sqrt(sq), j);
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k_nn), cand.end(),
                      [&](const auto& a, const auto& b) {
                        return a.first != b.first ? a.first < b.first
                                                  : m.ids[a.second] < m.ids[b.second];
                      });
    for (std::size_t r = 0; r < k_nn; ++r) {
      g.neighbors[i * k_nn + r] = cand[r].second;
      g.distances[i * k_nn + r] = cand[r].first;
    }
  });
  return g;
}

namespace {

double membership(double d, double rho, double sigma)
{
  const double excess = d - rho;
  if (excess <= 0.0) return 1.0;
  return std::exp(-excess / sigma);
}

}  // namespace

FuzzyGraph fuzzy_weights(const KnnGraph& g)
{
  constexpr int kMaxIterations = 64;
  constexpr double kTolerance = 1e-9;
  const double target = std::log2(static_cast<double>(g.k));

  FuzzyGraph f;
  f.n = g.n;
  f.rho.resize(g.n);
  f.sigma.resize(g.n);
  f.sigma_fallback.assign(g.n, false);
  f.directed.resize(g.n * g.k);

  for (std::size_t i = 0; i < g.n; ++i) {
    const auto d = g.distances_of(i);
    const double rho = d[0];
    auto psum = [&](double sigma) {
      double s = 0.0;
      for (double dij : d) s += membership(dij, rho, sigma);
      return s;
    };

    double lo = 0.0, hi = std::numeric_limits<double>::infinity(), mid = 1.0;
    bool converged = false;
    for (int it = 0; it < kMaxIterations; ++it) {
      const double s = psum(mid);
      if (std::abs(s - target) < kTolerance) {
        converged = true;
        break;
      }
      if (s > target) {
        hi = mid;
        mid = (lo + hi) / 2.0;
      } else {
        lo = mid;
        mid = std::isinf(hi) ? mid * 2.0 : (lo + hi) / 2.0;
      }
    }
    double sigma = mid;
    if (!converged) {
      sigma = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
      f.sigma_fallback[i] = true;
    }
    if (!(sigma > 0.0)) sigma = std::numeric_limits<double>::min();
    f.rho[i] = rho;
    f.sigma[i] = sigma;
    for (std::size_t r = 0; r < g.k; ++r) f.directed[i * g.k + r] = membership(d[r], rho, sigma);
  }

  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < g.n; ++i) {
    const auto nb = g.neighbors_of(i);
    for (std::size_t r = 0; r < g.k; ++r) {
      const std::size_t j = nb[r];
      const double w = f.directed[i * g.k + r];
      auto& slot = pairs[{std::min(i, j), std::max(i, j)}];
      (i < j ? slot.first : slot.second) = w;
    }
  }
  for (const auto& [key, w] : pairs) {
    const double sym = fuzzy_union(w.first, w.second);
    if (sym > 0.0) f.edges.push_back({key.first, key.second, std::min(sym, 1.0)});
  }
  return f;
}

CurveParams fit_curve(double min_dist, double spread)
{
  if (!(spread > 0.0) || min_dist < 0.0) throw InputError("fit_curve: invalid min_dist/spread");
  constexpr int kPoints = 300;
  std::vector<double> xs(kPoints), ys(kPoints);
  for (int i = 0; i < kPoints; ++i) {
    xs[i] = 3.0 * spread * i / (kPoints - 1);
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }

  auto residual_sq = [&](double a, double b) {
    double r = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      const double model = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b));
      r += (model - ys[i]) * (model - ys[i]);
    }
    return r;
  };

  // Levenberg-Marquardt on (a, b).
  double a = 1.0, b = 1.0, lambda = 1e-3;
  double cost = residual_sq(a, b);
  for (int iter = 0; iter < 200; ++iter) {
    double jtj[2][2] = {{0, 0}, {0, 0}}, jtr[2] = {0, 0};
    for (int i = 0; i < kPoints; ++i) {
      const double x = xs[i];
      const double p = x > 0.0 ? std::pow(x, 2.0 * b) : 0.0;
      const double denom = 1.0 + a * p;
      const double model = 1.0 / denom;
      const double r = model - ys[i];
      const double da = -p / (denom * denom);
      const double db = x > 0.0 ? -a * p * 2.0 * std::log(x) / (denom * denom) : 0.0;
      jtj[0][0] += da * da;
      jtj[0][1] += da * db;
      jtj[1][1] += db * db;
      jtr[0] += da * r;
      jtr[1] += db * r;
    }
    jtj[1][0] = jtj[0][1];
    bool improved = false;
    for (int attempt = 0; attempt < 20 && !improved; ++attempt) {
      const double m00 = jtj[0][0] * (1.0 + lambda), m11 = jtj[1][1] * (1.0 + lambda);
      const double det = m00 * m11 - jtj[0][1] * jtj[1][0];
      if (det == 0.0) break;
      const double step_a = -(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
      const double step_b = -(m00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
      const double na = a + step_a, nb = b + step_b;
      const double ncost = na > 0.0 && nb > 0.0 ? residual_sq(na, nb) : cost + 1.0;
      if (ncost < cost) {
        const double delta = cost - ncost;
        a = na;
        b = nb;
        cost = ncost;
        lambda *= 0.3;
        improved = true;
        if (delta < 1e-15) return {a, b};
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  return {a, b};
}

std::vector<Point2> random_init(std::size_t n, const LayoutConfig& cfg)
{
  Rng rng(derive_stream(cfg.seed, {name_tag("layout-init")}));
  std::vector<Point2> pts(n);
  for (auto& p : pts) {
    p.x = cfg.init_scale * rng.normal();
    p.y = cfg.init_scale * rng.normal();
  }
  return pts;
}

std::vector<Point2> layout(const FuzzyGraph& g, const LayoutConfig& cfg)
{
  return layout(g, cfg, random_init(g.n, cfg));
}

std::vector<Point2> layout(const FuzzyGraph& g, const LayoutConfig& cfg, std::vector<Point2> pos)
{
  if (pos.size() != g.n) throw DimensionError("layout: initial positions do not match graph size");
  if (g.edges.empty() || cfg.epochs == 0) return pos;

  const CurveParams curve = fit_curve(cfg.min_dist);
  const double a = curve.a, b = curve.b;

  struct Directed
  {
    std::size_t head, tail;
    double weight;
  };
  std::vector<Directed> edges;
  for (const auto& e : g.edges) {
    edges.push_back({e.i, e.j, e.weight});
    edges.push_back({e.j, e.i, e.weight});
  }
  std::sort(edges.begin(), edges.end(), [](const Directed& x, const Directed& y) {
    return x.head != y.head ? x.head < y.head : x.tail < y.tail;
  });

  double max_w = 0.0;
  for (const auto& e : edges) max_w = std::max(max_w, e.weight);
  const double neg = static_cast<double>(std::max<std::size_t>(cfg.negative_samples, 1));
  std::vector<double> per_sample(edges.size()), next_sample(edges.size());
  std::vector<double> per_negative(edges.size()), next_negative(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    per_sample[e] = max_w / edges[e].weight;
    next_sample[e] = per_sample[e];
    per_negative[e] = per_sample[e] / neg;
    next_negative[e] = per_negative[e];
  }

  auto clip = [&](double v) { return std::clamp(v, -cfg.clip, cfg.clip); };
  Rng rng(derive_stream(cfg.seed, {name_tag("layout-sgd")}));
  const auto n_vertices = static_cast<std::uint64_t>(g.n);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double ep = static_cast<double>(epoch);
    const double alpha = cfg.learning_rate * (1.0 - ep / static_cast<double>(cfg.epochs));
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (next_sample[e] > ep) continue;
      Point2& cur = pos[edges[e].head];
      Point2& other = pos[edges[e].tail];
      double dx = cur.x - other.x, dy = cur.y - other.y;
      double d2 = dx * dx + dy * dy;
      if (d2 > 0.0) {
        const double coeff = -2.0 * a * b * std::pow(d2, b - 1.0) / (a * std::pow(d2, b) + 1.0);
        const double gx = clip(coeff * dx) * alpha, gy = clip(coeff * dy) * alpha;
        cur.x += gx;
        cur.y += gy;
        other.x -= gx;
        other.y -= gy;
      }
      next_sample[e] += per_sample[e];

      if (cfg.negative_samples > 0) {
        const auto n_neg = static_cast<std::size_t>((ep - next_negative[e]) / per_negative[e]);
        for (std::size_t s = 0; s < n_neg; ++s) {
          const std::size_t k = rng.below(n_vertices);
          if (k == edges[e].head) continue;
          const Point2& far = pos[k];
          dx = cur.x - far.x;
          dy = cur.y - far.y;
          d2 = dx * dx + dy * dy;
          if (d2 > 0.0) {
            const double coeff = 2.0 * b / ((0.001 + d2) * (a * std::pow(d2, b) + 1.0));
            cur.x += clip(coeff * dx) * alpha;
            cur.y += clip(coeff * dy) * alpha;
          } else {
            cur.x += cfg.clip * alpha;
            cur.y += cfg.clip * alpha;
          }
        }
        next_negative[e] += static_cast<double>(n_neg) * per_negative[e];
      }
    }
  }
  for (const auto& p : pos)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw NumericError("layout: non-finite coordinate");
  return pos;
}

Bandwidth scott_bandwidth(std::span<const Point2> points)
{
  const std::size_t n = points.size();
  if (n < 2) return {1.0, 1.0};
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double vx = 0.0, vy = 0.0;
  for (const auto& p : points) {
    vx += (p.x - mx) * (p.x - mx);
    vy += (p.y - my) * (p.y - my);
  }
  const double factor = std::pow(static_cast<double>(n), -1.0 / 6.0);
  double hx = factor * std::sqrt(vx / static_cast<double>(n - 1));
  double hy = factor * std::sqrt(vy / static_cast<double>(n - 1));
  if (!(hx > 0.0) && !(hy > 0.0)) return {1.0, 1.0};
  if (!(hx > 0.0)) hx = hy;
  if (!(hy > 0.0)) hy = hx;
  return {hx, hy};
}

Box padded_bounds(std::span<const Point2> points, Bandwidth h)
{
  if (points.empty()) throw InputError("padded_bounds: no points");
  Box b{points[0].x, points[0].x, points[0].y, points[0].y};
  for (const auto& p : points) {
    b.x0 = std::min(b.x0, p.x);
    b.x1 = std::max(b.x1, p.x);
    b.y0 = std::min(b.y0, p.y);
    b.y1 = std::max(b.y1, p.y);
  }
  const double px = b.x1 > b.x0 ? 0.1 * (b.x1 - b.x0) : 3.0 * h.x;
  const double py = b.y1 > b.y0 ? 0.1 * (b.y1 - b.y0) : 3.0 * h.y;
  return {b.x0 - px, b.x1 + px, b.y0 - py, b.y1 + py};
}

double DensityGrid::max_density() const
{
  return density.empty() ? 0.0 : *std::max_element(density.begin(), density.end());
}

double DensityGrid::integral() const
{
  return std::accumulate(density.begin(), density.end(), 0.0) * dx() * dy();
}

DensityGrid kde2d(std::span<const Point2> points, double h, std::size_t grid)
{
  return kde2d(points, Bandwidth{h, h}, grid);
}

DensityGrid kde2d(std::span<const Point2> points, Bandwidth h, std::size_t grid,
                  std::optional<Box> box)
{
  if (points.empty()) throw InputError("kde2d: no points");
  if (!(h.x > 0.0) || !(h.y > 0.0)) throw InputError("kde2d: bandwidth must be positive");
  if (grid < 2) throw InputError("kde2d: grid must have at least 2 nodes per axis");

  DensityGrid d;
  d.size = grid;
  d.bandwidth = h;
  d.box = box ? *box : padded_bounds(points, h);
  if (!(d.box.x1 > d.box.x0) || !(d.box.y1 > d.box.y0)) throw InputError("kde2d: empty grid box");
  d.density.assign(grid * grid, 0.0);

  const double norm =
      1.0 / (2.0 * std::numbers::pi * h.x * h.y * static_cast<double>(points.size()));
  parallel_for(grid, [&](std::size_t row) {
    const double y = d.y_at(row);
    for (std::size_t col = 0; col < grid; ++col) {
      const double x = d.x_at(col);
      double s = 0.0;
      for (const auto& p : points) {
        const double u = (x - p.x) / h.x, v = (y - p.y) / h.y;
        s += std::exp(-0.5 * (u * u + v * v));
      }
      d.density[row * grid + col] = s * norm;
    }
  });
  return d;
}

std::vector<ContourLevel> contour_levels(const DensityGrid& grid, std::size_t count, double lo,
                                         double hi)
{
  std::vector<ContourLevel> out;
  const double peak = grid.max_density();
  if (count == 0 || !(peak > 0.0)) return out;

  for (std::size_t li = 0; li < count; ++li) {
    const double frac = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(li) /
                                                   static_cast<double>(count - 1);
    ContourLevel level;
    level.level = frac * peak;
    const double L = level.level;

    for (std::size_t r = 0; r + 1 < grid.size; ++r) {
      for (std::size_t c = 0; c + 1 < grid.size; ++c) {
        const Point2 p00{grid.x_at(c), grid.y_at(r)}, p10{grid.x_at(c + 1), grid.y_at(r)};
        const Point2 p11{grid.x_at(c + 1), grid.y_at(r + 1)}, p01{grid.x_at(c), grid.y_at(r + 1)};
        const double v00 = grid.at(r, c), v10 = grid.at(r, c + 1);
        const double v11 = grid.at(r + 1, c + 1), v01 = grid.at(r + 1, c);
        const int mask = (v00 >= L) | ((v10 >= L) << 1) | ((v11 >= L) << 2) | ((v01 >= L) << 3);
        if (mask == 0 || mask == 15) continue;

        auto lerp = [L](Point2 p, double vp, Point2 q, double vq) {
          const double t = (L - vp) / (vq - vp);
          return Point2{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
        };
        const Point2 bottom = lerp(p00, v00, p10, v10);
        const Point2 right = lerp(p10, v10, p11, v11);
        const Point2 top = lerp(p01, v01, p11, v11);
        const Point2 left = lerp(p00, v00, p01, v01);
        auto seg = [&](Point2 a, Point2 b) { level.segments.push_back({a, b}); };
        const bool center_high = (v00 + v10 + v11 + v01) / 4.0 >= L;

        switch (mask) {
          case 1: case 14: seg(left, bottom); break;
          case 2: case 13: seg(bottom, right); break;
          case 3: case 12: seg(left, right); break;
          case 4: case 11: seg(right, top); break;
          case 6: case 9: seg(bottom, top); break;
          case 7: case 8: seg(left, top); break;
          case 5:
            if (center_high) { seg(bottom, right); seg(top, left); }
            else { seg(left, bottom); seg(right, top); }
            break;
          case 10:
            if (center_high) { seg(left, bottom); seg(right, top); }
            else { seg(bottom, right); seg(top, left); }
            break;
          default: break;
        }
      }
    }
    out.push_back(std::move(level));
  }
  return out;
}

Projection project(const SampleMatrix& m, const ProjectionConfig& cfg)
{
  const std::size_t n = m.rows();
  if (n == 0) throw InputError("project: no documents");
  if (m.cols == 0) throw InputError("project: documents have no samples");
  {
    std::set<std::int64_t> seen;
    for (auto id : m.ids)
      if (!seen.insert(id).second) throw InputError(fmt::format("project: duplicate id {}", id));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m.ids[a] < m.ids[b]; });
  SampleMatrix canon;
  canon.cols = m.cols;
  for (std::size_t idx : order) {
    canon.ids.push_back(m.ids[idx]);
    const auto row = m.row(idx);
    canon.values.insert(canon.values.end(), row.begin(), row.end());
  }

  std::vector<Point2> canon_coords(n);
  if (n > 1) {
    const KnnGraph knn = knn_graph(canon, std::min(cfg.k_nn, n - 1));
    canon_coords = layout(fuzzy_weights(knn), cfg.layout);
  }

  Projection p;
  p.ids = m.ids;
  p.coords.resize(n);
  for (std::size_t r = 0; r < n; ++r) p.coords[order[r]] = canon_coords[r];
  p.density = kde2d(canon_coords, scott_bandwidth(canon_coords), cfg.grid);
  p.contours = contour_levels(p.density, cfg.contours);
  return p;
}

void write_coords_csv(std::ostream& out, std::span<const std::int64_t> ids,
                      std::span<const Point2> coords)
{
  if (ids.size() != coords.size()) throw InputError("write_coords_csv: length mismatch");
  out << "id,x,y\n";
  for (std::size_t i = 0; i < ids.size(); ++i)
    fmt::print(out, "{},{},{}\n", ids[i], coords[i].x, coords[i].y);
}

}  // namespace mcdrop
