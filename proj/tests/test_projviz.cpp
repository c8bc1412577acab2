#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <map>
#include <set>

#include "mcdrop/error.hpp"
#include "mcdrop/projviz.hpp"
#include "mcdrop/random.hpp"
#include "testing.hpp"

using namespace mcdrop;

namespace {

SampleMatrix matrix(std::vector<std::vector<double>> rows, std::int64_t first_id = 1)
{
  SampleMatrix m;
  m.cols = rows.front().size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.ids.push_back(first_id + static_cast<std::int64_t>(i));
    m.values.insert(m.values.end(), rows[i].begin(), rows[i].end());
  }
  return m;
}

SampleMatrix two_clusters(std::size_t per, std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<std::vector<double>> rows;
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < per; ++i) {
      std::vector<double> r(8);
      for (double& v : r) v = std::clamp((c == 0 ? 0.15 : 0.85) + 0.04 * rng.normal(), 0.0, 1.0);
      rows.push_back(r);
    }
  return matrix(rows);
}

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

TEST_CASE("knn: points on a line")
{
  const SampleMatrix m = matrix({{0.0}, {1.0}, {3.0}});
  const KnnGraph g = knn_graph(m, 1);
  CHECK(g.neighbors_of(0)[0] == 1);
  CHECK(g.neighbors_of(1)[0] == 0);
  CHECK(g.neighbors_of(2)[0] == 1);
  CHECK(g.distances_of(2)[0] == 2.0);
  CHECK_THROWS_AS(knn_graph(m, 3), InputError);
  CHECK_THROWS_AS(knn_graph(m, 0), InputError);
}

TEST_CASE("knn: duplicates have distance zero and ties break by id")
{
  const SampleMatrix m = matrix({{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.9, 0.9}}, 10);
  const KnnGraph g = knn_graph(m, 2);
  CHECK(g.distances_of(0)[0] == 0.0);
  CHECK(g.neighbors_of(0)[0] == 1);
  CHECK(g.neighbors_of(0)[1] == 2);
  CHECK(g.neighbors_of(2)[0] == 0);
}

TEST_CASE("knn: brute force agreement")
{
  Rng rng(5);
  std::vector<std::vector<double>> rows(40, std::vector<double>(6));
  for (auto& r : rows)
    for (double& v : r) v = rng.uniform(0.0, 1.0);
  const SampleMatrix m = matrix(rows);
  const KnnGraph g = knn_graph(m, 7);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (std::size_t d = 0; d < 6; ++d) s += (rows[i][d] - rows[j][d]) * (rows[i][d] - rows[j][d]);
      all.emplace_back(std::sqrt(s), j);
    }
    std::sort(all.begin(), all.end());
    for (std::size_t r = 0; r < 7; ++r) {
      CHECK(g.neighbors_of(i)[r] == all[r].second);
      CHECK(std::abs(g.distances_of(i)[r] - all[r].first) < 1e-12);
    }
  }
}

TEST_CASE("fuzzy weights: calibration and symmetrization")
{
  const SampleMatrix m = two_clusters(15, 3);
  const std::size_t k = 6;
  const FuzzyGraph f = fuzzy_weights(knn_graph(m, k));
  for (std::size_t i = 0; i < f.n; ++i) {
    CHECK(f.directed[i * k] == 1.0);
    if (f.sigma_fallback[i]) continue;
    double s = 0.0;
    for (std::size_t r = 0; r < k; ++r) s += f.directed[i * k + r];
    CHECK(std::abs(s - std::log2(static_cast<double>(k))) < 1e-6);
  }
  for (const auto& e : f.edges) {
    CHECK(e.i < e.j);
    CHECK(e.weight > 0.0);
    CHECK(e.weight <= 1.0);
  }
  CHECK(fuzzy_union(1.0, 1.0) == 1.0);
  CHECK(fuzzy_union(0.5, 0.0) == 0.5);
  CHECK(fuzzy_union(0.5, 0.5) == 0.75);
}

TEST_CASE("curve fit for the default minimum distance")
{
  const CurveParams c = fit_curve(0.1, 1.0);
  CHECK(std::abs(c.a - 1.577) < 0.01);
  CHECK(std::abs(c.b - 0.895) < 0.01);
}

TEST_CASE("layout: two connected points are pulled together")
{
  FuzzyGraph g;
  g.n = 2;
  g.edges = {{0, 1, 1.0}};
  LayoutConfig cfg;
  cfg.negative_samples = 0;
  cfg.epochs = 100;
  const std::vector<Point2> init = {{-5.0, 0.0}, {5.0, 0.0}};
  const auto out = layout(g, cfg, init);
  CHECK(dist(out[0], out[1]) < 10.0);
}

TEST_CASE("layout: clusters separate and runs are reproducible")
{
  const SampleMatrix m = two_clusters(20, 9);
  ProjectionConfig cfg;
  cfg.k_nn = 8;
  cfg.grid = 40;
  cfg.layout.seed = 77;
  const Projection p = project(m, cfg);
  const Projection q = project(m, cfg);
  CHECK(p.coords == q.coords);

  auto centroid = [&](std::size_t lo) {
    Point2 c;
    for (std::size_t i = lo; i < lo + 20; ++i) {
      c.x += p.coords[i].x / 20.0;
      c.y += p.coords[i].y / 20.0;
    }
    return c;
  };
  const Point2 a = centroid(0), b = centroid(20);
  double spread = 0.0;
  for (std::size_t i = 0; i < 40; ++i) spread += dist(p.coords[i], i < 20 ? a : b) / 40.0;
  CHECK(dist(a, b) > 3.0 * spread);
}

TEST_CASE("projection is permutation invariant")
{
  SampleMatrix m = two_clusters(10, 4);
  ProjectionConfig cfg;
  cfg.k_nn = 5;
  cfg.grid = 30;
  cfg.layout.seed = 1;
  const Projection p = project(m, cfg);

  SampleMatrix r;
  r.cols = m.cols;
  for (std::size_t i = m.rows(); i-- > 0;) {
    r.ids.push_back(m.ids[i]);
    const auto row = m.row(i);
    r.values.insert(r.values.end(), row.begin(), row.end());
  }
  const Projection q = project(r, cfg);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    CHECK(q.ids[m.rows() - 1 - i] == p.ids[i]);
    CHECK(q.coords[m.rows() - 1 - i] == p.coords[i]);
  }
  CHECK(q.density.density == p.density.density);

  SampleMatrix dup = m;
  dup.ids[1] = dup.ids[0];
  CHECK_THROWS_AS(project(dup, cfg), InputError);
}

TEST_CASE("kde: single point peak and normalization")
{
  const std::vector<Point2> pts = {{2.0, -1.0}};
  const Bandwidth h{0.5, 0.5};
  const Box box{2.0 - 3.0, 2.0 + 3.0, -1.0 - 3.0, -1.0 + 3.0};
  const DensityGrid d = kde2d(pts, h, 121, box);
  const double peak = 1.0 / (2.0 * std::numbers::pi * 0.25);
  CHECK(std::abs(d.at(60, 60) - peak) < 1e-9);
  CHECK(d.max_density() == d.at(60, 60));
  CHECK(std::abs(d.integral() - 1.0) < 0.02);
  for (double v : d.density) CHECK(v >= 0.0);
  CHECK_THROWS_AS(kde2d(pts, 0.0, 10), InputError);
}

TEST_CASE("kde: two separated clusters give two maxima")
{
  std::vector<Point2> pts;
  for (int i = 0; i < 10; ++i) {
    pts.push_back({-5.0 + 0.1 * i, 0.0});
    pts.push_back({5.0 - 0.1 * i, 0.0});
  }
  const DensityGrid d = kde2d(pts, Bandwidth{0.5, 0.5}, 81, Box{-8, 8, -3, 3});
  const std::size_t mid = 40;
  int maxima = 0;
  for (std::size_t c = 1; c + 1 < d.size; ++c)
    if (d.at(mid, c) > d.at(mid, c - 1) && d.at(mid, c) >= d.at(mid, c + 1)) ++maxima;
  CHECK(maxima == 2);
  CHECK(d.at(mid, 40) < 0.01 * d.max_density());
}

TEST_CASE("scott bandwidth")
{
  const std::vector<Point2> pts = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  const Bandwidth h = scott_bandwidth(pts);
  const double sd = std::sqrt(5.0 / 3.0);
  CHECK(std::abs(h.x - sd * std::pow(4.0, -1.0 / 6.0)) < 1e-12);
  CHECK(h.y == h.x);
  const std::vector<Point2> one = {{1, 1}};
  CHECK(scott_bandwidth(one).x == 1.0);
}

TEST_CASE("contours: circle around a single point")
{
  const std::vector<Point2> pts = {{0.0, 0.0}};
  const DensityGrid d = kde2d(pts, Bandwidth{1.0, 1.0}, 61, Box{-4, 4, -4, 4});
  const auto levels = contour_levels(d, 3, 0.2, 0.8);
  REQUIRE(levels.size() == 3);
  for (const auto& lv : levels) {
    REQUIRE(!lv.segments.empty());
    // density exp(-r^2/2)/(2 pi) = level  =>  r = sqrt(-2 ln(2 pi level))
    const double r = std::sqrt(-2.0 * std::log(2.0 * std::numbers::pi * lv.level));
    for (const auto& s : lv.segments) {
      CHECK(std::abs(std::hypot(s.a.x, s.a.y) - r) < 0.05);
      CHECK(std::abs(std::hypot(s.b.x, s.b.y) - r) < 0.05);
    }
  }
  CHECK(levels[0].level < levels[1].level);
}

namespace {

std::vector<VizPoint> sample_points()
{
  return {{1, 0.0, 0.0, 0.9, 3, Outcome::TP, "a & b"},
          {2, 1.0, 1.0, 0.6, 2, Outcome::FP, "<x>"},
          {3, 2.0, 0.5, 0.1, 0, Outcome::TN, "c"},
          {4, 0.5, 2.0, 0.3, 1, Outcome::FN, "d"}};
}

}  // namespace

TEST_CASE("render: glyph per point with matching element and id")
{
  const auto pts = sample_points();
  const std::string svg = render_svg(pts, nullptr, {});
  const auto glyphs = testing::parse_glyphs(svg);
  REQUIRE(glyphs.size() == 4);
  std::map<long long, std::string> element;
  for (const auto& g : glyphs) element[g.id] = g.element;
  CHECK(element[1] == "circle");
  CHECK(element[2] == "rect");
  CHECK(element[3] == "path");
  CHECK(element[4] == "path");
  CHECK(svg.find("id=\"pt-3\"") != std::string::npos);
  CHECK(svg.find("a &amp; b") != std::string::npos);
  CHECK(svg.find("&lt;x&gt;") != std::string::npos);
  CHECK(svg.find("<x>") == std::string::npos);
  CHECK(glyph_element(Outcome::TP) == "circle");
  CHECK(glyph_element(Outcome::FP) == "rect");
  CHECK(render_svg(pts, nullptr, {}) == svg);
}

TEST_CASE("render: empty input gives a legend only")
{
  const std::string svg = render_svg({}, nullptr, {});
  CHECK(svg.find("class=\"glyph\"") == std::string::npos);
  CHECK(svg.find("<g id=\"legend\"") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("render: radius endpoints")
{
  const RenderOptions o;
  CHECK(glyph_radius(0.0, o) == o.r_min);
  CHECK(glyph_radius(1.0, o) == o.r_max);
  CHECK(glyph_radius(0.5, o) == (o.r_min + o.r_max) / 2.0);
  CHECK(glyph_radius(-1.0, o) == o.r_min);
}
