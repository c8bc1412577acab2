#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcdrop/evalharness.hpp"
#include "mcdrop/mcd.hpp"

namespace mcdrop {

struct Point2
{
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

// n documents x K probability samples.
struct SampleMatrix
{
  std::vector<std::int64_t> ids;
  std::size_t cols = 0;
  std::vector<double> values;

  std::size_t rows() const { return ids.size(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }

  // Throws InputError on ragged sample counts.
  static SampleMatrix from_samples(std::span<const SampleVector> samples);
};

// ---- neighbour graph -------------------------------------------------------

// k nearest neighbours of each row (Euclidean), nearest first. Ties are
// broken by document id so the graph does not depend on row order.
struct KnnGraph
{
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::size_t> neighbors;  // n*k
  std::vector<double> distances;       // n*k

  std::span<const std::size_t> neighbors_of(std::size_t i) const { return {neighbors.data() + i * k, k}; }
  std::span<const double> distances_of(std::size_t i) const { return {distances.data() + i * k, k}; }
};

KnnGraph knn_graph(const SampleMatrix& m, std::size_t k_nn);

struct FuzzyEdge
{
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;
};

struct FuzzyGraph
{
  std::size_t n = 0;
  std::vector<double> rho;              // distance to nearest neighbour
  std::vector<double> sigma;            // calibrated bandwidth
  std::vector<bool> sigma_fallback;     // bisection did not converge
  std::vector<double> directed;         // n*k membership strengths before symmetrization
  std::vector<FuzzyEdge> edges;         // symmetrized, i < j, sorted by (i, j)
};

inline double fuzzy_union(double a, double b) { return a + b - a * b; }

// Smooth-kNN calibration: rho_i is the nearest-neighbour distance and sigma_i
// is found by bisection so that sum_j exp(-max(0, d_ij - rho_i) / sigma_i)
// equals log2(k). After 64 iterations without convergence sigma_i falls back
// to the mean neighbour distance. Symmetrized with a + b - ab.
FuzzyGraph fuzzy_weights(const KnnGraph& g);

// ---- layout ----------------------------------------------------------------

struct CurveParams
{
  double a = 0.0;
  double b = 0.0;
};

// Least-squares fit of 1 / (1 + a d^(2b)) to the min_dist/spread target curve.
CurveParams fit_curve(double min_dist, double spread = 1.0);

struct LayoutConfig
{
  std::size_t epochs = 200;
  std::size_t negative_samples = 5;
  double min_dist = 0.1;
  double learning_rate = 1.0;
  double init_scale = 10.0;  // std of the Gaussian initialization
  double clip = 4.0;
  std::uint64_t seed = 0;
};

std::vector<Point2> random_init(std::size_t n, const LayoutConfig& cfg);

// Attractive/repulsive SGD with negative sampling over the fuzzy graph.
// Edges are visited at a rate proportional to their weight; each gradient
// component is clipped to +-clip.
std::vector<Point2> layout(const FuzzyGraph& g, const LayoutConfig& cfg);
std::vector<Point2> layout(const FuzzyGraph& g, const LayoutConfig& cfg, std::vector<Point2> init);

// ---- density ---------------------------------------------------------------

struct Bandwidth
{
  double x = 1.0;
  double y = 1.0;
};

// Scott's rule per axis: n^(-1/6) * sample std. A degenerate axis borrows
// the other axis' bandwidth, or 1 when both are degenerate.
Bandwidth scott_bandwidth(std::span<const Point2> points);

struct Box
{
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

// Bounding box plus 10% of the extent on every side (3h for a zero extent).
Box padded_bounds(std::span<const Point2> points, Bandwidth h);

// Gaussian KDE sampled on a size x size lattice spanning `box` (edges
// included). density[row * size + col], row indexing y.
struct DensityGrid
{
  std::size_t size = 0;
  Box box;
  Bandwidth bandwidth;
  std::vector<double> density;

  double dx() const { return (box.x1 - box.x0) / static_cast<double>(size - 1); }
  double dy() const { return (box.y1 - box.y0) / static_cast<double>(size - 1); }
  double x_at(std::size_t col) const { return box.x0 + dx() * static_cast<double>(col); }
  double y_at(std::size_t row) const { return box.y0 + dy() * static_cast<double>(row); }
  double at(std::size_t row, std::size_t col) const { return density[row * size + col]; }
  double max_density() const;
  // Riemann sum of density * cell area.
  double integral() const;
};

DensityGrid kde2d(std::span<const Point2> points, double h, std::size_t grid);
DensityGrid kde2d(std::span<const Point2> points, Bandwidth h, std::size_t grid,
                  std::optional<Box> box = std::nullopt);

struct Segment
{
  Point2 a, b;
};

struct ContourLevel
{
  double level = 0.0;
  std::vector<Segment> segments;
};

// Marching squares at `count` levels evenly spaced from lo*max to hi*max.
std::vector<ContourLevel> contour_levels(const DensityGrid& grid, std::size_t count = 5,
                                         double lo = 0.1, double hi = 0.9);

// ---- pipeline --------------------------------------------------------------

struct ProjectionConfig
{
  std::size_t k_nn = 15;
  LayoutConfig layout;
  std::size_t grid = 100;
  std::size_t contours = 5;
};

struct Projection
{
  std::vector<std::int64_t> ids;   // input row order
  std::vector<Point2> coords;      // aligned with ids
  DensityGrid density;
  std::vector<ContourLevel> contours;
};

// Runs kNN -> fuzzy graph -> layout -> KDE -> contours. Rows are processed in
// id order internally, so permuting the input permutes the output rows and
// nothing else. k_nn is capped at n - 1.
Projection project(const SampleMatrix& m, const ProjectionConfig& cfg);

void write_coords_csv(std::ostream& out, std::span<const std::int64_t> ids,
                      std::span<const Point2> coords);

// ---- rendering -------------------------------------------------------------

struct VizPoint
{
  std::int64_t id = 0;
  double x = 0.0;
  double y = 0.0;
  double mean = 0.0;
  int bin = 0;
  Outcome outcome = Outcome::TN;
  std::string label;  // hover text; the visible label is the id
};

struct RenderOptions
{
  int width = 900;
  int height = 700;
  int legend_width = 190;
  int margin = 30;
  double r_min = 3.0;
  double r_max = 9.0;
  std::string title = "MC dropout predictions";
};

// Linear in mean over [r_min, r_max].
double glyph_radius(double mean, const RenderOptions& opts);

// Element names per outcome: TP circle, FP rect (square), TN path (diagonal
// cross), FN path (upright plus).
std::string_view glyph_element(Outcome o);

std::string render_svg(std::span<const VizPoint> points, const DensityGrid* density,
                       std::span<const ContourLevel> contours, const RenderOptions& opts = {});

// Writes render_svg output; throws InputError when the file cannot be written.
void render(std::span<const VizPoint> points, const DensityGrid* density,
            std::span<const ContourLevel> contours, const std::filesystem::path& out,
            const RenderOptions& opts = {});

}  // namespace mcdrop
