#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "pfwd/common.hpp"

namespace pfwd {

/// Axis-aligned hypercube grid. Cell (k1,...,kn) covers the half-open box
/// [origin_d + k_d*cell_side, origin_d + (k_d+1)*cell_side), so every point
/// belongs to exactly one cell.
struct GridSpec {
  int dim = 0;
  double cell_side = 0;
  std::vector<double> origin;  // empty means all-zero anchor

  GridSpec() = default;
  GridSpec(int n, double side, std::vector<double> o = {});

  double origin_at(int d) const { return origin.empty() ? 0.0 : origin[d]; }
  CellIndex cell_of(std::span<const double> x) const;
  void cell_center(const CellIndex& c, std::span<double> out) const;
  double cell_volume() const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    if (a.dim != b.dim || a.cell_side != b.cell_side) return false;
    for (int d = 0; d < a.dim; ++d)
      if (a.origin_at(d) != b.origin_at(d)) return false;
    return true;
  }
};

/// Piecewise-constant density stored as per-cell mass (density = mass / side^n).
/// Only cells with nonzero mass are stored; the map ordering fixes a
/// deterministic iteration order.
struct GriddedDensity {
  GridSpec grid;
  std::map<CellIndex, double> cells;

  double total_mass() const;
  void add_mass(const CellIndex& c, double m);
};

/// Finitely many translated copies of one axis-aligned square (hypercube) of
/// a shared side length; squares may overlap.
struct SquareCloud {
  int dim = 0;
  double side = 0;
  std::vector<double> centers;  // count*dim, atom-major
  std::vector<double> mass;

  std::size_t size() const { return mass.size(); }
  std::span<const double> center(std::size_t i) const { return {centers.data() + i * dim, static_cast<std::size_t>(dim)}; }
  std::span<double> center(std::size_t i) { return {centers.data() + i * dim, static_cast<std::size_t>(dim)}; }
  void push_back(std::span<const double> c, double m);
  double total_mass() const;
};

/// Weighted Dirac atoms.
struct AtomCloud {
  int dim = 0;
  std::vector<double> pos;  // count*dim, atom-major
  std::vector<double> mass;

  std::size_t size() const { return mass.size(); }
  std::span<const double> position(std::size_t i) const { return {pos.data() + i * dim, static_cast<std::size_t>(dim)}; }
  std::span<double> position(std::size_t i) { return {pos.data() + i * dim, static_cast<std::size_t>(dim)}; }
  void push_back(std::span<const double> p, double m);
  void append(const AtomCloud& other);
  double total_mass() const;
};

/// Absolutely continuous part plus a Dirac part that never exchange mass.
struct MultiScaleMeasure {
  std::variant<GriddedDensity, SquareCloud> ac;
  AtomCloud atoms;
};

using Measure = std::variant<GriddedDensity, SquareCloud, AtomCloud, MultiScaleMeasure>;

/// A finite family of measures sharing the ambient dimension.
struct PopulationVector {
  std::vector<Measure> populations;
};

int measure_dim(const Measure& m);
double total_mass(const Measure& m);

/// Mass-preserving projection onto the grid: each cell receives exactly the
/// input mass it contains. Square masses are split by exact box-overlap
/// volumes; atoms go to their containing cell (half-open convention).
GriddedDensity grid_project(const SquareCloud& m, const GridSpec& g);
GriddedDensity grid_project(const AtomCloud& m, const GridSpec& g);
GriddedDensity grid_project(const GriddedDensity& m, const GridSpec& g);
GriddedDensity grid_project(const Measure& m, const GridSpec& g);

/// Replaces each square/cell by q^n equal-mass atoms at midpoint-rule nodes.
/// Nodes are interior, so no atom ever sits on a cell boundary.
AtomCloud to_quadrature(const SquareCloud& m, int q);
AtomCloud to_quadrature(const GriddedDensity& m, int q);
AtomCloud to_quadrature(const Measure& m, int q);

/// Upper bound on W_p(m, to_quadrature(m, q)) from redistributing mass inside
/// each square: sqrt(n) * (side/q) * mass^(1/p). Zero for atomic measures.
double quadrature_halo(const Measure& m, int q, double p);

using ScalarField = std::function<double(std::span<const double>)>;

struct Box {
  std::vector<double> lo, hi;
};

/// Midpoint-rule ingestion of a nonnegative density over a bounding box.
GriddedDensity init_from_density(const ScalarField& f, const GridSpec& g, const Box& bbox,
                                 int q, bool normalize);

/// Exact L1 distance between two densities on the same grid.
double l1_distance(const GriddedDensity& a, const GriddedDensity& b);

}  // namespace pfwd
