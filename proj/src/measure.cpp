#include "pfwd/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pfwd {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0;
    for (double x : v) s += x;
    return s;
  }
  std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

GridSpec::GridSpec(int n, double side, std::vector<double> o)
    : dim(n), cell_side(side), origin(std::move(o)) {
  if (n < 1 || n > kMaxDim) throw std::invalid_argument("GridSpec: dimension out of range");
  if (!(side > 0)) throw std::invalid_argument("GridSpec: cell side must be positive");
  if (!origin.empty() && static_cast<int>(origin.size()) != n)
    throw std::invalid_argument("GridSpec: origin dimension mismatch");
}

CellIndex GridSpec::cell_of(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("GridSpec::cell_of: dimension mismatch");
  CellIndex c;
  c.dim = dim;
  for (int d = 0; d < dim; ++d)
    c.idx[d] = static_cast<std::int64_t>(std::floor((x[d] - origin_at(d)) / cell_side));
  return c;
}

void GridSpec::cell_center(const CellIndex& c, std::span<double> out) const {
  for (int d = 0; d < dim; ++d)
    out[d] = origin_at(d) + (static_cast<double>(c.idx[d]) + 0.5) * cell_side;
}

double GridSpec::cell_volume() const {
  double v = 1;
  for (int d = 0; d < dim; ++d) v *= cell_side;
  return v;
}

double GriddedDensity::total_mass() const {
  std::vector<double> m;
  m.reserve(cells.size());
  for (const auto& [c, v] : cells) m.push_back(v);
  return pairwise_sum(m);
}

void GriddedDensity::add_mass(const CellIndex& c, double m) {
  if (m == 0) return;
  cells[c] += m;
}

void SquareCloud::push_back(std::span<const double> c, double m) {
  centers.insert(centers.end(), c.begin(), c.end());
  mass.push_back(m);
}

double SquareCloud::total_mass() const { return pairwise_sum(mass); }

void AtomCloud::push_back(std::span<const double> p, double m) {
  pos.insert(pos.end(), p.begin(), p.end());
  mass.push_back(m);
}

void AtomCloud::append(const AtomCloud& other) {
  if (other.size() == 0) return;
  if (dim == 0 && pos.empty()) dim = other.dim;
  if (dim != other.dim) throw std::invalid_argument("AtomCloud::append: dimension mismatch");
  pos.insert(pos.end(), other.pos.begin(), other.pos.end());
  mass.insert(mass.end(), other.mass.begin(), other.mass.end());
}

double AtomCloud::total_mass() const { return pairwise_sum(mass); }

int measure_dim(const Measure& m) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GriddedDensity>) return v.grid.dim;
        else if constexpr (std::is_same_v<T, MultiScaleMeasure>)
          return std::visit([](const auto& ac) -> int {
            using A = std::decay_t<decltype(ac)>;
            if constexpr (std::is_same_v<A, GriddedDensity>) return ac.grid.dim;
            else return ac.dim;
          }, v.ac);
        else return v.dim;
      },
      m);
}

double total_mass(const Measure& m) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, MultiScaleMeasure>) {
          double ac = std::visit([](const auto& a) { return a.total_mass(); }, v.ac);
          return ac + v.atoms.total_mass();
        } else {
          return v.total_mass();
        }
      },
      m);
}

namespace {

// Distributes the mass of one axis-aligned box uniformly over the grid cells
// it overlaps, by exact per-axis overlap lengths.
void project_box(const GridSpec& g, std::span<const double> center, double side, double m,
                 GriddedDensity& out) {
  const int n = g.dim;
  const double half = side / 2;
  std::array<std::int64_t, kMaxDim> k_lo{}, k_hi{};
  for (int d = 0; d < n; ++d) {
    const double lo = center[d] - half, hi = center[d] + half;
    k_lo[d] = static_cast<std::int64_t>(std::floor((lo - g.origin_at(d)) / g.cell_side));
    k_hi[d] = static_cast<std::int64_t>(std::floor((hi - g.origin_at(d)) / g.cell_side));
  }
  const double inv_vol = 1.0 / [&] {
    double v = 1;
    for (int d = 0; d < n; ++d) v *= side;
    return v;
  }();

  CellIndex c;
  c.dim = n;
  std::array<std::int64_t, kMaxDim> k = k_lo;
  while (true) {
    double frac = m * inv_vol;
    for (int d = 0; d < n; ++d) {
      const double cell_lo = g.origin_at(d) + static_cast<double>(k[d]) * g.cell_side;
      const double cell_hi = cell_lo + g.cell_side;
      const double ov = std::min(cell_hi, center[d] + half) - std::max(cell_lo, center[d] - half);
      frac *= std::max(0.0, ov);
    }
    if (frac != 0) {
      c.idx = k;
      out.add_mass(c, frac);
    }
    int d = 0;
    while (d < n && ++k[d] > k_hi[d]) {
      k[d] = k_lo[d];
      ++d;
    }
    if (d == n) break;
  }
}

}  // namespace

GriddedDensity grid_project(const SquareCloud& m, const GridSpec& g) {
  if (m.dim != g.dim) throw std::invalid_argument("grid_project: dimension mismatch");
  check_finite(m.centers, "grid_project");
  GriddedDensity out;
  out.grid = g;
  for (std::size_t i = 0; i < m.size(); ++i)
    project_box(g, m.center(i), m.side, m.mass[i], out);
  return out;
}

GriddedDensity grid_project(const AtomCloud& m, const GridSpec& g) {
  if (m.dim != g.dim) throw std::invalid_argument("grid_project: dimension mismatch");
  check_finite(m.pos, "grid_project");
  GriddedDensity out;
  out.grid = g;
  for (std::size_t i = 0; i < m.size(); ++i)
    out.add_mass(g.cell_of(m.position(i)), m.mass[i]);
  return out;
}

GriddedDensity grid_project(const GriddedDensity& m, const GridSpec& g) {
  if (m.grid.dim != g.dim) throw std::invalid_argument("grid_project: dimension mismatch");
  if (m.grid == g) return m;
  GriddedDensity out;
  out.grid = g;
  std::vector<double> c(g.dim);
  for (const auto& [cell, mass] : m.cells) {
    m.grid.cell_center(cell, c);
    project_box(g, c, m.grid.cell_side, mass, out);
  }
  return out;
}

GriddedDensity grid_project(const Measure& m, const GridSpec& g) {
  return std::visit(
      [&](const auto& v) -> GriddedDensity {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, MultiScaleMeasure>)
          throw std::invalid_argument("grid_project: multi-scale measures keep their parts separate");
        else
          return grid_project(v, g);
      },
      m);
}

namespace {

void box_quadrature(std::span<const double> center, double side, double m, int q, AtomCloud& out) {
  const int n = static_cast<int>(center.size());
  const double w = m / std::pow(static_cast<double>(q), n);
  std::array<int, kMaxDim> k{};
  std::array<double, kMaxDim> node{};
  while (true) {
    for (int d = 0; d < n; ++d)
      node[d] = center[d] + ((k[d] + 0.5) / q - 0.5) * side;
    out.push_back(std::span<const double>(node.data(), n), w);
    int d = 0;
    while (d < n && ++k[d] == q) {
      k[d] = 0;
      ++d;
    }
    if (d == n) break;
  }
}

}  // namespace

AtomCloud to_quadrature(const SquareCloud& m, int q) {
  if (q < 1) throw std::invalid_argument("to_quadrature: q must be >= 1");
  AtomCloud out;
  out.dim = m.dim;
  for (std::size_t i = 0; i < m.size(); ++i)
    box_quadrature(m.center(i), m.side, m.mass[i], q, out);
  return out;
}

AtomCloud to_quadrature(const GriddedDensity& m, int q) {
  if (q < 1) throw std::invalid_argument("to_quadrature: q must be >= 1");
  AtomCloud out;
  out.dim = m.grid.dim;
  std::vector<double> c(m.grid.dim);
  for (const auto& [cell, mass] : m.cells) {
    m.grid.cell_center(cell, c);
    box_quadrature(c, m.grid.cell_side, mass, q, out);
  }
  return out;
}

AtomCloud to_quadrature(const Measure& m, int q) {
  return std::visit(
      [&](const auto& v) -> AtomCloud {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AtomCloud>) {
          return v;
        } else if constexpr (std::is_same_v<T, MultiScaleMeasure>) {
          AtomCloud out = std::visit([&](const auto& ac) { return to_quadrature(ac, q); }, v.ac);
          out.append(v.atoms);
          return out;
        } else {
          return to_quadrature(v, q);
        }
      },
      m);
}

double quadrature_halo(const Measure& m, int q, double p) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AtomCloud>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, SquareCloud>) {
          return std::sqrt(static_cast<double>(v.dim)) * (v.side / q) *
                 std::pow(v.total_mass(), 1.0 / p);
        } else if constexpr (std::is_same_v<T, GriddedDensity>) {
          return std::sqrt(static_cast<double>(v.grid.dim)) * (v.grid.cell_side / q) *
                 std::pow(v.total_mass(), 1.0 / p);
        } else {
          // Only the absolutely continuous part is redistributed.
          return std::visit([&](const auto& ac) { return quadrature_halo(Measure(ac), q, p); },
                            v.ac);
        }
      },
      m);
}

GriddedDensity init_from_density(const ScalarField& f, const GridSpec& g, const Box& bbox,
                                 int q, bool normalize) {
  if (q < 1) throw std::invalid_argument("init_from_density: q must be >= 1");
  const int n = g.dim;
  if (static_cast<int>(bbox.lo.size()) != n || static_cast<int>(bbox.hi.size()) != n)
    throw std::invalid_argument("init_from_density: bbox dimension mismatch");
  for (int d = 0; d < n; ++d)
    if (!(bbox.lo[d] < bbox.hi[d])) throw std::invalid_argument("init_from_density: empty bbox");

  std::array<std::int64_t, kMaxDim> k_lo{}, k_hi{};
  for (int d = 0; d < n; ++d) {
    k_lo[d] = static_cast<std::int64_t>(std::floor((bbox.lo[d] - g.origin_at(d)) / g.cell_side));
    k_hi[d] = static_cast<std::int64_t>(std::floor((bbox.hi[d] - g.origin_at(d)) / g.cell_side));
  }

  GriddedDensity out;
  out.grid = g;
  const double node_w = g.cell_volume() / std::pow(static_cast<double>(q), n);
  std::array<std::int64_t, kMaxDim> k = k_lo;
  std::vector<double> center(n), node(n);
  CellIndex c;
  c.dim = n;
  while (true) {
    c.idx = k;
    g.cell_center(c, center);
    double cell_mass = 0;
    std::array<int, kMaxDim> s{};
    while (true) {
      bool inside = true;
      for (int d = 0; d < n; ++d) {
        node[d] = center[d] + ((s[d] + 0.5) / q - 0.5) * g.cell_side;
        inside = inside && node[d] >= bbox.lo[d] && node[d] < bbox.hi[d];
      }
      if (inside) {
        const double v = f(node);
        if (v < 0) throw std::invalid_argument("init_from_density: density negative at a sample node");
        cell_mass += v * node_w;
      }
      int d = 0;
      while (d < n && ++s[d] == q) {
        s[d] = 0;
        ++d;
      }
      if (d == n) break;
    }
    out.add_mass(c, cell_mass);
    int d = 0;
    while (d < n && ++k[d] > k_hi[d]) {
      k[d] = k_lo[d];
      ++d;
    }
    if (d == n) break;
  }

  if (normalize) {
    const double m = out.total_mass();
    if (!(m > 0)) throw std::invalid_argument("init_from_density: zero total mass, cannot normalize");
    for (auto& [cell, mass] : out.cells) mass /= m;
  }
  return out;
}

double l1_distance(const GriddedDensity& a, const GriddedDensity& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("l1_distance: grid mismatch");
  double s = 0;
  auto ia = a.cells.begin();
  auto ib = b.cells.begin();
  while (ia != a.cells.end() || ib != b.cells.end()) {
    if (ib == b.cells.end() || (ia != a.cells.end() && ia->first < ib->first)) {
      s += std::abs(ia->second);
      ++ia;
    } else if (ia == a.cells.end() || ib->first < ia->first) {
      s += std::abs(ib->second);
      ++ib;
    } else {
      s += std::abs(ia->second - ib->second);
      ++ia;
      ++ib;
    }
  }
  return s;
}

}  // namespace pfwd
