#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfwd {

// Ambient dimensions are small (1-3 in practice); indices are stored in a
// fixed-capacity array so they can be used as ordered map keys without
// heap traffic.
inline constexpr int kMaxDim = 8;

struct CellIndex {
  std::array<std::int64_t, kMaxDim> idx{};
  int dim = 0;

  friend bool operator==(const CellIndex& a, const CellIndex& b) {
    if (a.dim != b.dim) return false;
    for (int d = 0; d < a.dim; ++d)
      if (a.idx[d] != b.idx[d]) return false;
    return true;
  }
  friend bool operator<(const CellIndex& a, const CellIndex& b) {
    if (a.dim != b.dim) return a.dim < b.dim;
    for (int d = 0; d < a.dim; ++d)
      if (a.idx[d] != b.idx[d]) return a.idx[d] < b.idx[d];
    return false;
  }
};

struct CellIndexHash {
  std::size_t operator()(const CellIndex& c) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(c.dim);
    for (int d = 0; d < c.dim; ++d) {
      std::uint64_t x = static_cast<std::uint64_t>(c.idx[d]);
      x *= 0xbf58476d1ce4e5b9ull;
      x ^= x >> 31;
      h = (h ^ x) * 0x94d049bb133111ebull;
    }
    return static_cast<std::size_t>(h);
  }
};

// Pairwise (cascade) summation keeps the accumulation error at
// O(log n) ulps, which the mass-conservation tolerances rely on.
double pairwise_sum(std::span<const double> v);

inline double sq(double x) { return x * x; }

inline double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t d = 0; d < a.size(); ++d) s += sq(a[d] - b[d]);
  return s;
}

inline double dist(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(dist2(a, b));
}

inline double norm(std::span<const double> a) {
  double s = 0;
  for (double x : a) s += sq(x);
  return std::sqrt(s);
}

// |x - y|^p with fast paths for the common exponents.
inline double pow_dist(double d2, double p) {
  if (p == 2.0) return d2;
  double d = std::sqrt(d2);
  if (p == 1.0) return d;
  if (p == 4.0) return d2 * d2;
  return std::pow(d, p);
}

inline void check_finite(std::span<const double> x, const char* what) {
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite coordinate");
}

}  // namespace pfwd
