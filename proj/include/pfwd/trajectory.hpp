#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfwd/measure.hpp"

namespace pfwd {

struct SchemeConfig {
  double T = 1;
  double dt = 0.1;
  double dx = 0;       // schemes with a spatial grid
  double p = 2;        // distance exponent used by studies on this run
  int substeps = 4;    // flow-integration substeps per dt interval
  int record_every = 1;
  int quad_order = 2;  // single discretization knob: velocity and distance quadrature

  // T/dt must be a positive integer.
  int steps() const {
    if (!(dt > 0) || !(T > 0)) throw std::invalid_argument("SchemeConfig: T and dt must be positive");
    const double raw = T / dt;
    const int n = static_cast<int>(std::llround(raw));
    if (n < 1 || std::abs(n * dt - T) > 1e-9 * T)
      throw std::invalid_argument("SchemeConfig: T/dt is not an integer (T=" + std::to_string(T) +
                                  ", dt=" + std::to_string(dt) + ")");
    return n;
  }
  void validate() const {
    (void)steps();
    if (substeps < 1) throw std::invalid_argument("SchemeConfig: substeps must be >= 1");
    if (record_every < 1) throw std::invalid_argument("SchemeConfig: record_every must be >= 1");
    if (quad_order < 1) throw std::invalid_argument("SchemeConfig: quad_order must be >= 1");
    if (!(p >= 1)) throw std::invalid_argument("SchemeConfig: p must be >= 1");
  }
};

/// Time-indexed sequence of measures produced by a scheme run.
struct Trajectory {
  struct Frame {
    double time;
    Measure measure;
  };
  std::vector<Frame> frames;
  std::string scheme;
  SchemeConfig config;

  const Frame& at_time(double t, double tol) const {
    for (const auto& f : frames)
      if (std::abs(f.time - t) <= tol) return f;
    throw std::invalid_argument("Trajectory: no frame at requested time");
  }
};

}  // namespace pfwd
