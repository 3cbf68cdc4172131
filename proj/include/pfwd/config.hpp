#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pfwd/measure.hpp"
#include "pfwd/schemes.hpp"
#include "pfwd/trajectory.hpp"
#include "pfwd/velocity.hpp"

namespace pfwd {

// Line-oriented config text: `section { key = value ... }` blocks, nested
// blocks allowed inline (`kernel = { radius = 0.4 }`), `populations [ { ... }
// { ... } ]` lists. '#' starts a comment. Unknown keys are rejected with the
// offending line number.

struct InitialSpec {
  enum class Kind { gaussian, uniform_square, file };
  Kind kind = Kind::gaussian;
  std::vector<double> center;
  double sigma = 0.1;      // gaussian
  double halfwidth = 0.1;  // uniform_square
  Box bbox;
  bool normalize = true;
  std::string file;
  int ingest_quadrature = 4;

  /// Materializes the initial measure at the resolution of the given grid.
  Measure build(const GridSpec& grid) const;
  int dim() const;
};

struct PopulationSpec {
  InitialSpec initial;
  VelocityModel velocity;
  std::vector<double> weights;
};

struct StudySpec {
  int scheme_kind = 4;
  std::vector<double> ladder_dx;
  std::vector<double> ladder_dt;  // same length as ladder_dx
  int refine = 4;
  int reference_scheme = 4;
  double reference_dx = 0;  // 0 means finest dx / refine
  double reference_dt = 0;  // 0 means finest dt / refine
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir;
  int scheme_kind = 4;  // 1, 4 or 5
  SchemeConfig scheme;
  std::vector<double> grid_origin;
  InitialSpec initial;
  VelocityModel velocity;
  std::optional<AtomCloud> atoms;  // singular part (multi-scale runs)
  std::vector<PopulationSpec> populations;
  std::optional<StudySpec> study;
};

/// Parses and fully validates; throws std::runtime_error with a line-numbered
/// message on the first problem.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace pfwd
