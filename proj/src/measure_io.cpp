#include "pfwd/measure_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pfwd {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest exact round-trip
  return std::string(buf, res.ptr);
}

namespace {

void write_header(std::ostream& os, const char* kind, int dim) {
  os << "measure " << kind << " dim=" << dim;
}

void write_point(std::ostream& os, std::span<const double> p) {
  for (double x : p) os << ' ' << format_double(x);
}

}  // namespace

void write_measure(std::ostream& os, const Measure& m) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GriddedDensity>) {
          write_header(os, "gridded", v.grid.dim);
          os << " side=" << format_double(v.grid.cell_side) << " origin=";
          for (int d = 0; d < v.grid.dim; ++d)
            os << (d ? " " : "") << format_double(v.grid.origin_at(d));
          os << '\n';
          for (const auto& [c, mass] : v.cells) {
            os << "cell";
            for (int d = 0; d < c.dim; ++d) os << ' ' << c.idx[d];
            os << ' ' << format_double(mass) << '\n';
          }
        } else if constexpr (std::is_same_v<T, SquareCloud>) {
          write_header(os, "squares", v.dim);
          os << " side=" << format_double(v.side) << '\n';
          for (std::size_t i = 0; i < v.size(); ++i) {
            os << "square";
            write_point(os, v.center(i));
            os << ' ' << format_double(v.mass[i]) << '\n';
          }
        } else if constexpr (std::is_same_v<T, AtomCloud>) {
          write_header(os, "atoms", v.dim);
          os << '\n';
          for (std::size_t i = 0; i < v.size(); ++i) {
            os << "atom";
            write_point(os, v.position(i));
            os << ' ' << format_double(v.mass[i]) << '\n';
          }
        } else {
          throw std::invalid_argument("write_measure: write multi-scale parts as separate files");
        }
      },
      m);
}

void write_measure_file(const std::string& path, const Measure& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_measure(os, m);
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("measure file: bad number '" + s + "'");
  }
}

}  // namespace

Measure read_measure(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("measure file: empty input");
  auto head = split_ws(line);
  if (head.size() < 3 || head[0] != "measure")
    throw std::runtime_error("measure file: bad header '" + line + "'");
  const std::string kind = head[1];
  int dim = 0;
  double side = 0;
  std::vector<double> origin;
  for (std::size_t i = 2; i < head.size(); ++i) {
    const auto& tok = head[i];
    if (tok.rfind("dim=", 0) == 0) {
      dim = std::stoi(tok.substr(4));
    } else if (tok.rfind("side=", 0) == 0) {
      side = parse_double(tok.substr(5));
    } else if (tok.rfind("origin=", 0) == 0) {
      origin.push_back(parse_double(tok.substr(7)));
      while (origin.size() < static_cast<std::size_t>(dim) && ++i < head.size())
        origin.push_back(parse_double(head[i]));
    } else {
      throw std::runtime_error("measure file: unknown header field '" + tok + "'");
    }
  }
  if (dim < 1 || dim > kMaxDim) throw std::runtime_error("measure file: bad dimension");

  auto read_record = [&](const std::string& tag, const std::string& l,
                         std::vector<double>& coords, double& mass) {
    auto tok = split_ws(l);
    if (tok.empty()) return false;
    if (tok[0] != tag || tok.size() != static_cast<std::size_t>(dim) + 2)
      throw std::runtime_error("measure file: bad record '" + l + "'");
    coords.resize(dim);
    for (int d = 0; d < dim; ++d) coords[d] = parse_double(tok[1 + d]);
    mass = parse_double(tok.back());
    return true;
  };

  if (kind == "gridded") {
    if (!(side > 0)) throw std::runtime_error("measure file: gridded kind needs side=");
    GriddedDensity g;
    g.grid = GridSpec(dim, side, origin);
    while (std::getline(is, line)) {
      auto tok = split_ws(line);
      if (tok.empty()) continue;
      if (tok[0] != "cell" || tok.size() != static_cast<std::size_t>(dim) + 2)
        throw std::runtime_error("measure file: bad record '" + line + "'");
      CellIndex c;
      c.dim = dim;
      for (int d = 0; d < dim; ++d) c.idx[d] = std::stoll(tok[1 + d]);
      g.add_mass(c, parse_double(tok.back()));
    }
    return g;
  }
  if (kind == "squares") {
    if (!(side > 0)) throw std::runtime_error("measure file: squares kind needs side=");
    SquareCloud s;
    s.dim = dim;
    s.side = side;
    std::vector<double> c;
    double mass;
    while (std::getline(is, line))
      if (read_record("square", line, c, mass)) s.push_back(c, mass);
    return s;
  }
  if (kind == "atoms") {
    AtomCloud a;
    a.dim = dim;
    std::vector<double> c;
    double mass;
    while (std::getline(is, line))
      if (read_record("atom", line, c, mass)) a.push_back(c, mass);
    return a;
  }
  throw std::runtime_error("measure file: unknown kind '" + kind + "'");
}

Measure read_measure_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_measure(is);
}

}  // namespace pfwd
