#include "pfwd/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pfwd/measure_io.hpp"

namespace pfwd {

namespace {

struct Token {
  std::string text;  // empty text marks end-of-line
  int line;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> toks;
  int line = 1;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      toks.push_back({cur, line});
      cur.clear();
    }
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      --i;
      continue;
    }
    if (c == '\n') {
      flush();
      toks.push_back({"", line});
      ++line;
    } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      flush();
    } else if (c == '{' || c == '}' || c == '[' || c == ']' || c == '=') {
      flush();
      toks.push_back({std::string(1, c), line});
    } else {
      cur += c;
    }
  }
  flush();
  toks.push_back({"", line});
  return toks;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " + msg);
}

struct Value;

struct Block {
  // insertion-ordered entries
  std::vector<std::pair<std::string, std::shared_ptr<Value>>> entries;
  int line = 0;
};

struct Value {
  std::vector<std::string> scalars;
  std::shared_ptr<Block> block;
  std::vector<std::shared_ptr<Block>> list;
  int line = 0;
  mutable bool used = false;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Block parse_top() {
    Block b;
    b.line = 1;
    parse_entries(b, /*top=*/true);
    return b;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_++]; }
  bool eof() const { return pos_ >= toks_.size(); }
  void skip_newlines() {
    while (!eof() && peek().text.empty() && pos_ + 1 < toks_.size()) ++pos_;
    while (!eof() && peek().text.empty() && pos_ + 1 == toks_.size()) ++pos_;
  }

  void parse_entries(Block& b, bool top) {
    while (true) {
      skip_newlines();
      if (eof()) {
        if (!top) fail(toks_.back().line, "unexpected end of input inside a block");
        return;
      }
      if (peek().text == "}" || peek().text == "]") {
        if (top) fail(peek().line, "unmatched '" + peek().text + "'");
        return;
      }
      Token name = take();
      if (name.text == "{" || name.text == "=" || name.text == "[")
        fail(name.line, "expected a key name, got '" + name.text + "'");
      auto val = std::make_shared<Value>();
      val->line = name.line;
      skip_newlines();
      if (eof()) fail(name.line, "dangling key '" + name.text + "'");
      if (peek().text == "{") {
        take();
        val->block = std::make_shared<Block>();
        val->block->line = name.line;
        parse_entries(*val->block, false);
        expect("}");
      } else if (peek().text == "[") {
        take();
        while (true) {
          skip_newlines();
          if (eof()) fail(name.line, "unterminated list for '" + name.text + "'");
          if (peek().text == "]") {
            take();
            break;
          }
          expect("{");
          auto item = std::make_shared<Block>();
          item->line = peek().line;
          parse_entries(*item, false);
          expect("}");
          val->list.push_back(std::move(item));
        }
      } else if (peek().text == "=") {
        take();
        skip_newlines_for_value();
        if (!eof() && peek().text == "{") {
          take();
          val->block = std::make_shared<Block>();
          val->block->line = name.line;
          parse_entries(*val->block, false);
          expect("}");
        } else {
          // scalars until end of line
          while (!eof() && !peek().text.empty() && peek().text != "}" && peek().text != "]") {
            if (peek().text == "{" || peek().text == "=" || peek().text == "[")
              fail(peek().line, "unexpected '" + peek().text + "' in value of '" + name.text + "'");
            val->scalars.push_back(take().text);
          }
          if (val->scalars.empty()) fail(name.line, "empty value for '" + name.text + "'");
        }
      } else {
        fail(name.line, "expected '=', '{' or '[' after '" + name.text + "'");
      }
      b.entries.emplace_back(name.text, std::move(val));
    }
  }

  void skip_newlines_for_value() {
    // a '=' may be followed by a '{' on the next line; scalars must not be
    while (!eof() && peek().text.empty()) {
      std::size_t save = pos_;
      ++pos_;
      if (!eof() && peek().text == "{") return;
      pos_ = save;
      return;
    }
  }

  void expect(const std::string& t) {
    skip_newlines();
    if (eof() || peek().text != t)
      fail(eof() ? toks_.back().line : peek().line, "expected '" + t + "'");
    take();
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// Typed accessors that track which keys were consumed so leftovers can be
// rejected by name and line.
class Section {
 public:
  Section(const Block* b, std::string path) : block_(b), path_(std::move(path)) {}

  const Value* find(const std::string& key) const {
    const Value* found = nullptr;
    for (const auto& [k, v] : block_->entries) {
      if (k == key) {
        if (found) fail(v->line, "duplicate key '" + key + "' in " + path_);
        found = v.get();
      }
    }
    if (found) found->used = true;
    return found;
  }
  const Value& require(const std::string& key) const {
    const Value* v = find(key);
    if (!v) fail(block_->line, "missing key '" + key + "' in " + path_);
    return *v;
  }

  double get_double(const std::string& key) const { return to_double(require(key), key); }
  double get_double(const std::string& key, double dflt) const {
    const Value* v = find(key);
    return v ? to_double(*v, key) : dflt;
  }
  int get_int(const std::string& key, int dflt) const {
    const Value* v = find(key);
    if (!v) return dflt;
    const double d = to_double(*v, key);
    if (d != std::floor(d)) fail(v->line, "'" + key + "' must be an integer");
    return static_cast<int>(d);
  }
  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
    const Value* v = find(key);
    if (!v) return dflt;
    return static_cast<std::uint64_t>(std::stoull(scalar(*v, key)));
  }
  bool get_bool(const std::string& key, bool dflt) const {
    const Value* v = find(key);
    if (!v) return dflt;
    const std::string& s = scalar(*v, key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    fail(v->line, "'" + key + "' must be true or false");
  }
  std::string get_string(const std::string& key) const { return scalar(require(key), key); }
  std::string get_string(const std::string& key, const std::string& dflt) const {
    const Value* v = find(key);
    return v ? scalar(*v, key) : dflt;
  }
  std::vector<double> get_vec(const std::string& key) const { return to_vec(require(key), key); }
  std::vector<double> get_vec(const std::string& key, std::vector<double> dflt) const {
    const Value* v = find(key);
    return v ? to_vec(*v, key) : dflt;
  }

  std::optional<Section> child(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    if (!v->block) fail(v->line, "'" + key + "' must be a block");
    return Section(v->block.get(), path_ + "." + key);
  }
  Section require_child(const std::string& key) const {
    auto c = child(key);
    if (!c) fail(block_->line, "missing block '" + key + "' in " + path_);
    return *c;
  }
  std::vector<Section> child_list(const std::string& key) const {
    const Value* v = find(key);
    std::vector<Section> out;
    if (!v) return out;
    if (v->list.empty() && !v->block) fail(v->line, "'" + key + "' must be a [ ... ] list");
    for (std::size_t i = 0; i < v->list.size(); ++i)
      out.emplace_back(v->list[i].get(), path_ + "." + key + "[" + std::to_string(i) + "]");
    return out;
  }

  /// Rejects any key that was never consumed.
  void finish() const {
    for (const auto& [k, v] : block_->entries)
      if (!v->used) fail(v->line, "unknown key '" + k + "' in " + path_);
  }
  int line() const { return block_->line; }

 private:
  static const std::string& scalar(const Value& v, const std::string& key) {
    if (v.scalars.size() != 1) fail(v.line, "'" + key + "' expects a single value");
    return v.scalars[0];
  }
  static double to_double(const Value& v, const std::string& key) {
    const std::string& s = scalar(v, key);
    try {
      std::size_t used;
      const double d = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return d;
    } catch (const std::exception&) {
      fail(v.line, "'" + key + "' is not a number: '" + s + "'");
    }
  }
  static std::vector<double> to_vec(const Value& v, const std::string& key) {
    if (v.scalars.empty()) fail(v.line, "'" + key + "' expects numbers");
    std::vector<double> out;
    for (const auto& s : v.scalars) {
      try {
        std::size_t used;
        out.push_back(std::stod(s, &used));
        if (used != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        fail(v.line, "'" + key + "' has a non-numeric entry: '" + s + "'");
      }
    }
    return out;
  }

  const Block* block_;
  std::string path_;
};

InitialSpec parse_initial(const Section& s) {
  InitialSpec spec;
  const std::string kind = s.get_string("kind", "gaussian");
  if (kind == "gaussian")
    spec.kind = InitialSpec::Kind::gaussian;
  else if (kind == "uniform_square")
    spec.kind = InitialSpec::Kind::uniform_square;
  else if (kind == "file")
    spec.kind = InitialSpec::Kind::file;
  else
    fail(s.line(), "initial kind must be gaussian, uniform_square or file");

  if (spec.kind == InitialSpec::Kind::file) {
    spec.file = s.get_string("file");
  } else {
    spec.center = s.get_vec("center");
    spec.sigma = s.get_double("sigma", 0.1);
    spec.halfwidth = s.get_double("halfwidth", 0.1);
    auto bbox = s.get_vec("bbox");
    if (bbox.size() != 2 * spec.center.size())
      fail(s.line(), "bbox must hold lo then hi, one pair per coordinate");
    const std::size_t n = spec.center.size();
    spec.bbox.lo.assign(bbox.begin(), bbox.begin() + n);
    spec.bbox.hi.assign(bbox.begin() + n, bbox.end());
    spec.normalize = s.get_bool("normalize", true);
    spec.ingest_quadrature = s.get_int("quadrature", 4);
    if (spec.sigma <= 0) fail(s.line(), "sigma must be positive");
    if (spec.halfwidth <= 0) fail(s.line(), "halfwidth must be positive");
  }
  s.finish();
  return spec;
}

VelocityModel parse_velocity(const Section& s) {
  VelocityModel m;
  const std::string desired = s.get_string("desired", "zero");
  if (desired == "zero") {
    m.desired.kind = DesiredField::Kind::zero;
  } else if (desired == "constant") {
    m.desired.kind = DesiredField::Kind::constant;
    m.desired.u = s.get_vec("u");
  } else if (desired == "to_target") {
    m.desired.kind = DesiredField::Kind::to_target;
    m.desired.target = s.get_vec("target");
    m.desired.gain = s.get_double("gain", 1);
    m.desired.vmax = s.get_double("vmax", 1);
    if (m.desired.gain <= 0 || m.desired.vmax <= 0) fail(s.line(), "gain and vmax must be positive");
  } else {
    fail(s.line(), "desired must be zero, constant or to_target");
  }

  if (auto k = s.child("kernel")) {
    InteractionSpec spec;
    const std::string shape = k->get_string("shape", "cone");
    if (shape != "cone") fail(k->line(), "kernel shape must be cone");
    spec.kernel.shape = KernelSpec::Shape::cone;
    spec.kernel.radius = k->get_double("radius");
    spec.kernel.peak = k->get_double("peak", 1);
    if (spec.kernel.radius <= 0 || spec.kernel.peak <= 0)
      fail(k->line(), "kernel radius and peak must be positive");
    k->finish();
    const std::string f = s.get_string("f", "power");
    if (f == "power") {
      spec.alpha = s.get_double("alpha", 1);
      if (spec.alpha < 1) fail(s.line(), "alpha must be >= 1");
    } else if (f == "constant") {
      spec.constant_weight = true;
    } else {
      fail(s.line(), "f must be power or constant");
    }
    m.interaction = spec;
  }
  s.finish();
  return m;
}

SchemeConfig parse_scheme(const Section& s, int& kind, std::vector<double>& origin) {
  SchemeConfig cfg;
  kind = s.get_int("kind", 4);
  if (kind != 1 && kind != 4 && kind != 5) fail(s.line(), "scheme kind must be 1, 4 or 5");
  cfg.T = s.get_double("T");
  cfg.dt = s.get_double("dt");
  cfg.dx = s.get_double("dx", 0);
  cfg.p = s.get_double("p", 2);
  cfg.substeps = s.get_int("substeps", 4);
  cfg.record_every = s.get_int("record_every", 1);
  cfg.quad_order = s.get_int("quadrature", 2);
  origin = s.get_vec("origin", {});
  if (cfg.dt <= 0) fail(s.line(), "dt must be positive");
  if (cfg.dx < 0) fail(s.line(), "dx must be nonnegative");
  if (kind != 1 && cfg.dx <= 0) fail(s.line(), "dx must be positive for grid schemes");
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    fail(s.line(), e.what());
  }
  s.finish();
  return cfg;
}

StudySpec parse_study(const Section& s) {
  StudySpec st;
  st.scheme_kind = s.get_int("scheme", 4);
  st.ladder_dx = s.get_vec("ladder_dx");
  st.ladder_dt = s.get_vec("ladder_dt", st.ladder_dx);
  st.refine = s.get_int("refine", 4);
  st.reference_scheme = s.get_int("reference_scheme", 4);
  st.reference_dx = s.get_double("reference_dx", 0);
  st.reference_dt = s.get_double("reference_dt", 0);
  if (st.ladder_dx.size() != st.ladder_dt.size())
    fail(s.line(), "ladder_dx and ladder_dt must have the same length");
  if (st.ladder_dx.size() < 3) fail(s.line(), "a ladder needs at least 3 levels");
  for (std::size_t i = 1; i < st.ladder_dx.size(); ++i)
    if (!(st.ladder_dx[i] < st.ladder_dx[i - 1]))
      fail(s.line(), "ladder_dx must be strictly decreasing");
  for (double v : st.ladder_dx)
    if (v <= 0) fail(s.line(), "ladder_dx entries must be positive");
  if (st.refine < 2) fail(s.line(), "refine must be >= 2");
  s.finish();
  return st;
}

}  // namespace

int InitialSpec::dim() const {
  if (kind == Kind::file) return 0;  // determined by the file
  return static_cast<int>(center.size());
}

Measure InitialSpec::build(const GridSpec& grid) const {
  switch (kind) {
    case Kind::file:
      return read_measure_file(file);
    case Kind::gaussian: {
      const auto c = center;
      const double s2 = 2 * sigma * sigma;
      ScalarField f = [c, s2](std::span<const double> x) {
        double e = 0;
        for (std::size_t d = 0; d < c.size(); ++d) e += sq(x[d] - c[d]);
        return std::exp(-e / s2);
      };
      return init_from_density(f, grid, bbox, ingest_quadrature, normalize);
    }
    case Kind::uniform_square: {
      const auto c = center;
      const double h = halfwidth;
      ScalarField f = [c, h](std::span<const double> x) {
        for (std::size_t d = 0; d < c.size(); ++d)
          if (std::abs(x[d] - c[d]) > h) return 0.0;
        return 1.0;
      };
      return init_from_density(f, grid, bbox, ingest_quadrature, normalize);
    }
  }
  throw std::logic_error("InitialSpec::build: unreachable");
}

RunConfig parse_config(const std::string& text) {
  Parser parser(tokenize(text));
  const Block top = parser.parse_top();
  Section root(&top, "config");

  RunConfig cfg;
  if (auto run = root.child("run")) {
    cfg.seed = run->get_u64("seed", 0);
    cfg.out_dir = run->get_string("out", "");
    run->finish();
  }
  cfg.scheme = parse_scheme(root.require_child("scheme"), cfg.scheme_kind, cfg.grid_origin);

  const auto populations = root.child_list("populations");
  if (!populations.empty()) {
    for (const auto& ps : populations) {
      PopulationSpec p;
      p.initial = parse_initial(ps.require_child("initial"));
      p.velocity = parse_velocity(ps.require_child("velocity"));
      p.weights = ps.get_vec("weights");
      ps.finish();
      cfg.populations.push_back(std::move(p));
    }
    for (const auto& p : cfg.populations)
      if (p.weights.size() != cfg.populations.size())
        throw std::runtime_error("config: population weights must have one entry per population");
  } else {
    cfg.initial = parse_initial(root.require_child("initial"));
    cfg.velocity = parse_velocity(root.require_child("velocity"));
  }

  if (auto atoms = root.child("atoms")) {
    if (auto file = atoms->get_string("file", ""); !file.empty()) {
      Measure m = read_measure_file(file);
      if (!std::holds_alternative<AtomCloud>(m))
        throw std::runtime_error("config: atoms file must hold an atom measure");
      cfg.atoms = std::get<AtomCloud>(m);
    } else {
      AtomCloud c;
      const auto flat = atoms->get_vec("list");
      const int dim = cfg.initial.dim() > 0 ? cfg.initial.dim() : 2;
      if (flat.size() % (dim + 1) != 0)
        throw std::runtime_error("config: atoms list must be x1..xn mass groups");
      c.dim = dim;
      for (std::size_t i = 0; i < flat.size(); i += dim + 1)
        c.push_back(std::span<const double>(flat.data() + i, dim), flat[i + dim]);
      cfg.atoms = c;
    }
    atoms->finish();
  }

  if (auto st = root.child("study")) cfg.study = parse_study(*st);

  root.finish();
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace pfwd
