#include "pfwd/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pfwd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Network simplex for the uncapacitated transportation problem on the
// complete bipartite graph. Costs are evaluated on demand from the atom
// positions, so no m*k matrix is materialized. The basis is a spanning tree
// over sources, sinks and an artificial root; pivoting follows the usual
// block-search rule with the strongly-feasible leaving-arc tie-break
// (tail side strict, head side non-strict).
class TransportSimplex {
 public:
  TransportSimplex(const AtomCloud& a, std::vector<std::size_t> src_ids,
                   const AtomCloud& b, std::vector<std::size_t> dst_ids,
                   std::vector<double> supply, std::vector<double> demand, double p)
      : a_(a),
        b_(b),
        src_(std::move(src_ids)),
        dst_(std::move(dst_ids)),
        supply_(std::move(supply)),
        demand_(std::move(demand)),
        p_(p),
        m_(src_.size()),
        k_(dst_.size()),
        nodes_(m_ + k_ + 1),
        root_(m_ + k_),
        n_real_(m_ * k_) {}

  void solve() {
    init();
    const std::size_t block = std::max<std::size_t>(64, static_cast<std::size_t>(std::sqrt(static_cast<double>(n_real_))));
    const long long max_pivots = 1000 + 64LL * static_cast<long long>(nodes_) *
                                            (2 + static_cast<long long>(std::log2(static_cast<double>(nodes_) + 2)));
    long long pivots = 0;
    std::size_t cursor = 0;
    while (true) {
      const std::size_t e = find_entering(cursor, block);
      if (e == n_real_) break;
      pivot(e);
      if (++pivots > max_pivots)
        throw std::runtime_error("wasserstein_atoms: pivot limit exceeded");
    }
    certify();
  }

  TransportPlan extract_plan() const {
    TransportPlan plan;
    std::vector<double> costs;
    for (std::size_t a = 0; a < n_real_; ++a) {
      if (flow_[a] > 0) {
        const std::size_t i = a / k_, j = a % k_;
        plan.entries.push_back({static_cast<std::int32_t>(src_[i]),
                                static_cast<std::int32_t>(dst_[j]), flow_[a]});
        costs.push_back(flow_[a] * cost(a));
      }
    }
    plan.cost_p = std::max(0.0, pairwise_sum(costs));
    return plan;
  }

 private:
  double cost(std::size_t arc) const {
    const std::size_t i = arc / k_, j = arc % k_;
    return pow_dist(dist2(a_.position(src_[i]), b_.position(dst_[j])), p_);
  }

  std::size_t tail(std::size_t arc) const {
    if (arc < n_real_) return arc / k_;
    const std::size_t t = arc - n_real_;
    return t < m_ ? t : root_;
  }
  std::size_t head(std::size_t arc) const {
    if (arc < n_real_) return m_ + arc % k_;
    const std::size_t t = arc - n_real_;
    return t < m_ ? root_ : t;
  }
  double arc_cost(std::size_t arc) const { return arc < n_real_ ? cost(arc) : art_cost_; }

  void init() {
    flow_.assign(n_real_ + nodes_ - 1, 0.0);
    parent_.assign(nodes_, -1);
    pred_arc_.assign(nodes_, SIZE_MAX);
    pred_up_.assign(nodes_, false);
    depth_.assign(nodes_, 0);
    pi_.assign(nodes_, 0.0);
    basis_.clear();
    basis_.reserve(nodes_ - 1);

    double cmax = 0;
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < k_; ++j)
        cmax = std::max(cmax, pow_dist(dist2(a_.position(src_[i]), b_.position(dst_[j])), p_));
    cost_scale_ = 1 + cmax;
    art_cost_ = cost_scale_ * static_cast<double>(nodes_);
    eps_pivot_ = 1e-13 * cost_scale_;

    for (std::size_t t = 0; t < m_ + k_; ++t) {
      const std::size_t arc = n_real_ + t;
      flow_[arc] = t < m_ ? supply_[t] : demand_[t - m_];
      basis_.push_back(arc);
    }
    rebuild_tree();
  }

  void rebuild_tree() {
    adj_head_.assign(nodes_, -1);
    adj_next_.assign(2 * basis_.size(), -1);
    adj_node_.assign(2 * basis_.size(), 0);
    adj_arc_.assign(2 * basis_.size(), 0);
    int slot = 0;
    auto add = [&](std::size_t x, std::size_t y, std::size_t arc) {
      adj_node_[slot] = y;
      adj_arc_[slot] = arc;
      adj_next_[slot] = adj_head_[x];
      adj_head_[x] = slot++;
    };
    for (std::size_t arc : basis_) {
      add(tail(arc), head(arc), arc);
      add(head(arc), tail(arc), arc);
    }
    stack_.clear();
    stack_.push_back(root_);
    parent_[root_] = -1;
    pred_arc_[root_] = SIZE_MAX;
    depth_[root_] = 0;
    pi_[root_] = 0;
    visited_.assign(nodes_, false);
    visited_[root_] = true;
    while (!stack_.empty()) {
      const std::size_t x = stack_.back();
      stack_.pop_back();
      for (int s = adj_head_[x]; s != -1; s = adj_next_[s]) {
        const std::size_t y = adj_node_[s];
        if (visited_[y]) continue;
        visited_[y] = true;
        const std::size_t arc = adj_arc_[s];
        parent_[y] = static_cast<long long>(x);
        pred_arc_[y] = arc;
        pred_up_[y] = tail(arc) == y;
        depth_[y] = depth_[x] + 1;
        pi_[y] = pred_up_[y] ? pi_[x] - arc_cost(arc) : pi_[x] + arc_cost(arc);
        stack_.push_back(y);
      }
    }
    for (std::size_t t = 0; t < nodes_; ++t)
      if (!visited_[t]) throw std::runtime_error("wasserstein_atoms: basis lost connectivity");
  }

  double reduced(std::size_t arc) const {
    return cost(arc) + pi_[arc / k_] - pi_[m_ + arc % k_];
  }

  // Block search over real arcs: most negative reduced cost within the
  // current block, cycling until a full wrap finds nothing.
  std::size_t find_entering(std::size_t& cursor, std::size_t block) {
    std::size_t scanned = 0;
    while (scanned < n_real_) {
      double best = -eps_pivot_;
      std::size_t best_arc = n_real_;
      const std::size_t count = std::min(block, n_real_ - scanned);
      for (std::size_t s = 0; s < count; ++s) {
        const std::size_t arc = cursor;
        cursor = cursor + 1 == n_real_ ? 0 : cursor + 1;
        const double r = reduced(arc);
        if (r < best) {
          best = r;
          best_arc = arc;
        }
      }
      scanned += count;
      if (best_arc != n_real_) return best_arc;
    }
    return n_real_;
  }

  void pivot(std::size_t enter) {
    const std::size_t u = tail(enter), v = head(enter);
    // lowest common ancestor
    std::size_t x = u, y = v;
    while (depth_[x] > depth_[y]) x = static_cast<std::size_t>(parent_[x]);
    while (depth_[y] > depth_[x]) y = static_cast<std::size_t>(parent_[y]);
    while (x != y) {
      x = static_cast<std::size_t>(parent_[x]);
      y = static_cast<std::size_t>(parent_[y]);
    }
    const std::size_t join = x;

    // theta = max flow decrease available on the cycle; the leaving arc
    // tie-break keeps the basis strongly feasible.
    double theta = kInf;
    std::size_t leave = SIZE_MAX;
    bool leave_on_u_side = true;
    for (std::size_t t = u; t != join; t = static_cast<std::size_t>(parent_[t])) {
      if (pred_up_[t] && flow_[pred_arc_[t]] < theta) {
        theta = flow_[pred_arc_[t]];
        leave = pred_arc_[t];
        leave_on_u_side = true;
      }
    }
    for (std::size_t t = v; t != join; t = static_cast<std::size_t>(parent_[t])) {
      if (!pred_up_[t] && flow_[pred_arc_[t]] <= theta) {
        theta = flow_[pred_arc_[t]];
        leave = pred_arc_[t];
        leave_on_u_side = false;
      }
    }
    if (leave == SIZE_MAX) throw std::runtime_error("wasserstein_atoms: unbounded pivot");

    flow_[enter] += theta;
    for (std::size_t t = u; t != join; t = static_cast<std::size_t>(parent_[t]))
      flow_[pred_arc_[t]] += pred_up_[t] ? -theta : theta;
    for (std::size_t t = v; t != join; t = static_cast<std::size_t>(parent_[t]))
      flow_[pred_arc_[t]] += pred_up_[t] ? theta : -theta;
    flow_[leave] = 0;
    (void)leave_on_u_side;

    for (auto& arc : basis_) {
      if (arc == leave) {
        arc = enter;
        break;
      }
    }
    rebuild_tree();
  }

  void certify() const {
    const double tol = 1e-10 * cost_scale_;
    for (std::size_t arc = 0; arc < n_real_; ++arc)
      if (reduced(arc) < -tol)
        throw std::runtime_error("wasserstein_atoms: optimality certificate failed");
    double total = 0;
    for (std::size_t i = 0; i < m_; ++i) total += supply_[i];
    for (std::size_t t = 0; t < m_ + k_; ++t)
      if (flow_[n_real_ + t] > 1e-9 * (1 + total))
        throw std::runtime_error("wasserstein_atoms: residual artificial flow (infeasible)");
  }

  const AtomCloud& a_;
  const AtomCloud& b_;
  std::vector<std::size_t> src_, dst_;
  std::vector<double> supply_, demand_;
  double p_;
  std::size_t m_, k_, nodes_, root_, n_real_;
  double cost_scale_ = 1, art_cost_ = 0, eps_pivot_ = 0;

  std::vector<double> flow_;
  std::vector<long long> parent_;
  std::vector<std::size_t> pred_arc_;
  std::vector<char> pred_up_;
  std::vector<int> depth_;
  std::vector<double> pi_;
  std::vector<std::size_t> basis_;

  std::vector<int> adj_head_, adj_next_;
  std::vector<std::size_t> adj_node_, adj_arc_;
  std::vector<char> visited_;
  std::vector<std::size_t> stack_;
};

}  // namespace

WassersteinResult wasserstein_atoms(const AtomCloud& a, const AtomCloud& b, double p) {
  if (p < 1) throw std::invalid_argument("wasserstein_atoms: p must be >= 1");
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("wasserstein_atoms: empty cloud");
  if (a.dim != b.dim) throw std::invalid_argument("wasserstein_atoms: dimension mismatch");
  check_finite(a.pos, "wasserstein_atoms");
  check_finite(b.pos, "wasserstein_atoms");

  const double ma = a.total_mass(), mb = b.total_mass();
  if (std::abs(ma - mb) > 1e-9 * std::max(ma, mb))
    throw std::invalid_argument("wasserstein_atoms: total mass mismatch");

  std::vector<std::size_t> src, dst;
  std::vector<double> supply, demand;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.mass[i] < 0) throw std::invalid_argument("wasserstein_atoms: negative mass");
    if (a.mass[i] > 0) {
      src.push_back(i);
      supply.push_back(a.mass[i]);
    }
  }
  const double scale = mb == 0 ? 1.0 : ma / mb;  // absorb the tolerated mismatch
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (b.mass[j] < 0) throw std::invalid_argument("wasserstein_atoms: negative mass");
    if (b.mass[j] > 0) {
      dst.push_back(j);
      demand.push_back(b.mass[j] * scale);
    }
  }

  WassersteinResult res;
  res.p = p;
  if (src.empty() && dst.empty()) return res;  // two zero measures
  if (src.empty() || dst.empty())
    throw std::invalid_argument("wasserstein_atoms: total mass mismatch");
  if (src.size() > kMaxAtomsPerSide || dst.size() > kMaxAtomsPerSide)
    throw std::invalid_argument("wasserstein_atoms: instance exceeds the per-side atom cap");

  TransportSimplex simplex(a, std::move(src), b, std::move(dst), std::move(supply),
                           std::move(demand), p);
  simplex.solve();
  res.plan = simplex.extract_plan();
  res.value = std::pow(res.plan.cost_p, 1.0 / p);
  return res;
}

double wasserstein_bruteforce(const AtomCloud& a, const AtomCloud& b, double p) {
  if (a.size() != b.size()) throw std::invalid_argument("wasserstein_bruteforce: unequal atom counts");
  const std::size_t k = a.size();
  if (k == 0 || k > 8) throw std::invalid_argument("wasserstein_bruteforce: supports 1..8 atoms");
  const double m0 = a.mass[0];
  for (std::size_t i = 0; i < k; ++i)
    if (std::abs(a.mass[i] - m0) > 1e-12 * m0 || std::abs(b.mass[i] - m0) > 1e-12 * m0)
      throw std::invalid_argument("wasserstein_bruteforce: masses must be equal");

  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = kInf;
  do {
    double c = 0;
    for (std::size_t i = 0; i < k; ++i)
      c += m0 * pow_dist(dist2(a.position(i), b.position(perm[i])), p);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow(best, 1.0 / p);
}

double wasserstein_1d(const AtomCloud& a, const AtomCloud& b, double p) {
  if (a.dim != 1 || b.dim != 1) throw std::invalid_argument("wasserstein_1d: dimension must be 1");
  const double ma = a.total_mass(), mb = b.total_mass();
  if (std::abs(ma - mb) > 1e-9 * std::max(ma, mb))
    throw std::invalid_argument("wasserstein_1d: total mass mismatch");

  auto sorted_ids = [](const AtomCloud& c) {
    std::vector<std::size_t> ids(c.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::sort(ids.begin(), ids.end(), [&](std::size_t i, std::size_t j) { return c.pos[i] < c.pos[j]; });
    return ids;
  };
  const auto ia = sorted_ids(a), ib = sorted_ids(b);

  // monotone coupling between the two quantile functions
  double cost = 0;
  std::size_t i = 0, j = 0;
  double ra = i < ia.size() ? a.mass[ia[i]] : 0;
  double rb = j < ib.size() ? b.mass[ib[j]] * (ma / mb) : 0;
  while (i < ia.size() && j < ib.size()) {
    if (ra == 0) {
      ra = ++i < ia.size() ? a.mass[ia[i]] : 0;
      continue;
    }
    if (rb == 0) {
      rb = ++j < ib.size() ? b.mass[ib[j]] * (ma / mb) : 0;
      continue;
    }
    const double w = std::min(ra, rb);
    const double d = std::abs(a.pos[ia[i]] - b.pos[ib[j]]);
    cost += w * pow_dist(d * d, p);
    ra -= w;
    rb -= w;
  }
  return std::pow(std::max(0.0, cost), 1.0 / p);
}

MeasureDistance wasserstein_measures(const Measure& a, const Measure& b, double p, int q) {
  const AtomCloud qa = to_quadrature(a, q);
  const AtomCloud qb = to_quadrature(b, q);
  MeasureDistance d;
  d.estimate = wasserstein_atoms(qa, qb, p).value;
  d.halo = quadrature_halo(a, q, p) + quadrature_halo(b, q, p);
  return d;
}

std::vector<TimedDistance> trajectory_distance_profile(const Trajectory& a, const Trajectory& b,
                                                       double p, int q) {
  const double tol = std::min(a.config.dt, b.config.dt) * 1e-9;
  std::vector<TimedDistance> out;
  for (const auto& fa : a.frames) {
    for (const auto& fb : b.frames) {
      if (std::abs(fa.time - fb.time) <= tol) {
        const auto d = wasserstein_measures(fa.measure, fb.measure, p, q);
        out.push_back({fa.time, d.estimate, d.halo});
        break;
      }
    }
  }
  if (out.empty()) throw std::invalid_argument("trajectory_distance: no common timestamps");
  return out;
}

double trajectory_distance(const Trajectory& a, const Trajectory& b, double p, int q) {
  double best = 0;
  for (const auto& d : trajectory_distance_profile(a, b, p, q)) best = std::max(best, d.estimate);
  return best;
}

}  // namespace pfwd
