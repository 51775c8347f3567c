#include "greenchain/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "greenchain/errors.hpp"

namespace greenchain {

namespace {
constexpr double kRowSumTol = 1e-12;
}

TreeChain::TreeChain(std::vector<Vertex> vertices,
                     std::vector<std::pair<Vertex, Vertex>> edges,
                     std::map<Vertex, TransitionRow> transitions,
                     std::optional<std::set<Vertex>> leaves)
    : vertices_(std::move(vertices)), rows_(std::move(transitions)) {
  std::sort(vertices_.begin(), vertices_.end());
  vertices_.erase(std::unique(vertices_.begin(), vertices_.end()),
                  vertices_.end());
  const std::set<Vertex> known(vertices_.begin(), vertices_.end());

  for (Vertex v : vertices_) adj_[v];
  for (const auto& [u, v] : edges) {
    if (!known.count(u) || !known.count(v)) {
      throw spec_error("edge (" + std::to_string(u) + ", " +
                       std::to_string(v) + ") references an unknown vertex");
    }
    if (u == v) {
      throw spec_error("self-edge at vertex " + std::to_string(u) +
                       "; self-transitions belong in the rows");
    }
    auto& au = adj_[u];
    if (std::find(au.begin(), au.end(), v) != au.end()) {
      throw spec_error("duplicate edge (" + std::to_string(u) + ", " +
                       std::to_string(v) + ")");
    }
    au.push_back(v);
    adj_[v].push_back(u);
  }
  for (auto& [v, nbrs] : adj_) std::sort(nbrs.begin(), nbrs.end());

  for (const auto& [v, row] : rows_) {
    if (!known.count(v)) {
      throw spec_error("transition row for unknown vertex " +
                       std::to_string(v));
    }
  }

  if (leaves.has_value()) {
    for (Vertex v : *leaves) {
      if (!known.count(v)) {
        throw spec_error("leaf set references unknown vertex " +
                         std::to_string(v));
      }
    }
    leaves_ = std::move(*leaves);
  } else {
    for (Vertex v : vertices_) {
      if (adj_.at(v).size() == 1) leaves_.insert(v);
    }
  }
}

TreeChain TreeChain::prune(const TreeChain& host, const std::set<Vertex>& keep) {
  for (Vertex v : keep) {
    if (!host.has_vertex(v)) {
      throw spec_error("prune subset references unknown vertex " +
                       std::to_string(v));
    }
  }
  if (keep.empty()) {
    throw spec_error("prune subset is empty");
  }

  std::vector<Vertex> vertices(keep.begin(), keep.end());
  std::vector<std::pair<Vertex, Vertex>> edges;
  std::map<Vertex, std::size_t> degree;
  for (Vertex v : vertices) degree[v] = 0;
  for (Vertex v : vertices) {
    for (Vertex w : host.neighbors(v)) {
      if (v < w && keep.count(w)) {
        edges.emplace_back(v, w);
        ++degree[v];
        ++degree[w];
      }
    }
  }

  // New leaves: degree-one vertices of the induced subtree. Every other
  // kept vertex stays live and must keep a fully stochastic row: deleted
  // transitions are not re-normalized away, they make the input invalid.
  std::set<Vertex> new_leaves;
  for (const auto& [v, d] : degree) {
    if (d == 1) new_leaves.insert(v);
  }
  std::map<Vertex, TransitionRow> rows;
  for (Vertex v : vertices) {
    if (new_leaves.count(v)) continue;
    if (host.is_leaf(v)) {
      throw spec_error("pruned host leaf " + std::to_string(v) +
                       " would become interior but carries no row");
    }
    const TransitionRow& row = host.row(v);
    TransitionRow kept_row;
    kept_row.self = row.self;
    double lost = 0.0;
    for (const auto& [w, p] : row.to) {
      if (keep.count(w)) {
        kept_row.to[w] = p;
      } else {
        lost += p;
      }
    }
    if (lost > kRowSumTol) {
      std::ostringstream os;
      os << "vertex " << v << " loses probability mass " << lost
         << " to pruned states; supply a consistent sub-chain";
      throw spec_error(os.str());
    }
    rows[v] = std::move(kept_row);
  }
  TreeChain out(std::move(vertices), std::move(edges), std::move(rows),
                std::move(new_leaves));
  out.require_valid();
  return out;
}

const std::vector<Vertex>& TreeChain::neighbors(Vertex v) const {
  auto it = adj_.find(v);
  if (it == adj_.end()) {
    throw std::domain_error("vertex " + std::to_string(v) +
                            " is not in the tree");
  }
  return it->second;
}

bool TreeChain::has_vertex(Vertex v) const {
  return adj_.count(v) != 0;
}

std::vector<Vertex> TreeChain::interior() const {
  std::vector<Vertex> out;
  for (Vertex v : vertices_) {
    if (!is_leaf(v)) out.push_back(v);
  }
  return out;
}

const TransitionRow& TreeChain::row(Vertex v) const {
  if (is_leaf(v)) {
    throw std::domain_error("leaf vertex " + std::to_string(v) +
                            " carries no transition row");
  }
  auto it = rows_.find(v);
  if (it == rows_.end()) {
    throw std::domain_error("vertex " + std::to_string(v) +
                            " has no transition row");
  }
  return it->second;
}

double TreeChain::p(Vertex v, Vertex w) const {
  if (is_leaf(v)) return 0.0;
  auto it = rows_.find(v);
  if (it == rows_.end()) return 0.0;
  if (v == w) return it->second.self;
  auto jt = it->second.to.find(w);
  return jt == it->second.to.end() ? 0.0 : jt->second;
}

std::vector<Violation> TreeChain::validate() const {
  std::vector<Violation> out;

  // Shape: connected and |E| = |V| - 1.
  std::size_t degree_total = 0;
  for (const auto& [v, nbrs] : adj_) degree_total += nbrs.size();
  const std::size_t edge_count = degree_total / 2;
  if (edge_count + 1 != vertices_.size()) {
    out.push_back({std::nullopt, "adjacency is not a tree: " +
                                     std::to_string(edge_count) +
                                     " edges for " +
                                     std::to_string(vertices_.size()) +
                                     " vertices"});
  } else if (!vertices_.empty()) {
    std::set<Vertex> seen{vertices_.front()};
    std::deque<Vertex> queue{vertices_.front()};
    while (!queue.empty()) {
      const Vertex v = queue.front();
      queue.pop_front();
      for (Vertex w : adj_.at(v)) {
        if (seen.insert(w).second) queue.push_back(w);
      }
    }
    if (seen.size() != vertices_.size()) {
      out.push_back({std::nullopt, "adjacency is not connected"});
    }
  }

  for (Vertex v : leaves_) {
    if (adj_.at(v).size() != 1) {
      out.push_back({v, "leaf " + std::to_string(v) + " has degree " +
                            std::to_string(adj_.at(v).size()) +
                            ", leaves must have degree 1"});
    }
  }

  for (Vertex v : vertices_) {
    if (is_leaf(v)) continue;
    auto it = rows_.find(v);
    if (it == rows_.end()) {
      out.push_back({v, "interior vertex " + std::to_string(v) +
                            " is missing its transition row"});
      continue;
    }
    const TransitionRow& row = it->second;
    bool finite = std::isfinite(row.self);
    for (const auto& [w, p] : row.to) finite = finite && std::isfinite(p);
    if (!finite) {
      out.push_back({v, "non-finite probability at vertex " +
                            std::to_string(v)});
      continue;
    }
    if (row.self < 0.0 || row.self >= 1.0) {
      out.push_back({v, "self-probability must lie in [0, 1) at vertex " +
                            std::to_string(v)});
    }
    const auto& nbrs = adj_.at(v);
    for (const auto& [w, p] : row.to) {
      if (std::find(nbrs.begin(), nbrs.end(), w) == nbrs.end()) {
        out.push_back({v, "row at vertex " + std::to_string(v) +
                              " jumps to non-neighbor " + std::to_string(w)});
      }
    }
    for (Vertex w : nbrs) {
      auto jt = row.to.find(w);
      if (jt == row.to.end() || !(jt->second > 0.0)) {
        out.push_back({v, "p(" + std::to_string(v) + ", " +
                              std::to_string(w) +
                              ") must be > 0 for a tree neighbor"});
      }
    }
    double sum = row.self;
    for (const auto& [w, p] : row.to) sum += p;
    if (std::abs(sum - 1.0) > kRowSumTol) {
      std::ostringstream os;
      os << "row sum " << sum << " != 1 at vertex " << v;
      out.push_back({v, os.str()});
    }
  }
  return out;
}

void TreeChain::require_valid() const {
  const auto violations = validate();
  if (violations.empty()) return;
  std::ostringstream os;
  os << "invalid tree chain: ";
  const std::size_t shown = std::min<std::size_t>(violations.size(), 3);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) os << "; ";
    os << violations[i].message;
  }
  if (violations.size() > shown) {
    os << "; and " << violations.size() - shown << " more";
  }
  throw spec_error(os.str());
}

TreePath find_path(const TreeChain& tc, Vertex j, Vertex k) {
  if (!tc.has_vertex(j) || !tc.has_vertex(k)) {
    throw std::domain_error("path endpoints must be tree vertices");
  }
  TreePath path;
  path.j = j;
  path.k = k;
  if (j == k) return path;

  std::map<Vertex, Vertex> parent;
  std::deque<Vertex> queue{j};
  parent[j] = j;
  while (!queue.empty() && !parent.count(k)) {
    const Vertex v = queue.front();
    queue.pop_front();
    for (Vertex w : tc.neighbors(v)) {
      if (parent.emplace(w, v).second) queue.push_back(w);
    }
  }
  if (!parent.count(k)) {
    throw std::domain_error("no path between " + std::to_string(j) + " and " +
                            std::to_string(k));
  }
  std::vector<Vertex> reversed;
  for (Vertex v = parent.at(k); v != j; v = parent.at(v)) {
    reversed.push_back(v);
  }
  path.intermediate.assign(reversed.rbegin(), reversed.rend());
  return path;
}

ConductanceNetwork assign_conductances(const TreeChain& tc, Vertex root,
                                       double seed) {
  tc.require_valid();
  if (!tc.has_vertex(root)) {
    throw std::domain_error("root vertex " + std::to_string(root) +
                            " is not in the tree");
  }
  if (!(seed > 0.0) || !std::isfinite(seed)) {
    throw std::invalid_argument("conductance seed must be positive");
  }
  if (tc.vertices().size() < 2) {
    throw std::domain_error("tree has no edges to assign");
  }

  ConductanceNetwork net;
  for (Vertex v : tc.vertices()) net.add_vertex(v);

  // Seed the root's smallest-id edge, then propagate outward in BFS
  // order: each visited vertex already knows the conductance toward its
  // parent, and its row fixes every other incident edge via
  // C_{vw} = C_{vu} p(v,w) / p(v,u). Leaves have no row and need none:
  // their single edge is always set from the other side.
  struct Item {
    Vertex v;
    Vertex parent;
  };
  std::deque<Item> queue;
  std::set<Vertex> visited{root};

  const Vertex first = tc.neighbors(root).front();
  net.add_edge(root, first, seed);
  if (!tc.is_leaf(root)) {
    const double p_first = tc.p(root, first);
    const double total = seed / p_first;
    for (Vertex w : tc.neighbors(root)) {
      if (w != first) net.add_edge(root, w, total * tc.p(root, w));
    }
    if (tc.p(root, root) > 0.0) net.set_loop(root, total * tc.p(root, root));
  }
  for (Vertex w : tc.neighbors(root)) {
    visited.insert(w);
    queue.push_back({w, root});
  }

  while (!queue.empty()) {
    const Item item = queue.front();
    queue.pop_front();
    const Vertex v = item.v;
    if (tc.is_leaf(v)) continue;
    const double c_parent = net.edge(v, item.parent);
    const double total = c_parent / tc.p(v, item.parent);
    for (Vertex w : tc.neighbors(v)) {
      if (w == item.parent) continue;
      net.add_edge(v, w, total * tc.p(v, w));
      visited.insert(w);
      queue.push_back({w, v});
    }
    if (tc.p(v, v) > 0.0) net.set_loop(v, total * tc.p(v, v));
  }
  return net;
}

TreeChain recover_probabilities(const ConductanceNetwork& net,
                                std::optional<std::set<Vertex>> leaves) {
  if (!net.is_tree()) {
    throw spec_error("network is not a tree; cannot recover a tree chain");
  }
  const auto violations = net.validate();
  if (!violations.empty()) {
    throw spec_error("invalid network: " + violations.front().message);
  }

  std::set<Vertex> leaf_set;
  if (leaves.has_value()) {
    leaf_set = std::move(*leaves);
  } else {
    // The network does not record absorption; degree-one vertices without
    // a loop are the natural default.
    for (Vertex v : net.vertices()) {
      if (net.neighbors(v).size() == 1 && net.loop(v) == 0.0) {
        leaf_set.insert(v);
      }
    }
  }

  std::vector<Vertex> vertices = net.vertices();
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (Vertex v : vertices) {
    for (const auto& [w, c] : net.neighbors(v)) {
      if (v < w) edges.emplace_back(v, w);
    }
  }
  std::map<Vertex, TransitionRow> rows;
  for (Vertex v : vertices) {
    if (leaf_set.count(v)) continue;
    const double total = net.total_conductance(v);
    TransitionRow row;
    row.self = net.loop(v) / total;
    for (const auto& [w, c] : net.neighbors(v)) {
      row.to[w] = c / total;
    }
    rows[v] = std::move(row);
  }
  return TreeChain(std::move(vertices), std::move(edges), std::move(rows),
                   std::move(leaf_set));
}

RatioValue path_ratio(const TreeChain& tc, Vertex j, Vertex k) {
  tc.require_valid();
  if (j == k) {
    throw std::invalid_argument("degenerate pair: j == k == " +
                                std::to_string(j));
  }
  for (Vertex v : {j, k}) {
    if (!tc.has_vertex(v) || tc.is_leaf(v)) {
      throw std::domain_error("vertex " + std::to_string(v) +
                              " is not an interior vertex");
    }
  }
  const TreePath path = find_path(tc, j, k);
  std::vector<Vertex> walk;
  walk.reserve(path.intermediate.size() + 2);
  walk.push_back(j);
  walk.insert(walk.end(), path.intermediate.begin(), path.intermediate.end());
  walk.push_back(k);

  bool direct_ok = walk.size() <= 33;
  for (std::size_t i = 0; i + 1 < walk.size() && direct_ok; ++i) {
    const double f = tc.p(walk[i], walk[i + 1]);
    const double b = tc.p(walk[i + 1], walk[i]);
    direct_ok = f >= 1e-3 && f <= 1e3 && b >= 1e-3 && b <= 1e3;
  }
  if (direct_ok) {
    long double num = 1.0L;
    long double den = 1.0L;
    for (std::size_t i = 0; i + 1 < walk.size(); ++i) {
      num *= tc.p(walk[i], walk[i + 1]);
      den *= tc.p(walk[i + 1], walk[i]);
    }
    const double value = static_cast<double>(num / den);
    return RatioValue{value, std::log(value)};
  }

  KahanSum log_sum;
  for (std::size_t i = 0; i + 1 < walk.size(); ++i) {
    log_sum.add(std::log(tc.p(walk[i], walk[i + 1])));
    log_sum.add(-std::log(tc.p(walk[i + 1], walk[i])));
  }
  const double log_ratio = log_sum.value();
  return RatioValue{std::exp(log_ratio), log_ratio};
}

GreenResult green_tree(const TreeChain& tc, Vertex x, Vertex y) {
  tc.require_valid();
  for (Vertex v : {x, y}) {
    if (!tc.has_vertex(v) || tc.is_leaf(v)) {
      throw std::domain_error("vertex " + std::to_string(v) +
                              " is not an interior vertex");
    }
  }
  if (tc.leaves().empty()) {
    throw std::domain_error(
        "tree has no absorbing leaves; visit counts are undefined");
  }

  // I - Q over the interior block. The interior of a tree is again a
  // tree (leaves have degree one), so eliminating its leaves inward
  // creates no fill: each elimination touches only the one edge to the
  // not-yet-eliminated neighbor.
  const std::vector<Vertex> interior = tc.interior();
  std::map<Vertex, long double> diag;
  std::map<Vertex, long double> rhs;
  std::map<Vertex, std::map<Vertex, double>> off;  // off[v][w] = -p(v,w)
  std::map<Vertex, std::set<Vertex>> live;         // remaining neighbors
  for (Vertex v : interior) {
    diag[v] = 1.0L - tc.p(v, v);
    rhs[v] = (v == y) ? 1.0L : 0.0L;
    for (Vertex w : tc.neighbors(v)) {
      if (tc.is_leaf(w)) continue;
      off[v][w] = -tc.p(v, w);
      live[v].insert(w);
    }
  }

  std::vector<Vertex> order;
  order.reserve(interior.size());
  std::map<Vertex, Vertex> parent;
  std::set<Vertex> peelable;
  std::set<Vertex> remaining(interior.begin(), interior.end());
  for (Vertex v : interior) {
    if (live[v].size() <= 1) peelable.insert(v);
  }
  while (!peelable.empty()) {
    const Vertex v = *peelable.begin();
    peelable.erase(peelable.begin());
    remaining.erase(v);
    order.push_back(v);
    if (live[v].empty()) continue;
    const Vertex u = *live[v].begin();
    parent[v] = u;
    live[u].erase(v);
    if (remaining.count(u) && live[u].size() <= 1) peelable.insert(u);
  }
  if (!remaining.empty()) {
    throw solver_error("interior block is not tree-structured");
  }

  constexpr long double kTinyPivot = 1e-14L;
  for (Vertex v : order) {
    if (std::abs(diag[v]) <= kTinyPivot) {
      throw solver_error("degenerate pivot at vertex " + std::to_string(v) +
                         ": the walk cannot reach an absorbing leaf");
    }
    auto it = parent.find(v);
    if (it == parent.end()) continue;
    const Vertex u = it->second;
    const long double factor = off[u][v] / diag[v];
    diag[u] -= factor * off[v][u];
    rhs[u] -= factor * rhs[v];
  }

  std::map<Vertex, long double> sol;
  for (auto rit = order.rbegin(); rit != order.rend(); ++rit) {
    const Vertex v = *rit;
    long double value = rhs[v];
    auto it = parent.find(v);
    if (it != parent.end()) value -= off[v][it->second] * sol[it->second];
    sol[v] = value / diag[v];
  }

  // Residual of the original system in long double.
  long double worst = 0.0L;
  for (Vertex v : interior) {
    long double acc = (1.0L - tc.p(v, v)) * sol[v];
    for (Vertex w : tc.neighbors(v)) {
      if (!tc.is_leaf(w)) acc -= (long double)tc.p(v, w) * sol[w];
    }
    acc -= (v == y) ? 1.0L : 0.0L;
    worst = std::max(worst, std::abs(acc));
  }

  GreenResult out;
  out.value = static_cast<double>(sol.at(x));
  out.route = Route::Exact;
  out.residual = static_cast<double>(worst);
  out.flagged = out.residual.value() > 1e-8;
  if (!std::isfinite(out.value) || out.value < 0.0) {
    throw solver_error("tree solve produced an invalid visit count");
  }
  return out;
}

}  // namespace greenchain
