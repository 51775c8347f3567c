#include "greenchain/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "greenchain/errors.hpp"
#include "greenchain/json_out.hpp"
#include "greenchain/linalg.hpp"

namespace greenchain {

void ConductanceNetwork::add_vertex(Vertex v) {
  adj_.try_emplace(v);
}

void ConductanceNetwork::add_edge(Vertex u, Vertex v, double conductance) {
  if (u == v) {
    throw std::invalid_argument("self-edges are loops; use set_loop");
  }
  if (!(conductance > 0.0) || !std::isfinite(conductance)) {
    throw std::invalid_argument("edge conductance must be positive");
  }
  adj_[u][v] = conductance;
  adj_[v][u] = conductance;
}

void ConductanceNetwork::set_loop(Vertex v, double conductance) {
  if (conductance < 0.0 || !std::isfinite(conductance)) {
    throw std::invalid_argument("loop conductance must be nonnegative");
  }
  add_vertex(v);
  if (conductance == 0.0) {
    loops_.erase(v);
  } else {
    loops_[v] = conductance;
  }
}

bool ConductanceNetwork::has_vertex(Vertex v) const {
  return adj_.count(v) != 0;
}

std::vector<Vertex> ConductanceNetwork::vertices() const {
  std::vector<Vertex> out;
  out.reserve(adj_.size());
  for (const auto& [v, nbrs] : adj_) out.push_back(v);
  return out;
}

double ConductanceNetwork::edge(Vertex u, Vertex v) const {
  auto it = adj_.find(u);
  if (it == adj_.end()) return 0.0;
  auto jt = it->second.find(v);
  return jt == it->second.end() ? 0.0 : jt->second;
}

double ConductanceNetwork::loop(Vertex v) const {
  auto it = loops_.find(v);
  return it == loops_.end() ? 0.0 : it->second;
}

double ConductanceNetwork::total_conductance(Vertex v) const {
  const auto& nbrs = neighbors(v);
  KahanSum sum;
  for (const auto& [w, c] : nbrs) sum.add(c);
  sum.add(loop(v));
  return sum.value();
}

const std::map<Vertex, double>& ConductanceNetwork::neighbors(Vertex v) const {
  auto it = adj_.find(v);
  if (it == adj_.end()) {
    throw std::domain_error("vertex " + std::to_string(v) +
                            " is not in the network");
  }
  return it->second;
}

bool ConductanceNetwork::is_connected() const {
  if (adj_.empty()) return true;
  std::set<Vertex> seen;
  std::deque<Vertex> queue{adj_.begin()->first};
  seen.insert(adj_.begin()->first);
  while (!queue.empty()) {
    const Vertex v = queue.front();
    queue.pop_front();
    for (const auto& [w, c] : adj_.at(v)) {
      if (seen.insert(w).second) queue.push_back(w);
    }
  }
  return seen.size() == adj_.size();
}

bool ConductanceNetwork::is_tree() const {
  std::size_t degree_total = 0;
  for (const auto& [v, nbrs] : adj_) degree_total += nbrs.size();
  return is_connected() && !adj_.empty() &&
         degree_total / 2 == adj_.size() - 1;
}

std::vector<Violation> ConductanceNetwork::validate() const {
  std::vector<Violation> out;
  for (const auto& [v, nbrs] : adj_) {
    if (!(total_conductance(v) > 0.0)) {
      out.push_back({v, "total conductance C(v) must be positive at vertex " +
                            std::to_string(v)});
    }
  }
  return out;
}

namespace {

State network_anchor(const BirthDeathChain& chain) {
  return std::clamp<State>(0, chain.first_usable(), chain.last_usable());
}

// log conductance of edge (z, z+1) for every z in [lo, hi-1], by the
// recurrence C_{z,z+1} = C_{z-1,z} * r_z / l_z anchored at
// C_{c,c+1} = r_c (and C_{c-1,c} = l_c below the anchor).
std::map<State, double> edge_log_conductances(const BirthDeathChain& chain) {
  const State c = network_anchor(chain);
  std::map<State, double> log_edge;
  if (c <= chain.hi() - 1) {
    KahanSum acc;
    acc.add(std::log(chain.row(c).r));
    log_edge[c] = acc.value();
    for (State z = c + 1; z <= chain.hi() - 1; ++z) {
      acc.add(std::log(chain.row(z).r));
      acc.add(-std::log(chain.row(z).l));
      log_edge[z] = acc.value();
    }
  }
  if (c - 1 >= chain.lo()) {
    KahanSum acc;
    acc.add(std::log(chain.row(c).l));
    log_edge[c - 1] = acc.value();
    for (State z = c - 2; z >= chain.lo(); --z) {
      acc.add(std::log(chain.row(z + 1).l));
      acc.add(-std::log(chain.row(z + 1).r));
      log_edge[z] = acc.value();
    }
  }
  return log_edge;
}

}  // namespace

ConductanceNetwork line_conductances(const BirthDeathChain& chain) {
  chain.require_valid();
  if (chain.first_usable() > chain.last_usable()) {
    throw std::domain_error("chain has no usable states");
  }
  if (chain.lo() == chain.hi()) {
    throw std::domain_error("single-state window has no edges");
  }
  const auto log_edge = edge_log_conductances(chain);

  ConductanceNetwork net;
  for (const auto& [z, le] : log_edge) {
    net.add_edge(z, z + 1, std::exp(le));
  }
  for (State z = chain.first_usable(); z <= chain.last_usable(); ++z) {
    const ProbabilityTriple& row = chain.row(z);
    if (row.a == 0.0) continue;
    // C(z) = C_{z,z+1}/r_z = C_{z-1,z}/l_z; either identity works, the
    // first is available except at a live right endpoint.
    const double log_total =
        z <= chain.hi() - 1 ? log_edge.at(z) - std::log(row.r)
                            : log_edge.at(z - 1) - std::log(row.l);
    net.set_loop(z, row.a * std::exp(log_total));
  }
  return net;
}

VoltageSolution solve_voltages(const ConductanceNetwork& net, Vertex source,
                               const std::set<Vertex>& grounded) {
  if (grounded.empty()) {
    throw std::invalid_argument("grounded set must not be empty");
  }
  if (grounded.count(source)) {
    throw std::invalid_argument("source vertex must not be grounded");
  }
  if (!net.has_vertex(source)) {
    throw std::domain_error("source vertex is not in the network");
  }
  for (Vertex g : grounded) {
    if (!net.has_vertex(g)) {
      throw std::domain_error("grounded vertex " + std::to_string(g) +
                              " is not in the network");
    }
  }
  if (!net.is_connected()) {
    throw solver_error("network is disconnected: source cannot reach ground");
  }

  // Unknowns in ascending vertex order; grounded vertices are pinned at 0
  // and land only in the right-hand structure via the diagonal.
  std::vector<Vertex> unknowns;
  for (Vertex v : net.vertices()) {
    if (!grounded.count(v)) unknowns.push_back(v);
  }
  std::map<Vertex, std::size_t> index;
  for (std::size_t i = 0; i < unknowns.size(); ++i) index[unknowns[i]] = i;
  const std::size_t n = unknowns.size();

  // The Kirchhoff system uses off-diagonal conductances only: a loop has
  // both endpoints at the same potential and carries no current.
  bool tridiagonal = true;
  for (std::size_t i = 0; i < n && tridiagonal; ++i) {
    for (const auto& [w, c] : net.neighbors(unknowns[i])) {
      auto it = index.find(w);
      if (it != index.end() &&
          (it->second > i + 1 || it->second + 1 < i)) {
        tridiagonal = false;
        break;
      }
    }
  }

  std::vector<double> rhs(n, 0.0);
  rhs[index.at(source)] = 1.0;
  std::vector<double> x;

  if (tridiagonal) {
    Tridiagonal t;
    t.sub.assign(n, 0.0);
    t.diag.assign(n, 0.0);
    t.sup.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      KahanSum diag;
      for (const auto& [w, c] : net.neighbors(unknowns[i])) {
        diag.add(c);
        auto it = index.find(w);
        if (it == index.end()) continue;
        if (it->second + 1 == i) t.sub[i] = -c;
        if (it->second == i + 1) t.sup[i] = -c;
      }
      t.diag[i] = diag.value();
    }
    TridiagonalLDL ldl;
    if (!ldl.factor(t)) {
      throw solver_error("grounded Laplacian is numerically singular");
    }
    ldl.solve(rhs, x);
  } else {
    if (n > 2048) {
      throw solver_error(
          "network exceeds the dense solver limit of 2048 ungrounded "
          "vertices");
    }
    std::vector<double> a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      KahanSum diag;
      for (const auto& [w, c] : net.neighbors(unknowns[i])) {
        diag.add(c);
        auto it = index.find(w);
        if (it != index.end()) a[i * n + it->second] = -c;
      }
      a[i * n + i] = diag.value();
    }
    DenseSPD spd;
    spd.factor(a, n);
    spd.solve(rhs, x);
  }

  VoltageSolution sol;
  sol.source = source;
  sol.grounded = grounded;
  for (Vertex g : grounded) sol.voltages[g] = 0.0;
  for (std::size_t i = 0; i < n; ++i) sol.voltages[unknowns[i]] = x[i];

  long double worst = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex v = unknowns[i];
    long double net_current = 0.0L;
    for (const auto& [w, c] : net.neighbors(v)) {
      net_current += static_cast<long double>(c) *
                     (sol.voltages.at(v) - sol.voltages.at(w));
    }
    if (v == source) net_current -= 1.0L;
    worst = std::max(worst, std::abs(net_current));
  }
  sol.kcl_residual = static_cast<double>(worst);
  return sol;
}

GreenResult green_via_voltage(const BirthDeathChain& chain, State x, State y) {
  chain.require_valid();
  if (!chain.both_ends_absorbing()) {
    throw std::domain_error(
        "visit counts need both window endpoints absorbing");
  }
  for (State s : {x, y}) {
    if (!chain.is_usable(s)) {
      throw std::domain_error("state " + std::to_string(s) +
                              " is not interior");
    }
  }
  const ConductanceNetwork net = line_conductances(chain);
  const VoltageSolution sol =
      solve_voltages(net, x, std::set<Vertex>{chain.lo(), chain.hi()});

  GreenResult out;
  out.value = net.total_conductance(y) * sol.voltages.at(y);
  out.route = Route::Voltage;
  out.residual = sol.kcl_residual;
  out.flagged = sol.kcl_residual > 1e-8;
  return out;
}

RatioValue ratio_via_conductance(const BirthDeathChain& chain, State x,
                                 State y) {
  chain.require_valid();
  if (x == y) {
    throw std::invalid_argument("degenerate pair: x == y");
  }
  for (State s : {x, y}) {
    if (!chain.is_usable(s)) {
      throw std::domain_error("state " + std::to_string(s) +
                              " is absorbing or outside the window");
    }
  }
  if (x > y) {
    return ratio_via_conductance(chain, y, x).reciprocal();
  }
  // log C(z) relative to the anchor via C(z) = C_{z-1,z}/l_z; only the
  // difference log C(y) - log C(x) matters, so the anchor cancels.
  const auto log_edge = edge_log_conductances(chain);
  auto log_total = [&](State z) {
    const auto it = log_edge.find(z);
    return it != log_edge.end() ? it->second - std::log(chain.row(z).r)
                                : log_edge.at(z - 1) - std::log(chain.row(z).l);
  };
  const double log_ratio = log_total(y) - log_total(x);
  return RatioValue{std::exp(log_ratio), log_ratio};
}

std::string dump_network_json(const ConductanceNetwork& net) {
  JsonValue root = JsonValue::object();
  JsonValue vertices = JsonValue::array();
  for (Vertex v : net.vertices()) vertices.push_back(JsonValue::integer(v));

  JsonValue edges = JsonValue::array();
  for (Vertex v : net.vertices()) {
    for (const auto& [w, c] : net.neighbors(v)) {
      if (v >= w) continue;
      JsonValue e = JsonValue::object();
      e.set("C", JsonValue::number(c));
      e.set("u", JsonValue::integer(v));
      e.set("v", JsonValue::integer(w));
      edges.push_back(std::move(e));
    }
  }
  JsonValue loops = JsonValue::array();
  for (Vertex v : net.vertices()) {
    const double c = net.loop(v);
    if (c == 0.0) continue;
    JsonValue e = JsonValue::object();
    e.set("C", JsonValue::number(c));
    e.set("v", JsonValue::integer(v));
    loops.push_back(std::move(e));
  }
  root.set("edges", std::move(edges));
  root.set("loops", std::move(loops));
  root.set("vertices", std::move(vertices));
  return root.dump();
}

}  // namespace greenchain
