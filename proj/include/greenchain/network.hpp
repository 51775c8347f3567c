#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "greenchain/chain.hpp"
#include "greenchain/green_exact.hpp"

namespace greenchain {

using Vertex = std::int64_t;

// Undirected weighted graph with optional loop weights. Edge weights are
// conductances (positive); loops are nonnegative. The loop at v counts
// toward the total conductance C(v), and therefore toward the induced
// walk's jump probabilities, but both endpoints of a loop sit at the same
// voltage, so loops never carry current: the Kirchhoff system is built
// from off-diagonal conductances only.
class ConductanceNetwork {
 public:
  void add_vertex(Vertex v);
  void add_edge(Vertex u, Vertex v, double conductance);
  void set_loop(Vertex v, double conductance);

  bool has_vertex(Vertex v) const;
  std::vector<Vertex> vertices() const;
  std::size_t vertex_count() const { return adj_.size(); }

  // 0 when the edge is absent.
  double edge(Vertex u, Vertex v) const;
  double loop(Vertex v) const;
  // C(v): every incident edge plus the loop.
  double total_conductance(Vertex v) const;

  const std::map<Vertex, double>& neighbors(Vertex v) const;

  // Connected and acyclic, ignoring loops.
  bool is_tree() const;
  bool is_connected() const;

  std::vector<Violation> validate() const;

 private:
  std::map<Vertex, std::map<Vertex, double>> adj_;
  std::map<Vertex, double> loops_;
};

struct VoltageSolution {
  Vertex source = 0;
  std::set<Vertex> grounded;
  std::map<Vertex, double> voltages;
  double injected_current = 1.0;
  // Worst Kirchhoff current-law defect over the interior vertices.
  double kcl_residual = 0.0;
};

// The line network electrically equivalent to the chain: consecutive
// states joined by edges, laziness realized as loops. Anchored at state 0
// with C_{0,1} = r_0 and C_{-1,0} = l_0 when 0 is usable, re-anchored by
// index shift otherwise; the induced walk C_{vw}/C(v) reproduces the
// chain's rows either way. Conductances follow the log-space recurrence
// C_{z,z+1} = C_{z-1,z} * r_z / l_z, so C(z) = C_{z-1,z}/l_z =
// C_{z,z+1}/r_z and the loop is C_{zz} = a_z C(z).
ConductanceNetwork line_conductances(const BirthDeathChain& chain);

// Unit current in at source, grounded vertices held at 0 volts. Grounded
// set must be nonempty and exclude the source; the network must be
// connected. Lines are solved by a tridiagonal SPD factorization, other
// shapes by a dense Cholesky with one refinement pass.
VoltageSolution solve_voltages(const ConductanceNetwork& net, Vertex source,
                               const std::set<Vertex>& grounded);

// G(x,y) electrically: ground both absorbing endpoints, inject unit
// current at x, return C(y) * V_y.
GreenResult green_via_voltage(const BirthDeathChain& chain, State x, State y);

// G(x,y)/G(y,x) = C(y)/C(x) through the closed-form total conductances,
// without solving anything. Agrees with symmetry_ratio to roundoff.
RatioValue ratio_via_conductance(const BirthDeathChain& chain, State x,
                                 State y);

// Debug/golden-test dump: {"edges":[{"C":..,"u":..,"v":..},...],
// "loops":[...], "vertices":[...]} with sorted keys and 17-digit floats.
std::string dump_network_json(const ConductanceNetwork& net);

ConductanceNetwork network_from_json(const std::string& text);

}  // namespace greenchain
