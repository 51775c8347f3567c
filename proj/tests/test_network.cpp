#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"

#include "greenchain/chain.hpp"
#include "greenchain/errors.hpp"
#include "greenchain/green_exact.hpp"
#include "greenchain/network.hpp"
#include "support.hpp"

using namespace greenchain;
using testsupport::random_chain;

TEST_SUITE_BEGIN("network");

TEST_CASE("edge and loop bookkeeping") {
  ConductanceNetwork net;
  net.add_edge(1, 2, 0.5);
  net.set_loop(1, 0.25);
  net.add_vertex(3);

  CHECK(net.vertex_count() == 3);
  CHECK(net.edge(1, 2) == 0.5);
  CHECK(net.edge(2, 1) == 0.5);
  CHECK(net.edge(1, 3) == 0.0);
  CHECK(net.loop(1) == 0.25);
  CHECK(net.loop(2) == 0.0);
  CHECK(net.total_conductance(1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK_FALSE(net.is_connected());

  net.set_loop(1, 0.0);
  CHECK(net.loop(1) == 0.0);

  CHECK_THROWS_AS(net.add_edge(1, 1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(net.add_edge(1, 4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(net.add_edge(1, 4, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(net.set_loop(1, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(net.neighbors(9), std::domain_error);

  const auto violations = net.validate();
  REQUIRE(violations.size() == 1);  // isolated vertex 3 has C(v) = 0
  CHECK(violations[0].state == 3);
}

TEST_CASE("line network reproduces the chain's transition rows") {
  SplitMix64 rng(53);
  for (int rep = 0; rep < 10; ++rep) {
    const BirthDeathChain c = random_chain(rng, -6, 6, 0.5);
    const ConductanceNetwork net = line_conductances(c);
    for (State z = c.first_usable(); z <= c.last_usable(); ++z) {
      const double total = net.total_conductance(z);
      CHECK(net.edge(z, z + 1) / total ==
            doctest::Approx(c.row(z).r).epsilon(1e-12));
      CHECK(net.edge(z - 1, z) / total ==
            doctest::Approx(c.row(z).l).epsilon(1e-12));
      CHECK(net.loop(z) / total ==
            doctest::Approx(c.row(z).a).epsilon(1e-12));
    }
  }
}

TEST_CASE("line network anchors C_{0,1} = r_0") {
  const BirthDeathChain c =
      BirthDeathChain::uniform(-2, 2, {0.4, 0.0, 0.6}, true, true);
  const ConductanceNetwork net = line_conductances(c);
  CHECK(net.edge(0, 1) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(net.edge(-1, 0) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(net.is_tree());
}

TEST_CASE("voltages satisfy Kirchhoff's current law") {
  SplitMix64 rng(59);
  const BirthDeathChain c = random_chain(rng, 0, 12, 0.5);
  const ConductanceNetwork net = line_conductances(c);
  const VoltageSolution sol =
      solve_voltages(net, 4, std::set<Vertex>{0, 12});
  CHECK(sol.kcl_residual < 1e-12);
  CHECK(sol.voltages.at(0) == 0.0);
  CHECK(sol.voltages.at(12) == 0.0);
  CHECK(sol.voltages.at(4) > 0.0);
}

TEST_CASE("voltage response is reciprocal on random networks") {
  SplitMix64 rng(61);
  for (int rep = 0; rep < 10; ++rep) {
    // Random connected network: a random tree plus a few chords, loops on
    // some vertices (which must not affect voltages at all).
    const int n = 10;
    ConductanceNetwork net;
    for (int v = 1; v < n; ++v) {
      net.add_edge(static_cast<Vertex>(rng.below(v)), v,
                   0.5 + 2.0 * rng.next_double());
    }
    for (int extra = 0; extra < 5; ++extra) {
      const Vertex u = static_cast<Vertex>(rng.below(n));
      const Vertex v = static_cast<Vertex>(rng.below(n));
      if (u != v && net.edge(u, v) == 0.0) {
        net.add_edge(u, v, 0.5 + 2.0 * rng.next_double());
      }
    }
    net.set_loop(2, 1.5);

    const std::set<Vertex> grounds{0};
    for (Vertex a = 1; a < 5; ++a) {
      for (Vertex b = a + 1; b < 8; ++b) {
        const double vab =
            solve_voltages(net, a, grounds).voltages.at(b);
        const double vba =
            solve_voltages(net, b, grounds).voltages.at(a);
        CHECK(testsupport::rel_err(vab, vba) < 1e-10);
      }
    }
  }
}

TEST_CASE("loops shift total conductance but never voltages") {
  ConductanceNetwork base;
  base.add_edge(0, 1, 1.0);
  base.add_edge(1, 2, 2.0);
  base.add_edge(2, 3, 0.5);
  ConductanceNetwork looped = base;
  looped.set_loop(1, 3.0);
  looped.set_loop(2, 0.7);

  const std::set<Vertex> grounds{0, 3};
  const auto v0 = solve_voltages(base, 1, grounds);
  const auto v1 = solve_voltages(looped, 1, grounds);
  for (Vertex v = 0; v <= 3; ++v) {
    CHECK(v0.voltages.at(v) == doctest::Approx(v1.voltages.at(v))
                                   .epsilon(1e-14));
  }
  CHECK(looped.total_conductance(1) ==
        doctest::Approx(base.total_conductance(1) + 3.0).epsilon(1e-15));
}

TEST_CASE("voltage route equals the exact solve") {
  SplitMix64 rng(67);
  for (int rep = 0; rep < 10; ++rep) {
    const BirthDeathChain c = random_chain(rng, -6, 6, 0.6);
    const GreenMatrix m = green_matrix(c);
    for (State x = -5; x <= 5; x += 2) {
      for (State y = -5; y <= 5; y += 3) {
        const GreenResult g = green_via_voltage(c, x, y);
        CHECK(g.route == Route::Voltage);
        CHECK_FALSE(g.flagged);
        CHECK(testsupport::rel_err(g.value, m.at(x, y)) < 1e-10);
      }
    }
  }
}

TEST_CASE("conductance ratio equals the closed-form ratio") {
  SplitMix64 rng(71);
  for (int rep = 0; rep < 10; ++rep) {
    const BirthDeathChain c = random_chain(rng, -6, 6, 0.6);
    for (State x = -5; x <= 5; x += 2) {
      for (State y = -5; y <= 5; y += 3) {
        if (x == y) continue;
        const RatioValue via_c = ratio_via_conductance(c, x, y);
        const RatioValue closed = symmetry_ratio(c, x, y);
        CHECK(testsupport::rel_err(via_c.value, closed.value) < 1e-12);
      }
    }
  }
}

TEST_CASE("conductance ratio rejects bad pairs") {
  const BirthDeathChain c =
      BirthDeathChain::uniform(0, 4, {0.5, 0.0, 0.5}, true, true);
  CHECK_THROWS_AS(ratio_via_conductance(c, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(ratio_via_conductance(c, 0, 2), std::domain_error);
}

TEST_CASE("solve_voltages validates its inputs") {
  ConductanceNetwork net;
  net.add_edge(0, 1, 1.0);
  net.add_edge(1, 2, 1.0);

  CHECK_THROWS_AS(solve_voltages(net, 1, {}), std::invalid_argument);
  CHECK_THROWS_AS(solve_voltages(net, 1, {1}), std::invalid_argument);
  CHECK_THROWS_AS(solve_voltages(net, 9, {0}), std::domain_error);
  CHECK_THROWS_AS(solve_voltages(net, 1, {9}), std::domain_error);

  net.add_edge(10, 11, 1.0);  // second component
  CHECK_THROWS_AS(solve_voltages(net, 1, {0}), solver_error);
}

TEST_CASE("network dump is a stable golden string") {
  ConductanceNetwork net;
  net.add_edge(2, 1, 0.5);
  net.set_loop(1, 0.25);
  net.add_vertex(3);
  CHECK(dump_network_json(net) ==
        "{\"edges\":[{\"C\":0.5,\"u\":1,\"v\":2}],"
        "\"loops\":[{\"C\":0.25,\"v\":1}],\"vertices\":[1,2,3]}");
}

TEST_CASE("network dump round-trips through the parser") {
  SplitMix64 rng(73);
  const BirthDeathChain c = random_chain(rng, -4, 4, 0.5);
  const ConductanceNetwork net = line_conductances(c);
  const std::string dumped = dump_network_json(net);
  const ConductanceNetwork back = network_from_json(dumped);
  CHECK(dump_network_json(back) == dumped);
}

TEST_SUITE_END();
