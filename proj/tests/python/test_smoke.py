"""End-to-end smoke tests for the Python bindings.

These exercise every exported operation once with known values; the heavy
numerical property testing lives in the C++ suite.
"""

import pytest

import greenchain as gc

DRIFT = gc.BirthDeathChain.uniform(0, 5, (0.4, 0.0, 0.6), True, True)
SYMMETRIC = gc.BirthDeathChain.uniform(0, 4, (0.5, 0.0, 0.5), True, True)


def test_chain_accessors():
    assert DRIFT.lo == 0
    assert DRIFT.hi == 5
    assert DRIFT.absorbing_lo and DRIFT.absorbing_hi
    assert DRIFT.first_usable == 1 and DRIFT.last_usable == 4
    row = DRIFT.row(2)
    assert (row.l, row.a, row.r) == (0.4, 0.0, 0.6)
    assert DRIFT.validate() == []

    listed = gc.BirthDeathChain(0, 2, [(0, 0, 0), (0.3, 0.2, 0.5), (0, 0, 0)],
                                True, True)
    assert listed.row(1).a == 0.2

    scaled = gc.BirthDeathChain(0, 2, [(0, 0, 0), (0.2, 0.2, 0.4), (0, 0, 0)],
                                True, True).normalized()
    assert scaled.row(1).l == pytest.approx(0.25, rel=1e-15)


def test_green_routes_agree():
    exact = gc.green(DRIFT, 2, 3)
    assert exact.route == gc.Route.Exact
    assert float(exact) == pytest.approx(375.0 / 211.0, rel=1e-12)
    assert not exact.flagged

    volt = gc.green_via_voltage(DRIFT, 2, 3)
    local = gc.green_via_local_time(DRIFT, 2, 3)
    assert volt.route == gc.Route.Voltage
    assert local.route == gc.Route.LocalTime
    assert volt.value == pytest.approx(exact.value, rel=1e-10)
    assert local.value == pytest.approx(exact.value, rel=1e-10)

    matrix = gc.green_matrix(DRIFT)
    assert matrix.at(2, 3) == exact.value
    assert matrix.dim == 4


def test_ratio_identity():
    ratio = gc.symmetry_ratio(DRIFT, 1, 3)
    assert float(ratio) == pytest.approx(2.25, rel=1e-13)
    assert ratio.reciprocal().value == pytest.approx(1.0 / 2.25, rel=1e-13)

    flat = gc.symmetry_ratio(SYMMETRIC, 1, 3)
    assert flat.value == 1.0
    assert flat.log == 0.0

    check = gc.verify_ratio_identity(DRIFT)
    assert check.max_rel_dev < 1e-10


def test_laziness_removal():
    lazy = gc.BirthDeathChain(0, 2, [(0, 0, 0), (0.25, 0.5, 0.25), (0, 0, 0)],
                              True, True)
    crisp = gc.remove_laziness(lazy)
    assert crisp.row(1).a == 0.0
    assert crisp.row(1).l == pytest.approx(0.5, rel=1e-15)
    scale = 1.0 - lazy.row(1).a
    assert gc.green(lazy, 1, 1).value == pytest.approx(
        gc.green(crisp, 1, 1).value / scale, rel=1e-12)


def test_embedding():
    window = gc.BirthDeathChain.uniform(-4, 4, (0.5, 0.0, 0.5), False, False)
    emb = gc.build_embedding(window)
    assert emb.anchor == 0
    assert emb.x[0] == 0.0
    assert emb.x[2] == 1.0
    assert emb.t[0] == 0.5
    assert emb.t[-1] == -0.5
    assert emb.x_plus_inf.finite and emb.x_plus_inf.value == 2.0

    assert gc.expected_local_time(0.0, 2.0, 1.0, 1.0) == 1.0
    with pytest.raises(ValueError, match="remove_laziness"):
        gc.build_embedding(
            gc.BirthDeathChain.uniform(0, 4, (0.25, 0.5, 0.25), True, True))


def test_network_route():
    net = gc.line_conductances(DRIFT)
    assert net.is_tree()
    sol = gc.solve_voltages(net, 2, {0, 5})
    assert sol.kcl_residual < 1e-12
    assert sol.voltages[0] == 0.0

    via_c = gc.ratio_via_conductance(DRIFT, 1, 3)
    assert via_c.value == pytest.approx(2.25, rel=1e-12)

    dumped = gc.dump_network_json(net)
    again = gc.network_from_json(dumped)
    assert gc.dump_network_json(again) == dumped


def test_tree_operations():
    tc = gc.TreeChain(
        vertices=[1, 2, 3, 4, 5],
        edges=[(1, 2), (2, 3), (3, 4), (4, 5)],
        transitions={
            2: gc.TransitionRow(self_p=0.05, to={1: 0.05, 3: 0.9}),
            3: gc.TransitionRow(to={2: 0.2, 4: 0.8}),
            4: gc.TransitionRow(self_p=0.05, to={3: 0.5, 5: 0.45}),
        },
    )
    assert tc.leaves() == {1, 5}
    assert tc.interior() == [2, 3, 4]
    assert tc.p(3, 4) == 0.8

    path = gc.find_path(tc, 2, 4)
    assert path.intermediate == [3]

    ratio = gc.path_ratio(tc, 2, 4)
    assert ratio.value == pytest.approx(7.2, rel=1e-13)

    fwd = gc.green_tree(tc, 2, 4).value
    bwd = gc.green_tree(tc, 4, 2).value
    assert fwd / bwd == pytest.approx(7.2, rel=1e-11)

    net = gc.assign_conductances(tc, 1, 1.0)
    back = gc.recover_probabilities(net)
    assert back.p(3, 4) == pytest.approx(0.8, rel=1e-12)

    sub = gc.TreeChain.prune(tc, {2, 3, 4})
    assert sub.leaves() == {2, 4}
    with pytest.raises(gc.SpecError):
        gc.TreeChain.prune(tc, {1, 3})


def test_monte_carlo():
    cfg = gc.SimConfig(trials=20000, seed=5)
    est = gc.simulate_line(SYMMETRIC, 2, 2, cfg)
    assert est.std_error > 0.0
    assert abs(est.mean - 2.0) < 4.0 * est.std_error

    threaded = gc.SimConfig(trials=20000, seed=5, threads=3)
    again = gc.simulate_line(SYMMETRIC, 2, 2, threaded)
    assert again.mean == est.mean
    assert again.std_error == est.std_error


def test_classifier():
    verdict = gc.classify(lambda n: (0.5, 0.0, 0.5))
    assert verdict.kind == gc.Recurrence.Recurrent
    assert verdict.left_sum.infinite()

    drift = gc.classify(lambda n: (0.4, 0.0, 0.6))
    assert drift.kind == gc.Recurrence.Transient
    assert drift.right_sum.status == gc.SeriesStatus.Converged
    assert drift.right_sum.sum == pytest.approx(1.2, rel=1e-9)

    spec = gc.formula_from_json(
        '{"family": "inverse_drift", "base": 0.5, "amplitude": 0.25}')
    assert spec.family == gc.FormulaFamily.InverseDrift
    near = gc.classify_formula(spec, gc.ClassifyOptions(horizon=2000))
    assert near.kind == gc.Recurrence.Inconclusive


def test_spec_parsing_and_hashing():
    chain = gc.chain_from_json(
        '{"kind": "line", "lo": 0, "hi": 4, "absorbing": [0, 4],'
        ' "rows": {"uniform": {"l": 0.5, "a": 0.0, "r": 0.5}}}')
    assert chain.hi == 4
    assert gc.fnv1a64_hex("foobar") == "fnv1a64:85944171f73967e8"

    with pytest.raises(gc.SpecError):
        gc.chain_from_json('{"lo": 0}')
    with pytest.raises(gc.SpecError, match="line 1"):
        gc.chain_from_json("{,}")


def test_error_taxonomy():
    with pytest.raises(ValueError):
        gc.green(DRIFT, 0, 2)  # absorbing start
    with pytest.raises(ValueError):
        gc.symmetry_ratio(DRIFT, 2, 2)  # degenerate pair

    net = gc.ConductanceNetwork()
    net.add_edge(0, 1, 1.0)
    net.add_edge(5, 6, 1.0)
    with pytest.raises(gc.SolverError):
        gc.solve_voltages(net, 1, {0})
    assert issubclass(gc.SpecError, ValueError)
    assert issubclass(gc.SolverError, RuntimeError)


def test_rng_vectors():
    rng = gc.SplitMix64(0)
    assert rng.next() == 0xE220A8397B1DCDAF
    assert rng.next() == 0x6E789E6AA1B965F4
    assert gc.SplitMix64(0).next_double() == 0.8833108082136426
    stream = gc.trial_stream(7, 3)
    assert stream.next() == 0x55338D93AEAADEC5
    assert gc.mix64(0) == 0


def test_module_surface():
    assert gc.__version__ == "1.0.0"
    for name in ("green", "green_matrix", "symmetry_ratio", "classify",
                 "build_embedding", "solve_voltages", "green_tree",
                 "simulate_line", "simulate_tree", "chain_from_json",
                 "verify_ratio_identity", "remove_laziness"):
        assert hasattr(gc, name)
