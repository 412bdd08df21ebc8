import numpy as np
import pytest
from hypothesis import given, strategies as st

from teamdag import dag as tb
from teamdag import games
from teamdag.dag import DEC, OBS, TERM
from teamdag.equilibrium import assemble, utility_for
from teamdag.learn import DagSpace, RegretState, Variant

from helpers import single_decision


def _space(t):
    d = tb.optimize(tb.build(t), t)
    return d, DagSpace(d)


def _action_edges(space, t, d):
    """Decision-edge ids of a single-decision DAG, in action order."""
    term = d.terminal_of()
    leaves = sorted(t.terminals())
    return [int(np.flatnonzero(space.dst == term[z])[0]) for z in leaves]


def _utility(space, d, per_leaf):
    u = np.zeros(space.n)
    for z, n in d.terminal_of().items():
        u[n] = per_leaf[z]
    return u


def test_normalize_regret_matching():
    t = single_decision((0.0, 0.0, 0.0))
    d, sp = _space(t)
    edges = _action_edges(sp, t, d)
    w = np.zeros(sp.E)
    w[edges] = [3.0, 1.0, 0.0]
    assert np.allclose(sp.normalize(w)[edges], [0.75, 0.25, 0.0])
    assert np.allclose(sp.normalize(np.zeros(sp.E))[edges], [1 / 3] * 3)
    w[edges] = [-1.0, -2.0, 0.0]
    assert np.allclose(sp.normalize(w)[edges], [1 / 3] * 3)


def test_vanilla_regret_of_single_decision():
    t = single_decision((1.0, 0.0))
    d, sp = _space(t)
    edges = _action_edges(sp, t, d)
    st_ = RegretState(sp, Variant.CFR)
    ev = st_.observe(_utility(sp, d, {z: u for z, u in zip(sorted(t.terminals()), (1.0, 0.0))}))
    assert ev == pytest.approx(0.5)
    assert np.allclose(st_.regret[edges], [0.5, -0.5])


@pytest.mark.parametrize("variant", list(Variant))
def test_zero_utility_leaves_state(variant):
    t = single_decision((0.0, 0.0, 0.0))
    d, sp = _space(t)
    st_ = RegretState(sp, variant)
    before = st_.local.copy()
    st_.observe(np.zeros(sp.n))
    assert st_.t == 1
    assert np.all(st_.regret == 0)
    assert np.array_equal(st_.local, before)


@pytest.mark.parametrize("variant", [Variant.PCFR_PLUS, Variant.DCFR])
def test_quadratic_average(variant):
    t = single_decision((0.0, 0.0))
    d, sp = _space(t)
    edges = _action_edges(sp, t, d)
    e1, e2 = np.zeros(sp.E), np.zeros(sp.E)
    e1[edges[0]] = 1.0
    e2[edges[1]] = 1.0
    st_ = RegretState(sp, variant)
    obs = np.where(sp.is_dec_edge, 0.0, 1.0)
    x1, f1 = sp.flows(e1 + obs)
    x2, f2 = sp.flows(e2 + obs)
    st_.t = 1
    st_.update_average(x1, f1)
    assert np.allclose(st_.average()[1], f1)
    st_.t = 2
    st_.update_average(x2, f2)
    assert np.allclose(st_.average()[1], (1 * f1 + 4 * f2) / 5)


def test_linear_average_of_equal_iterates():
    t = single_decision((0.0, 0.0))
    d, sp = _space(t)
    st_ = RegretState(sp, Variant.LCFR)
    x, f = sp.flows(sp.uniform())
    for k in (1, 2, 3):
        st_.t = k
        st_.update_average(x, f)
    assert np.allclose(st_.average()[0], x)


def _path_value(d, sp, local, u):
    """Sum over every root-to-terminal path of the product of local weights times the terminal utility."""
    offset = np.concatenate(([0], np.cumsum([len(c) for c in d.children])))
    edge_of = np.empty(sp.E, dtype=np.int64)
    edge_of[sp.edge_order] = np.arange(sp.E)

    def rec(n, w):
        if d.kind[n] == TERM:
            return w * u[n]
        return sum(rec(c, w * local[edge_of[offset[n] + j]]) for j, c in enumerate(d.children[n]))

    return rec(d.root, 1.0)


@given(st.integers(0, 10_000))
def test_values_match_path_enumeration(seed):
    rng = np.random.default_rng(seed)
    fig1 = games.build_figure1_fixture()
    d, sp = _space(fig1)
    local = sp.normalize(rng.random(sp.E))
    u = np.where(sp.kind == TERM, rng.normal(size=sp.n), 0.0)
    assert sp.values(local, u)[sp.root] == pytest.approx(_path_value(d, sp, local, u), abs=1e-12)
    best, _ = sp.best_response(u)
    assert best >= sp.values(local, u)[sp.root] - 1e-12


@given(st.integers(0, 10_000))
def test_best_response_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    fig1 = games.build_figure1_fixture()
    d, sp = _space(fig1)
    per_leaf = {z: rng.normal() for z in fig1.terminals()}
    u = _utility(sp, d, per_leaf)
    brute = max(sum(per_leaf[z] for z in tb.correlation_plan(d, pure)) for pure in tb.enumerate_pure(d))
    value, local = sp.best_response(u)
    assert value == pytest.approx(brute, abs=1e-12)
    assert sp.values(local, u)[sp.root] == pytest.approx(value, abs=1e-12)
    assert set(np.unique(local)) <= {0.0, 1.0}


def test_best_response_constant_utilities(fig1):
    d, sp = _space(fig1)
    assert sp.best_response(np.zeros(sp.n))[0] == 0.0
    assert sp.best_response(np.where(sp.kind == TERM, 1.0, 0.0))[0] == pytest.approx(2.0)


def test_local_from_pure_matches_correlation_plan(fig1):
    d, sp = _space(fig1)
    term = d.terminal_of()
    for pure in tb.enumerate_pure(d):
        x = sp.reach(sp.local_from_pure(pure))
        reached = sorted(z for z in fig1.terminals() if x[term[z]] > 0.5)
        assert tuple(reached) == tb.correlation_plan(d, pure)


@pytest.mark.parametrize("variant", list(Variant))
def test_flow_invariants_during_learning(variant):
    g = assemble(games.build_kuhn(3, 3))
    plus = RegretState(g.plus.space, variant)
    minus = RegretState(g.minus.space, variant)
    for _ in range(60):
        plus.observe(utility_for(g, "+", minus.current_flows()[0]))
        minus.observe(utility_for(g, "-", plus.current_flows()[0]))
        for s in (plus, minus):
            for x, f in (s.current_flows(), s.average()):
                assert s.space.flow_violation(x, f) <= 1e-9
                assert x.min() >= -1e-12 and x.max() <= 1 + 1e-9
            dec = s.space.dec_edges
            sums = np.bincount(s.space.src[dec], s.local[dec], minlength=s.space.n)
            assert np.allclose(sums[s.space.kind == DEC], 1.0, atol=1e-9)


@pytest.mark.parametrize("variant", list(Variant))
def test_toy_game_converges_to_best_action(variant):
    payoffs = (0.2, 0.5, 0.1)
    t = single_decision(payoffs)
    d, sp = _space(t)
    edges = _action_edges(sp, t, d)
    u = _utility(sp, d, dict(zip(sorted(t.terminals()), payoffs)))
    st_ = RegretState(sp, variant)
    for _ in range(300):
        st_.observe(u)
    assert st_.local[edges[1]] > 0.99
    assert st_.average()[1][edges[1]] > 0.9


def test_observation_edges_carry_full_reach(fig1):
    d, sp = _space(fig1)
    x, f = sp.flows(sp.uniform())
    obs = np.flatnonzero(sp.kind[sp.src] == OBS)
    assert np.allclose(f[obs], x[sp.src[obs]])
