import csv
import itertools
import random

import numpy as np
import pytest

from teamdag import games
from teamdag.efg import CHANCE, TERMINAL
from teamdag.equilibrium import (
    StopRule, assemble, exploitability, lp_export, self_play, solve_lp, utility_for, value,
)

from helpers import matching_pennies, one_leaf

highspy = pytest.importorskip("highspy")


@pytest.fixture(scope="module")
def k3():
    return assemble(games.build_kuhn(3, 3))


def _walk(tree, act, v=0, p=1.0):
    """Team-plus expected payoff when every game infoset plays the action in ``act``."""
    k = tree.kind[v]
    if k == TERMINAL:
        return p * tree.payoff(v)
    if k == CHANCE:
        return sum(_walk(tree, act, c, p * q) for c, q in zip(tree.children[v], tree.probs[v]))
    return _walk(tree, act, tree.children[v][tree.labels[v].index(act[tree.infoset[v]])], p)


def _reach_of(side, tree, act):
    """Node reaches of the DAG strategy that mirrors a pure infoset assignment of the game."""
    t, d, sp = side.tfsdp, side.dag, side.space
    tf_act = {i: act[tree.infoset[t.origin[m[0]]]] for i, m in enumerate(t.infosets) if m}
    pure = {}
    for n in d.decision_nodes():
        for j, lab in enumerate(d.label[n]):
            if all(tf_act[i] == a for i, a in lab):
                pure[n] = j
                break
    return sp.reach(sp.local_from_pure(pure))


def _random_act(tree, rng):
    return {i: rng.choice(tree.labels[m[0]]) for i, m in enumerate(tree.infosets) if m}


def test_registry_covers_every_leaf_once(k3):
    assert sorted(k3.leaves) == k3.tree.terminals()
    # chance reach sums over action profiles too; under uniform play the leaf mass is one
    for g in (k3, assemble(games.build_kuhn(3, 4))):
        reach = g.tree.uniform_reach()
        assert sum(reach[int(z)] for z in g.leaves) == pytest.approx(1.0, abs=1e-9)
        assert np.all((g.chance > 0) & (g.chance <= 1))


def test_registry_matches_direct_tree_walk(k3):
    rng = random.Random(7)
    tree = k3.tree
    for _ in range(40):
        act = _random_act(tree, rng)
        x = _reach_of(k3.plus, tree, act)
        y = _reach_of(k3.minus, tree, act)
        assert value(k3, x, y) == pytest.approx(_walk(tree, act), abs=1e-12)


def test_utilities_are_zero_sum(k3):
    x = k3.plus.space.reach(k3.plus.space.uniform())
    y = k3.minus.space.reach(k3.minus.space.uniform())
    up = float(np.dot(utility_for(k3, "+", y), x))
    um = float(np.dot(utility_for(k3, "-", x), y))
    assert up + um == pytest.approx(0.0, abs=1e-12)
    assert up == pytest.approx(value(k3, x, y))


def test_unreached_branch_contributes_nothing(k3):
    y = np.zeros(k3.minus.space.n)
    assert np.all(utility_for(k3, "+", y) == 0)


def test_matching_pennies_uniform_is_equilibrium():
    g = assemble(matching_pennies())
    x = g.plus.space.reach(g.plus.space.uniform())
    y = g.minus.space.reach(g.minus.space.uniform())
    ex = exploitability(g, x, y)
    assert ex.gap == pytest.approx(0.0, abs=1e-9)
    assert value(g, x, y) == pytest.approx(0.0, abs=1e-12)


def test_uniform_gap_matches_brute_force_on_two_player_kuhn():
    tree = games.build_kuhn(2, 3)
    g = assemble(tree)
    xu = g.plus.space.reach(g.plus.space.uniform())
    yu = g.minus.space.reach(g.minus.space.uniform())
    ex = exploitability(g, xu, yu)

    def uniform_walk(act, team, v=0, p=1.0):
        k = tree.kind[v]
        if k == TERMINAL:
            return p * tree.payoff(v)
        if k == CHANCE:
            return sum(uniform_walk(act, team, c, p * q) for c, q in zip(tree.children[v], tree.probs[v]))
        if tree.player[v] in team:
            return uniform_walk(act, team, tree.children[v][tree.labels[v].index(act[tree.infoset[v]])], p)
        n = len(tree.children[v])
        return sum(uniform_walk(act, team, c, p / n) for c in tree.children[v])

    def pure_maps(player):
        ids = [i for i, m in enumerate(tree.infosets) if m and tree.infoset_player[i] == player]
        for combo in itertools.product(*(tree.labels[tree.infosets[i][0]] for i in ids)):
            yield dict(zip(ids, combo))

    best_plus = max(uniform_walk(a, {0}) for a in pure_maps(0))
    best_minus = min(uniform_walk(a, {1}) for a in pure_maps(1))
    assert ex.br_plus == pytest.approx(best_plus, abs=1e-12)
    assert ex.br_minus == pytest.approx(best_minus, abs=1e-12)
    assert ex.gap == pytest.approx(best_plus - best_minus, abs=1e-12)


def test_zero_iterations_report_uniform_gap(k3):
    res = self_play(k3, "pcfr+", StopRule(max_iters=0))
    xu = k3.plus.space.reach(k3.plus.space.uniform())
    yu = k3.minus.space.reach(k3.minus.space.uniform())
    assert res.iterations == 0
    assert res.gap == pytest.approx(exploitability(k3, xu, yu).gap)
    assert [r.iteration for r in res.trace.rows] == [0]
    assert res.trace.stop_reason == "iteration limit"


def test_stop_at_target_and_best_responses_bracket_value(k3):
    res = self_play(k3, "pcfr+", StopRule(max_iters=5000, target_gap_fraction=1e-3))
    assert res.trace.stop_reason == "target gap reached"
    assert res.gap <= 1e-3 * k3.payoff_range
    ex = exploitability(k3, res.x, res.y)
    assert ex.br_plus >= res.value - 1e-12 >= ex.br_minus - 2e-12
    its = [r.iteration for r in res.trace.rows]
    assert its == sorted(set(its))
    assert all(r.gap >= -1e-12 for r in res.trace.rows)


def test_self_play_is_deterministic(k3):
    a = self_play(k3, "dcfr", StopRule(max_iters=40, target_gap=0.0))
    b = self_play(k3, "dcfr", StopRule(max_iters=40, target_gap=0.0))
    assert [(r.iteration, r.gap, r.value) for r in a.trace.rows] == [(r.iteration, r.gap, r.value) for r in b.trace.rows]


def test_csv_header(k3, tmp_path):
    res = self_play(k3, "cfr+", StopRule(max_iters=5, target_gap=0.0))
    path = tmp_path / "trace.csv"
    res.trace.write_csv(path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["iteration", "seconds", "gap", "value"]
    assert [int(r[0]) for r in rows[1:]] == [r.iteration for r in res.trace.rows]


def test_lp_single_leaf(tmp_path):
    g = assemble(one_leaf(1.0, 2.5))
    lp_export(g, tmp_path / "leaf.lp")
    assert solve_lp(tmp_path / "leaf.lp") == pytest.approx(2.5, abs=1e-9)


@pytest.mark.parametrize("tree, known", [(games.build_kuhn(2, 3), -1 / 18), (matching_pennies(), 0.0)],
                         ids=["2K3", "pennies"])
def test_lp_known_values(tree, known, tmp_path):
    g = assemble(tree)
    lp_export(g, tmp_path / "g.lp")
    assert solve_lp(tmp_path / "g.lp") == pytest.approx(known, abs=1e-9)


@pytest.mark.parametrize("tree", [games.build_kuhn(2, 3), games.build_kuhn(3, 3), games.build_kuhn(3, 4),
                                  games.build_goofspiel(3, 3, True)], ids=lambda t: t.name)
def test_lp_size(tree, tmp_path):
    g = assemble(tree)
    size = lp_export(g, tmp_path / "g.lp")
    P, M = g.plus.dag, g.minus.dag
    assert size.constraints <= len(P.decision_nodes()) + len(M.decision_nodes()) + P.num_edges
    bound = 3 * (P.num_edges + M.num_edges + len(g.leaves))
    assert size.constraints <= bound and size.nonzeros <= bound


def test_lp_file_is_deterministic(k3, tmp_path):
    lp_export(k3, tmp_path / "a.lp")
    lp_export(k3, tmp_path / "b.lp")
    assert (tmp_path / "a.lp").read_bytes() == (tmp_path / "b.lp").read_bytes()
