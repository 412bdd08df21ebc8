"""Small shared builders for the tests."""

import random

from teamdag.efg import CHANCE, DECISION, TERMINAL, GameTree
from teamdag.tfsdp import OBS, TeamTFSDP, make_timed, project, random_tfsdp


# criterion number -> PASS/FAIL line, printed in the terminal summary
ACCEPTANCE_LINES: dict = {}


def timed(tree, team):
    return make_timed(project(tree, team))


def random_problems(n, seed=0, **kw):
    return [random_tfsdp(random.Random(seed + i), **kw) for i in range(n)]


def single_decision(payoffs=(1.0, 0.0)) -> TeamTFSDP:
    """One decision node with one action per entry of ``payoffs``."""
    t = TeamTFSDP(name="single")
    root = t.add_node(DECISION)
    t.set_infoset(root, 0, 0)
    for j in range(len(payoffs)):
        t.add_node(TERMINAL, root, f"a{j}")
    return t


def matching_pennies() -> GameTree:
    """Player 0 (team plus) and player 1 (team minus) pick H/T; plus wins 1 on a match."""
    g = GameTree(num_players=2, minus=frozenset([1]), name="pennies")
    root = g.add_node(DECISION, player=0)
    g.infosets.append([root])
    g.infoset_player.append(0)
    g.infoset_key.append("p0")
    g.infoset[root] = 0
    g.infosets.append([])
    g.infoset_player.append(1)
    g.infoset_key.append("p1")
    for a in "HT":
        v = g.add_node(DECISION, player=1, parent=root)
        g.children[root].append(v)
        g.labels[root].append(a)
        g.infosets[1].append(v)
        g.infoset[v] = 1
        for b in "HT":
            u = 1.0 if a == b else -1.0
            z = g.add_node(TERMINAL, parent=v, ret=(u, -u))
            g.children[v].append(z)
            g.labels[v].append(b)
    return g


def one_leaf(c=1.0, u=2.5) -> GameTree:
    """Chance node with a single outcome leading to one leaf."""
    g = GameTree(num_players=2, minus=frozenset([1]), name="leaf")
    root = g.add_node(CHANCE)
    z = g.add_node(TERMINAL, parent=root, ret=(u, -u))
    g.children[root].append(z)
    g.labels[root].append("only")
    g.probs[root].append(c)
    return g


__all__ = ["ACCEPTANCE_LINES", "OBS", "timed", "random_problems", "single_decision", "matching_pennies", "one_leaf"]
