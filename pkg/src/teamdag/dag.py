"""Team belief DAG: construction from a timed team problem, compaction, and plan extraction."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

from .efg import DECISION, TERMINAL
from .tfsdp import (
    PublicStructure,
    TeamTFSDP,
    UntimeableError,
    compute_public_structure,
    descendant_infosets,
    effective_size,
)

DEC, OBS, TERM = 0, 1, 2
KIND_CHAR = {DEC: "D", OBS: "O", TERM: "Z"}


class Grouping(str, Enum):
    OBSERVATIONS = "observations"
    STATES = "states"


class TooLargeError(RuntimeError):
    pass


class BeliefError(RuntimeError):
    pass


@dataclass
class TbDag:
    """Nodes are indexed so that every edge goes from a lower to a higher id.

    ``label[n][j]`` is the prescription on the j-th edge out of decision node n,
    a tuple of ``(infoset, action)`` pairs. Terminal nodes list the team-problem
    leaves they stand for in ``aliases``.
    """

    kind: list = field(default_factory=list)
    belief: list = field(default_factory=list)
    layer: list = field(default_factory=list)
    children: list = field(default_factory=list)
    label: list = field(default_factory=list)
    aliases: dict = field(default_factory=dict)
    root: int = 0
    w: int = 1
    raw_size: tuple = (0, 0)

    def __len__(self):
        return len(self.kind)

    @property
    def num_edges(self) -> int:
        return sum(len(c) for c in self.children)

    @property
    def num_vertices(self) -> int:
        return len(self.kind)

    def parents(self) -> list:
        out = [[] for _ in self.kind]
        for n, cs in enumerate(self.children):
            for c in cs:
                out[c].append(n)
        return out

    def terminal_of(self) -> dict:
        """Team-problem leaf -> terminal DAG node."""
        return {z: n for n, zs in self.aliases.items() for z in zs}

    def decision_nodes(self) -> list:
        return [n for n, k in enumerate(self.kind) if k == DEC]

    def terminal_nodes(self) -> list:
        return [n for n, k in enumerate(self.kind) if k == TERM]


class _Builder:
    def __init__(self, t: TeamTFSDP, grouping: Grouping, max_nodes: int | None = None):
        self.t = t
        self.max_nodes = max_nodes
        self.grouping = Grouping(grouping)
        self.desc = descendant_infosets(t)
        if self.grouping == Grouping.STATES:
            self.ps = compute_public_structure(t)
        self.memo: dict = {}
        self.dag = TbDag()
        self.queue: list = []
        self.w = 1
        # one action order per infoset, taken from its first member
        self.actions = {i: list(t.labels[m[0]]) for i, m in enumerate(t.infosets) if m}
        self.order = {i: min(m) for i, m in enumerate(t.infosets) if m}

    def new_node(self, kind, belief, layer):
        d = self.dag
        n = len(d.kind)
        if self.max_nodes is not None and n >= self.max_nodes:
            raise TooLargeError(f"belief DAG exceeds {self.max_nodes} nodes")
        d.kind.append(kind)
        d.belief.append(belief)
        d.layer.append(layer)
        d.children.append([])
        d.label.append([])
        return n

    def dec_node(self, belief: tuple) -> int:
        n = self.memo.get(belief)
        if n is not None:
            return n
        t = self.t
        has_term = any(t.kind[h] == TERMINAL for h in belief)
        if has_term and len(belief) != 1:
            raise BeliefError(f"belief {belief} mixes a terminal with other nodes")
        n = self.new_node(TERM if has_term else DEC, belief, t.depth[belief[0]])
        self.memo[belief] = n
        if has_term:
            self.dag.aliases[n] = [belief[0]]
        else:
            self.w = max(self.w, effective_size(t, belief))
            self.queue.append(n)
        return n

    def components(self, obs: list) -> list:
        if self.grouping == Grouping.STATES:
            groups: dict = {}
            for h in obs:
                groups.setdefault(self.ps.state_of[h], []).append(h)
            return sorted((tuple(sorted(g)) for g in groups.values()), key=lambda g: g[0])
        parent = {h: h for h in obs}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        first: dict = {}
        for h in obs:
            for lab in self.desc[h]:
                g = first.get(lab)
                if g is None:
                    first[lab] = h
                else:
                    ra, rb = find(g), find(h)
                    if ra != rb:
                        parent[rb] = ra
        groups = {}
        for h in obs:
            groups.setdefault(find(h), []).append(h)
        return sorted((tuple(sorted(g)) for g in groups.values()), key=lambda g: g[0])

    def expand(self, n: int):
        t = self.t
        belief = self.dag.belief[n]
        infosets = sorted({t.infoset[h] for h in belief if t.kind[h] == DECISION}, key=self.order.get)
        observing = [h for h in belief if t.kind[h] != DECISION]
        obs_kids = []
        for h in observing:
            obs_kids.extend(t.children[h])
        members = {i: [h for h in belief if t.kind[h] == DECISION and t.infoset[h] == i] for i in infosets}
        for combo in itertools.product(*(self.actions[i] for i in infosets)):
            nxt = list(obs_kids)
            for i, a in zip(infosets, combo):
                for h in members[i]:
                    nxt.append(t.children[h][t.labels[h].index(a)])
            nxt.sort()
            o = self.new_node(OBS, tuple(nxt), self.dag.layer[n] + 1)
            self.dag.children[n].append(o)
            self.dag.label[n].append(tuple(zip(infosets, combo)))
            for comp in self.components(nxt):
                self.dag.children[o].append(self.dec_node(comp))

    def run(self) -> TbDag:
        root = self.dec_node((0,))
        i = 0
        while i < len(self.queue):
            self.expand(self.queue[i])
            i += 1
        d = _renumber(self.dag, root)
        d.w = self.w
        d.raw_size = (d.num_vertices, d.num_edges)
        return d


def _renumber(d: TbDag, root: int, keep=None) -> TbDag:
    """Topologically renumber (by layer, decisions before their observations), dropping unkept nodes."""
    nodes = [n for n in range(len(d.kind)) if keep is None or keep[n]]
    # a spliced chain can join nodes of equal layer; break ties by a longest-path depth
    depth = _longest_depth(d, root, keep)
    nodes.sort(key=lambda n: (depth[n], n))
    new = {n: j for j, n in enumerate(nodes)}
    out = TbDag(root=new[root], w=d.w, raw_size=d.raw_size)
    for n in nodes:
        out.kind.append(d.kind[n])
        out.belief.append(d.belief[n])
        out.layer.append(d.layer[n])
        pairs = [(c, lab) for c, lab in itertools.zip_longest(d.children[n], d.label[n])
                 if keep is None or keep[c]]
        out.children.append([new[c] for c, _ in pairs])
        out.label.append([lab for _, lab in pairs] if d.kind[n] == DEC else [])
    out.aliases = {new[n]: list(zs) for n, zs in d.aliases.items() if n in new}
    return out


def _longest_depth(d: TbDag, root: int, keep=None) -> list:
    n = len(d.kind)
    indeg = [0] * n
    for a in range(n):
        if keep is not None and not keep[a]:
            continue
        for c in d.children[a]:
            if keep is None or keep[c]:
                indeg[c] += 1
    depth = [0] * n
    stack = [a for a in range(n) if indeg[a] == 0 and (keep is None or keep[a])]
    while stack:
        a = stack.pop()
        for c in d.children[a]:
            if keep is not None and not keep[c]:
                continue
            depth[c] = max(depth[c], depth[a] + 1)
            indeg[c] -= 1
            if indeg[c] == 0:
                stack.append(c)
    return depth


def build(t: TeamTFSDP, grouping: Grouping | str = Grouping.OBSERVATIONS,
          max_nodes: int | None = None) -> TbDag:
    """Belief DAG of a timed team problem; beliefs are memoized on their sorted node tuple.

    Raises ``TooLargeError`` once more than ``max_nodes`` nodes would be created.
    """
    if not t.is_timed():
        raise UntimeableError("belief DAG construction needs a timed problem")
    return _Builder(t, grouping, max_nodes).run()


# ---------------------------------------------------------------------------
# compaction


def optimize(d: TbDag, t: TeamTFSDP) -> TbDag:
    """Merge terminals with equal team sequence, prune dead parts, splice pass-through nodes.

    Repeated to a fixpoint. A pass-through node has one child and at most one
    parent. An observation node whose parent is an observation node is folded
    into it. Dead observation nodes below a live decision keep their slot as
    empty observations so the set of prescriptions is unchanged.
    """
    n_nodes = len(d.kind)
    kind = d.kind
    children = [list(c) for c in d.children]
    label = [list(c) for c in d.label]
    aliases = {n: list(z) for n, z in d.aliases.items()}
    alive = [True] * n_nodes
    root = d.root

    rep: dict = {}
    for n in sorted(aliases):
        key = t.team_sequence(aliases[n][0])
        if key in rep:
            aliases[rep[key]].extend(aliases.pop(n))
            alive[n] = False
        else:
            rep[key] = n
    # a dropped duplicate reads its value off the kept terminal, so its edges go too
    for n in range(n_nodes):
        children[n] = [c for c in children[n] if kind[c] != TERM or alive[c]]

    changed = True
    while changed:
        changed = False
        order = _topo(children, root, n_nodes)
        live = [False] * n_nodes
        for n in reversed(order):
            live[n] = kind[n] == TERM or any(live[c] for c in children[n])
        for n in order:
            if kind[n] == OBS:
                kids = [c for c in children[n] if live[c]]
                if len(kids) != len(children[n]):
                    children[n] = kids
                    changed = True

        parents = _parents(children, order, n_nodes)
        for n in order:
            if kind[n] != OBS:
                continue
            while any(kind[c] == OBS and len(parents[c]) == 1 for c in children[n]):
                merged = []
                for c in children[n]:
                    if kind[c] == OBS and len(parents[c]) == 1:
                        merged.extend(children[c])
                        for g in children[c]:
                            parents[g] = [n if x == c else x for x in parents[g]]
                        children[c], parents[c] = [], []
                    else:
                        merged.append(c)
                children[n] = merged
                changed = True

        order = _topo(children, root, n_nodes)
        parents = _parents(children, order, n_nodes)
        for n in order:
            if kind[n] == TERM or len(children[n]) != 1 or len(parents[n]) > 1:
                continue
            c = children[n][0]
            # an observation node is only spliced when it heads a chain
            if kind[n] == OBS and len(parents[c]) != 1:
                continue
            if parents[n]:
                p = parents[n][0]
                children[p] = [c if x == n else x for x in children[p]]
                parents[c] = [p if x == n else x for x in parents[c]]
            else:
                root = c
                parents[c] = [x for x in parents[c] if x != n]
            children[n] = []
            parents[n] = []
            changed = True

    reach = set(_topo(children, root, n_nodes))
    keep = [n in reach for n in range(n_nodes)]
    tmp = TbDag(kind=list(kind), belief=list(d.belief), layer=list(d.layer), children=children,
                label=label, aliases=aliases, root=root, w=d.w, raw_size=d.raw_size)
    return _renumber(tmp, root, keep=keep)


def aliases_of(d: TbDag, n: int) -> int:
    return d.aliases[n][0]


def _topo(children, root, n_nodes) -> list:
    """Nodes reachable from ``root`` in topological order."""
    seen = [False] * n_nodes
    indeg = [0] * n_nodes
    stack = [root]
    seen[root] = True
    while stack:
        a = stack.pop()
        for c in children[a]:
            indeg[c] += 1
            if not seen[c]:
                seen[c] = True
                stack.append(c)
    order, stack = [], [root]
    while stack:
        a = stack.pop()
        order.append(a)
        for c in children[a]:
            indeg[c] -= 1
            if indeg[c] == 0:
                stack.append(c)
    return order


def _parents(children, order, n_nodes) -> list:
    out = [[] for _ in range(n_nodes)]
    for a in order:
        for c in children[a]:
            out[c].append(a)
    return out


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class SizeReport:
    vertices: int
    edges: int
    raw_vertices: int
    raw_edges: int
    w: int
    bound_effective: int
    bound_private: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def stats(d: TbDag, ps: PublicStructure) -> SizeReport:
    b, bp, p, k, P = ps.b, ps.b_public, ps.p, ps.k, ps.num_states
    return SizeReport(
        vertices=d.num_vertices, edges=d.num_edges,
        raw_vertices=d.raw_size[0], raw_edges=d.raw_size[1], w=d.w,
        bound_effective=math.floor((b * (p + 1)) ** d.w * bp * P),
        bound_private=(b + 1) ** k * bp * P,
    )


def lint(d: TbDag) -> list:
    """Structural conditions for running CFR on the DAG."""
    out = []
    parents = d.parents()
    for n in range(len(d.kind)):
        for c in d.children[n]:
            if c <= n:
                out.append(f"edge {n}->{c} breaks topological numbering")
        if d.kind[n] == OBS and n != d.root and len(parents[n]) != 1:
            out.append(f"observation node {n} has {len(parents[n])} parents")
        if d.kind[n] == TERM and d.children[n]:
            out.append(f"terminal node {n} has children")
        if d.kind[n] == DEC and not d.children[n]:
            out.append(f"decision node {n} has no prescriptions")
        if d.kind[n] == DEC and len(d.label[n]) != len(d.children[n]):
            out.append(f"decision node {n} has unlabeled edges")
        if n != d.root and not parents[n]:
            out.append(f"node {n} is unreachable")
    return out


# ---------------------------------------------------------------------------
# pure strategies and correlation plans


def correlation_plan(d: TbDag, pure: dict) -> tuple:
    """Leaf vector of a pure DAG strategy as a sorted tuple of team-problem leaves.

    ``pure[n]`` is the edge index played at decision node n. A leaf reached
    along two paths appears twice, so a valid DAG only ever yields 0/1 vectors.
    """
    count = [0] * len(d.kind)
    count[d.root] = 1
    out = []
    for n in range(d.root, len(d.kind)):
        m = count[n]
        if not m:
            continue
        k = d.kind[n]
        if k == TERM:
            out.extend(d.aliases[n] * m)
        elif k == OBS:
            for c in d.children[n]:
                count[c] += m
        else:
            j = pure[n]
            if not 0 <= j < len(d.children[n]):
                raise ValueError(f"invalid prescription {j} at node {n}")
            count[d.children[n][j]] += m
    return tuple(sorted(out))


def enumerate_pure(d: TbDag, limit: int = 10**6):
    """Yield every assignment of prescriptions to the decision nodes reachable under it."""
    decs = [n for n in range(len(d.kind)) if d.kind[n] == DEC]
    count = [0]

    def rec(i, reached, choice):
        while i < len(decs) and not reached.get(decs[i]):
            i += 1
        if i == len(decs):
            count[0] += 1
            if count[0] > limit:
                raise TooLargeError(f"more than {limit} pure strategies")
            yield dict(choice)
            return
        n = decs[i]
        for j, c in enumerate(d.children[n]):
            added = []
            stack = [c]
            while stack:
                x = stack.pop()
                if reached.get(x):
                    continue
                reached[x] = True
                added.append(x)
                if d.kind[x] == OBS:
                    stack.extend(d.children[x])
            choice[n] = j
            yield from rec(i + 1, reached, choice)
            del choice[n]
            for x in added:
                del reached[x]

    start = {}
    stack = [d.root]
    while stack:
        x = stack.pop()
        if x in start:
            continue
        start[x] = True
        if d.kind[x] == OBS:
            stack.extend(d.children[x])
    yield from rec(0, start, {})


def brute_force_plans(t: TeamTFSDP, limit: int = 10**6) -> set:
    """Leaf vectors (sorted leaf tuples) of every pure team strategy, one action per infoset."""
    live = [i for i, m in enumerate(t.infosets) if m]
    total = 1
    for i in live:
        total *= len(t.labels[t.infosets[i][0]])
        if total > limit:
            raise TooLargeError(f"more than {limit} pure team strategies")
    out = set()
    for combo in itertools.product(*(t.labels[t.infosets[i][0]] for i in live)):
        act = dict(zip(live, combo))
        reached = set()
        stack = [0]
        while stack:
            v = stack.pop()
            k = t.kind[v]
            if k == TERMINAL:
                reached.add(v)
            elif k == DECISION:
                stack.append(t.children[v][t.labels[v].index(act[t.infoset[v]])])
            else:
                stack.extend(t.children[v])
        out.add(tuple(sorted(reached)))
    return out


def dag_plans(d: TbDag, limit: int = 10**6) -> set:
    return {correlation_plan(d, pure) for pure in enumerate_pure(d, limit)}


def canonical_form(d: TbDag, t: TeamTFSDP) -> frozenset:
    """Relabeling-invariant description: beliefs, node-level prescriptions and child beliefs."""
    out = set()
    for n in range(len(d.kind)):
        if d.kind[n] != DEC:
            continue
        for o, lab in zip(d.children[n], d.label[n]):
            act = dict(lab)
            per_node = frozenset((h, act[t.infoset[h]]) for h in d.belief[n] if t.kind[h] == DECISION)
            kids = frozenset(d.belief[c] for c in d.children[o]) if d.kind[o] == OBS else frozenset([d.belief[o]])
            out.add((d.belief[n], per_node, kids))
    return frozenset(out)


def dump(d: TbDag, t: TeamTFSDP | None = None) -> str:
    """Line format: ``node id kind layer members...`` and ``edge from to prescription``."""
    lines = [f"dag root {d.root} vertices {d.num_vertices} edges {d.num_edges}"]
    for n in range(len(d.kind)):
        members = " ".join(map(str, d.belief[n]))
        lines.append(f"node {n} {KIND_CHAR[d.kind[n]]} {d.layer[n]} {members}")
    for n in range(len(d.kind)):
        for j, c in enumerate(d.children[n]):
            lab = "-"
            if d.kind[n] == DEC:
                lab = ",".join(f"{i}:{a}" for i, a in d.label[n][j]) or "()"
            lines.append(f"edge {n} {c} {lab}")
    for n in sorted(d.aliases):
        lines.append(f"alias {n} " + " ".join(map(str, d.aliases[n])))
    return "\n".join(lines) + "\n"
