"""Team tree-form decision problems: projection, timing, inflation, binarization, public states."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from graphlib import CycleError, TopologicalSorter

from .efg import CHANCE, DECISION, TERMINAL, GameTree, TeamSpec, check
from .unionfind import UnionFind

OBS = CHANCE  # observation nodes reuse the chance tag


class UntimeableError(ValueError):
    pass


class NotApplicableError(ValueError):
    pass


@dataclass
class TeamTFSDP:
    """One team's decision problem. Node ids satisfy ``parent[v] < v``; node 0 is the root.

    ``origin[v]`` is the game-tree node a node was derived from (-1 for
    inserted nodes); ``infoset_player[i]`` is the team member acting at infoset i.
    """

    kind: list = field(default_factory=list)
    parent: list = field(default_factory=list)
    children: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    infoset: list = field(default_factory=list)
    infosets: list = field(default_factory=list)
    infoset_player: list = field(default_factory=list)
    origin: list = field(default_factory=list)
    name: str = "tfsdp"

    def __len__(self):
        return len(self.kind)

    def add_node(self, kind, parent=-1, label=None, origin=-1) -> int:
        v = len(self.kind)
        self.kind.append(kind)
        self.parent.append(parent)
        self.children.append([])
        self.labels.append([])
        self.infoset.append(-1)
        self.origin.append(origin)
        if parent >= 0:
            self.children[parent].append(v)
            self.labels[parent].append(label)
        return v

    def set_infoset(self, v, iid, player=0):
        while len(self.infosets) <= iid:
            self.infosets.append([])
            self.infoset_player.append(player)
        self.infosets[iid].append(v)
        self.infoset_player[iid] = player
        self.infoset[v] = iid

    def terminals(self) -> list:
        return [v for v, k in enumerate(self.kind) if k == TERMINAL]

    @cached_property
    def depth(self) -> list:
        d = [0] * len(self.kind)
        for v in range(1, len(self.kind)):
            d[v] = d[self.parent[v]] + 1
        return d

    @cached_property
    def layers(self) -> list:
        out = [[] for _ in range(max(self.depth, default=0) + 1)]
        for v, d in enumerate(self.depth):
            out[d].append(v)
        return out

    @cached_property
    def path_seq(self) -> list:
        """Interned id of the (infoset, action) pairs strictly above each node."""
        table: dict = {}
        ids = [0] * len(self.kind)
        for v in range(len(self.kind)):
            if self.kind[v] != DECISION:
                for w in self.children[v]:
                    ids[w] = ids[v]
                continue
            for w, a in zip(self.children[v], self.labels[v]):
                ids[w] = table.setdefault((ids[v], self.infoset[v], a), len(table) + 1)
        return ids

    def team_sequence(self, v) -> tuple:
        return (self.path_seq[v], self.infoset[v])

    @cached_property
    def player_path_seq(self) -> list:
        """Per node, a dict player -> interned player-sequence id (players absent have id 0)."""
        table: dict = {}
        ids = [None] * len(self.kind)
        ids[0] = {}
        for v in range(len(self.kind)):
            base = ids[v]
            if self.kind[v] != DECISION:
                for w in self.children[v]:
                    ids[w] = base
                continue
            pl = self.infoset_player[self.infoset[v]]
            for w, a in zip(self.children[v], self.labels[v]):
                sid = table.setdefault((base.get(pl, 0), self.infoset[v], a), len(table) + 1)
                d = dict(base)
                d[pl] = sid
                ids[w] = d
        return ids

    def players(self) -> list:
        return sorted({self.infoset_player[i] for i, m in enumerate(self.infosets) if m})

    def path_prescription(self, v) -> dict:
        """Infoset -> action the team must play to reach ``v``."""
        out = {}
        w = v
        while self.parent[w] >= 0:
            p = self.parent[w]
            if self.kind[p] == DECISION:
                out[self.infoset[p]] = self.labels[p][self.children[p].index(w)]
            w = p
        return out

    def is_timed(self) -> bool:
        d = self.depth
        return all(len({d[v] for v in m}) <= 1 for m in self.infosets)

    def copy_structure(self) -> "TeamTFSDP":
        return TeamTFSDP(
            kind=list(self.kind), parent=list(self.parent),
            children=[list(c) for c in self.children], labels=[list(c) for c in self.labels],
            infoset=list(self.infoset), infosets=[list(m) for m in self.infosets],
            infoset_player=list(self.infoset_player), origin=list(self.origin), name=self.name,
        )


def _team_members(tree: GameTree, team) -> frozenset:
    if isinstance(team, TeamSpec):
        return team.members
    if team == "+":
        return tree.plus
    if team == "-":
        return tree.minus
    return frozenset(team)


def project(tree: GameTree, team) -> TeamTFSDP:
    """Keep the team's decision nodes and infosets; everything else becomes an observation."""
    check(tree)
    members = _team_members(tree, team)
    t = TeamTFSDP(name=f"{tree.name}[{''.join(str(p + 1) for p in sorted(members))}]")
    remap: dict = {}
    for v in range(len(tree.kind)):
        k = tree.kind[v]
        team_dec = k == DECISION and tree.player[v] in members
        w = t.add_node(TERMINAL if k == TERMINAL else (DECISION if team_dec else OBS), origin=v)
        t.parent[w] = tree.parent[v]
        if team_dec:
            g = tree.infoset[v]
            if g not in remap:
                remap[g] = len(t.infosets)
                t.infosets.append([])
                t.infoset_player.append(tree.player[v])
            t.infosets[remap[g]].append(w)
            t.infoset[w] = remap[g]
    for v in range(len(tree.kind)):
        t.children[v] = list(tree.children[v])
        t.labels[v] = list(tree.labels[v])
    return t


# ---------------------------------------------------------------------------
# precedence and timing


def infoset_precedence(t: TeamTFSDP) -> dict:
    """Infoset -> set of infosets having a member strictly above one of its members."""
    preds = {i: set() for i, m in enumerate(t.infosets) if m}
    for i, members in enumerate(t.infosets):
        for v in members:
            w = t.parent[v]
            while w >= 0:
                if t.kind[w] == DECISION:
                    preds[i].add(t.infoset[w])
                w = t.parent[w]
    return preds


def infoset_order(t: TeamTFSDP) -> list:
    preds = infoset_precedence(t)
    for i, ps in preds.items():
        if i in ps:
            raise UntimeableError(f"infoset {i} precedes itself (absentminded)")
    try:
        return list(TopologicalSorter(preds).static_order())
    except CycleError as e:
        raise UntimeableError(f"infoset precedence has a cycle: {e.args[1]}") from None


def _rebuild(t: TeamTFSDP, expand_node) -> TeamTFSDP:
    """Preorder rebuild; ``expand_node(out, old, new_parent, label)`` returns the node standing for ``old``."""
    out = TeamTFSDP(name=t.name, infoset_player=[])
    stack = [(0, -1, None)]
    while stack:
        v, par, label = stack.pop()
        w = expand_node(out, v, par, label)
        for c, a in reversed(list(zip(t.children[v], t.labels[v]))):
            stack.append((c, w, a))
    return out


def make_timed(t: TeamTFSDP) -> TeamTFSDP:
    """Pad shallow infoset members with single-branch observation nodes until every infoset sits in one layer."""
    if t.is_timed():
        return t
    order = infoset_order(t)
    pad = [0] * len(t)
    depth = t.depth

    def cur_depth(v):
        d = depth[v]
        w = v
        while w >= 0:
            d += pad[w]
            w = t.parent[w]
        return d

    for i in order:
        members = t.infosets[i]
        ds = [cur_depth(v) for v in members]
        target = max(ds)
        for v, d in zip(members, ds):
            pad[v] += target - d

    def expand_node(out, v, par, label):
        for _ in range(pad[v]):
            par = out.add_node(OBS, par, label)
            label = "~"
        w = out.add_node(t.kind[v], par, label, origin=t.origin[v])
        if t.kind[v] == DECISION:
            i = t.infoset[v]
            out.set_infoset(w, i, t.infoset_player[i])
        return w

    out = _rebuild(t, expand_node)
    _fill_infoset_players(out, t)
    if not out.is_timed():
        raise UntimeableError("padding did not produce a timed problem")
    return out


def _fill_infoset_players(out: TeamTFSDP, src: TeamTFSDP):
    while len(out.infosets) < len(src.infosets):
        out.infosets.append([])
        out.infoset_player.append(src.infoset_player[len(out.infoset_player)])


# ---------------------------------------------------------------------------
# inflation


def _conflict(p: dict, q: dict) -> bool:
    if len(q) < len(p):
        p, q = q, p
    return any(i in q and q[i] != a for i, a in p.items())


def inflate(t: TeamTFSDP) -> TeamTFSDP:
    """Split each infoset into classes of nodes connected by joint playability."""
    out = t.copy_structure()
    out.infosets, out.infoset_player = [], []
    for i, members in enumerate(t.infosets):
        if not members:
            continue
        paths = {v: t.path_prescription(v) for v in members}
        uf = UnionFind(members)
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                u, v = members[a], members[b]
                if not _conflict(paths[u], paths[v]):
                    uf.union(u, v)
        for group in uf.groups():
            nid = len(out.infosets)
            out.infosets.append(group)
            out.infoset_player.append(t.infoset_player[i])
            for v in group:
                out.infoset[v] = nid
    return out


# ---------------------------------------------------------------------------
# public structure


@dataclass
class PublicStructure:
    state_of: list            # node -> public state id
    states: list              # public state id -> sorted node list
    parent: list              # public state id -> parent state id (-1 at the root)
    children: list            # public state id -> child state ids
    b: int
    b_public: int
    p: int
    k: int
    num_states: int
    n: int

    def params(self) -> dict:
        return dict(b=self.b, b_public=self.b_public, p=self.p, k=self.k,
                    num_states=self.num_states, n=self.n)


def connectivity(t: TeamTFSDP) -> UnionFind:
    """Union-find over all nodes whose classes are the connected components of the connectivity graph."""
    uf = UnionFind(range(len(t)))
    for members in t.infosets:
        level = set(members)
        while len(level) > 1:
            uf.union_all(level)
            level = {t.parent[v] for v in level}
    return uf


def descendant_infosets(t: TeamTFSDP) -> list:
    """Per node, the frozenset of infosets with at least two members that the node precedes."""
    out = [frozenset()] * len(t)
    big = {i for i, m in enumerate(t.infosets) if len(m) > 1}
    for v in range(len(t) - 1, -1, -1):
        acc = set()
        if t.kind[v] == DECISION and t.infoset[v] in big:
            acc.add(t.infoset[v])
        for c in t.children[v]:
            acc |= out[c]
        out[v] = frozenset(acc)
    return out


def effective_size(t: TeamTFSDP, nodes) -> int:
    return len({t.team_sequence(v) for v in nodes})


def compute_public_structure(t: TeamTFSDP) -> PublicStructure:
    if not t.is_timed():
        raise UntimeableError("public states need a timed problem")
    uf = connectivity(t)
    state_of = [-1] * len(t)
    states = []
    for layer in t.layers:
        groups = {}
        for v in layer:
            groups.setdefault(uf.find(v), []).append(v)
        for g in sorted(groups.values(), key=lambda g: g[0]):
            sid = len(states)
            states.append(sorted(g))
            for v in g:
                state_of[v] = sid
    parent = [-1] * len(states)
    children = [[] for _ in states]
    for sid, g in enumerate(states):
        if t.parent[g[0]] >= 0:
            parent[sid] = state_of[t.parent[g[0]]]
            children[parent[sid]].append(sid)
    b = max((len(t.children[v]) for v in range(len(t)) if t.kind[v] == DECISION), default=1)
    b_public = max((len(c) for c in children), default=0)
    p = max(effective_size(t, g) for g in states)
    pps = t.player_path_seq
    # a team has at least one member, whose empty sequence counts even if it never acts
    players = t.players() or [0]
    k = 0
    for g in states:
        seqs = set()
        for v in g:
            own = t.infoset_player[t.infoset[v]] if t.kind[v] == DECISION else None
            for pl in players:
                seqs.add((pl, pps[v].get(pl, 0), t.infoset[v] if pl == own else -1))
        k = max(k, len(seqs))
    return PublicStructure(state_of, states, parent, children, b, b_public, p, k,
                           len(states), len(players))


def has_team_public_actions(t: TeamTFSDP, ps: PublicStructure | None = None) -> bool:
    ps = ps or compute_public_structure(t)
    for g in ps.states:
        if not any(t.kind[v] == DECISION for v in g):
            continue
        by_label: dict = {}
        for v in g:
            for c, a in zip(t.children[v], t.labels[v]):
                by_label.setdefault(a, []).append(c)
        for kids in by_label.values():
            hit: dict = {}
            for c in kids:
                s = ps.state_of[c]
                hit[s] = hit.get(s, 0) + 1
            if any(len(ps.states[s]) != n for s, n in hit.items()):
                return False
    return True


# ---------------------------------------------------------------------------
# branching-factor reduction


def _binary_shape(actions):
    """Nested (left, right) tuples over ``actions``; leaves are action labels."""
    if len(actions) == 1:
        return actions[0]
    h = math.ceil(len(actions) / 2)
    return (_binary_shape(actions[:h]), _binary_shape(actions[h:]))


def _leaves(shape):
    if isinstance(shape, tuple):
        return _leaves(shape[0]) | _leaves(shape[1])
    return {shape}


def reduce_branching(t: TeamTFSDP, ps: PublicStructure | None = None) -> TeamTFSDP:
    """Replace every decision with more than two actions by a binary tree of partial actions."""
    ps = ps or compute_public_structure(t)
    if not has_team_public_actions(t, ps):
        raise NotApplicableError("branching reduction needs team-public actions")
    shape_of: dict = {}
    for g in ps.states:
        decs = [v for v in g if t.kind[v] == DECISION]
        if not decs:
            continue
        acts = sorted({a for v in decs for a in t.labels[v]})
        if len(acts) > 2:
            shape = _binary_shape(acts)
            for v in decs:
                shape_of[v] = shape
    partial_ids: dict = {}
    pending: dict = {}

    def partial_infoset(out, i, path):
        key = (i, path)
        if key not in partial_ids:
            partial_ids[key] = len(partial_ids)
        return partial_ids[key]

    def expand_node(out, v, par, label):
        k = t.kind[v]
        if k != DECISION or v not in shape_of:
            w = out.add_node(k, par, label, origin=t.origin[v])
            if k == DECISION:
                pending.setdefault(w, (t.infoset[v], ""))
            return w
        w = out.add_node(DECISION, par, label, origin=t.origin[v])
        pending[w] = (t.infoset[v], "")
        own = set(t.labels[v])
        # grow the pruned partial-action tree; leaf edges carry the real action label
        hooks = {}
        stack = [(w, shape_of[v], "")]
        while stack:
            node, shape, path = stack.pop()
            for bit, sub in zip("01", shape):
                if not (_leaves(sub) & own):
                    continue
                if isinstance(sub, tuple):
                    m = out.add_node(DECISION, node, path + bit, origin=-1)
                    pending[m] = (t.infoset[v], path + bit)
                    stack.append((m, sub, path + bit))
                else:
                    hooks[sub] = (node, sub)
        expand_node.hooks[v] = hooks
        return w

    expand_node.hooks = {}

    out = TeamTFSDP(name=t.name)
    stack = [(0, -1, None)]
    while stack:
        v, par, label = stack.pop()
        if par >= 0 and t.parent[v] in expand_node.hooks:
            par, label = expand_node.hooks[t.parent[v]][label]
        w = expand_node(out, v, par, label)
        for c, a in reversed(list(zip(t.children[v], t.labels[v]))):
            stack.append((c, w, a))
    # the hooked parent ids were created before their children, so parent < child holds
    for w, (i, path) in sorted(pending.items()):
        nid = partial_infoset(out, i, path)
        out.set_infoset(w, nid, t.infoset_player[i])
    if not out.is_timed():
        out = make_timed(out)
    return out


# ---------------------------------------------------------------------------
# validation


def validate_team(t: TeamTFSDP) -> list:
    out = []
    for v in range(1, len(t)):
        if not 0 <= t.parent[v] < v:
            out.append(f"node {v} has parent {t.parent[v]} not before it")
    for v in range(len(t)):
        if (t.kind[v] == TERMINAL) != (not t.children[v]):
            out.append(f"node {v}: terminal flag disagrees with children")
        if t.kind[v] == DECISION and t.infoset[v] < 0:
            out.append(f"decision node {v} lacks an infoset")
    for i, members in enumerate(t.infosets):
        if not members:
            continue
        if len({frozenset(t.labels[v]) for v in members}) > 1:
            out.append(f"action-set mismatch in infoset {i}: nodes {members}")
    try:
        infoset_order(t)
    except UntimeableError as e:
        out.append(f"untimeable: {e}")
        return out
    d = t.depth
    for i, members in enumerate(t.infosets):
        if len({d[v] for v in members}) > 1:
            out.append(f"not timed: infoset {i} spans layers {sorted({d[v] for v in members})}")
    return out


# ---------------------------------------------------------------------------
# small generated problems


def random_tfsdp(rng: random.Random, max_infosets: int = 12, depth: int = 4, max_actions: int = 2,
                 p_decision: float = 0.5, max_children: int = 2) -> TeamTFSDP:
    """Random timed team problem: decision nodes in a layer are grouped into random infosets."""
    t = TeamTFSDP(name="random")
    frontier = [t.add_node(OBS)]
    for level in range(depth):
        nxt = []
        decs_by_width: dict = {}
        for v in frontier:
            last = level == depth - 1
            if last:
                t.kind[v] = TERMINAL
                continue
            if level > 0 and rng.random() < 0.15:
                t.kind[v] = TERMINAL
                continue
            if level > 0 and rng.random() < p_decision:
                t.kind[v] = DECISION
                n = rng.randint(2, max_actions)
                decs_by_width.setdefault(n, []).append(v)
                for a in range(n):
                    nxt.append(t.add_node(OBS, v, "abcdefgh"[a]))
            else:
                for a in range(rng.randint(1, max_children)):
                    nxt.append(t.add_node(OBS, v, f"o{a}"))
        for n, vs in sorted(decs_by_width.items()):
            rng.shuffle(vs)
            while vs:
                if len(t.infosets) >= max_infosets:
                    for v in vs:  # out of infoset budget: demote to observation
                        t.kind[v] = OBS
                    break
                size = rng.randint(1, min(3, len(vs)))
                group, vs = vs[:size], vs[size:]
                iid = len(t.infosets)
                for v in sorted(group):
                    t.set_infoset(v, iid, player=level)
        frontier = nxt
    for v in frontier:
        t.kind[v] = TERMINAL
    return t
