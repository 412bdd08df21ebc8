"""Extensive-form adversarial team games stored as flat, index-based trees."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

TERMINAL, CHANCE, DECISION = 0, 1, 2
KIND_NAMES = {TERMINAL: "terminal", CHANCE: "chance", DECISION: "decision"}


class InvalidParameters(ValueError):
    pass


class InvalidGame(ValueError):
    def __init__(self, violations: Sequence[str]):
        super().__init__("; ".join(violations[:5]))
        self.violations = list(violations)


@dataclass(frozen=True)
class TeamSpec:
    """Membership of one team. ``team`` is ``"+"`` or ``"-"``; players are 0-based."""

    team: str
    members: frozenset

    def __post_init__(self):
        if self.team not in ("+", "-"):
            raise ValueError(f"unknown team {self.team!r}")
        if not self.members:
            raise ValueError("a team needs at least one member")


@dataclass
class GameTree:
    """Game tree with contiguous integer node ids; node 0 is the root.

    ``returns[z]`` holds the per-player utilities of terminal ``z``; the team
    payoff is derived from the ``minus`` team membership.
    """

    num_players: int
    minus: frozenset
    kind: list = field(default_factory=list)
    player: list = field(default_factory=list)
    parent: list = field(default_factory=list)
    children: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    probs: list = field(default_factory=list)
    returns: list = field(default_factory=list)
    infoset: list = field(default_factory=list)
    infosets: list = field(default_factory=list)  # list of node-id lists
    infoset_player: list = field(default_factory=list)
    infoset_key: list = field(default_factory=list)
    name: str = "game"

    def __len__(self):
        return len(self.kind)

    @property
    def plus(self) -> frozenset:
        return frozenset(range(self.num_players)) - self.minus

    def terminals(self) -> list:
        return [v for v, k in enumerate(self.kind) if k == TERMINAL]

    def payoff(self, z: int) -> float:
        """Team-plus utility at terminal ``z`` (team minus receives the negation)."""
        r = self.returns[z]
        return float(sum(r[i] for i in range(self.num_players) if i not in self.minus))

    def team_of(self, player: int) -> str:
        return "-" if player in self.minus else "+"

    def with_minus(self, minus: Iterable[int]) -> "GameTree":
        """Shallow copy with a different team split."""
        out = GameTree(**{**self.__dict__, "minus": frozenset(minus)})
        validate_teams(out)
        return out

    def add_node(self, kind, player=-1, parent=-1, ret=None) -> int:
        v = len(self.kind)
        self.kind.append(kind)
        self.player.append(player)
        self.parent.append(parent)
        self.children.append([])
        self.labels.append([])
        self.probs.append([])
        self.returns.append(ret)
        self.infoset.append(-1)
        return v

    def depth(self) -> list:
        d = [0] * len(self.kind)
        for v in range(1, len(self.kind)):
            d[v] = d[self.parent[v]] + 1  # preorder ids: parent < child
        return d

    def chance_reach(self) -> list:
        """Probability that chance alone plays to each node."""
        c = [1.0] * len(self.kind)
        for v in range(len(self.kind)):
            if self.kind[v] == CHANCE:
                for w, p in zip(self.children[v], self.probs[v]):
                    c[w] = c[v] * p
            else:
                for w in self.children[v]:
                    c[w] = c[v]
        return c

    def uniform_reach(self) -> list:
        return uniform_reach(self)

    def player_sequence(self, v: int, player: int) -> tuple:
        """(infoset, action) pairs of ``player`` on the root path, plus the infoset at ``v``."""
        seq = []
        w = v
        while self.parent[w] >= 0:
            p = self.parent[w]
            if self.kind[p] == DECISION and self.player[p] == player:
                seq.append((self.infoset[p], self.labels[p][self.children[p].index(w)]))
            w = p
        seq.reverse()
        if self.kind[v] == DECISION and self.player[v] == player:
            seq.append((self.infoset[v], None))
        return tuple(seq)


def player_sequence_ids(tree: GameTree) -> list:
    """Per node, an interned id of every player's sequence (excluding the infoset at the node)."""
    table: dict = {}
    ids = [None] * len(tree.kind)
    ids[0] = (0,) * tree.num_players
    for v in range(len(tree.kind)):
        base = ids[v]
        if tree.kind[v] != DECISION:
            for w in tree.children[v]:
                ids[w] = base
            continue
        pl = tree.player[v]
        for w, a in zip(tree.children[v], tree.labels[v]):
            key = (base[pl], tree.infoset[v], a)
            sid = table.setdefault(key, len(table) + 1)
            ids[w] = base[:pl] + (sid,) + base[pl + 1:]
    return ids


def uniform_reach(tree: GameTree) -> list:
    """Reach probability of each node when every player mixes uniformly."""
    c = [1.0] * len(tree.kind)
    for v in range(len(tree.kind)):
        ch = tree.children[v]
        if tree.kind[v] == CHANCE:
            for w, p in zip(ch, tree.probs[v]):
                c[w] = c[v] * p
        else:
            for w in ch:
                c[w] = c[v] / len(ch)
    return c


class GameState(Protocol):
    def is_terminal(self) -> bool: ...
    def is_chance(self) -> bool: ...
    def current_player(self) -> int: ...
    def legal_actions(self) -> list: ...
    def chance_outcomes(self) -> list: ...
    def child(self, action): ...
    def returns(self) -> Sequence[float]: ...
    def info_key(self) -> object: ...


def expand(root: GameState, num_players: int, minus: Iterable[int], name="game") -> GameTree:
    """Expand a rules object into a full GameTree; infosets group equal ``(player, info_key)``."""
    tree = GameTree(num_players=num_players, minus=frozenset(minus), name=name)
    keys: dict = {}
    stack = [(root, -1, None, None)]
    # Iterative preorder; children are pushed in reverse to keep label order.
    while stack:
        state, par, label, prob = stack.pop()
        if state.is_terminal():
            v = tree.add_node(TERMINAL, parent=par, ret=tuple(float(x) for x in state.returns()))
        elif state.is_chance():
            v = tree.add_node(CHANCE, parent=par)
        else:
            pl = state.current_player()
            v = tree.add_node(DECISION, player=pl, parent=par)
            key = (pl, state.info_key())
            iid = keys.get(key)
            if iid is None:
                iid = keys[key] = len(tree.infosets)
                tree.infosets.append([])
                tree.infoset_player.append(pl)
                tree.infoset_key.append(key)
            tree.infosets[iid].append(v)
            tree.infoset[v] = iid
        if par >= 0:
            tree.children[par].append(v)
            tree.labels[par].append(label)
            if prob is not None:
                tree.probs[par].append(prob)
        if state.is_terminal():
            continue
        if state.is_chance():
            outs = state.chance_outcomes()
            for a, p in reversed(outs):
                stack.append((state.child(a), v, str(a), float(p)))
        else:
            for a in reversed(state.legal_actions()):
                stack.append((state.child(a), v, str(a), None))
    validate_teams(tree)
    return tree


def validate_teams(tree: GameTree) -> None:
    if not tree.minus or not tree.plus:
        raise InvalidParameters("both teams must be nonempty")
    if any(p < 0 or p >= tree.num_players for p in tree.minus):
        raise InvalidParameters(f"team minus {sorted(tree.minus)} names unknown players")


def validate(tree: GameTree) -> list:
    """Return a list of invariant violations (empty iff the tree is well formed)."""
    out = []
    n = len(tree.kind)
    for v in range(n):
        k = tree.kind[v]
        if len(tree.children[v]) != len(tree.labels[v]):
            out.append(f"label count mismatch at node {v}")
        if k == TERMINAL:
            if tree.children[v]:
                out.append(f"terminal node {v} has children")
            if tree.returns[v] is None or len(tree.returns[v]) != tree.num_players:
                out.append(f"missing payoff at terminal {v}")
        elif not tree.children[v]:
            out.append(f"nonterminal node {v} has no children")
        if k == CHANCE:
            ps = tree.probs[v]
            if len(ps) != len(tree.children[v]) or any(p < 0 or p > 1 for p in ps):
                out.append(f"bad chance probabilities at node {v}")
            elif abs(sum(ps) - 1.0) > 1e-12:
                out.append(f"chance probabilities at node {v} sum to {sum(ps)!r}")
        if k == DECISION:
            if not 0 <= tree.player[v] < tree.num_players:
                out.append(f"decision node {v} has invalid player {tree.player[v]}")
            if tree.infoset[v] < 0:
                out.append(f"decision node {v} has no infoset")
    seq_ids = player_sequence_ids(tree)
    for iid, members in enumerate(tree.infosets):
        if not members:
            continue
        players = {tree.player[v] for v in members}
        if len(players) > 1 or any(tree.kind[v] != DECISION for v in members):
            out.append(f"infoset {iid} mixes players or node kinds: nodes {members}")
            continue
        acts = {tuple(tree.labels[v]) for v in members}
        if len({frozenset(a) for a in acts}) > 1 or len({len(a) for a in acts}) > 1:
            out.append(f"action-set mismatch in infoset {iid}: nodes {members}")
        pl = tree.player[members[0]]
        if len({seq_ids[v][pl] for v in members}) > 1:
            out.append(f"perfect-recall violation for player {pl} in infoset {iid}: nodes {members}")
    reach = uniform_reach(tree)
    mass = sum(reach[z] for z in tree.terminals())
    if abs(mass - 1.0) > 1e-9:
        out.append(f"terminal reach under uniform play sums to {mass!r}")
    return out


def check(tree: GameTree) -> GameTree:
    bad = validate(tree)
    if bad:
        raise InvalidGame(bad)
    return tree
