"""Benchmark game families and small structural fixtures."""

from __future__ import annotations

import itertools
from fractions import Fraction

from .efg import CHANCE, DECISION, TERMINAL, GameTree, InvalidParameters, check, expand
from .tfsdp import OBS, TeamTFSDP


def _default_minus(players, minus):
    return frozenset([players - 1] if minus is None else minus)


def _rank_deals(counts: dict, k: int):
    """Ordered draws of ``k`` ranks without replacement from a deck given as rank -> copies."""
    total = sum(counts.values())
    out = []

    def rec(prefix, prob, left, remaining):
        if len(prefix) == k:
            out.append((tuple(prefix), prob))
            return
        for r in sorted(left):
            if left[r] == 0:
                continue
            p = Fraction(left[r], remaining)
            left[r] -= 1
            rec(prefix + [r], prob * p, left, remaining - 1)
            left[r] += 1

    rec([], Fraction(1), dict(counts), total)
    return out


# ---------------------------------------------------------------------------
# Kuhn poker


class KuhnState:
    def __init__(self, n, ranks, cards=None, hist=""):
        self.n, self.ranks, self.cards, self.hist = n, ranks, cards, hist

    def is_chance(self):
        return self.cards is None

    def chance_outcomes(self):
        deals = list(itertools.permutations(range(self.ranks), self.n))
        return [("".join(map(str, d)), 1.0 / len(deals)) for d in deals]

    def _bettor(self):
        i = self.hist.find("b")
        return i if i >= 0 else None

    def is_terminal(self):
        if self.cards is None:
            return False
        b = self._bettor()
        if b is None:
            return len(self.hist) == self.n
        return len(self.hist) == b + self.n

    def current_player(self):
        return len(self.hist) % self.n

    def legal_actions(self):
        return ["p", "b"]

    def child(self, a):
        if self.cards is None:
            return KuhnState(self.n, self.ranks, tuple(int(c) for c in a), "")
        return KuhnState(self.n, self.ranks, self.cards, self.hist + a)

    def info_key(self):
        return (self.cards[self.current_player()], self.hist)

    def returns(self):
        n = self.n
        contrib = [1.0] * n
        b = self._bettor()
        if b is None:
            live = list(range(n))
        else:
            live = [b]
            for j in range(b + 1, b + n):
                p = j % n
                if self.hist[j] == "b":
                    live.append(p)
            for p in live:
                contrib[p] += 1.0
        pot = sum(contrib)
        win = max(live, key=lambda p: self.cards[p])
        return [(pot if p == win else 0.0) - contrib[p] for p in range(n)]


def build_kuhn(players: int = 3, ranks: int = 3, minus=None) -> GameTree:
    """Multiplayer Kuhn poker: ante 1, one betting round, bet size 1.

    After the first bet every other player calls or folds exactly once.
    """
    if players < 2 or ranks < players:
        raise InvalidParameters(f"Kuhn needs players >= 2 and ranks >= players, got {players}, {ranks}")
    return check(expand(KuhnState(players, ranks), players, _default_minus(players, minus), f"{players}K{ranks}"))


# ---------------------------------------------------------------------------
# Leduc poker


class LeducState:
    """Cards are dealt by rank; suits only enter through the deal probabilities."""

    RAISE = (2.0, 4.0)

    def __init__(self, cfg, cards=None, board=None, rnd=0, hist=(), contrib=None, folded=frozenset(),
                 to_act=None, bets=0, stake=1.0, over=False):
        self.cfg = cfg
        self.cards, self.board, self.rnd, self.hist = cards, board, rnd, hist
        self.contrib = contrib
        self.folded = folded
        self.to_act = to_act
        self.bets = bets
        self.stake = stake
        self.over = over

    def _copy(self, **kw):
        d = dict(cfg=self.cfg, cards=self.cards, board=self.board, rnd=self.rnd, hist=self.hist,
                 contrib=self.contrib, folded=self.folded, to_act=self.to_act, bets=self.bets,
                 stake=self.stake, over=self.over)
        d.update(kw)
        return LeducState(**d)

    def is_chance(self):
        return self.cards is None or (self.rnd == 1 and self.board is None)

    def chance_outcomes(self):
        n, ranks, suits = self.cfg["players"], self.cfg["ranks"], self.cfg["suits"]
        if self.cards is None:
            deals = _rank_deals({r: suits for r in range(ranks)}, n)
            return [("".join(map(str, d)), float(p)) for d, p in deals]
        left = {r: suits for r in range(ranks)}
        for c in self.cards:
            left[c] -= 1
        return [(str(r), float(p)) for (r,), p in _rank_deals(left, 1)]

    def child(self, a):
        n = self.cfg["players"]
        if self.cards is None:
            return self._copy(cards=tuple(int(c) for c in a), contrib=(1.0,) * n,
                              to_act=tuple(range(n)))
        if self.is_chance():
            live = tuple(p for p in range(n) if p not in self.folded)
            return self._copy(board=int(a), hist=self.hist + ("/",), to_act=live, bets=0,
                              stake=max(self.contrib))
        p = self.to_act[0]
        rest = self.to_act[1:]
        contrib = list(self.contrib)
        folded = self.folded
        bets = self.bets
        stake = self.stake
        if a == "f":
            folded = folded | {p}
        elif a == "c":
            contrib[p] = stake
        elif a == "r":
            stake = stake + self.RAISE[self.rnd]
            contrib[p] = stake
            bets += 1
            # everyone else still live must respond, in seat order after p
            rest = tuple(q for q in [(p + j) % n for j in range(1, n)] if q not in folded)
        st = self._copy(hist=self.hist + (a,), contrib=tuple(contrib), folded=folded, to_act=rest,
                        bets=bets, stake=stake)
        live = n - len(folded)
        if live == 1:
            return st._copy(over=True)
        if not rest:
            if self.rnd == 0:
                return st._copy(rnd=1)
            return st._copy(over=True)
        return st

    def is_terminal(self):
        return self.over

    def current_player(self):
        return self.to_act[0]

    def legal_actions(self):
        p = self.to_act[0]
        facing = self.contrib[p] < self.stake
        acts = ["f", "c"] if facing else ["c"]
        if self.bets < self.cfg["max_bets"]:
            acts.append("r")
        return acts

    def info_key(self):
        return (self.cards[self.current_player()], self.board, self.hist)

    def returns(self):
        n = self.cfg["players"]
        live = [p for p in range(n) if p not in self.folded]
        pot = sum(self.contrib)
        if len(live) == 1:
            winners = live
        else:
            def strength(p):
                return (self.cards[p] == self.board, self.cards[p])
            best = max(strength(p) for p in live)
            winners = [p for p in live if strength(p) == best]
        share = pot / len(winners)
        return [(share if p in winners else 0.0) - self.contrib[p] for p in range(n)]


def build_leduc(players: int = 3, max_bets: int = 1, ranks: int = 3, suits: int = 3, minus=None) -> GameTree:
    """Multiplayer Leduc poker with at most ``max_bets`` raises per round.

    Ante 1, raise sizes 2 (first round) and 4 (second round). A check is the
    call action when nobody has raised. A pair with the board beats any high
    card; ties split the pot.
    """
    if players < 2 or max_bets < 1 or ranks < 1 or suits < 1 or ranks * suits < players + 1:
        raise InvalidParameters(f"Leduc deck {ranks}x{suits} too small for {players} players")
    cfg = dict(players=players, max_bets=max_bets, ranks=ranks, suits=suits)
    name = f"{players}L{max_bets}{ranks}{suits}"
    return check(expand(LeducState(cfg), players, _default_minus(players, minus), name))


# ---------------------------------------------------------------------------
# Liar's dice


class DiceState:
    def __init__(self, n, faces, dice=None, bids=(), called=False):
        self.n, self.faces, self.dice, self.bids, self.called = n, faces, dice, bids, called

    def is_chance(self):
        return self.dice is None

    def chance_outcomes(self):
        rolls = list(itertools.product(range(1, self.faces + 1), repeat=self.n))
        return [("".join(map(str, r)), 1.0 / len(rolls)) for r in rolls]

    def is_terminal(self):
        return self.called

    def current_player(self):
        return len(self.bids) % self.n

    def legal_actions(self):
        top = self.bids[-1] if self.bids else -1
        acts = [str(b) for b in range(top + 1, self.n * self.faces)]
        if self.bids:
            acts.append("L")
        return acts

    def child(self, a):
        if self.dice is None:
            return DiceState(self.n, self.faces, tuple(int(c) for c in a))
        if a == "L":
            return DiceState(self.n, self.faces, self.dice, self.bids, True)
        return DiceState(self.n, self.faces, self.dice, self.bids + (int(a),))

    def info_key(self):
        return (self.dice[self.current_player()], self.bids)

    def bid(self, b):
        """Bid index -> (quantity, face); a higher face outranks any quantity of a lower one."""
        return b % self.n + 1, b // self.n + 1

    def returns(self):
        caller = len(self.bids) % self.n
        bidder = (len(self.bids) - 1) % self.n
        qty, face = self.bid(self.bids[-1])
        count = sum(1 for d in self.dice if d == face)
        loser = caller if count >= qty else bidder
        winner = bidder if loser == caller else caller
        out = [0.0] * self.n
        out[loser] = -1.0
        out[winner] = 1.0
        return out


def build_liars_dice(players: int = 3, die_faces: int = 3, minus=None) -> GameTree:
    """Liar's Dice with one die per player. Bids strictly increase; the first player must bid.

    Bids are ordered by face, then by quantity. A challenge is lost by the bidder
    if fewer than the bid quantity of dice show the bid face; the loser pays 1 to
    the other party of the challenge.
    """
    if players < 2 or die_faces < 2:
        raise InvalidParameters("Liar's Dice needs players >= 2 and die_faces >= 2")
    name = f"{players}D{die_faces}"
    return check(expand(DiceState(players, die_faces), players, _default_minus(players, minus), name))


# ---------------------------------------------------------------------------
# Goofspiel


class GoofState:
    """Chance reveals a prize, then players bid in seat order without seeing concurrent bids.

    With three ranks only two prizes are contested by choice: the last card of
    every hand goes automatically to the last prize, which is scored at the leaf.
    """

    def __init__(self, n, ranks, limited, minus, prizes=(), bids=(), cur=()):
        self.n, self.ranks, self.limited, self.minus = n, ranks, limited, minus
        self.prizes, self.bids, self.cur = prizes, bids, cur

    def _next(self, prizes, bids, cur):
        return GoofState(self.n, self.ranks, self.limited, self.minus, prizes, bids, cur)

    def is_chance(self):
        return len(self.prizes) == len(self.bids) and not self.is_terminal()

    def chance_outcomes(self):
        left = [r for r in range(self.ranks) if r not in self.prizes]
        return [(str(r), 1.0 / len(left)) for r in left]

    def is_terminal(self):
        return len(self.bids) >= self.ranks - 1

    def current_player(self):
        return len(self.cur)

    def _hand(self, p):
        used = {b[p] for b in self.bids}
        return [r for r in range(self.ranks) if r not in used]

    def legal_actions(self):
        return [str(r) for r in self._hand(self.current_player())]

    def child(self, a):
        if self.is_chance():
            return self._next(self.prizes + (int(a),), self.bids, ())
        cur = self.cur + (int(a),)
        if len(cur) == self.n:
            return self._next(self.prizes, self.bids + (cur,), ())
        return self._next(self.prizes, self.bids, cur)

    def info_key(self):
        p = self.current_player()
        if not self.limited:
            return (self.prizes, self.bids)
        # own bids plus, per finished prize, the players who bid highest
        seen = tuple((b[p], tuple(i for i, x in enumerate(b) if x == max(b))) for b in self.bids)
        return (self.prizes, seen)

    def points(self) -> list:
        score = [0.0] * self.n
        prizes = self.prizes + tuple(r for r in range(self.ranks) if r not in self.prizes)
        bids = self.bids + (tuple(self._hand(p)[0] for p in range(self.n)),)
        for prize, bid in zip(prizes, bids):
            top = max(bid)
            winners = [p for p, x in enumerate(bid) if x == top]
            for p in winners:
                score[p] += (prize + 1) / len(winners)
        return score

    def returns(self):
        score = self.points()
        minus = sum(score[p] for p in self.minus)
        plus = sum(score) - minus
        n_minus = len(self.minus)
        n_plus = self.n - n_minus
        # each side gets half the point difference, spread evenly over its members
        return [(score[p] - plus / n_minus) / 2 if p in self.minus else (score[p] - minus / n_plus) / 2
                for p in range(self.n)]


def build_goofspiel(players: int = 3, ranks: int = 3, limited_info: bool = False, minus=None) -> GameTree:
    """Goofspiel with prizes and hands ``1..ranks`` and a random prize order.

    A prize is shared evenly among the highest bidders. Team ⊕ receives half the
    difference between its points and team ⊖'s points. In the limited variant a
    player only learns, for each finished prize, which players bid highest.
    """
    if ranks != 3 or players < 2:
        raise InvalidParameters("Goofspiel is supported with ranks = 3 and players >= 2")
    name = f"{players}G{'L' if limited_info else ''}"
    m = _default_minus(players, minus)
    return check(expand(GoofState(players, ranks, limited_info, m), players, m, name))


# ---------------------------------------------------------------------------
# structural fixtures


def build_counterexample(C: int) -> GameTree:
    """Family where public-state beliefs blow up but public-observation beliefs stay small.

    Chance draws c in 1..C. At depth t = 2..C-1 the nodes with c in {t-1, t+1}
    share an infoset of player t-1 with actions -1/+1, and play continues only
    if c == t + a. At depth C player ``top`` knows c and names c or c+1; player
    ``bottom`` sees the named value only and picks one of two options.
    Players 0..C-3 are the middle choosers, C-2 is ``top``, C-1 is ``bottom``,
    and player C is an idle opponent forming the other team.
    """
    if C <= 1:
        raise InvalidParameters("counterexample needs C > 1")
    n = C + 1
    top, bottom, idle = C - 2, C - 1, C
    if C == 2:
        top, bottom, idle = 0, 1, 2
        n = 3
    t = GameTree(num_players=n, minus=frozenset([idle]), name=f"cex{C}")
    zero = (0.0,) * n
    keys: dict = {}

    def infoset(v, pl, key):
        k = (pl, key)
        if k not in keys:
            keys[k] = len(t.infosets)
            t.infosets.append([])
            t.infoset_player.append(pl)
            t.infoset_key.append(k)
        t.infosets[keys[k]].append(v)
        t.infoset[v] = keys[k]

    def link(par, v, label, prob=None):
        t.children[par].append(v)
        t.labels[par].append(label)
        if prob is not None:
            t.probs[par].append(prob)

    root = t.add_node(CHANCE)

    def grow(c, layer, par, label, prob=None):
        # node at depth `layer` on the branch with chance value c
        if layer == C:
            v = t.add_node(DECISION, player=top, parent=par)
            link(par, v, label, prob)
            infoset(v, top, ("c", c))
            for name in (str(c), str(c + 1)):
                w = t.add_node(DECISION, player=bottom, parent=v)
                link(v, w, name)
                infoset(w, bottom, ("saw", name))
                for opt in ("x", "y"):
                    z = t.add_node(TERMINAL, parent=w, ret=zero)
                    link(w, z, opt)
            return
        if c in (layer - 1, layer + 1):
            v = t.add_node(DECISION, player=layer - 2, parent=par)
            link(par, v, label, prob)
            infoset(v, layer - 2, ("t", layer))
            for a in (-1, 1):
                if c == layer + a:
                    grow(c, layer + 1, v, str(a))
                else:
                    z = t.add_node(TERMINAL, parent=v, ret=zero)
                    link(v, z, str(a))
        else:
            v = t.add_node(CHANCE, parent=par)
            link(par, v, label, prob)
            grow(c, layer + 1, v, "-", 1.0)

    for c in range(1, C + 1):
        grow(c, 2, root, str(c), 1.0 / C)
    return check(t)


def build_inflation_gadget() -> GameTree:
    """Team game where every infoset of the second player fully inflates.

    Player 0 picks branch A or B; each branch is a three-way chance node
    leading to player-0 singletons; their player-1 children are chained across
    the two branches by two-node infosets.
    """
    t = GameTree(num_players=3, minus=frozenset([2]), name="inflate")
    zero = (0.0, 0.0, 0.0)
    iid: dict = {}

    def infoset(v, pl, key):
        if (pl, key) not in iid:
            iid[(pl, key)] = len(t.infosets)
            t.infosets.append([])
            t.infoset_player.append(pl)
            t.infoset_key.append((pl, key))
        t.infosets[iid[(pl, key)]].append(v)
        t.infoset[v] = iid[(pl, key)]

    def link(par, v, label, prob=None):
        t.children[par].append(v)
        t.labels[par].append(label)
        if prob is not None:
            t.probs[par].append(prob)

    root = t.add_node(DECISION, player=0)
    infoset(root, 0, "root")
    # bottom-player slots 0..11 in left-to-right order; A owns positions 0,2,4 and B owns 1,3,5
    pair_of = {1: 0, 2: 0, 3: 1, 4: 1, 5: 2, 6: 2, 7: 3, 8: 3, 9: 4, 10: 4}
    for side, positions in (("A", (0, 2, 4)), ("B", (1, 3, 5))):
        ch = t.add_node(CHANCE, parent=root)
        link(root, ch, side)
        for pos in positions:
            up = t.add_node(DECISION, player=0, parent=ch)
            link(ch, up, str(pos), 1.0 / 3)
            infoset(up, 0, ("pos", pos))
            for j in range(2):
                slot = 2 * pos + j
                dn = t.add_node(DECISION, player=1, parent=up)
                link(up, dn, str(j))
                infoset(dn, 1, ("pair", pair_of[slot]) if slot in pair_of else ("solo", slot))
                for opt in ("x", "y"):
                    z = t.add_node(TERMINAL, parent=dn, ret=zero)
                    link(dn, z, opt)
    return check(t)


FIGURE1_NAMES = "ABCDEFGHIJKLMNO"


def build_figure1_fixture() -> TeamTFSDP:
    """Fifteen-node team problem: observation A, singletons B and C, then infosets {D,F} and {E,G}.

    Node ids follow the letters A..O. Member 0 plays at B and C, member 1 at
    D..G. Left at B reaches D, right reaches E; left at C reaches F, right G.
    """
    t = TeamTFSDP(name="fig1")
    a = t.add_node(OBS, origin=0)
    b = t.add_node(DECISION, a, "B", origin=1)
    c = t.add_node(DECISION, a, "C", origin=2)
    t.set_infoset(b, 0, 0)
    t.set_infoset(c, 1, 0)
    mids = []
    for par in (b, c):
        for act in ("l", "r"):
            mids.append(t.add_node(DECISION, par, act, origin=len(t.kind)))
    d, e, f, g = mids
    t.set_infoset(d, 2, 1)
    t.set_infoset(f, 2, 1)
    t.set_infoset(e, 3, 1)
    t.set_infoset(g, 3, 1)
    for par in mids:
        for act in ("l", "r"):
            t.add_node(TERMINAL, par, act, origin=len(t.kind))
    return t

