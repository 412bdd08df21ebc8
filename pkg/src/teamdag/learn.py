"""Regret minimization and best responses on a team belief DAG, vectorized over edge arrays."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dag import DEC, OBS, TERM, TbDag


class Variant(str, Enum):
    CFR = "cfr"
    CFR_PLUS = "cfr+"
    LCFR = "lcfr"
    DCFR = "dcfr"
    PCFR_PLUS = "pcfr+"


@dataclass
class _Level:
    dec: np.ndarray        # edge ids leaving decision nodes of this level, grouped by source
    dec_starts: np.ndarray  # offsets of each source group inside ``dec``
    dec_nodes: np.ndarray
    obs: np.ndarray        # edge ids leaving observation nodes of this level


class DagSpace:
    """Strategy space of one team: node reaches and edge flows of its belief DAG.

    A local strategy is an edge vector; entries on observation edges are 1 and
    the entries leaving each decision node sum to 1.
    """

    def __init__(self, d: TbDag):
        self.dag = d
        n = len(d.kind)
        self.n = n
        self.root = d.root
        self.kind = np.asarray(d.kind, dtype=np.int8)
        depth = _levels(d)
        src, dst = [], []
        for a, cs in enumerate(d.children):
            src.extend([a] * len(cs))
            dst.extend(cs)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        order = np.lexsort((src, self.kind[src] if len(src) else src, depth[src] if len(src) else src))
        self.src = src[order]
        self.dst = dst[order]
        self.E = len(self.src)
        self.is_dec_edge = self.kind[self.src] == DEC
        self.dec_edges = np.flatnonzero(self.is_dec_edge)
        # position of every edge in the DAG's own child lists
        self.edge_order = order
        out_deg = np.bincount(self.src, minlength=n)
        self.out_deg = out_deg
        self.terminals = np.flatnonzero(self.kind == TERM)
        self.levels: list = []
        src_depth = depth[self.src]
        bounds = np.flatnonzero(np.diff(src_depth)) + 1 if self.E else np.array([], dtype=np.int64)
        starts = np.concatenate(([0], bounds)) if self.E else np.array([], dtype=np.int64)
        ends = np.concatenate((bounds, [self.E])) if self.E else np.array([], dtype=np.int64)
        for s, e in zip(starts, ends):
            ids = np.arange(s, e)
            dec = ids[self.is_dec_edge[s:e]]
            obs = ids[~self.is_dec_edge[s:e]]
            if len(dec):
                cut = np.flatnonzero(np.diff(self.src[dec])) + 1
                dstarts = np.concatenate(([0], cut))
                dnodes = self.src[dec][dstarts]
            else:
                dstarts = np.array([], dtype=np.int64)
                dnodes = np.array([], dtype=np.int64)
            self.levels.append(_Level(dec, dstarts, dnodes, obs))

    # -- strategies -------------------------------------------------------

    def uniform(self) -> np.ndarray:
        local = np.ones(self.E)
        dec = self.dec_edges
        local[dec] = 1.0 / self.out_deg[self.src[dec]]
        return local

    def normalize(self, weights: np.ndarray) -> np.ndarray:
        """Local strategy proportional to nonnegative decision-edge weights (uniform where all vanish)."""
        local = np.ones(self.E)
        dec = self.dec_edges
        w = np.maximum(weights[dec], 0.0)
        tot = np.bincount(self.src[dec], w, minlength=self.n)[self.src[dec]]
        deg = self.out_deg[self.src[dec]]
        local[dec] = np.where(tot > 0, w / np.where(tot > 0, tot, 1.0), 1.0 / deg)
        return local

    def local_from_pure(self, pure: dict) -> np.ndarray:
        """Edge vector of a pure strategy ``{decision node: child index}``; unlisted nodes take their first edge."""
        offset = np.concatenate(([0], np.cumsum(self.out_deg)))
        edge_of = np.empty(self.E, dtype=np.int64)
        edge_of[self.edge_order] = np.arange(self.E)
        local = np.ones(self.E)
        dec = self.dec_edges
        local[dec] = 0.0
        for n in np.flatnonzero(self.kind == DEC):
            local[edge_of[offset[n] + pure.get(int(n), 0)]] = 1.0
        return local

    def flows(self, local: np.ndarray) -> tuple:
        """Node reaches and edge flows of a local strategy."""
        x = np.zeros(self.n)
        x[self.root] = 1.0
        f = np.zeros(self.E)
        for lv in self.levels:
            ids = np.concatenate((lv.dec, lv.obs))
            fl = x[self.src[ids]] * local[ids]
            f[ids] = fl
            x += np.bincount(self.dst[ids], fl, minlength=self.n)
        return x, f

    def reach(self, local: np.ndarray) -> np.ndarray:
        return self.flows(local)[0]

    def values(self, local: np.ndarray, utility: np.ndarray) -> np.ndarray:
        """Expected utility below every node; ``utility`` is indexed by node and read at terminals."""
        v = np.zeros(self.n)
        v[self.terminals] = utility[self.terminals]
        for lv in reversed(self.levels):
            ids = np.concatenate((lv.dec, lv.obs))
            v += np.bincount(self.src[ids], v[self.dst[ids]] * local[ids], minlength=self.n)
        return v

    def best_response(self, utility: np.ndarray) -> tuple:
        """Best value and a pure local strategy attaining it (ties go to the first edge)."""
        v = np.zeros(self.n)
        v[self.terminals] = utility[self.terminals]
        local = np.ones(self.E)
        for lv in reversed(self.levels):
            if len(lv.obs):
                v += np.bincount(self.src[lv.obs], v[self.dst[lv.obs]], minlength=self.n)
            if len(lv.dec):
                vals = v[self.dst[lv.dec]]
                best = np.maximum.reduceat(vals, lv.dec_starts)
                v[lv.dec_nodes] = best
                seg = np.repeat(np.arange(len(lv.dec_starts)), np.diff(np.append(lv.dec_starts, len(lv.dec))))
                hit = np.flatnonzero(vals >= best[seg])
                _, first = np.unique(seg[hit], return_index=True)
                choice = np.zeros(len(lv.dec))
                choice[hit[first]] = 1.0
                local[lv.dec] = choice
        return float(v[self.root]), local

    def flow_violation(self, x: np.ndarray, f: np.ndarray) -> float:
        """Largest violation of the flow constraints by a reach / flow pair."""
        worst = abs(x[self.root] - 1.0)
        inflow = np.bincount(self.dst, f, minlength=self.n)
        mask = np.ones(self.n, dtype=bool)
        mask[self.root] = False
        if mask.any():
            worst = max(worst, float(np.max(np.abs(inflow[mask] - x[mask]), initial=0.0)))
        dec = self.dec_edges
        out = np.bincount(self.src[dec], f[dec], minlength=self.n)
        dnodes = np.flatnonzero(self.kind == DEC)
        if len(dnodes):
            worst = max(worst, float(np.max(np.abs(out[dnodes] - x[dnodes]))))
        obs = np.flatnonzero(~self.is_dec_edge)
        if len(obs):
            worst = max(worst, float(np.max(np.abs(f[obs] - x[self.src[obs]]))))
        if len(f):
            worst = max(worst, float(-min(0.0, f.min())))
        return worst


def _levels(d: TbDag) -> np.ndarray:
    """Longest-path depth from the root; every edge goes from a lower to a higher level."""
    n = len(d.kind)
    depth = np.zeros(n, dtype=np.int64)
    for a in range(n):  # ids are topological
        for c in d.children[a]:
            if depth[c] < depth[a] + 1:
                depth[c] = depth[a] + 1
    return depth


@dataclass
class RegretState:
    """Regret-minimizer state of one team on its DAG."""

    space: DagSpace
    variant: Variant
    regret: np.ndarray = None
    prediction: np.ndarray = None
    local: np.ndarray = None
    avg_reach: np.ndarray = None
    avg_flow: np.ndarray = None
    avg_weight: float = 0.0
    t: int = 0
    alpha: float = 1.5
    beta: float = 0.0
    gamma: float = 2.0

    def __post_init__(self):
        self.variant = Variant(self.variant)
        E, n = self.space.E, self.space.n
        if self.regret is None:
            self.regret = np.zeros(E)
        if self.prediction is None:
            self.prediction = np.zeros(E)
        if self.local is None:
            self.local = self.space.uniform()
        if self.avg_reach is None:
            self.avg_reach = np.zeros(n)
        if self.avg_flow is None:
            self.avg_flow = np.zeros(E)

    def current_flows(self) -> tuple:
        return self.space.flows(self.local)

    def observe(self, utility: np.ndarray) -> float:
        """Add one iteration of regret for ``utility`` and move to the next local strategy.

        Returns the expected utility of the strategy that was played.
        """
        sp = self.space
        self.t += 1
        t = self.t
        x, f = sp.flows(self.local)
        self.update_average(x, f)
        v = sp.values(self.local, utility)
        dec = sp.dec_edges
        inst = np.zeros(sp.E)
        inst[dec] = v[sp.dst[dec]] - v[sp.src[dec]]
        var = self.variant
        if var == Variant.CFR:
            self.regret += inst
        elif var == Variant.CFR_PLUS or var == Variant.PCFR_PLUS:
            self.regret = np.maximum(self.regret + inst, 0.0)
        elif var == Variant.LCFR:
            self.regret += t * inst
        elif var == Variant.DCFR:
            self.regret += inst
            ta = t ** self.alpha
            tb = t ** self.beta
            self.regret = np.where(self.regret > 0, self.regret * ta / (ta + 1), self.regret * tb / (tb + 1))
        if var == Variant.PCFR_PLUS:
            self.prediction = inst
            self.local = sp.normalize(self.regret + self.prediction)
        else:
            self.local = sp.normalize(self.regret)
        return float(v[sp.root])

    def average_weight(self) -> float:
        t = self.t
        var = self.variant
        if var == Variant.CFR:
            return 1.0
        if var in (Variant.CFR_PLUS, Variant.LCFR):
            return float(t)
        return float(t) ** 2

    def update_average(self, x: np.ndarray, f: np.ndarray):
        if self.variant == Variant.DCFR:
            keep = ((self.t - 1) / self.t) ** self.gamma
            self.avg_reach *= keep
            self.avg_flow *= keep
            self.avg_weight = self.avg_weight * keep + 1.0
            self.avg_reach += x
            self.avg_flow += f
            return
        w = self.average_weight()
        self.avg_reach += w * x
        self.avg_flow += w * f
        self.avg_weight += w

    def average(self) -> tuple:
        """Normalized average node reaches and edge flows."""
        if self.avg_weight == 0:
            return self.space.flows(self.local)
        return self.avg_reach / self.avg_weight, self.avg_flow / self.avg_weight


def expected_value(reach_plus: np.ndarray, reach_minus: np.ndarray, leaf_plus, leaf_minus, weight) -> float:
    """Team-plus expected utility of two reach vectors."""
    return float(np.dot(weight, reach_plus[leaf_plus] * reach_minus[leaf_minus]))


__all__ = ["DagSpace", "RegretState", "Variant", "expected_value"]
