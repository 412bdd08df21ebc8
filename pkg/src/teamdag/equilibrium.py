"""Two-team zero-sum saddle point over both belief DAGs: assembly, self-play, exploitability and LP export."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dag import DEC, OBS, TERM, Grouping, TbDag, build, optimize
from .efg import TERMINAL, GameTree, check
from .learn import DagSpace, RegretState, Variant
from .tfsdp import (
    TeamTFSDP,
    compute_public_structure,
    has_team_public_actions,
    make_timed,
    project,
    reduce_branching,
)


@dataclass
class TeamSide:
    """One team's decision problem, its optimized DAG and the DAG strategy space."""

    team: str
    tfsdp: TeamTFSDP
    dag: TbDag
    space: DagSpace
    reduced: bool = False


@dataclass
class BilinearTeamGame:
    """Leaf registry pairing both teams' terminal DAG nodes with chance reach and payoff.

    Team plus maximizes ``sum_z chance[z] * payoff[z] * x[leaf_plus[z]] * y[leaf_minus[z]]``.
    """

    tree: GameTree
    plus: TeamSide
    minus: TeamSide
    leaves: np.ndarray       # game node ids of the leaves
    chance: np.ndarray
    payoff: np.ndarray
    leaf_plus: np.ndarray
    leaf_minus: np.ndarray

    @property
    def weight(self) -> np.ndarray:
        return self.chance * self.payoff

    @property
    def payoff_range(self) -> float:
        return float(self.payoff.max() - self.payoff.min()) if len(self.payoff) else 0.0

    def side(self, team: str) -> TeamSide:
        return self.plus if team == "+" else self.minus


def _prepare(tree: GameTree, team: str, reduce: bool | None, grouping, max_nodes=None) -> TeamSide:
    t = make_timed(project(tree, team))
    reduced = False
    if reduce is None or reduce:
        ps = compute_public_structure(t)
        wide = ps.b > 2
        if reduce or (wide and has_team_public_actions(t, ps)):
            if wide:
                t = reduce_branching(t, ps)
                reduced = True
    d = optimize(build(t, grouping, max_nodes), t)
    return TeamSide(team, t, d, DagSpace(d), reduced)


def _leaf_map(side: TeamSide) -> dict:
    """Game leaf id -> terminal DAG node of this side."""
    origin = side.tfsdp.origin
    out = {}
    for n, zs in side.dag.aliases.items():
        for z in zs:
            out[origin[z]] = n
    return out


def assemble(tree: GameTree, reduce: bool | None = None,
             grouping: Grouping | str = Grouping.OBSERVATIONS, max_nodes: int | None = None) -> BilinearTeamGame:
    """Project, time, optionally binarize, build and optimize both DAGs and register every leaf.

    ``reduce=None`` binarizes a team's problem only when it has more than two
    actions somewhere and its actions are team-public. ``max_nodes`` caps each
    raw DAG (``TooLargeError``).
    """
    check(tree)
    plus = _prepare(tree, "+", reduce, grouping, max_nodes)
    minus = _prepare(tree, "-", reduce, grouping, max_nodes)
    leaves = np.asarray(tree.terminals(), dtype=np.int64)
    reach = tree.chance_reach()
    mp, mm = _leaf_map(plus), _leaf_map(minus)
    missing = [int(z) for z in leaves if int(z) not in mp or int(z) not in mm]
    if missing:
        raise RuntimeError(f"leaves without a terminal DAG node: {missing[:5]}")
    return BilinearTeamGame(
        tree=tree, plus=plus, minus=minus, leaves=leaves,
        chance=np.array([reach[z] for z in leaves]),
        payoff=np.array([tree.payoff(int(z)) for z in leaves]),
        leaf_plus=np.array([mp[int(z)] for z in leaves], dtype=np.int64),
        leaf_minus=np.array([mm[int(z)] for z in leaves], dtype=np.int64),
    )


def utility_for(g: BilinearTeamGame, team: str, opponent_reach: np.ndarray) -> np.ndarray:
    """Utility of every node of ``team``'s DAG (nonzero only at terminals) against an opponent reach vector."""
    if team == "+":
        return np.bincount(g.leaf_plus, g.weight * opponent_reach[g.leaf_minus], minlength=g.plus.space.n)
    return np.bincount(g.leaf_minus, -g.weight * opponent_reach[g.leaf_plus], minlength=g.minus.space.n)


def value(g: BilinearTeamGame, x: np.ndarray, y: np.ndarray) -> float:
    """Team-plus expected utility of two node-reach vectors."""
    return float(np.dot(g.weight, x[g.leaf_plus] * y[g.leaf_minus]))


@dataclass
class Exploitability:
    gap: float
    br_plus: float     # max_x u(x, y)
    br_minus: float    # min_y u(x, y)


def exploitability(g: BilinearTeamGame, x: np.ndarray, y: np.ndarray) -> Exploitability:
    up, _ = g.plus.space.best_response(utility_for(g, "+", y))
    um, _ = g.minus.space.best_response(utility_for(g, "-", x))
    return Exploitability(gap=up + um, br_plus=up, br_minus=-um)


@dataclass
class Checkpoint:
    iteration: int
    seconds: float
    gap: float
    value: float


@dataclass
class SolveTrace:
    rows: list = field(default_factory=list)
    stop_reason: str = ""

    def add(self, row: Checkpoint):
        if self.rows and row.iteration <= self.rows[-1].iteration:
            raise ValueError("checkpoint iterations must increase")
        self.rows.append(row)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "seconds", "gap", "value"])
            for r in self.rows:
                w.writerow([r.iteration, f"{r.seconds:.6f}", repr(r.gap), repr(r.value)])


@dataclass
class StopRule:
    max_iters: int = 100_000
    target_gap_fraction: float = 1e-3
    target_gap: float | None = None    # absolute; overrides the fraction when set
    time_limit: float = math.inf
    checkpoints: int = 100


@dataclass
class SolveResult:
    x: np.ndarray
    y: np.ndarray
    value: float
    gap: float
    iterations: int
    trace: SolveTrace


def _schedule(stop: StopRule):
    every = max(1, math.ceil(stop.max_iters / max(1, stop.checkpoints))) if stop.max_iters < 10**9 else 100
    t, early = 1, 1.0
    while True:
        yield t
        early *= 1.5
        t = min(max(t + 1, int(early)), (t // every + 1) * every)


def self_play(g: BilinearTeamGame, variant: Variant | str = Variant.PCFR_PLUS,
              stop: StopRule | None = None) -> SolveResult:
    """Alternating self-play; checkpoints compute the Nash gap of the average profile."""
    stop = stop or StopRule()
    variant = Variant(variant)
    target = stop.target_gap if stop.target_gap is not None else stop.target_gap_fraction * g.payoff_range
    plus = RegretState(g.plus.space, variant)
    minus = RegretState(g.minus.space, variant)
    trace = SolveTrace()
    start = time.perf_counter()
    sched = _schedule(stop)
    next_check = next(sched)

    def averages():
        if plus.t == 0:
            return plus.current_flows()[0], minus.current_flows()[0]
        return plus.average()[0], minus.average()[0]

    x, y = averages()
    ex = exploitability(g, x, y)
    trace.add(Checkpoint(0, 0.0, ex.gap, value(g, x, y)))
    t = 0
    while True:
        if ex.gap <= target:
            trace.stop_reason = "target gap reached"
            break
        if t >= stop.max_iters:
            trace.stop_reason = "iteration limit"
            break
        if time.perf_counter() - start > stop.time_limit:
            trace.stop_reason = "time limit"
            break
        t += 1
        y_cur = minus.current_flows()[0]
        plus.observe(utility_for(g, "+", y_cur))
        x_cur = plus.current_flows()[0]
        minus.observe(utility_for(g, "-", x_cur))
        if t == next_check or t >= stop.max_iters:
            while next_check <= t:
                next_check = next(sched)
            x, y = averages()
            ex = exploitability(g, x, y)
            trace.add(Checkpoint(t, time.perf_counter() - start, ex.gap, value(g, x, y)))
    x, y = averages()
    if trace.rows[-1].iteration != t:
        ex = exploitability(g, x, y)
        trace.add(Checkpoint(t, time.perf_counter() - start, ex.gap, value(g, x, y)))
    return SolveResult(x=x, y=y, value=value(g, x, y), gap=ex.gap, iterations=t, trace=trace)


# ---------------------------------------------------------------------------
# linear program


@dataclass
class LpSize:
    variables: int
    constraints: int
    nonzeros: int


def _fmt(c: float) -> str:
    return repr(float(c))


def _terms(pairs) -> str:
    out = []
    for c, name in pairs:
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        out.append(f"{sign} {_fmt(abs(c))} {name}")
    if not out:
        return "0 dummy0"
    s = " ".join(out)
    return s[2:] if s.startswith("+ ") else s


def lp_export(g: BilinearTeamGame, path) -> LpSize:
    """Write the LP ``min_y max_x x^T A y`` in CPLEX LP syntax; its optimum is the team-plus value.

    Variables: ``f<n>_<j>`` flow on the j-th edge of minus decision node n and
    ``v<n>`` best-response value of plus decision node n. Node reaches and
    terminal values are substituted as linear expressions, so the constraints
    are one flow balance per minus decision node and one best-response
    inequality per plus decision edge.
    """
    P, M = g.plus.dag, g.minus.dag
    cons: list = []
    nz = 0

    def add(name, expr, sense, rhs):
        nonlocal nz
        # substitution can cancel coefficients down to rounding noise
        pairs = [(c, v) for v, c in sorted(expr.items(), key=lambda kv: _var_key(kv[0])) if abs(c) > 1e-12]
        nz += len(pairs)
        cons.append(f" {name}: {_terms(pairs)} {sense} {_fmt(rhs + 0.0)}")

    def plus_into(acc, expr, scale=1.0):
        for v, c in expr.items():
            acc[v] = acc.get(v, 0.0) + scale * c

    # minus reach of every node as {variable: coefficient}; the constant 1 of the root is the key ""
    m_parents = M.parents()
    m_reach: list = [None] * len(M.kind)
    m_reach[M.root] = {"": 1.0}
    for n in range(len(M.kind)):
        if n == M.root:
            continue
        e: dict = {}
        for a in m_parents[n]:
            if M.kind[a] == DEC:
                for j, c in enumerate(M.children[a]):
                    if c == n:
                        plus_into(e, {f"f{a}_{j}": 1.0})
            else:
                plus_into(e, m_reach[a])
        m_reach[n] = e

    for n in range(len(M.kind)):
        if M.kind[n] == DEC and M.children[n]:
            e = {f"f{n}_{j}": 1.0 for j in range(len(M.children[n]))}
            plus_into(e, m_reach[n], -1.0)
            const = -e.pop("", 0.0)
            add(f"dec{n}", e, "=", const)

    # plus terminal values, linear in the minus reaches
    coef: dict = {}
    for w, a, b in zip(g.weight, g.leaf_plus, g.leaf_minus):
        d = coef.setdefault(int(a), {})
        d[int(b)] = d.get(int(b), 0.0) + float(w)
    term_val: dict = {}
    for n, row in coef.items():
        e: dict = {}
        for m, c in sorted(row.items()):
            plus_into(e, m_reach[m], c)
        term_val[n] = e

    val_memo: dict = {}

    def val(n) -> dict:
        if n in val_memo:
            return val_memo[n]
        k = P.kind[n]
        if k == DEC:
            out = {f"v{n}": 1.0}
        elif k == TERM:
            out = term_val.get(n, {})
        else:
            out = {}
            for c in P.children[n]:
                plus_into(out, val(c))
        val_memo[n] = out
        return out

    free = []
    for n in range(len(P.kind)):
        if P.kind[n] != DEC:
            continue
        free.append(f"v{n}")
        for j, c in enumerate(P.children[n]):
            e = {f"v{n}": 1.0}
            plus_into(e, val(c), -1.0)
            const = -e.pop("", 0.0)
            add(f"br{n}_{j}", e, ">=", const)

    objective = dict(val(P.root))
    offset = objective.pop("", 0.0)
    obj_pairs = [(c, v) for v, c in sorted(objective.items(), key=lambda kv: _var_key(kv[0])) if abs(c) > 1e-12]
    if offset:
        # a constant objective term goes through a variable fixed to 1
        obj_pairs.append((offset, "one"))
    lines = ["\\ team-plus value of a two-team zero-sum game", "Minimize", f" obj: {_terms(obj_pairs)}",
             "Subject To", *cons, "Bounds"]
    lines += [f" {v} free" for v in free]
    if offset:
        lines.append(" one = 1")
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n")
    n_flows = sum(len(c) for n, c in enumerate(M.children) if M.kind[n] == DEC)
    return LpSize(variables=n_flows + len(free) + (1 if offset else 0), constraints=len(cons),
                  nonzeros=nz + len(obj_pairs))


def _var_key(name: str):
    head, rest = name[0], name[1:]
    return (head, tuple(int(x) for x in rest.split("_"))) if rest else (head, ())


def solve_lp(path) -> float:
    """Optimal objective of an LP file, via the HiGHS solver."""
    import highspy

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("primal_feasibility_tolerance", 1e-10)
    h.setOptionValue("dual_feasibility_tolerance", 1e-10)
    status = h.readModel(str(path))
    if status == highspy.HighsStatus.kError:
        raise RuntimeError(f"could not read LP file {path}")
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        raise RuntimeError(f"LP not solved to optimality: {h.modelStatusToString(h.getModelStatus())}")
    return float(h.getInfo().objective_function_value)
