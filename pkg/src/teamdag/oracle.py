"""Brute-force checks of a team belief DAG against its team decision problem."""

from __future__ import annotations

from dataclasses import dataclass

from . import dag as tb
from .dag import Grouping, TbDag
from .tfsdp import TeamTFSDP, compute_public_structure, inflate


@dataclass
class Verdict:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}" + (f": {self.detail}" if self.detail else "")


def plan_equivalence(t: TeamTFSDP, d: TbDag, limit: int = 10**5, name="plan equivalence") -> Verdict:
    """Leaf vectors of pure DAG strategies versus pure team strategies; reports one witness on mismatch."""
    want = tb.brute_force_plans(t, limit)
    got = tb.dag_plans(d, limit)
    if got == want:
        return Verdict(name, True, f"{len(want)} leaf vectors")
    extra = sorted(got - want)
    missing = sorted(want - got)
    if extra:
        return Verdict(name, False, f"DAG-only leaf vector {list(extra[0])} ({len(extra)} in total)")
    return Verdict(name, False, f"unreachable leaf vector {list(missing[0])} ({len(missing)} in total)")


def inflation_invariance(t: TeamTFSDP, grouping=Grouping.OBSERVATIONS) -> Verdict:
    # canonical forms name prescriptions per node, so differing infoset ids do not matter
    a = tb.canonical_form(tb.build(t, grouping), t)
    ti = inflate(t)
    b = tb.canonical_form(tb.build(ti, grouping), ti)
    return Verdict("inflation invariance", a == b, "" if a == b else f"{len(a ^ b)} differing decision edges")


def size_bounds(t: TeamTFSDP, d: TbDag) -> Verdict:
    rep = tb.stats(d, compute_public_structure(t))
    ok = rep.raw_edges <= rep.bound_effective and rep.raw_edges <= rep.bound_private
    return Verdict("size bounds", ok,
                   f"edges {rep.raw_edges} <= {rep.bound_effective} and <= {rep.bound_private}")


def structure(d: TbDag, name="structure") -> Verdict:
    issues = tb.lint(d)
    return Verdict(name, not issues, "; ".join(issues[:3]))


def run_all(t: TeamTFSDP, limit: int = 10**5, grouping=Grouping.OBSERVATIONS) -> list:
    """Every check on one timed team problem. Raises ``TooLargeError`` past ``limit`` pure strategies."""
    raw = tb.build(t, grouping)
    opt = tb.optimize(raw, t)
    return [
        plan_equivalence(t, raw, limit, "plan equivalence (raw)"),
        plan_equivalence(t, opt, limit, "plan equivalence (optimized)"),
        inflation_invariance(t, grouping),
        size_bounds(t, raw),
        structure(raw, "structure (raw)"),
        structure(opt, "structure (optimized)"),
        Verdict("optimize idempotent", tb.dump(tb.optimize(opt, t)) == tb.dump(opt)),
    ]
