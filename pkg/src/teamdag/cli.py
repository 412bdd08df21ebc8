"""Command-line front end: ``teamdag {build,solve,lp,oracle} FAMILY [options]``.

Game families and their parameters (defaults in brackets):

  K     Kuhn poker          --players [3] --ranks [3]
  L     Leduc poker         --players [3] --max-bets [1] --ranks [3] --suits [3]
  D     Liar's Dice         --players [3] --faces [3]
  G     Goofspiel           --players [3]
  GL    limited Goofspiel   --players [3]
  cex   belief blow-up family  --c [6]
  fig1  the 15-node example team problem (build and oracle only)
  file  a game in the text format, given with --input PATH

--minus lists the 1-based seats of team minus (default: the last seat).
Relative output paths are resolved against $TEAMDAG_OUTDIR when it is set.

Exit codes: 0 success, 2 parse or usage error, 3 resource guard, 4 property failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import dag as tb
from . import games, oracle
from .dag import Grouping, TooLargeError
from .efg import GameTree, InvalidGame, InvalidParameters
from .equilibrium import StopRule, assemble, lp_export, self_play, solve_lp
from .learn import Variant
from .textio import ParseError, read_game
from .tfsdp import compute_public_structure, make_timed, project

EXIT_OK, EXIT_PARSE, EXIT_GUARD, EXIT_PROPERTY = 0, 2, 3, 4

FAMILY_FLAGS = {
    "K": {"players": 3, "ranks": 3},
    "L": {"players": 3, "max_bets": 1, "ranks": 3, "suits": 3},
    "D": {"players": 3, "faces": 3},
    "G": {"players": 3},
    "GL": {"players": 3},
    "cex": {"c": 6},
    "fig1": {},
    "file": {},
}
ALL_FLAGS = ("players", "ranks", "max_bets", "suits", "faces", "c")


class UsageError(Exception):
    pass


def _out_path(p: str) -> Path:
    path = Path(p)
    base = os.environ.get("TEAMDAG_OUTDIR")
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _minus(text: str | None, players: int) -> frozenset | None:
    if text is None:
        return None
    try:
        seats = frozenset(int(x) - 1 for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"--minus expects comma-separated seat numbers, got {text!r}") from None
    if not seats or any(not 0 <= s < players for s in seats):
        raise UsageError(f"--minus seats must lie in 1..{players}")
    if len(seats) == players:
        raise UsageError("--minus cannot hold every seat")
    return seats


def load_game(args) -> GameTree | None:
    """Game tree named by the parsed arguments; ``None`` for the fig1 team problem."""
    fam = args.family
    allowed = FAMILY_FLAGS[fam]
    for f in ALL_FLAGS:
        if getattr(args, f) is not None and f not in allowed:
            raise UsageError(f"--{f.replace('_', '-')} does not apply to family {fam}")
    if fam != "file" and args.input is not None:
        raise UsageError("--input is only used with family 'file'")
    v = {f: getattr(args, f) if getattr(args, f) is not None else d for f, d in allowed.items()}
    if fam == "fig1":
        if args.minus is not None:
            raise UsageError("fig1 is a single team problem and takes no --minus")
        return None
    if fam == "file":
        if args.input is None:
            raise UsageError("family 'file' needs --input PATH")
        tree = read_game(args.input)
        m = _minus(args.minus, tree.num_players)
        return tree.with_minus(m) if m is not None else tree
    if fam == "cex":
        if args.minus is not None:
            raise UsageError("cex fixes its teams and takes no --minus")
        return games.build_counterexample(v["c"])
    m = _minus(args.minus, v["players"])
    if fam == "K":
        return games.build_kuhn(v["players"], v["ranks"], minus=m)
    if fam == "L":
        return games.build_leduc(v["players"], v["max_bets"], v["ranks"], v["suits"], minus=m)
    if fam == "D":
        return games.build_liars_dice(v["players"], v["faces"], minus=m)
    return games.build_goofspiel(v["players"], 3, fam == "GL", minus=m)


def _reduce(args):
    return {"auto": None, "on": True, "off": False}[args.reduce]


def _seats(s) -> str:
    return "{" + ",".join(str(p + 1) for p in sorted(s)) + "}"


def _report_side(label: str, t, d, reduced: bool, out) -> None:
    ps = compute_public_structure(t)
    rep = tb.stats(d, ps)
    print(f"team {label}: raw {rep.raw_vertices} vertices / {rep.raw_edges} edges, "
          f"optimized {rep.vertices} vertices / {rep.edges} edges", file=out)
    print(f"  w={rep.w} p={ps.p} k={ps.k} |P|={ps.num_states} b={ps.b} b'={ps.b_public} "
          f"binarized={'yes' if reduced else 'no'}", file=out)
    print(f"  bounds: (b(p+1))^w b' |P| = {rep.bound_effective}, (b+1)^k b' |P| = {rep.bound_private}",
          file=out)


def _fig1_beliefs(d, out) -> None:
    names = games.FIGURE1_NAMES
    print("beliefs:", file=out)
    for n in range(len(d.kind)):
        if d.kind[n] == tb.DEC:
            print("  {" + ",".join(names[h] for h in d.belief[n]) + "}", file=out)


def cmd_build(args, out=None) -> int:
    out = out or sys.stdout
    grouping = Grouping(args.grouping)
    tree = load_game(args)
    if tree is None:
        t = games.build_figure1_fixture()
        raw = tb.build(t, grouping, args.max_nodes)
        d = tb.optimize(raw, t)
        print("problem fig1", file=out)
        _report_side("fig1", t, d, False, out)
        _fig1_beliefs(raw, out)
        if args.dump:
            _out_path(args.dump).write_text(tb.dump(d))
        return EXIT_OK
    g = assemble(tree, _reduce(args), grouping, args.max_nodes)
    print(f"game {tree.name} leaves {len(g.leaves)} minus {_seats(tree.minus)}", file=out)
    for label, side in (("+", g.plus), ("-", g.minus)):
        _report_side(label, side.tfsdp, side.dag, side.reduced, out)
    if args.dump:
        path = _out_path(args.dump)
        path.write_text(tb.dump(g.plus.dag))
        path.with_name(path.name + ".minus").write_text(tb.dump(g.minus.dag))
    return EXIT_OK


def _game_only(args) -> GameTree:
    tree = load_game(args)
    if tree is None:
        raise UsageError("fig1 is a single team problem; only 'build' and 'oracle' accept it")
    return tree


def cmd_solve(args, out=None) -> int:
    out = out or sys.stdout
    tree = _game_only(args)
    g = assemble(tree, _reduce(args), Grouping(args.grouping), args.max_nodes)
    stop = StopRule(max_iters=args.max_iters, target_gap_fraction=args.target_gap_fraction,
                    target_gap=args.target_gap, time_limit=args.time_limit, checkpoints=args.checkpoints)
    res = self_play(g, args.algo, stop)
    if args.csv:
        if args.no_timing:
            for row in res.trace.rows:
                row.seconds = 0.0
        res.trace.write_csv(_out_path(args.csv))
    print(f"game {tree.name} algo {args.algo} iterations {res.iterations} ({res.trace.stop_reason})", file=out)
    print(f"value {res.value:.6f} gap {res.gap:.3e} range {g.payoff_range:g}", file=out)
    return EXIT_OK


def cmd_lp(args, out=None) -> int:
    out = out or sys.stdout
    tree = _game_only(args)
    g = assemble(tree, _reduce(args), Grouping(args.grouping), args.max_nodes)
    path = _out_path(args.out)
    size = lp_export(g, path)
    print(f"wrote {path}: {size.variables} variables, {size.constraints} constraints, "
          f"{size.nonzeros} nonzeros", file=out)
    if args.solve:
        print(f"optimum {solve_lp(path):.9f}", file=out)
    return EXIT_OK


def cmd_oracle(args, out=None) -> int:
    out = out or sys.stdout
    grouping = Grouping(args.grouping)
    tree = load_game(args)
    if tree is None:
        problems = [("fig1", games.build_figure1_fixture())]
    else:
        problems = [(f"team {s}", make_timed(project(tree, s))) for s in ("+", "-")]
    failed = False
    for label, t in problems:
        print(f"{label}:", file=out)
        for v in oracle.run_all(t, args.limit, grouping):
            print("  " + v.line(), file=out)
            failed |= not v.ok
    return EXIT_PROPERTY if failed else EXIT_OK


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="teamdag", description=__doc__.split("\n\n")[0],
                                 epilog=__doc__.split("\n\n", 1)[1],
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("family", choices=sorted(FAMILY_FLAGS))
        for f in ALL_FLAGS:
            p.add_argument(f"--{f.replace('_', '-')}", dest=f, type=int, default=None)
        p.add_argument("--minus", default=None, help="1-based seats of team minus, comma separated")
        p.add_argument("--input", default=None, help="game file for family 'file'")
        p.add_argument("--grouping", choices=[g.value for g in Grouping], default=Grouping.OBSERVATIONS.value)
        p.add_argument("--reduce", choices=["auto", "on", "off"], default="auto",
                       help="binarize team decisions (auto: only with team-public actions)")
        p.add_argument("--max-nodes", type=int, default=5_000_000, help="cap on raw DAG nodes per team")
        return p

    p = common(sub.add_parser("build", help="build both belief DAGs and report sizes and parameters"))
    p.add_argument("--dump", default=None, help="write the optimized DAG(s) in text form")
    p.set_defaults(run=cmd_build)

    p = common(sub.add_parser("solve", help="run CFR self-play to a target gap"))
    p.add_argument("--algo", choices=[v.value for v in Variant], default=Variant.PCFR_PLUS.value)
    p.add_argument("--max-iters", type=int, default=100_000)
    p.add_argument("--target-gap-fraction", type=float, default=1e-3)
    p.add_argument("--target-gap", type=float, default=None, help="absolute gap; overrides the fraction")
    p.add_argument("--time-limit", type=float, default=float("inf"))
    p.add_argument("--checkpoints", type=int, default=100)
    p.add_argument("--csv", default=None, help="write the trace (iteration,seconds,gap,value)")
    p.add_argument("--no-timing", action="store_true", help="write 0 seconds so traces are byte-identical")
    p.set_defaults(run=cmd_solve)

    p = common(sub.add_parser("lp", help="export the equilibrium LP"))
    p.add_argument("--out", required=True)
    p.add_argument("--solve", action="store_true", help="also solve it with HiGHS")
    p.set_defaults(run=cmd_lp)

    p = common(sub.add_parser("oracle", help="brute-force checks of both teams' DAGs"))
    p.add_argument("--limit", type=int, default=10**6, help="cap on enumerated pure strategies")
    p.set_defaults(run=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.run(args)
    except (UsageError, ParseError, InvalidParameters, InvalidGame) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except TooLargeError as e:
        print(f"resource guard: {e}; use smaller parameters or raise the limit", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
