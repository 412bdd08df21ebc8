"""Team-plus values of the benchmark games by CFR self-play, as CSV."""

import csv
import sys
import time
from dataclasses import dataclass, field

from _config import parse
from dag_sizes import GAMES

from teamdag.equilibrium import StopRule, assemble, self_play


@dataclass
class Config:
    """Solve each game with each algorithm to an absolute gap and report value, gap and time."""
    games: list = field(default_factory=lambda: ["3K3", "3K4", "3L133", "3L223", "3D3", "3G", "3GL"])
    algos: list = field(default_factory=lambda: ["dcfr", "pcfr+"])
    target_gap: float = 1e-3
    max_iters: int = 100_000
    time_limit: float = 600.0
    out: str = "-"


def main(cfg: Config):
    fh = sys.stdout if cfg.out == "-" else open(cfg.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["game", "algo", "range", "iterations", "gap", "value", "seconds", "stop"])
    for name in cfg.games:
        g = assemble(GAMES[name]())
        for algo in cfg.algos:
            start = time.perf_counter()
            res = self_play(g, algo, StopRule(max_iters=cfg.max_iters, target_gap=cfg.target_gap,
                                              time_limit=cfg.time_limit))
            w.writerow([name, algo, f"{g.payoff_range:g}", res.iterations, f"{res.gap:.3e}", f"{res.value:.6f}",
                        f"{time.perf_counter() - start:.2f}", res.trace.stop_reason])
            fh.flush()
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main(parse(Config))
