"""Gap-versus-iteration traces of every CFR variant on one game, one CSV per variant."""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from _config import parse
from dag_sizes import GAMES

from teamdag.equilibrium import StopRule, assemble, self_play


@dataclass
class Config:
    """Run a fixed number of iterations per variant and fit the log-log gap slope over the last decade."""
    game: str = "3K3"
    algos: list = field(default_factory=lambda: ["cfr", "cfr+", "lcfr", "dcfr", "pcfr+"])
    iterations: int = 4000
    checkpoints: int = 200
    outdir: str = "traces"


def main(cfg: Config):
    g = assemble(GAMES[cfg.game]())
    out = Path(cfg.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for algo in cfg.algos:
        res = self_play(g, algo, StopRule(max_iters=cfg.iterations, target_gap=0.0, checkpoints=cfg.checkpoints))
        res.trace.write_csv(out / f"{cfg.game}_{algo.replace('+', 'plus')}.csv")
        it = np.array([r.iteration for r in res.trace.rows], dtype=float)
        gap = np.array([r.gap for r in res.trace.rows])
        last = (it >= cfg.iterations / 10) & (gap > 0)
        slope = np.polyfit(np.log(it[last]), np.log(gap[last]), 1)[0] if last.sum() >= 2 else float("nan")
        print(f"{cfg.game} {algo}: final gap {res.gap:.3e}, value {res.value:.6f}, last-decade slope {slope:.2f}")


if __name__ == "__main__":
    main(parse(Config))
