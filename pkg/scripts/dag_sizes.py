"""Belief DAG sizes and public-state parameters for the benchmark games, as CSV."""

import csv
import sys
import time
from dataclasses import dataclass, field

from _config import parse

from teamdag import dag as tb
from teamdag import games
from teamdag.equilibrium import assemble
from teamdag.tfsdp import compute_public_structure

GAMES = {
    "3K3": lambda: games.build_kuhn(3, 3),
    "3K4": lambda: games.build_kuhn(3, 4),
    "3K6": lambda: games.build_kuhn(3, 6),
    "3L133": lambda: games.build_leduc(3, 1, 3, 3),
    "3L223": lambda: games.build_leduc(3, 2, 2, 3),
    "3D3": lambda: games.build_liars_dice(3, 3),
    "3G": lambda: games.build_goofspiel(3, 3, False),
    "3GL": lambda: games.build_goofspiel(3, 3, True),
    "4G": lambda: games.build_goofspiel(4, 3, False),
}


@dataclass
class Config:
    """Build both teams' DAGs for each game and report sizes and parameters."""
    games: list = field(default_factory=lambda: ["3K3", "3K4", "3K6", "3L133", "3L223", "3D3", "3G", "3GL"])
    out: str = "-"
    max_nodes: int = 5_000_000


def main(cfg: Config):
    fh = sys.stdout if cfg.out == "-" else open(cfg.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["game", "leaves", "team", "raw_vertices", "raw_edges", "vertices", "edges",
                "w", "p", "k", "states", "b", "b_public", "binarized", "seconds"])
    for name in cfg.games:
        tree = GAMES[name]()
        start = time.perf_counter()
        g = assemble(tree, max_nodes=cfg.max_nodes)
        secs = time.perf_counter() - start
        for label, side in (("+", g.plus), ("-", g.minus)):
            ps = compute_public_structure(side.tfsdp)
            rep = tb.stats(side.dag, ps)
            w.writerow([name, len(g.leaves), label, rep.raw_vertices, rep.raw_edges, rep.vertices, rep.edges,
                        rep.w, ps.p, ps.k, ps.num_states, ps.b, ps.b_public, int(side.reduced), f"{secs:.2f}"])
        fh.flush()
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main(parse(Config))
