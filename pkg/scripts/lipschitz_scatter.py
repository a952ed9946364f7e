"""Scatter data for the two arc Lipschitz inequalities.

Writes two CSV files: measure pairs with (d_P, d_CA, C_m d_P) and arc pairs
with (d_CA, max scale difference). Plot them however you like.

    python scripts/lipschitz_scatter.py --pairs 200 --arc-pairs 500 --prefix out/lip
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from arcforge.arcs import arc_metric
from arcforge.rng import SplitMix64
from arcforge.suites import random_arc_pair, random_delta_pair


@dataclass
class Config:
    pairs: int = 200
    arc_pairs: int = 500
    seed: int = 0
    max_atoms: int = 10


def sample(cfg: Config):
    rng = SplitMix64(cfg.seed)
    measure_rows = []
    for k in range(cfg.pairs):
        p = random_delta_pair(rng, cfg.max_atoms)
        measure_rows.append((k, p.m, p.delta, p.d_p, p.d_ca, p.bound))
    arc_rows = []
    for k in range(cfg.arc_pairs):
        a, b = random_arc_pair(rng)
        arc_rows.append((k, a.m, arc_metric(a, b), float(np.max(np.abs(a.scales - b.scales)))))
    return measure_rows, arc_rows


def write(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--pairs", type=int, default=Config.pairs)
    p.add_argument("--arc-pairs", type=int, default=Config.arc_pairs)
    p.add_argument("--seed", type=int, default=Config.seed)
    p.add_argument("--prefix", default="lipschitz")
    args = p.parse_args(argv)
    cfg = Config(args.pairs, args.arc_pairs, args.seed)
    measure_rows, arc_rows = sample(cfg)
    prefix = Path(args.prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    write(prefix.with_name(prefix.name + "_measures.csv"),
          ["pair", "m", "delta", "d_p", "d_ca", "bound"], measure_rows)
    write(prefix.with_name(prefix.name + "_arcs.csv"), ["pair", "m", "d_ca", "scale_diff"], arc_rows)
    v1 = sum(r[4] > r[5] for r in measure_rows)
    v2 = sum(r[3] > 2 * r[2] for r in arc_rows)
    print(f"violations: {v1}/{len(measure_rows)} measure pairs, {v2}/{len(arc_rows)} arc pairs")


if __name__ == "__main__":
    main()
