#!/usr/bin/env python3
"""Regenerates the test fixtures in crates/core/tests/fixtures.

prices_3x252.csv   synthetic 3-asset geometric random walk, 252 periods
classical_eg.csv   textbook EG (eta = 0.05) run on it: w_i <- w_i exp(eta x_i / w.x), normalized

Standard library only, deliberately independent of the Rust code.
"""
import math
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "fixtures"
ETA = 0.05
PERIODS = 252
DRIFT = [0.0004, 0.0001, -0.0002]
VOL = [0.012, 0.02, 0.015]


def prices():
    rng = random.Random(20240601)
    rows = [[100.0, 50.0, 20.0]]
    for _ in range(PERIODS - 1):
        prev = rows[-1]
        rows.append([p * math.exp(m + s * rng.gauss(0.0, 1.0)) for p, m, s in zip(prev, DRIFT, VOL)])
    return rows


def classical_eg(rows):
    n = len(rows[0])
    w = [1.0 / n] * n
    wealth = 1.0
    out = []
    for t in range(1, len(rows)):
        x = [p / q for p, q in zip(rows[t], rows[t - 1])]
        r = sum(wi * xi for wi, xi in zip(w, x))
        wealth *= r
        out.append((t, list(w), r, wealth))
        grown = [wi * math.exp(ETA * xi / r) for wi, xi in zip(w, x)]
        z = sum(grown)
        w = [g / z for g in grown]
    return out


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rows = prices()
    with open(OUT / "prices_3x252.csv", "w") as f:
        f.write("period,alpha,beta,gamma\n")
        for t, row in enumerate(rows):
            f.write(f"{t}," + ",".join(repr(p) for p in row) + "\n")
    # the trajectory is computed from the prices as written, so both sides read identical values
    written = [[float(v) for v in line.split(",")[1:]] for line in (OUT / "prices_3x252.csv").read_text().splitlines()[1:]]
    with open(OUT / "classical_eg.csv", "w") as f:
        f.write("period,w_alpha,w_beta,w_gamma,return,wealth\n")
        for t, w, r, wealth in classical_eg(written):
            f.write(f"{t}," + ",".join(repr(v) for v in w) + f",{r!r},{wealth!r}\n")


if __name__ == "__main__":
    main()
