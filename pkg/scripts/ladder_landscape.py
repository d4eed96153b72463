"""Per-torus minimum of the ladder objective, literal and repaired torus factors.

Usage: python3 scripts/ladder_landscape.py [--span 30]
"""
import argparse
import math

import numpy as np

from ersdfo.benchmarks import LADDER_OPTIMAL_TORI, jacobs_fG, jacobs_fG_repaired, jacobs_fL


def fL_range(k=721):
    g = np.linspace(0, 2 * math.pi, k, endpoint=False)
    vals = np.array([[jacobs_fL(t, p) for p in g] for t in g])
    return vals.min(), vals.max()


def torus_min(fG, lo, hi):
    return fG * (lo if fG >= 0 else hi)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--span", type=int, default=30)
    args = ap.parse_args()
    lo, hi = fL_range()
    print(f"local factor on one torus: min {lo:.4f}, max {hi:.4f}")
    print(f"{'torus':>6} {'fG':>9} {'min f':>10} {'fG rep':>9} {'min f rep':>10}")
    rows = []
    for n in range(-args.span, args.span + 1):
        a, b = jacobs_fG(n), jacobs_fG_repaired(n)
        rows.append((n, torus_min(a, lo, hi), torus_min(b, lo, hi)))
        mark = " *" if n in LADDER_OPTIMAL_TORI else ""
        print(f"{n:6d} {a:9.4f} {rows[-1][1]:10.4f} {b:9.4f} {rows[-1][2]:10.4f}{mark}")
    best = min(rows, key=lambda r: r[1])
    best_rep = min(rows, key=lambda r: r[2])
    print(f"literal objective: lowest torus {best[0]} with {best[1]:.4f}")
    print(f"repaired objective: lowest torus {best_rep[0]} with {best_rep[2]:.4f}")


if __name__ == "__main__":
    main()
