"""Grid over the threshold slack of the l1 -> Hamming map.

For each (d, eps) and candidate slack c6 the table shows the fraction of
constrained pairs whose Hamming image lands on the wrong side of A0 / A1,
averaged over seeds, and the relative gap (A1 - A0) / (k eps) left over.
The shipped value is embed.C6.

    python3 scripts/calibrate_embedding.py [--seeds 10]
"""

import argparse
import math

import numpy as np
from scipy.spatial.distance import pdist

from rnetkit import embed, synth

SLACKS = (0.0, 0.05, 0.1, 0.15, 0.17, 0.2)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()
    print(f"{'d':>3} {'eps':>4} " + " ".join(f"c6={c:<5}" for c in SLACKS) + "  gap@C6")
    for d, eps in ((8, 0.3), (32, 0.1), (32, 0.2), (32, 0.3)):
        rates = np.zeros(len(SLACKS))
        for seed in range(args.seeds):
            X = synth.gaussian(args.n, d, seed, "l1")
            r = float(np.median(pdist(X.points, "cityblock")))
            bits, fam = embed.l1_to_hamming(X, r, eps, seed)
            root = math.sqrt(fam.k * math.log(args.n))
            for i, c in enumerate(SLACKS):
                v = embed.separation_violations(X, bits, fam, fam.alpha0 * fam.k + c * root,
                                                fam.alpha1 * fam.k - c * root)
                rates[i] += v["combined"] / args.seeds
        gap = (fam.A1 - fam.A0) / (fam.k * eps)
        print(f"{d:>3} {eps:>4} " + " ".join(f"{v:<8.3f}" for v in rates) + f"  {gap:.3f}")


if __name__ == "__main__":
    main()
