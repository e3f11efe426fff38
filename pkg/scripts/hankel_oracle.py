"""Finite Hankel blocks versus SVA singular values.

Prints, for random binary det-free dynamic automata, the largest gap between
the singular values of the block over prefixes/suffixes of length <= L and
the sigmas from ``compute_sva``, next to ``rho**(L+1) / (1 - rho)`` (the exact
gap for a one-state automaton with the same ``rho``).
"""

import argparse

import numpy as np

from wfasva import models
from wfasva.analysis import hankel_block, hankel_svd
from wfasva.gramian import kron_radius
from wfasva.sva import compute_sva


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cases", type=int, default=8)
    ap.add_argument("--max-len", type=int, default=10)
    ap.add_argument("--max-rho", type=float, default=0.8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    lengths = list(range(2, args.max_len + 1, 2))
    print("rho     n  " + "  ".join(f"L={L:<8d}" for L in lengths) + "  closed form at max L")
    done = 0
    while done < args.cases:
        A = models.random_detfree_pdpa(rng, int(rng.integers(2, 6)), 2,
                                       concentration=float(rng.uniform(0.2, 2.0)))
        rho = kron_radius(A)
        if rho > args.max_rho:
            continue
        sig = compute_sva(A).sigmas
        gaps = []
        for L in lengths:
            s = hankel_svd(hankel_block(A, L, L), 0.0).s[: len(sig)]
            s = np.pad(s, (0, len(sig) - len(s)))
            gaps.append(np.max(np.abs(sig - s)))
        ref = rho ** (args.max_len + 1) / (1 - rho)
        print(f"{rho:.3f}  {A.n}  " + "  ".join(f"{g:.3e}" for g in gaps) + f"  {ref:.3e}")
        done += 1


if __name__ == "__main__":
    main()
