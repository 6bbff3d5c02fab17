"""Gram matrices of the solutions sharing one quantum number."""
import argparse

import numpy as np

from liouvillian_hill.pbhe import PBHEParams, build_solutions
from liouvillian_hill.verify import single_orthogonality


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=4)
    ap.add_argument("--K3", type=float, default=1.0)
    ap.add_argument("--root", type=float, default=0.8, help="sqrt(-K0)")
    args = ap.parse_args()
    np.set_printoptions(precision=3, linewidth=120)
    for n in range(args.nmax + 1):
        p = PBHEParams(K0=-args.root**2, K2=2 * (n + 1) - args.K3**2 / 4 + 2 * args.root, K3=args.K3)
        m = len(build_solutions(p, n))
        G = np.array([[single_orthogonality(p, n, i, j).value for j in range(m)] for i in range(m)])
        d = np.sqrt(np.abs(np.diag(G)))
        off = np.abs(G) / np.outer(d, d) - np.eye(m)
        print(f"n={n}: diagonal {np.real(np.diag(G))}, max normalised off-diagonal {np.max(np.abs(off)):.2e}")


if __name__ == "__main__":
    main()
