"""Admissible K1 values and solve time as the quantum number n grows."""
import argparse
import time

import numpy as np

from liouvillian_hill.pbhe import PBHEParams, build_solutions, eigenvalues_K1
from liouvillian_hill.verify import standard_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=12)
    ap.add_argument("--K3", type=float, default=0.5)
    ap.add_argument("--root", type=float, default=1.0, help="sqrt(-K0)")
    args = ap.parse_args()
    grid = standard_grid()
    print(f"{'n':>3} {'seconds':>9} {'max residual':>13}  K1 (real parts)")
    for n in range(args.nmax + 1):
        p = PBHEParams(K0=-args.root**2, K2=2 * (n + 1) - args.K3**2 / 4 + 2 * args.root, K3=args.K3)
        t = time.perf_counter()
        K1 = eigenvalues_K1(p, n).K1_values
        dt = time.perf_counter() - t
        res = max(float(np.max(s.residual(grid))) for s in build_solutions(p, n))
        shown = " ".join(f"{v.real:+.4f}" for v in K1[:6]) + (" ..." if len(K1) > 6 else "")
        print(f"{n:>3} {dt:>9.2e} {res:>13.2e}  {shown}")


if __name__ == "__main__":
    main()
