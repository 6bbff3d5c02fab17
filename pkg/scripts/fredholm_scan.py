"""Fredholm eigen-relation consistency for both kernel parities.

For each (n, K3, eps0, parity) the ratio of the integral to the solution is
sampled at a handful of complex points; a relative spread (CoV) near machine
precision means the solution is an eigenfunction of that kernel.
"""
import argparse

from liouvillian_hill.errors import LiouvillianError
from liouvillian_hill.pbhe import PBHEParams
from liouvillian_hill.verify import fredholm_consistency

Z0 = (0.1 + 0.3j, -0.2 + 1.0j, 0.3 - 0.5j, 0.05 + 2.0j, -0.4 + 0.2j)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=2)
    ap.add_argument("--K3", type=float, nargs="+", default=[0.0, 0.5, 1.3, -2.0])
    args = ap.parse_args()
    print(f"{'n':>2} {'K3':>5} {'eps0':>4} {'parity':>6}  CoV per solution")
    for n in range(args.nmax + 1):
        for K3 in args.K3:
            for eps0 in (-1, 1):
                p = PBHEParams(K0=-1, K2=2 * (n + 1) - K3**2 / 4 + 2 * eps0, K3=K3, eps0=eps0)
                for parity in ("even", "odd"):
                    try:
                        covs = [fredholm_consistency(p, n, nu, Z0, parity=parity).rel_residual
                                for nu in range(n + 1)]
                        text = " ".join(f"{c:.1e}" for c in covs)
                    except LiouvillianError as exc:
                        text = type(exc).__name__
                    print(f"{n:>2} {K3:>5.2f} {eps0:>+4d} {parity:>6}  {text}")


if __name__ == "__main__":
    main()
