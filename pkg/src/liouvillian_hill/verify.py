"""Contour quadrature and numerical certificates for the closed-form solutions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivisionNearZero, HypothesisViolated, NonConvergence
from .pbhe import (
    BHSolution,
    PBHEParams,
    build_solutions,
    eigenvalues_K1,
    quantization_n,
)
from .special_fn import KernelSpec, kernel_K

QUAD_RTOL = 1e-10
MAX_REFINEMENTS = 20
ENDPOINT_RTOL = 1e-14


@dataclass(frozen=True)
class PathSpec:
    """Integration path.

    ``real-line`` is (-T, T); ``shifted-line`` is (-T, T) + i pi;
    ``vertical-segment`` is 0 to 4 pi i; ``custom-segment`` runs start to end.
    """

    kind: str = "real-line"
    truncation: float = 6.0
    nodes: int = 16
    start: complex = 0j
    end: complex = 4j * math.pi

    def __post_init__(self):
        if self.kind not in ("real-line", "shifted-line", "vertical-segment", "custom-segment"):
            raise ValueError(f"unknown path kind {self.kind!r}")

    @property
    def infinite(self) -> bool:
        return self.kind in ("real-line", "shifted-line")

    @property
    def offset(self) -> complex:
        return 1j * math.pi if self.kind == "shifted-line" else 0j

    def endpoints(self, T: float | None = None):
        if self.infinite:
            T = self.truncation if T is None else T
            return -T + self.offset, T + self.offset
        if self.kind == "vertical-segment":
            return 0j, 4j * math.pi
        return complex(self.start), complex(self.end)


def _gauss_panels(a: complex, b: complex, panels: int, nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = a + (b - a) * np.arange(panels + 1) / panels
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def quad_segment(f, a: complex, b: complex, nodes: int = 16, rtol: float = QUAD_RTOL):
    """Composite Gauss-Legendre on the segment [a, b], halving panels until stable.

    Returns ``(integral, integral of |f| |dz|)``.
    """
    prev = None
    panels = 1
    for _ in range(MAX_REFINEMENTS):
        pts, wts = _gauss_panels(a, b, panels, nodes)
        vals = np.asarray(f(pts), dtype=complex)
        est = np.sum(wts * vals)
        mag = np.sum(np.abs(wts) * np.abs(vals))
        if not np.isfinite(est):
            raise NonConvergence(f"non-finite integrand on [{a}, {b}]", partial=est)
        if prev is not None and abs(est - prev) <= rtol * max(abs(est), mag, 1e-300):
            return est, mag
        prev = est
        panels *= 2
    raise NonConvergence(f"no convergence on [{a}, {b}] after {MAX_REFINEMENTS} refinements", partial=prev)


def quad_line(f, path: PathSpec = PathSpec(), rtol: float = QUAD_RTOL, return_meta: bool = False):
    """Integral of ``f`` along ``path``; infinite lines double T until the tails are negligible."""
    if not path.infinite:
        a, b = path.endpoints()
        val, mag = quad_segment(f, a, b, path.nodes, rtol)
        return (val, {"kind": path.kind, "start": a, "end": b, "abs_integral": mag}) if return_meta else val
    T = path.truncation
    for _ in range(8):
        a, b = path.endpoints(T)
        val, mag = quad_segment(f, a, b, path.nodes, rtol)
        tails = np.abs(np.asarray(f(np.array([a, b])), dtype=complex))
        if np.all(tails <= ENDPOINT_RTOL * max(mag, 1e-300)):
            meta = {"kind": path.kind, "truncation": T, "abs_integral": mag}
            return (val, meta) if return_meta else val
        T *= 2
    raise NonConvergence(f"integrand tails still large at T = {T / 2}", partial=val)


def quad_tensor(f, xa, xb, ya, yb, nodes: int = 16, rtol: float = 1e-9, max_panels: int = 64):
    """Tensor-product Gauss-Legendre for ``f(X, Y)`` on a rectangle of two segments."""
    prev = None
    panels = 2
    while panels <= max_panels:
        px, wx = _gauss_panels(xa, xb, panels, nodes)
        py, wy = _gauss_panels(ya, yb, panels, nodes)
        F = np.asarray(f(px[:, None], py[None, :]), dtype=complex)
        W = wx[:, None] * wy[None, :]
        est = np.sum(W * F)
        mag = np.sum(np.abs(W) * np.abs(F))
        if prev is not None and abs(est - prev) <= rtol * max(abs(est), mag, 1e-300):
            return est, mag
        prev = est
        panels *= 2
    raise NonConvergence("tensor quadrature did not converge", partial=prev)


def periodic_trapezoid(f, a: complex, b: complex, rtol: float = QUAD_RTOL, start: int = 32, max_points: int = 1 << 14):
    """Trapezoidal rule for an integrand periodic on [a, b]; doubles points until stable."""
    prev = None
    n = start
    while n <= max_points:
        t = a + (b - a) * np.arange(n) / n
        vals = np.asarray(f(t), dtype=complex)
        est = np.sum(vals) * (b - a) / n
        mag = np.sum(np.abs(vals)) * abs(b - a) / n
        if prev is not None and abs(est - prev) <= rtol * max(abs(est), mag, 1e-300):
            return est, mag
        prev = est
        n *= 2
    raise NonConvergence("periodic trapezoid did not converge", partial=prev)


@dataclass
class VerificationReport:
    name: str
    value: complex
    reference: complex | None = None
    abs_residual: float = 0.0
    rel_residual: float = 0.0
    tol: float = 0.0
    path: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.rel_residual) and self.rel_residual < self.tol)


def standard_grid(points: int = 41, imaginary_points: int = 9) -> np.ndarray:
    """41 real points on [-5, 2] plus samples on i [0, 2 pi]."""
    return np.concatenate([
        np.linspace(-5, 2, points).astype(complex),
        1j * np.linspace(0, 2 * math.pi, imaginary_points),
    ])


def ode_residual(s: BHSolution, grid=None, tol: float = 1e-8) -> VerificationReport:
    """Max of ``|f'' + V f| / (1 + |f''|)`` with f'' from the closed form."""
    grid = standard_grid() if grid is None else np.asarray(grid, dtype=complex)
    if grid.size == 0:
        return VerificationReport("ode_residual", 0j, None, 0.0, 0.0, tol)
    res = np.asarray(s.residual(grid))
    worst = float(np.max(res))
    return VerificationReport(
        "ode_residual", complex(worst), 0j, worst, worst, tol,
        data={"n": s.n, "nu": s.nu, "K1": complex(s.K1), "points": int(grid.size)},
    )


def _real_line_hypotheses(p: PBHEParams, n: int):
    if (p.eps0, p.eps_inf) != (1, -1):
        raise HypothesisViolated("orthogonality needs (eps0, eps_inf) = (+1, -1)")
    if not p.real_path:
        raise HypothesisViolated("orthogonality needs real K2, K3 and K0 < 0")
    if quantization_n(p) != n:
        raise HypothesisViolated(f"parameters do not quantize to n = {n}")


def single_orthogonality(p: PBHEParams, n: int, mu: int, nu: int, tol: float = 1e-7,
                         reference: complex | None = None, path: PathSpec = PathSpec()) -> VerificationReport:
    """``int BH_mu BH_nu e^x dx`` over the real line."""
    _real_line_hypotheses(p, n)
    sols = build_solutions(p, n)
    a, b = sols[mu], sols[nu]

    def weighted(u, v):
        return lambda x: np.exp(u.log_eval(x) + v.log_eval(x) + x)

    val, meta = quad_line(weighted(a, b), path, return_meta=True)
    if mu == nu:
        if reference is not None:
            err = abs(val - reference)
            rel = err / abs(reference)
        else:
            err = abs(val.imag)
            rel = err / abs(val) if val.real > 0 else math.inf
        if not val.real > 0:
            rel = math.inf
        return VerificationReport(
            f"norm[{n},{mu}]", val, reference, err, rel, tol, meta, {"K1": complex(a.K1)}
        )
    na = quad_line(weighted(a, a), path)
    nb = quad_line(weighted(b, b), path)
    scale = math.sqrt(abs(na) * abs(nb))
    return VerificationReport(
        f"orth[{n},{mu},{nu}]", val, 0j, abs(val), abs(val) / scale, tol, meta,
        {"norm_mu": na, "norm_nu": nb},
    )


def pair_params(K3: float, K2: float, n: int) -> PBHEParams:
    """Parameters with ``sqrt(-K0) = (K3^2/4 + K2)/2 - (n + 1)`` and signs (+1, -1)."""
    root = (K3**2 / 4 + K2) / 2 - (n + 1)
    if not root > 0:
        raise HypothesisViolated(f"sqrt(-K0) = {root} is not positive for n = {n}")
    return PBHEParams(-root * root, 0.0, K2, K3, 1, -1)


def _pair_solution(K3, K2, pair):
    n, idx = pair
    p = pair_params(K3, K2, n)
    return build_solutions(p, n)[idx]


def double_orthogonality(K3: float, K2: float, pair1, pair2, tol: float = 1e-6,
                         truncation: float = 6.0, nodes: int = 16) -> VerificationReport:
    """Iterated integral over R x (R + i pi) of ``a(z)b(z)a(s)b(s)(e^z - e^s)``.

    With ``s = xi + i pi`` the weight becomes ``e^z + e^xi``.
    """
    a = _pair_solution(K3, K2, pair1)
    b = _pair_solution(K3, K2, pair2)

    def product(u, v, shift):
        return lambda x: np.exp(u.log_eval(x + shift) + v.log_eval(x + shift))

    def integrand(u, v):
        g = product(u, v, 0)
        h = product(u, v, 1j * math.pi)
        return lambda X, Y: g(X) * h(Y) * (np.exp(X) + np.exp(Y))

    # truncation chosen from the one-dimensional tails of the factors
    T = max(
        quad_line(product(a, b, 0), PathSpec(truncation=truncation), return_meta=True)[1]["truncation"],
        quad_line(product(a, b, 1j * math.pi), PathSpec("shifted-line", truncation), return_meta=True)[1]["truncation"],
    )
    val, mag = quad_tensor(integrand(a, b), -T, T, -T, T, nodes)
    if pair1 == pair2:
        rel = 0.0 if abs(val) > 1e-10 * mag else math.inf
        return VerificationReport(
            f"double_norm[{pair1}]", val, None, abs(val), rel, tol,
            {"kind": "tensor", "truncation": T}, {"scale": mag, "ratio": abs(val) / mag},
        )
    na, _ = quad_tensor(integrand(a, a), -T, T, -T, T, nodes)
    nb, _ = quad_tensor(integrand(b, b), -T, T, -T, T, nodes)
    scale = math.sqrt(abs(na) * abs(nb))
    return VerificationReport(
        f"double_orth[{pair1},{pair2}]", val, 0j, abs(val), abs(val) / scale, tol,
        {"kind": "tensor", "truncation": T}, {"norm1": na, "norm2": nb, "abs_scale": mag},
    )


def double_integral_separable(a: BHSolution, b: BHSolution, truncation: float = 6.0) -> complex:
    """The same double integral from products of one-dimensional integrals."""
    g = lambda x: np.exp(a.log_eval(x) + b.log_eval(x))
    h = lambda x: np.exp(a.log_eval(x + 1j * math.pi) + b.log_eval(x + 1j * math.pi))
    line = PathSpec(truncation=truncation)
    Ig = quad_line(g, line)
    Igx = quad_line(lambda x: g(x) * np.exp(x), line)
    Ih = quad_line(h, line)
    Ihx = quad_line(lambda x: h(x) * np.exp(x), line)
    return Igx * Ih + Ig * Ihx


def _fredholm_hypotheses(p: PBHEParams):
    m = p.sqrtK0
    if abs(m.imag) > 1e-12 or m.real < 0.5 or abs(m.real - round(m.real)) > 1e-12:
        raise HypothesisViolated(f"sqrt(-K0) = {m} is not a positive integer")


def fredholm_integral(p: PBHEParams, y, z0: complex, method: str = "gauss", parity: str = "even"):
    """``int_0^{4 pi i} K(z0, t) e^t y(t) dt`` and the matching absolute integral."""
    ks = KernelSpec.from_pbhe(p, parity=parity)

    def integrand(t):
        return kernel_K(ks, np.full(np.shape(t), z0), t) * np.exp(t) * y(t)

    if method == "trapezoid":
        return periodic_trapezoid(integrand, 0j, 4j * math.pi)
    return quad_segment(integrand, 0j, 4j * math.pi)


def fredholm_lambda(p: PBHEParams, n: int, nu: int, z0: complex, y=None, method: str = "gauss",
                    parity: str = "even") -> complex:
    """``lambda(z0) = y(z0) / int_0^{4 pi i} K(z0, t) e^t y(t) dt`` with y = BH_{n,nu} by default."""
    _fredholm_hypotheses(p)
    if y is None:
        y = build_solutions(p, n)[nu]
    den, mag = fredholm_integral(p, y, z0, method, parity)
    if abs(den) < 1e-13 * max(mag, 1e-300):
        raise DivisionNearZero(f"kernel integral vanishes at z0 = {z0} (|I| = {abs(den):.3e}, scale {mag:.3e})")
    return complex(y(z0) / den)


def fredholm_consistency(p: PBHEParams, n: int, nu: int, z0s, y=None, tol: float = 1e-6,
                         method: str = "gauss", parity: str = "even") -> VerificationReport:
    """Coefficient of variation of ``lambda(z0)`` over the sample points."""
    lams = np.array([fredholm_lambda(p, n, nu, z0, y, method, parity) for z0 in z0s])
    mean = np.mean(lams)
    cov = float(np.sqrt(np.mean(np.abs(lams - mean) ** 2)) / abs(mean))
    return VerificationReport(
        f"fredholm[{n},{nu}]", complex(mean), None, cov, cov, tol,
        {"kind": "vertical-segment", "method": method, "parity": parity},
        {"lambdas": [complex(v) for v in lams], "z0": [complex(z) for z in z0s]},
    )


def wronskian_boundary(f: BHSolution, g: BHSolution, T: float) -> tuple[complex, complex]:
    """``f g' - f' g`` at ``-T`` and ``+T``."""
    out = []
    for x in (-T, T):
        out.append(complex(f(x) * g.derivative(x) - f.derivative(x) * g(x)))
    return out[0], out[1]


def all_single_orthogonality(p: PBHEParams, n: int, tol: float = 1e-7) -> list:
    """Every pair ``mu <= nu`` for the given parameters."""
    m = len(eigenvalues_K1(p, n))
    return [single_orthogonality(p, n, i, j, tol) for i in range(m) for j in range(i, m)]
