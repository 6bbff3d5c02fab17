"""Case 1 of Kovacic's algorithm for y'' = r y, plus the necessary-condition screen.

Square-root parts ``[sqrt r]`` are stored as :class:`PartialFraction` objects so
that ``omega`` and its integral stay in closed form: polynomial part plus
principal parts at the declared poles.
"""
from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from .errors import OddHighOrder, SingularSystem
from .poly_rational import (
    INFINITY,
    PartialFraction,
    Poly,
    RationalFn,
    laurent_at_infinity,
    laurent_at_pole,
    order_at_infinity,
    partial_fractions,
)

INTEGER_TOL = 1e-8
RATIONAL_MAX_DEN = 1000
RATIONAL_TOL = 1e-10


def is_rational(value, max_den: int = RATIONAL_MAX_DEN, tol: float = RATIONAL_TOL) -> bool:
    """Real and within ``tol`` of a fraction with denominator at most ``max_den``."""
    v = complex(value)
    if abs(v.imag) > tol:
        return False
    approx = Fraction(v.real).limit_denominator(max_den)
    return abs(float(approx) - v.real) <= tol


def necessary_conditions(r: RationalFn, max_den: int = RATIONAL_MAX_DEN) -> set:
    """Case labels in {1, 2, 3} not ruled out by the pole-order screen."""
    orders = [m for _, m in r.poles]
    o_inf = order_at_infinity(r)
    labels = set()
    if all(m % 2 == 0 or m == 1 for m in orders) and (o_inf % 2 == 0 or o_inf > 2):
        labels.add(1)
    if any((m % 2 == 1 and m > 2) or m == 2 for m in orders):
        labels.add(2)
    if all(m <= 2 for m in orders) and o_inf >= 2:
        pf = partial_fractions(r)
        ok = True
        gamma = 0j
        beta_sum = 0j
        for c, e, v in pf.terms:
            if e == -2:
                ok &= is_rational(cmath.sqrt(1 + 4 * v), max_den)
                gamma += v
            elif e == -1:
                beta_sum += v
                gamma += v * c
        scale = max([1.0] + [abs(v) for _, _, v in pf.terms])
        ok &= abs(beta_sum) <= RATIONAL_TOL * scale
        ok &= is_rational(cmath.sqrt(1 + 4 * gamma), max_den)
        if ok:
            labels.add(3)
    return labels


def _sqrt_series(g: np.ndarray, count: int) -> np.ndarray:
    """Power series ``s`` with ``s^2 = g`` and ``s[0]`` the principal root of ``g[0]``."""
    s = np.zeros(count, dtype=complex)
    s[0] = cmath.sqrt(g[0])
    for k in range(1, count):
        gk = g[k] if k < g.size else 0j
        s[k] = (gk - np.dot(s[1:k], s[k - 1:0:-1])) / (2 * s[0])
    return s


@dataclass(frozen=True)
class SqrtPart:
    location: object
    order: int
    bracket: PartialFraction
    alpha_plus: complex
    alpha_minus: complex

    def alpha(self, sign: int) -> complex:
        return self.alpha_plus if sign > 0 else self.alpha_minus

    @property
    def rational(self) -> RationalFn:
        return self.bracket.to_rational()


def sqrt_part(r: RationalFn, location) -> SqrtPart:
    """Step-1 data ``([sqrt r], alpha+, alpha-)`` at a declared pole or at infinity."""
    if location is INFINITY:
        return _sqrt_part_infinity(r)
    c, o = r.find_pole(location)
    zero = PartialFraction()
    if o == 1:
        return SqrtPart(c, 1, zero, 1 + 0j, 1 + 0j)
    if o == 2:
        b = laurent_at_pole(r, c, 0).coefficient(-2)
        root = cmath.sqrt(1 + 4 * b)
        return SqrtPart(c, 2, zero, (1 + root) / 2, (1 - root) / 2)
    if o % 2:
        raise OddHighOrder(f"pole at {c} has odd order {o}")
    v = o // 2
    data = laurent_at_pole(r, c, 0)
    g = np.array([data.coefficient(k - o) for k in range(v + 1)])
    s = _sqrt_series(g, v)
    terms = tuple((c, j - v, s[j]) for j in range(v - 1))       # exponents -v .. -2
    cross = sum(s[i] * s[v - 1 - i] for i in range(v) if i <= v - 2 and v - 1 - i <= v - 2)
    b = data.coefficient(-(v + 1)) - cross
    a = s[0]
    return SqrtPart(c, o, PartialFraction(Poly.zero(), terms), complex((b / a + v) / 2), complex((-b / a + v) / 2))


def _sqrt_part_infinity(r: RationalFn) -> SqrtPart:
    o = order_at_infinity(r)
    zero = PartialFraction()
    if o > 2:
        return SqrtPart(INFINITY, o, zero, 0j, 1 + 0j)
    if o == 2:
        b = laurent_at_infinity(r, 2).coefficient(-2)
        root = cmath.sqrt(1 + 4 * b)
        return SqrtPart(INFINITY, 2, zero, (1 + root) / 2, (1 - root) / 2)
    if o % 2:
        raise OddHighOrder(f"order {o} at infinity has no Case-1 branch")
    v = -o // 2
    data = laurent_at_infinity(r, v + 2)
    g = np.array([data.coefficient(2 * v - k) for k in range(v + 2)])
    s = _sqrt_series(g, v + 1)
    bracket = Poly([s[v - k] for k in range(v + 1)])   # sum_j s_j x^{v-j}
    b = data.coefficient(v - 1) - (bracket * bracket).array(v + 1)[v - 1] if v >= 1 else data.coefficient(-1)
    a = s[0]
    return SqrtPart(INFINITY, o, PartialFraction(bracket, ()), complex((b / a - v) / 2), complex((-b / a - v) / 2))


@dataclass(frozen=True)
class Case1Candidate:
    degree: int
    omega: PartialFraction
    signs: tuple            # ((location, sign), ...), finite poles first then infinity

    def sign_at(self, location) -> int:
        for loc, s in self.signs:
            if loc is location or (loc is not INFINITY and location is not INFINITY and loc == location):
                return s
        raise KeyError(location)


def degree_set(r: RationalFn, parts: list) -> list:
    """Candidates (m, omega) over all sign choices with m a non-negative integer."""
    finite = [p for p in parts if p.location is not INFINITY]
    inf = [p for p in parts if p.location is INFINITY]
    if len(inf) != 1 or {p.location for p in finite} != {c for c, _ in r.poles}:
        raise ValueError("square-root parts must cover every pole and infinity exactly once")
    inf = inf[0]
    finite = sorted(finite, key=lambda p: (p.location.real, p.location.imag))
    out = []
    for signs in itertools.product((1, -1), repeat=len(finite) + 1):
        s_inf = signs[-1]
        m = inf.alpha(s_inf) - sum(p.alpha(s) for p, s in zip(finite, signs))
        mi = round(complex(m).real)
        if abs(m - mi) > INTEGER_TOL or mi < 0:
            continue
        omega = inf.bracket * s_inf
        for p, s in zip(finite, signs):
            omega = omega + p.bracket * s + PartialFraction(Poly.zero(), ((p.location, -1, p.alpha(s)),))
        omega = omega.collect()
        cand = Case1Candidate(
            int(mi), omega, tuple((p.location, s) for p, s in zip(finite, signs)) + ((INFINITY, s_inf),)
        )
        if not any(_same_candidate(cand, o) for o in out):
            out.append(cand)
    return out


def _same_candidate(a: Case1Candidate, b: Case1Candidate, tol: float = 1e-12) -> bool:
    if a.degree != b.degree:
        return False
    diff = (a.omega + b.omega * -1).collect(tol)
    return diff.poly.trim(tol).norm() <= tol and not diff.terms


@dataclass
class Step3System:
    """Coefficient matrices of ``L(x^k)`` after clearing denominators."""

    columns: np.ndarray          # rows: powers of x, cols: k = 0..m
    scales: np.ndarray           # same shape, sums of absolute contributions
    clearing: dict


def _step3_system(r: RationalFn, omega: PartialFraction, m: int) -> Step3System:
    w_orders = omega.pole_orders()
    N = {}
    for c, o in r.poles:
        k = next((v for cc, v in w_orders.items() if abs(cc - c) <= 1e-8), 0)
        N[c] = max(2 * k, k + 1, o)
    Q = Poly.const(1.0)
    for c, e in N.items():
        Q = Q * Poly.power_of_linear(c, e)
    Q1 = {c: next((v for cc, v in w_orders.items() if abs(cc - c) <= 1e-8), 0) for c in N}
    Qw = omega.cleared(N)
    Qdw = omega.derive().cleared(N)
    Q1w = omega.cleared({c: Q1.get(c, 0) for c in N})
    rest = Poly.const(1.0)
    for c, e in N.items():
        rest = rest * Poly.power_of_linear(c, e - 2 * Q1.get(c, 0))
    Qw2 = Q1w * Q1w * rest
    rr = Poly.const(1.0)
    for c, e in N.items():
        rr = rr * Poly.power_of_linear(c, e - r.order_at(c))
    Qr = r.numerator * rr
    pieces_by_k = []
    for k in range(m + 1):
        xk = Poly.monomial(k)
        pieces = [
            Q * (k * (k - 1)) * Poly.monomial(max(k - 2, 0)) if k >= 2 else Poly.zero(),
            Qw * (2 * k) * Poly.monomial(k - 1) if k >= 1 else Poly.zero(),
            Qdw * xk,
            Qw2 * xk,
            -(Qr * xk),
        ]
        pieces_by_k.append(pieces)
    rows = max(max((len(p.coeffs) for p in pcs), default=0) for pcs in pieces_by_k)
    rows = max(rows, 1)
    cols = np.zeros((rows, m + 1), dtype=complex)
    scales = np.zeros((rows, m + 1))
    for k, pcs in enumerate(pieces_by_k):
        for p in pcs:
            a = p.array(rows)
            cols[:, k] += a
            scales[:, k] += np.abs(a)
    return Step3System(cols, scales, N)


@dataclass(frozen=True)
class LiouvillianSolution:
    """``y = P(x) exp(int omega)`` with ``int omega`` in closed form."""

    poly: Poly
    omega: PartialFraction
    degree: int
    signs: tuple = field(default=(), compare=False)

    @property
    def log_terms(self) -> list:
        """``(pole, exponent)``: ``exp(int omega)`` carries ``(x - pole)**exponent``."""
        return self.omega.log_terms()

    @property
    def exponent_poly(self) -> Poly:
        return self.omega.poly.antiderivative()

    def log_exp_integral(self, x):
        return self.omega.integral(x)

    def __call__(self, x):
        return self.poly(x) * np.exp(self.omega.integral(x))

    def derivative(self, x):
        return (self.poly.derive()(x) + self.poly(x) * self.omega(x)) * np.exp(self.omega.integral(x))

    def second_derivative(self, x):
        P, w = self.poly, self.omega
        inner = P.derive().derive()(x) + 2 * P.derive()(x) * w(x) + P(x) * (w.derive()(x) + w(x) ** 2)
        return inner * np.exp(w.integral(x))

    def residual(self, r: RationalFn, x):
        ypp = self.second_derivative(x)
        return np.abs(ypp - r(x) * self(x)) / (1 + np.abs(ypp))


def solve_step3(r: RationalFn, cand: Case1Candidate, tol: float = 1e-8) -> list:
    """Monic degree-m polynomials solving ``P'' + 2 omega P' + (omega' + omega^2 - r) P = 0``.

    Returns ``[]`` when the system is inconsistent, one solution when it is
    determined, and two spanning members when it has a one-parameter family.
    """
    m = cand.degree
    sysm = _step3_system(r, cand.omega, m)
    M, S = sysm.columns, sysm.scales
    rhs = -M[:, m]
    row_scale = S.sum(axis=1)
    keep = row_scale > 0
    if m == 0:
        if np.max(np.abs(M[:, 0])) > tol * np.max(S[:, 0]):
            return []
        return [LiouvillianSolution(Poly.const(1.0), cand.omega, 0, cand.signs)]
    A = M[keep, :m]
    b = rhs[keep]
    col_norm = np.linalg.norm(A, axis=0)
    col_norm[col_norm == 0] = 1.0
    # scale rows by their absolute contributions, not their (possibly cancelled) values
    row_norm = row_scale[keep]
    As = A / col_norm / row_norm[:, None]
    bs = b / row_norm
    U, sv, Vh = np.linalg.svd(As, full_matrices=True)
    rank_tol = max(As.shape) * np.finfo(float).eps * (sv[0] if sv.size else 0) * 1e3
    rank = int(np.sum(sv > max(rank_tol, 1e-10 * (sv[0] if sv.size else 0))))
    y = np.zeros(m, dtype=complex)
    if rank:
        y = Vh[:rank].conj().T @ ((U[:, :rank].conj().T @ bs) / sv[:rank])
    p = y / col_norm
    coeffs = np.concatenate([p, [1.0]])
    resid = M @ coeffs
    scale = S @ np.abs(coeffs)
    if np.max(np.abs(resid)) > tol * np.max(scale):
        return []
    null_dim = m - rank
    sol = LiouvillianSolution(Poly(coeffs), cand.omega, m, cand.signs)
    if null_dim == 0:
        return [sol]
    if null_dim == 1:
        v = Vh[rank].conj() / col_norm
        v = v / np.max(np.abs(v))
        other = np.concatenate([p + v, [1.0]])
        return [sol, LiouvillianSolution(Poly(other), cand.omega, m, cand.signs)]
    raise SingularSystem(f"Step-3 system for m = {m} has a {null_dim}-dimensional null space")


def case1_candidates(r: RationalFn):
    parts = [sqrt_part(r, c) for c, _ in r.poles] + [sqrt_part(r, INFINITY)]
    return parts, degree_set(r, parts)


def case1_solve(r: RationalFn) -> list:
    """Every Case-1 solution found across all candidates; ``[]`` when none exists."""
    if 1 not in necessary_conditions(r):
        return []
    _, cands = case1_candidates(r)
    out = []
    for cand in cands:
        out.extend(solve_step3(r, cand))
    return out


def step3_spectrum(r0: RationalFn, r1: RationalFn, cand: Case1Candidate, tol: float = 1e-10):
    """Values ``lam`` for which ``r0 + lam r1`` admits a Step-3 polynomial for ``cand``.

    ``omega`` must not depend on ``lam`` (true when ``r1`` does not touch the data
    Step 1 reads).  Rows vanishing in both pencils are dropped; the remaining
    pencil must be square.  Returns ``(eigenvalues, monic coefficient vectors)``.
    """
    m = cand.degree
    s0 = _step3_system(r0, cand.omega, m)
    # the r1 contribution is -Q r1 x^k; build it with the same clearing polynomial
    rr = Poly.const(1.0)
    for c, e in s0.clearing.items():
        order = next((mm for cc, mm in r1.poles if abs(cc - c) <= 1e-8), 0)
        rr = rr * Poly.power_of_linear(c, e - order)
    Qr1 = r1.numerator * rr
    rows = max(s0.columns.shape[0], (Qr1.shift(m)).degree + 1 if not Qr1.is_zero else 0)
    M0 = np.zeros((rows, m + 1), dtype=complex)
    S0 = np.zeros((rows, m + 1))
    M0[: s0.columns.shape[0]] = s0.columns
    S0[: s0.columns.shape[0]] = s0.scales
    M1 = np.zeros((rows, m + 1), dtype=complex)
    for k in range(m + 1):
        M1[:, k] = (Qr1.shift(k)).array(rows)
    # pencil: (M0 - lam M1) p = 0
    live = (np.abs(M0).max(axis=1) > tol * np.maximum(S0.max(axis=1), 1e-300)) | (np.abs(M1).max(axis=1) > 0)
    A, B = M0[live], M1[live]
    if A.shape[0] != A.shape[1]:
        raise SingularSystem(f"Step-3 pencil is {A.shape[0]}x{A.shape[1]}, not square")
    w, V = scipy.linalg.eig(A, B)
    finite = np.isfinite(w)
    w, V = w[finite], V[:, finite]
    V = V / V[-1]
    order = np.lexsort((w.imag, w.real))
    return w[order], V[:, order].T


def step1_table(parts) -> list:
    """Serializable summary of Step 1."""
    out = []
    for p in parts:
        out.append({
            "location": "oo" if p.location is INFINITY else complex(p.location),
            "order": p.order,
            "bracket_poly": list(p.bracket.poly.coeffs),
            "bracket_terms": [(complex(c), e, complex(v)) for c, e, v in p.bracket.terms],
            "alpha_plus": complex(p.alpha_plus),
            "alpha_minus": complex(p.alpha_minus),
        })
    return out
