"""Periodic biconfluent Heun equation f'' + (-e^{4z} + K3 e^{3z} + K2 e^{2z} + K1 e^z + K0) f = 0.

Closed-form solutions are ``P(e^z) exp(eps_inf e^{2z}/2 - eps_inf K3 e^z/2 + d z)``
with ``d = eps0 sqrt(-K0)``.  The admissible ``K1`` values are the roots of a
tridiagonal determinant; the polynomial coefficients come from a three-term
recurrence that terminates exactly at those roots.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .errors import ConditionNotMet, PochhammerPole, RepeatedRootOutsideCase2
from .poly_rational import Poly, RationalFn
from .special_fn import pochhammer

QUANT_TOL = 1e-8
DEGENERATE_K0 = -0.25


def _is_real(v, tol=1e-14) -> bool:
    return abs(complex(v).imag) <= tol * max(1.0, abs(complex(v)))


@dataclass(frozen=True)
class PBHEParams:
    K0: complex
    K1: complex = 0.0
    K2: complex = 0.0
    K3: complex = 0.0
    eps0: int = 1
    eps_inf: int = -1

    def __post_init__(self):
        if self.eps0 not in (1, -1) or self.eps_inf not in (1, -1):
            raise ValueError("sign choices must be +1 or -1")

    @property
    def sqrtK0(self) -> complex:
        """Principal square root of ``-K0``."""
        return cmath.sqrt(-complex(self.K0))

    @property
    def d(self) -> complex:
        return self.eps0 * self.sqrtK0

    @property
    def real_path(self) -> bool:
        """K0 < 0 and K2, K3 real, so that sqrt(-K0) > 0."""
        return (
            _is_real(self.K0) and complex(self.K0).real < 0
            and _is_real(self.K2) and _is_real(self.K3)
        )

    @property
    def case2(self) -> bool:
        """Hypotheses under which the K1 roots are real and distinct."""
        return self.real_path and self.eps_inf == -1 and (1 + 2 * self.d).real > 0

    @property
    def degenerate(self) -> bool:
        return abs(complex(self.K0) - DEGENERATE_K0) < 1e-12

    def with_K1(self, K1) -> "PBHEParams":
        return replace(self, K1=K1)

    def potential(self, z):
        """The coefficient ``-e^{4z} + K3 e^{3z} + K2 e^{2z} + K1 e^z + K0``."""
        x = np.exp(z)
        return (((-x + self.K3) * x + self.K2) * x + self.K1) * x + self.K0

    def as_dict(self) -> dict:
        return {
            "K0": complex(self.K0), "K1": complex(self.K1), "K2": complex(self.K2),
            "K3": complex(self.K3), "eps0": self.eps0, "eps_inf": self.eps_inf,
        }


@dataclass(frozen=True)
class GeneralizedBessel:
    """``x^2 Psi'' + x Psi' + (sum coeffs[k] x^k) Psi = 0`` obtained from ``x = e^{z/h}``."""

    coeffs: dict
    h: int = 1

    @property
    def substitution(self) -> str:
        return "x = exp(z)" if self.h == 1 else f"x = exp(z/{self.h})"

    def potential_poly(self) -> Poly:
        lo = min(self.coeffs, default=0)
        if lo < 0:
            raise ValueError("negative powers need a Laurent representation")
        hi = max(self.coeffs, default=0)
        return Poly([self.coeffs.get(k, 0) for k in range(hi + 1)])


def bessel_transform(B: dict, h: int | None = None) -> GeneralizedBessel:
    """Map ``f'' + B(e^z) f = 0`` (``B`` as power -> coefficient) to Bessel form.

    With ``x = e^{z/h}`` the power ``e^{l z}`` becomes ``h^2 x^{h l}``;
    ``h`` defaults to 2 when some power is odd.
    """
    if h is None:
        h = 2 if any(k % 2 for k in B) else 1
    return GeneralizedBessel({h * k: h * h * complex(v) for k, v in B.items()}, h)


def to_generalized_bessel(p: PBHEParams) -> GeneralizedBessel:
    return GeneralizedBessel(
        {4: -1.0 + 0j, 3: complex(p.K3), 2: complex(p.K2), 1: complex(p.K1), 0: complex(p.K0)}, 1
    )


def to_normal_form(p: PBHEParams) -> RationalFn:
    """``r = x^2 - K3 x - K2 - K1/x - (1/4 + K0)/x^2`` with the pole at 0 reduced."""
    num = Poly([-(0.25 + p.K0), -p.K1, -p.K2, -p.K3, 1.0])
    return RationalFn.reduced(num, {0j: 2})


def quantization_value(p: PBHEParams) -> complex:
    """``n`` solved from the integrality condition, before rounding."""
    lhs = p.K3**2 / 4 + p.K2 + 2 * p.eps0 * p.eps_inf * p.sqrtK0
    return -p.eps_inf * lhs / 2 - 1


def quantization_n(p: PBHEParams, tol: float = QUANT_TOL):
    """Non-negative integer ``n`` with ``K3^2/4 + K2 + 2 eps0 eps_inf sqrt(-K0) = -2 eps_inf (n+1)``."""
    v = complex(quantization_value(p))
    n = round(v.real)
    if abs(v - n) <= tol and n >= 0:
        return int(n)
    return None


@dataclass(frozen=True)
class KConstants:
    intercept: complex
    k2: complex

    def k1(self, K1) -> complex:
        return K1 + self.intercept


def k_constants(p: PBHEParams) -> KConstants:
    e = p.eps_inf
    return KConstants(
        intercept=-(e / 2) * (1 + 2 * p.d) * p.K3,
        k2=2 * e * (1 + p.d) + p.K2 + p.K3**2 / 4,
    )


def subdiagonal(p: PBHEParams, n: int) -> np.ndarray:
    """Entries ``j (j + 2d)(k2 + 2 eps_inf (j-1))`` for ``j = 1..n``."""
    k2 = k_constants(p).k2
    j = np.arange(1, n + 1)
    return j * (j + 2 * p.d) * (k2 + 2 * p.eps_inf * (j - 1))


def shift_matrix(p: PBHEParams, n: int) -> np.ndarray:
    """``T`` with ``det(k1 I + T) = D_{n+1}``."""
    T = np.zeros((n + 1, n + 1), dtype=complex)
    j = np.arange(n + 1)
    T[j, j] = -p.eps_inf * j * p.K3
    T[j[:-1], j[1:]] = 1.0
    T[j[1:], j[:-1]] = subdiagonal(p, n)
    return T


def recurrence_A(p: PBHEParams, n: int, K1_value) -> np.ndarray:
    """``A_0 .. A_{n+1}`` from the three-term recurrence."""
    kc = k_constants(p)
    k1, k2 = kc.k1(K1_value), kc.k2
    e, d = p.eps_inf, p.d
    A = np.zeros(n + 2, dtype=complex)
    A[0] = 1.0
    if n + 1 >= 1:
        A[1] = -k1
    for m in range(n):
        A[m + 2] = -(k1 - e * (m + 1) * p.K3) * A[m + 1] - (m + 1) * (m + 1 + 2 * d) * (k2 + 2 * e * m) * A[m]
    return A


def poly_from_A(p: PBHEParams, A, n: int) -> Poly:
    """``P(x) = sum_{m<=n} A_m x^m / ((1+2d)_m m!)``."""
    mu = 1 + 2 * p.d
    coeffs = []
    for m in range(n + 1):
        den = pochhammer(mu, m) * math.factorial(m)
        if abs(den) < 1e-13 * math.factorial(m) * max(1.0, abs(mu) + m) ** m:
            raise PochhammerPole(f"(1 + 2d)_{m} vanishes for 1 + 2d = {mu}")
        coeffs.append(A[m] / den)
    return Poly(coeffs)


def check_pochhammer(p: PBHEParams, n: int) -> None:
    mu = 1 + 2 * p.d
    for k in range(n):
        if abs(mu + k) < 1e-12:
            raise PochhammerPole(f"1 + 2d = {mu} is a non-positive integer within degree {n}")


@dataclass(frozen=True)
class EigenEntry:
    K1: complex
    k1: complex
    A: np.ndarray = field(repr=False)
    P: Poly = field(repr=False)
    Y: Poly = field(repr=False)
    multiplicity: int = 1


@dataclass(frozen=True)
class EigenSet:
    n: int
    k2: complex
    entries: tuple
    params: PBHEParams = field(repr=False)

    @property
    def K1_values(self) -> np.ndarray:
        return np.array([e.K1 for e in self.entries])

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def eigenvalues_K1(p: PBHEParams, n: int | None = None, cap: int = 64,
                   termination_tol: float = 1e-8) -> EigenSet:
    """All K1 for which a degree-n polynomial solution exists, sorted by (Re, Im)."""
    qn = quantization_n(p)
    if n is None:
        n = qn
    if n is None or qn != n:
        raise ConditionNotMet(
            f"quantization fails: n = {complex(quantization_value(p))} is not the requested degree"
        )
    if n + 1 > cap:
        raise ValueError(f"matrix size {n + 1} exceeds cap {cap}")
    kc = k_constants(p)
    if p.case2:
        # similar to a symmetric tridiagonal: the off-diagonal products are positive
        s = subdiagonal(p, n).real
        diag = (p.eps_inf * np.arange(n + 1) * complex(p.K3).real)
        k1 = scipy.linalg.eigh_tridiagonal(diag, np.sqrt(s), eigvals_only=True).astype(complex)
    else:
        k1 = np.linalg.eigvals(-shift_matrix(p, n))
    K1 = k1 - kc.intercept
    if p.case2:
        K1 = K1.real.astype(complex)
    K1 = np.array(sorted(K1, key=lambda v: (v.real, v.imag)))

    scale = max(1.0, float(np.max(np.abs(K1))))
    groups: list[list] = []
    for v in K1:
        for g in groups:
            if abs(g[0] - v) <= 1e-9 * scale:
                g.append(v)
                break
        else:
            groups.append([v])
    if p.case2 and len(groups) != len(K1):
        raise RepeatedRootOutsideCase2(
            f"coincident K1 roots {K1} although the real distinct-root hypotheses hold"
        )

    entries = []
    for g in groups:
        v = complex(np.mean(g))
        A = recurrence_A(p, n, v)
        if abs(A[-1]) >= termination_tol * np.max(np.abs(A)):
            raise ValueError(f"recurrence does not terminate at K1 = {v}: |A_n+1| = {abs(A[-1]):.3e}")
        P = _safe_poly(p, A, n)
        entries.append(EigenEntry(v, kc.k1(v), A, P, P.reverse(n) if P is not None else None, len(g)))
    return EigenSet(n, kc.k2, tuple(entries), p)


def _safe_poly(p, A, n):
    try:
        return poly_from_A(p, A, n)
    except PochhammerPole:
        return None


def _log_poly_at_exp(poly: Poly, z, degree: int):
    """``log poly(e^z)``, using the reversed polynomial in ``e^{-z}`` when Re z > 0."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.log(poly(np.exp(np.minimum(z.real, 0) + 1j * z.imag)))
        hi = degree * z + np.log(poly.reverse(degree)(np.exp(-z)))
    return np.where(z.real > 0, hi, lo)


@dataclass(frozen=True)
class BHSolution:
    """Closed-form solution ``P(e^z) exp(E(z))``; ``Y`` is ``P`` reversed to degree ``n``."""

    n: int
    nu: int
    P: Poly
    Y: Poly
    params: PBHEParams

    @property
    def expo_quadratic(self) -> complex:
        return self.params.eps_inf / 2

    @property
    def expo_linear(self) -> complex:
        return -self.params.eps_inf * self.params.K3 / 2

    @property
    def expo_z(self) -> complex:
        """Slope of ``z`` in the ``e^{nz} Y(e^{-z})`` form."""
        return self.n + self.params.d

    @property
    def K1(self) -> complex:
        return self.params.K1

    def exponent(self, z):
        x = np.exp(z)
        return self.expo_quadratic * x * x + self.expo_linear * x + self.params.d * z

    def _exp_polys(self):
        """Polynomials in ``x`` multiplying ``e^{E}`` in f, f' and f''."""
        e, K3, d = self.params.eps_inf, self.params.K3, self.params.d
        Ep = Poly([d, -e * K3 / 2, e])           # x dE/dx as a function of x
        Epp = Poly([0, -e * K3 / 2, 2 * e])      # second z-derivative of E
        xP1 = Poly([k * c for k, c in enumerate(self.P.coeffs)])   # x P'(x)
        x2P2 = Poly([k * (k - 1) * c for k, c in enumerate(self.P.coeffs)])
        first = xP1 + self.P * Ep
        second = x2P2 + xP1 + xP1 * Ep * 2 + self.P * (Epp + Ep * Ep)
        return first, second

    def log_eval(self, z):
        return self.exponent(z) + _log_poly_at_exp(self.P, z, self.n)

    def __call__(self, z):
        return np.exp(self.log_eval(z))

    def derivative(self, z):
        first, _ = self._exp_polys()
        return np.exp(self.exponent(z) + _log_poly_at_exp(first, z, self.n + 2))

    def second_derivative(self, z):
        _, second = self._exp_polys()
        return np.exp(self.exponent(z) + _log_poly_at_exp(second, z, self.n + 4))

    def eval_Y_form(self, z):
        """``Y(e^{-z}) exp(e^{2z} eps/2 - eps K3 e^z/2 + (n + d) z)``."""
        x = np.exp(z)
        return self.Y(1 / x) * np.exp(self.expo_quadratic * x * x + self.expo_linear * x + self.expo_z * z)

    def residual(self, z):
        """``|f'' + V f| / (1 + |f''|)`` pointwise."""
        fpp = self.second_derivative(z)
        return np.abs(fpp + self.params.potential(z) * self(z)) / (1 + np.abs(fpp))


def eval_solution(s: BHSolution, z):
    return s(z)


def eval_derivative(s: BHSolution, z):
    """Product rule on the ``e^{nz} Y(e^{-z})`` form."""
    z = np.asarray(z, dtype=complex)
    w = np.exp(-z)
    x = 1 / w
    p = s.params
    Yw = s.Y(w)
    dY = s.Y.derive()(w)
    Ez = p.eps_inf * x * x - p.eps_inf * p.K3 / 2 * x + s.expo_z
    E = s.expo_quadratic * x * x + s.expo_linear * x + s.expo_z * z
    out = np.exp(E) * (Ez * Yw - w * dY)
    return out[()] if out.ndim == 0 else out


def build_solution(p: PBHEParams, n: int, nu: int, eigen: EigenSet | None = None) -> BHSolution:
    if eigen is None:
        eigen = eigenvalues_K1(p, n)
    if not 0 <= nu < len(eigen.entries):
        raise IndexError(f"nu = {nu} outside 0..{len(eigen.entries) - 1}")
    check_pochhammer(p, n)
    entry = eigen.entries[nu]
    P = poly_from_A(p, entry.A, n)
    s = BHSolution(n, nu, P, P.reverse(n), p.with_K1(entry.K1))
    z = 0.3 + 0.2j
    a, b = s(z), s.eval_Y_form(z)
    if abs(a - b) > 1e-10 * max(abs(a), 1e-300):
        raise AssertionError("P-form and Y-form of the solution disagree")
    return s


def build_solutions(p: PBHEParams, n: int | None = None) -> list[BHSolution]:
    eigen = eigenvalues_K1(p, n)
    return [build_solution(p, eigen.n, nu, eigen) for nu in range(len(eigen.entries))]


def _hermite_type_poly(p: PBHEParams, n: int) -> Poly:
    """Monic P with P'' + 2e(x - K3/2)P' + (e + K2 + K3^2/4)P = 0, by back substitution."""
    e = p.eps_inf
    c0 = e + p.K2 + p.K3**2 / 4
    coef = np.zeros(n + 3, dtype=complex)
    coef[n] = 1.0
    for k in range(n - 1, -1, -1):
        diag = 2 * e * k + c0
        if abs(diag) < 1e-12:
            raise ConditionNotMet("Hermite-type system is singular")
        coef[k] = -((k + 2) * (k + 1) * coef[k + 2] - e * p.K3 * (k + 1) * coef[k + 1]) / diag
    return Poly(coef[: n + 1])


def degenerate_solutions(p: PBHEParams, k1_tol: float = 1e-12) -> list[BHSolution]:
    """Solutions for ``K0 = -1/4``.

    ``K1 = 0``: needs ``-eps_inf (K2 + K3^2/4) = 2n + 1``; exponent ``d = -1/2``.
    ``K1 != 0``: needs ``-eps_inf (K2 + K3^2/4) = 2n + 3``; exponent ``d = +1/2`` and
    the admissible nonzero K1 values come from the same tridiagonal problem.
    """
    if not p.degenerate:
        raise ValueError("degenerate branches need K0 = -1/4")
    q = complex(-p.eps_inf * (p.K2 + p.K3**2 / 4))
    qi = round(q.real)
    odd = abs(q - qi) <= QUANT_TOL and qi % 2 == 1
    if abs(p.K1) <= k1_tol:
        if not odd or qi < 1:
            raise ConditionNotMet(f"-eps_inf (K2 + K3^2/4) = {q} is not 2n + 1 with n >= 0")
        n = (qi - 1) // 2
        pp = replace(p, K0=DEGENERATE_K0, K1=0.0, eps0=-1)
        P = _hermite_type_poly(pp, n)
        return [BHSolution(n, 0, P, P.reverse(n), pp)]
    if not odd or qi < 3:
        raise ConditionNotMet(f"-eps_inf (K2 + K3^2/4) = {q} is not 2n + 3 with n >= 0")
    n = (qi - 3) // 2
    pp = replace(p, K0=DEGENERATE_K0, eps0=1)
    eigen = eigenvalues_K1(pp, n)
    out = []
    for nu, entry in enumerate(eigen.entries):
        if abs(entry.K1) <= 1e-10 * max(1.0, float(np.max(np.abs(eigen.K1_values)))):
            continue
        out.append(build_solution(pp, n, nu, eigen))
    if not out:
        raise ConditionNotMet("no nonzero K1 in the degenerate spectrum")
    return out


def trial_function(p: PBHEParams, n: int, K1) -> BHSolution:
    """``P(e^z) exp(E(z))`` with P of degree n+1 from the recurrence at an arbitrary K1.

    Away from the eigenvalues ``A_{n+1}`` does not vanish, so this is not a
    solution; it serves as a control input for the integral checks.
    """
    check_pochhammer(p, n + 1)
    A = recurrence_A(p, n + 1, K1)
    P = poly_from_A(p, A, n + 1)
    return BHSolution(n + 1, -1, P, P.reverse(n + 1), p.with_K1(K1))
