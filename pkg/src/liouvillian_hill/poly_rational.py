"""Complex polynomials and rational functions with declared pole factorizations.

Rational functions are kept as ``numerator / prod (x - c)**m`` with the poles
supplied by the caller; nothing here factors a denominator.  Laurent data at a
pole comes from Taylor-shifting numerator and cofactor (repeated synthetic
division) and dividing the two series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InconsistentFactorization, NotAPole

NEG_INF = -math.inf
POLE_SEPARATION = 1e-8


class _Infinity:
    """The point at infinity of the Riemann sphere."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "oo"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


def _as_complex_tuple(values) -> tuple:
    return tuple(complex(v) for v in values)


@dataclass(frozen=True)
class Poly:
    """Dense polynomial, ``coeffs[k]`` multiplies ``x**k``."""

    coeffs: tuple = ()

    def __post_init__(self):
        c = list(_as_complex_tuple(self.coeffs))
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def zero(cls) -> "Poly":
        return cls(())

    @classmethod
    def const(cls, value) -> "Poly":
        return cls((value,))

    @classmethod
    def monomial(cls, k: int, coeff=1.0) -> "Poly":
        return cls((0,) * k + (coeff,))

    @classmethod
    def x(cls) -> "Poly":
        return cls.monomial(1)

    @classmethod
    def from_roots(cls, roots: Iterable[complex]) -> "Poly":
        p = cls.const(1.0)
        for r in roots:
            p = p * cls((-complex(r), 1.0))
        return p

    @classmethod
    def power_of_linear(cls, c: complex, m: int) -> "Poly":
        """``(x - c)**m``."""
        return cls.from_roots([c] * m)

    @property
    def degree(self):
        """Degree, or ``-inf`` for the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> complex:
        return self.coeffs[-1] if self.coeffs else 0j

    def array(self, length: int | None = None) -> np.ndarray:
        a = np.array(self.coeffs, dtype=complex)
        if length is not None:
            out = np.zeros(length, dtype=complex)
            out[: min(length, a.size)] = a[:length]
            return out
        return a

    def norm(self) -> float:
        return float(np.sum(np.abs(self.array()))) if self.coeffs else 0.0

    def __call__(self, x):
        """Horner evaluation; works on scalars and numpy arrays."""
        if not self.coeffs:
            return np.zeros_like(np.asarray(x, dtype=complex)) if np.ndim(x) else 0j
        acc = self.coeffs[-1]
        if np.ndim(x):
            x = np.asarray(x, dtype=complex)
            acc = np.full(x.shape, acc, dtype=complex)
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def abs_bound(self, x) -> float:
        """``sum |a_k| |x|**k``, the natural scale for a rounding test at ``x``."""
        ax = abs(complex(x))
        return float(sum(abs(c) * ax**k for k, c in enumerate(self.coeffs)))

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(self.array(n) + other.array(n))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-self.array())

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return Poly.const(other) - self

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.is_zero or other.is_zero:
                return Poly.zero()
            return Poly(np.convolve(self.array(), other.array()))
        return Poly(self.array() * complex(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Poly(self.array() / complex(scalar))

    def __pow__(self, k: int):
        out = Poly.const(1.0)
        for _ in range(k):
            out = out * self
        return out

    def shift(self, k: int) -> "Poly":
        """Multiply by ``x**k``."""
        if self.is_zero:
            return self
        return Poly((0,) * k + self.coeffs)

    def derive(self) -> "Poly":
        return Poly([k * c for k, c in enumerate(self.coeffs)][1:])

    def antiderivative(self) -> "Poly":
        if self.is_zero:
            return self
        return Poly((0,) + tuple(c / (k + 1) for k, c in enumerate(self.coeffs)))

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dv = other.coeffs
        if len(rem) < len(dv):
            return Poly.zero(), self
        quot = [0j] * (len(rem) - len(dv) + 1)
        for k in range(len(quot) - 1, -1, -1):
            q = rem[k + len(dv) - 1] / dv[-1]
            quot[k] = q
            for j, d in enumerate(dv):
                rem[k + j] -= q * d
        return Poly(quot), Poly(rem[: len(dv) - 1])

    def synthetic_division(self, c: complex) -> tuple["Poly", complex]:
        """Divide by ``(x - c)``; returns quotient and remainder ``p(c)``."""
        if self.is_zero:
            return self, 0j
        out = [0j] * (len(self.coeffs) - 1)
        acc = 0j
        for k in range(len(self.coeffs) - 1, -1, -1):
            acc = acc * c + self.coeffs[k]
            if k:
                out[k - 1] = acc
        return Poly(out), acc

    def taylor(self, c: complex, count: int | None = None) -> np.ndarray:
        """Coefficients of ``p`` expanded in powers of ``(x - c)``."""
        n = len(self.coeffs) if count is None else count
        out = np.zeros(max(n, 0), dtype=complex)
        q = self
        for k in range(n):
            if q.is_zero:
                break
            q, out[k] = q.synthetic_division(c)
        return out

    def reverse(self, degree: int | None = None) -> "Poly":
        """``x**degree * p(1/x)``."""
        d = self.degree if degree is None else degree
        if self.is_zero:
            return self
        return Poly(self.array(d + 1)[::-1])

    def trim(self, rtol: float = 1e-12) -> "Poly":
        """Drop trailing coefficients below ``rtol`` times the largest one."""
        if self.is_zero:
            return self
        a = self.array()
        cut = rtol * np.max(np.abs(a))
        c = list(a)
        while c and abs(c[-1]) <= cut:
            c.pop()
        return Poly(c)

    def __repr__(self):
        return f"Poly({list(self.coeffs)})"


def poly_arith(a: Poly, b=None, kind: str = "add"):
    """Dispatch helper: ``kind`` in add, sub, mul, derive, eval."""
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "derive":
        return a.derive()
    if kind in ("eval", "eval-at-point"):
        return a(b)
    raise ValueError(f"unknown polynomial operation {kind!r}")


def _merge_poles(poles) -> tuple:
    out = []
    for c, m in poles:
        c = complex(c)
        m = int(m)
        if m < 1:
            raise ValueError(f"pole multiplicity must be positive, got {m} at {c}")
        out.append((c, m))
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            if abs(out[i][0] - out[j][0]) <= POLE_SEPARATION:
                raise ValueError(
                    f"poles {out[i][0]} and {out[j][0]} closer than {POLE_SEPARATION}"
                )
    return tuple(out)


@dataclass(frozen=True)
class RationalFn:
    """``numerator / prod (x - c)**m`` over the declared ``poles``.

    The denominator is always monic; :meth:`from_factored` folds a user
    supplied leading constant into the numerator after checking it.
    """

    numerator: Poly
    poles: tuple = ()
    zero_tol: float = field(default=1e-12, compare=False)

    def __post_init__(self):
        if not isinstance(self.numerator, Poly):
            object.__setattr__(self, "numerator", Poly(self.numerator))
        object.__setattr__(self, "poles", _merge_poles(self.poles))
        if self.numerator.is_zero and self.poles:
            raise InconsistentFactorization("zero numerator with declared poles")
        for c, _ in self.poles:
            if abs(self.numerator(c)) <= self.zero_tol * max(self.numerator.abs_bound(c), 1e-300):
                raise InconsistentFactorization(
                    f"numerator vanishes at declared pole {c}; cancel the common factor"
                )

    @classmethod
    def polynomial(cls, p) -> "RationalFn":
        return cls(p if isinstance(p, Poly) else Poly(p), ())

    @classmethod
    def from_factored(cls, numerator: Poly, denominator: Poly, poles, rtol: float = 1e-10):
        """Build from an explicit denominator whose root structure is ``poles``."""
        poles = _merge_poles(poles)
        monic = Poly.const(1.0)
        for c, m in poles:
            monic = monic * Poly.power_of_linear(c, m)
        if denominator.degree != monic.degree:
            raise InconsistentFactorization(
                f"denominator degree {denominator.degree} != declared {monic.degree}"
            )
        lead = denominator.lead
        diff = (denominator - monic * lead).norm()
        if diff > rtol * denominator.norm():
            raise InconsistentFactorization(
                f"denominator differs from declared factorization by {diff:.3e}"
            )
        return cls(numerator / lead, poles)

    @classmethod
    def reduced(cls, numerator: Poly, pole_orders: dict, zero_tol: float = 1e-12):
        """Construct after cancelling factors ``(x - c)`` the numerator shares."""
        orders = {complex(c): int(m) for c, m in pole_orders.items() if m > 0}
        num = numerator
        for c in list(orders):
            while orders[c] > 0 and not num.is_zero:
                q, rem = num.synthetic_division(c)
                if abs(rem) > zero_tol * max(num.abs_bound(c), 1e-300):
                    break
                num = q
                orders[c] -= 1
        if num.is_zero:
            return cls(Poly.zero(), ())
        return cls(num, tuple((c, m) for c, m in orders.items() if m > 0), zero_tol)

    @property
    def denominator(self) -> Poly:
        d = Poly.const(1.0)
        for c, m in self.poles:
            d = d * Poly.power_of_linear(c, m)
        return d

    @property
    def pole_orders(self) -> dict:
        return dict(self.poles)

    def find_pole(self, c, tol: float = POLE_SEPARATION):
        for p, m in self.poles:
            if abs(p - complex(c)) <= tol:
                return p, m
        raise NotAPole(f"{c} is not a declared pole")

    def __call__(self, x):
        # factored denominator: the expanded one cancels badly near a pole
        den = 1.0
        for c, m in self.poles:
            den = den * (np.asarray(x) - c) ** m
        return self.numerator(x) / den

    def order_at(self, c) -> int:
        return self.find_pole(c)[1]

    def cofactor(self, c) -> Poly:
        """Denominator with the factor at ``c`` removed."""
        c0, _ = self.find_pole(c)
        d = Poly.const(1.0)
        for p, m in self.poles:
            if p != c0:
                d = d * Poly.power_of_linear(p, m)
        return d

    def _combined(self, other: "RationalFn", sign: float) -> "RationalFn":
        orders = dict(self.poles)
        for c, m in other.poles:
            for c0 in orders:
                if abs(c0 - c) <= POLE_SEPARATION:
                    orders[c0] = max(orders[c0], m)
                    break
            else:
                orders[c] = m

        def lift(r):
            num = r.numerator
            own = {}
            for c, m in r.poles:
                own[c] = m
            for c0, m0 in orders.items():
                m = next((mm for cc, mm in own.items() if abs(cc - c0) <= POLE_SEPARATION), 0)
                num = num * Poly.power_of_linear(c0, m0 - m)
            return num

        return RationalFn.reduced(lift(self) + lift(other) * sign, orders, self.zero_tol)

    def __add__(self, other):
        if not isinstance(other, RationalFn):
            other = RationalFn.polynomial(other if isinstance(other, Poly) else Poly.const(other))
        return self._combined(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, RationalFn):
            other = RationalFn.polynomial(other if isinstance(other, Poly) else Poly.const(other))
        return self._combined(other, -1.0)

    def __neg__(self):
        return RationalFn(-self.numerator, self.poles, self.zero_tol)

    def __mul__(self, other):
        if isinstance(other, RationalFn):
            orders = dict(self.poles)
            for c, m in other.poles:
                for c0 in orders:
                    if abs(c0 - c) <= POLE_SEPARATION:
                        orders[c0] += m
                        break
                else:
                    orders[c] = m
            return RationalFn.reduced(self.numerator * other.numerator, orders, self.zero_tol)
        if complex(other) == 0:
            return RationalFn(Poly.zero(), ())
        return RationalFn(self.numerator * other, self.poles, self.zero_tol)

    __rmul__ = __mul__

    def __repr__(self):
        return f"RationalFn({self.numerator!r}, poles={list(self.poles)})"


def order_at_infinity(r: RationalFn):
    """``deg(denominator) - deg(numerator)``; ``+inf`` for ``r = 0``."""
    if r.numerator.is_zero:
        return math.inf
    return sum(m for _, m in r.poles) - r.numerator.degree


@dataclass(frozen=True)
class LaurentData:
    """Truncated Laurent expansion ``sum coefficients[k] * t**k`` around ``location``.

    ``t = x - c`` at a finite point and ``t = x`` (descending powers) at infinity.
    ``order`` is the pole order: multiplicity at a finite pole,
    ``deg(den) - deg(num)`` at infinity.
    """

    location: object
    order: int
    coefficients: dict

    def coefficient(self, k: int) -> complex:
        return self.coefficients.get(k, 0j)

    def nonzero(self, tol: float = 1e-12) -> dict:
        scale = max((abs(v) for v in self.coefficients.values()), default=0.0)
        return {k: v for k, v in self.coefficients.items() if abs(v) > tol * max(scale, 1e-300)}

    def principal_part(self) -> dict:
        if self.location is INFINITY:
            return {k: v for k, v in self.coefficients.items() if k >= 0}
        return {k: v for k, v in self.coefficients.items() if k < 0}

    def __call__(self, x):
        t = x if self.location is INFINITY else x - self.location
        return sum(v * t**k for k, v in self.coefficients.items())


def _series_divide(num: np.ndarray, den: np.ndarray, count: int) -> np.ndarray:
    out = np.zeros(count, dtype=complex)
    num = np.concatenate([num, np.zeros(max(0, count - num.size), dtype=complex)])
    den = np.concatenate([den, np.zeros(max(0, count - den.size), dtype=complex)])
    for k in range(count):
        out[k] = (num[k] - np.dot(out[:k], den[k:0:-1])) / den[0]
    return out


def laurent_at_pole(r: RationalFn, c, depth: int = 4) -> LaurentData:
    """Laurent coefficients of ``r`` at a declared pole, exponents ``-m .. depth``."""
    c0, m = r.find_pole(c)
    count = m + depth + 1
    g = _series_divide(r.numerator.taylor(c0, count), r.cofactor(c0).taylor(c0, count), count)
    return LaurentData(c0, m, {k - m: complex(g[k]) for k in range(count)})


def laurent_at_infinity(r: RationalFn, depth: int = 4) -> LaurentData:
    """Expansion of ``r`` in descending powers of ``x`` down to ``x**-depth``."""
    if r.numerator.is_zero:
        return LaurentData(INFINITY, math.inf, {})
    den = r.denominator
    top = r.numerator.degree - den.degree
    count = top + depth + 1
    if count <= 0:
        return LaurentData(INFINITY, -top, {})
    g = _series_divide(r.numerator.array()[::-1], den.array()[::-1], count)
    return LaurentData(INFINITY, -top, {top - j: complex(g[j]) for j in range(count)})


@dataclass(frozen=True)
class PartialFraction:
    """``poly(x) + sum coeff * (x - pole)**exponent`` with negative exponents."""

    poly: Poly = field(default_factory=Poly.zero)
    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple((complex(c), int(e), complex(v)) for c, e, v in self.terms)
        )

    def __call__(self, x):
        out = self.poly(x)
        for c, e, v in self.terms:
            out = out + v * (x - c) ** e
        return out

    def derive(self) -> "PartialFraction":
        return PartialFraction(
            self.poly.derive(), tuple((c, e - 1, v * e) for c, e, v in self.terms)
        )

    def __add__(self, other: "PartialFraction") -> "PartialFraction":
        return PartialFraction(self.poly + other.poly, self.terms + other.terms).collect()

    def __mul__(self, scalar) -> "PartialFraction":
        return PartialFraction(
            self.poly * scalar, tuple((c, e, v * scalar) for c, e, v in self.terms)
        )

    __rmul__ = __mul__

    def collect(self, tol: float = 0.0) -> "PartialFraction":
        """Merge terms with the same pole and exponent; drop ones below ``tol``."""
        acc: dict = {}
        order: list = []
        for c, e, v in self.terms:
            key = next((k for k in order if k[1] == e and abs(k[0] - c) <= POLE_SEPARATION), None)
            if key is None:
                key = (c, e)
                order.append(key)
                acc[key] = 0j
            acc[key] += v
        return PartialFraction(
            self.poly, tuple((c, e, acc[(c, e)]) for c, e in order if abs(acc[(c, e)]) > tol)
        )

    def pole_orders(self) -> dict:
        out: dict = {}
        for c, e, v in self.terms:
            if v == 0:
                continue
            key = next((k for k in out if abs(k - c) <= POLE_SEPARATION), c)
            out[key] = max(out.get(key, 0), -e)
        return out

    def cleared(self, orders: dict) -> Poly:
        """The polynomial ``prod (x - c)**orders[c] * self``; orders must dominate."""
        full = Poly.const(1.0)
        for c, m in orders.items():
            full = full * Poly.power_of_linear(c, m)
        out = self.poly * full
        for c, e, v in self.terms:
            if v == 0:
                continue
            key = next(k for k in orders if abs(k - c) <= POLE_SEPARATION)
            if orders[key] + e < 0:
                raise ValueError("clearing orders do not dominate the partial fraction")
            piece = Poly.const(v)
            for c2, m2 in orders.items():
                piece = piece * Poly.power_of_linear(c2, m2 + e if c2 == key else m2)
            out = out + piece
        return out

    def to_rational(self) -> RationalFn:
        orders = self.pole_orders()
        return RationalFn.reduced(self.cleared(orders), orders)

    def integral(self, x):
        """Closed-form antiderivative: polynomial part, logarithms, rational terms."""
        out = self.poly.antiderivative()(x)
        for c, e, v in self.terms:
            if e == -1:
                out = out + v * np.log(x - c)
            else:
                out = out + v * (x - c) ** (e + 1) / (e + 1)
        return out

    def log_terms(self) -> list:
        """``(pole, exponent)`` pairs of the logarithmic part of the integral."""
        return [(c, v) for c, e, v in self.terms if e == -1]


def partial_fractions(r: RationalFn) -> PartialFraction:
    """Polynomial part plus principal parts at every declared pole."""
    den = r.denominator
    quot, _ = r.numerator.divmod(den)
    # Re-verify the factorization the principal parts rely on.
    for c, m in r.poles:
        if abs(den(c)) > 1e-10 * max(den.abs_bound(c), 1.0):
            raise InconsistentFactorization(f"denominator does not vanish at pole {c}")
    terms = []
    for c, m in r.poles:
        data = laurent_at_pole(r, c, depth=0)
        for k in range(1, m + 1):
            terms.append((c, -k, data.coefficient(-k)))
    return PartialFraction(quot, tuple(terms))


def sample_points(rng: np.random.Generator, count: int, avoid: Sequence = (), radius=2.0):
    """Random complex points kept away from ``avoid``."""
    pts = []
    while len(pts) < count:
        z = complex(*rng.uniform(-radius, radius, size=2))
        if all(abs(z - a) > 0.1 for a in avoid):
            pts.append(z)
    return np.array(pts)
