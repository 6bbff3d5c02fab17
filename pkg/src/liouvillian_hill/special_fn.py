"""Pochhammer symbols, the Kummer function 1F1 and the periodic-equation kernel."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence

MAX_TERMS = 10_000
_RESCALE = 1e150


def pochhammer(mu: complex, m: int) -> complex:
    """Rising factorial ``mu (mu+1) ... (mu+m-1)``; 1 for ``m = 0``."""
    if m < 0:
        raise ValueError("pochhammer needs m >= 0")
    out = 1.0 + 0j if isinstance(mu, complex) else 1.0
    for k in range(m):
        out *= mu + k
    return out


def _series_log(a: complex, c: complex, x: complex, rtol: float = 1e-16):
    """Direct Maclaurin sum of 1F1 returned as ``(log-scale, mantissa)``.

    The running sum is renormalised whenever it gets large so that arguments
    with ``|x|`` in the hundreds do not overflow.
    """
    term = 1.0 + 0j
    total = 1.0 + 0j
    log_scale = 0.0
    quiet = 0
    for k in range(MAX_TERMS):
        denom = (c + k) * (k + 1)
        if denom == 0:
            raise ZeroDivisionError(f"1F1 lower parameter {c} is a non-positive integer")
        term = term * (a + k) / denom * x
        total += term
        if abs(term) <= rtol * abs(total):
            quiet += 1
            if quiet >= 3:
                return log_scale, total
        else:
            quiet = 0
        if abs(total) > _RESCALE:
            s = abs(total)
            total /= s
            term /= s
            log_scale += math.log(s)
    raise NonConvergence(
        f"1F1({a}; {c}; {x}) did not converge in {MAX_TERMS} terms",
        partial=total * math.exp(min(log_scale, 700.0)),
    )


def hyp1f1_log(a: complex, c: complex, x: complex) -> tuple[float, float]:
    """``(log|1F1(a;c;x)|, arg 1F1(a;c;x))``; Kummer's transformation for ``Re x < 0``."""
    a, c, x = complex(a), complex(c), complex(x)
    if x.real < 0:
        scale, mant = _series_log(c - a, c, -x)
        shift = x
    else:
        scale, mant = _series_log(a, c, x)
        shift = 0j
    if mant == 0:
        return -math.inf, 0.0
    return scale + math.log(abs(mant)) + shift.real, cmath.phase(mant) + shift.imag


def hyp1f1_scalar(a: complex, c: complex, x: complex, transform: bool = True) -> complex:
    a, c, x = complex(a), complex(c), complex(x)
    if transform and x.real < 0:
        scale, mant = _series_log(c - a, c, -x)
        return mant * cmath.exp(scale + x)
    scale, mant = _series_log(a, c, x)
    return mant * math.exp(scale)


def hyp1f1(a, c, x, transform: bool = True):
    """Kummer function 1F1(a; c; x), vectorised over ``x``."""
    if np.ndim(x) == 0:
        return hyp1f1_scalar(a, c, x, transform)
    xs = np.asarray(x, dtype=complex)
    out = np.empty(xs.shape, dtype=complex)
    for idx, v in np.ndenumerate(xs):
        out[idx] = hyp1f1_scalar(a, c, v, transform)
    return out


def series_condition(a: complex, c: complex, x: complex) -> float:
    """``sum |terms| / |sum|`` of the direct series: digits lost to cancellation."""
    term = 1.0 + 0j
    total = 1.0 + 0j
    mag = 1.0
    for k in range(MAX_TERMS):
        term = term * (a + k) / ((c + k) * (k + 1)) * x
        total += term
        mag += abs(term)
        if abs(term) <= 1e-17 * mag and k > abs(x):
            break
    return mag / abs(total) if total != 0 else math.inf


@dataclass(frozen=True)
class KummerParams:
    a: complex
    c: complex = 0.5

    def __post_init__(self):
        c = complex(self.c)
        if c.imag == 0 and c.real <= 0 and c.real == int(c.real):
            raise ValueError("lower Kummer parameter must not be a non-positive integer")

    @classmethod
    def from_pbhe(cls, p) -> "KummerParams":
        e = p.eps_inf
        a = e * p.K3**2 / 16 + (1 + p.d) / 2 + e * p.K2 / 4
        return cls(complex(a), 0.5)


def kummer_phi(kp: KummerParams, x):
    return hyp1f1(kp.a, kp.c, x)


def kummer_phi_derivative(kp: KummerParams, x):
    """``(a/c) 1F1(a+1; c+1; x)``."""
    return kp.a / kp.c * hyp1f1(kp.a + 1, kp.c + 1, x)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel ``phi(z) phi(t) Phi(a; 1/2; -eps_inf (e^z + e^t - K3/2)^2)``.

    ``parity="odd"`` swaps the Kummer factor for the odd solution
    ``w Phi(a + 1/2; 3/2; -eps_inf w^2)`` with ``w = e^z + e^t - K3/2``.
    """

    params: object
    quadratic: complex
    linear: complex
    log_slope: complex
    kummer: KummerParams
    parity: str = "even"

    @classmethod
    def from_pbhe(cls, p, tol: float = 1e-12, parity: str = "even") -> "KernelSpec":
        if parity not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
        ks = cls(
            params=p,
            quadratic=p.eps_inf / 2,
            linear=-p.eps_inf * p.K3 / 2,
            log_slope=p.d,
            kummer=KummerParams.from_pbhe(p),
            parity=parity,
        )
        # exponents must solve 4 q^2 = 1 (the e^{4z} coefficient is -1) and d^2 = -K0
        if abs(4 * ks.quadratic**2 - 1) > tol or abs(ks.log_slope**2 + p.K0) > tol * max(1, abs(p.K0)):
            raise ValueError("kernel exponents inconsistent with the equation coefficients")
        return ks

    def log_phi(self, w):
        ew = np.exp(w)
        return self.quadratic * ew**2 + self.linear * ew + self.log_slope * w

    def shifted_sum(self, z, t):
        return np.exp(z) + np.exp(t) - self.params.K3 / 2

    def argument(self, z, t):
        return -self.params.eps_inf * self.shifted_sum(z, t) ** 2


def kernel_K(ks: KernelSpec, z, t):
    """Kernel value, combined in the log domain so large exponents cancel safely."""
    zz, tt = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(t, dtype=complex))
    out = np.empty(zz.shape, dtype=complex)
    for idx in np.ndindex(zz.shape):
        zi, ti = zz[idx], tt[idx]
        if ks.parity == "odd":
            lm, ph = hyp1f1_log(ks.kummer.a + 0.5, 1.5, ks.argument(zi, ti))
            lead = ks.shifted_sum(zi, ti)
        else:
            lm, ph = hyp1f1_log(ks.kummer.a, ks.kummer.c, ks.argument(zi, ti))
            lead = 1.0
        if lm == -math.inf or lead == 0:
            out[idx] = 0j
            continue
        out[idx] = lead * cmath.exp(ks.log_phi(zi) + ks.log_phi(ti) + lm + 1j * ph)
    return out[()] if out.ndim == 0 else out
