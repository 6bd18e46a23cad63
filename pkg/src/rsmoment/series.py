"""Truncated Laurent series whose coefficients are polynomials in one symbol.

A coefficient is a tuple of numbers (p0, p1, ...) meaning p0 + p1 x + ...,
so a series can carry an unevaluated parameter such as a logarithm of the
weight. Scalars are length-one tuples.
"""

from __future__ import annotations

import math

import mpmath
from mpmath import mpf

from .errors import PrecisionFailure, TruncationError

# ---------------------------------------------------------------- polynomials


def padd(a: tuple, b: tuple) -> tuple:
    n = max(len(a), len(b))
    return tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))


def pscale(a: tuple, c) -> tuple:
    return tuple(c * x for x in a)


def pmul(a: tuple, b: tuple) -> tuple:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return tuple(out)


def peval(a: tuple, x):
    acc = 0
    for c in reversed(a):
        acc = acc * x + c
    return acc


def ptrim(a: tuple, tol=0) -> tuple:
    a = list(a)
    while len(a) > 1 and abs(a[-1]) <= tol:
        a.pop()
    return tuple(a)


def pshift(a: tuple, c) -> tuple:
    """Coefficients of p(x + c)."""
    out = [0] * len(a)
    for i, ai in enumerate(a):
        for j in range(i + 1):
            out[j] += ai * mpmath.binomial(i, j) * c ** (i - j)
    return tuple(out)


# ---------------------------------------------------------------- series


class Series:
    """sum_{e = val}^{val + len - 1} coeffs[e - val] w^e, exact up to that order."""

    __slots__ = ("val", "coeffs")

    def __init__(self, val: int, coeffs):
        self.val = val
        self.coeffs = [c if isinstance(c, tuple) else (c,) for c in coeffs]

    @property
    def top(self) -> int:
        """First exponent not represented."""
        return self.val + len(self.coeffs)

    @classmethod
    def scalar(cls, c, length: int) -> "Series":
        return cls(0, [c] + [0] * (length - 1))

    def coeff(self, e: int) -> tuple:
        if e >= self.top:
            raise TruncationError(f"coefficient of w^{e} needs more terms than the {len(self.coeffs)} kept")
        if e < self.val:
            return (0,)
        return self.coeffs[e - self.val]

    def __add__(self, other: "Series") -> "Series":
        lo = min(self.val, other.val)
        hi = min(self.top, other.top)
        return Series(lo, [padd(self.coeff(e), other.coeff(e)) for e in range(lo, hi)])

    def __mul__(self, other):
        if not isinstance(other, Series):
            return Series(self.val, [pscale(c, other) for c in self.coeffs])
        n = min(len(self.coeffs), len(other.coeffs))
        out = []
        for m in range(n):
            acc = (0,)
            for i in range(m + 1):
                acc = padd(acc, pmul(self.coeffs[i], other.coeffs[m - i]))
            out.append(acc)
        return Series(self.val + other.val, out)

    __rmul__ = __mul__

    def shift(self, e: int) -> "Series":
        """Multiply by w^e."""
        return Series(self.val + e, list(self.coeffs))

    def derivative(self) -> "Series":
        out = []
        for i, c in enumerate(self.coeffs):
            e = self.val + i
            out.append(pscale(c, e))
        if self.val == 0:
            return Series(0, out[1:])
        return Series(self.val - 1, out)

    def inverse(self) -> "Series":
        """Reciprocal; the leading coefficient must be a scalar."""
        lead = self.coeffs[0]
        if len(ptrim(lead)) != 1 or lead[0] == 0:
            raise ValueError("leading coefficient must be a nonzero scalar")
        inv0 = 1 / lead[0]
        out = [(inv0,)]
        for m in range(1, len(self.coeffs)):
            acc = (0,)
            for j in range(1, m + 1):
                acc = padd(acc, pmul(self.coeffs[j], out[m - j]))
            out.append(pscale(acc, -inv0))
        return Series(-self.val, out)


def exp_series(f: Series) -> Series:
    """exp of a series with val >= 1 (no constant term)."""
    if f.val < 1:
        raise ValueError("exp_series needs a series without constant term")
    n = f.top
    a = [(0,)] * n
    for e in range(f.val, n):
        a[e] = f.coeff(e)
    out = [(1,)]
    for m in range(1, n):
        acc = (0,)
        for j in range(1, m + 1):
            acc = padd(acc, pscale(pmul(a[j], out[m - j]), j))
        out.append(pscale(acc, mpf(1) / m))
    return Series(0, out)


def taylor_by_circle(f, center, order: int, radius: float, nodes: int, tol: float | None = None) -> list:
    """Taylor coefficients a_0..a_order of f about center by the trapezoid rule.

    The half-node subset gives an error estimate; PrecisionFailure if it
    exceeds tol (relative to the largest scaled coefficient).
    """
    r = mpf(radius)
    ws = [r * mpmath.expjpi(mpf(2 * m) / nodes) for m in range(nodes)]
    vals = [f(center + w) for w in ws]
    out = []
    worst = 0.0
    scale = max(float(abs(v)) for v in vals)
    for j in range(order + 1):
        full = mpmath.fsum(v * w ** (-j) for v, w in zip(vals, ws)) / nodes
        half = mpmath.fsum(v * w ** (-j) for v, w in zip(vals[::2], ws[::2])) / (nodes // 2)
        worst = max(worst, float(abs(full - half) * r**j))
        out.append(full)
    if tol is not None and worst > tol * max(scale, 1e-300):
        raise PrecisionFailure(f"circle quadrature did not converge (half-rule gap {worst:.2e})")
    return out


def nodes_for(digits: float, ratio: float) -> int:
    """Even node count so that ratio**(nodes/2) is below 10^-digits."""
    n = int(math.ceil(2 * digits * math.log(10) / -math.log(ratio)))
    n += n % 2
    return max(n, 16)


__all__ = [
    "Series",
    "exp_series",
    "padd",
    "peval",
    "pmul",
    "pscale",
    "pshift",
    "ptrim",
    "taylor_by_circle",
    "nodes_for",
]
