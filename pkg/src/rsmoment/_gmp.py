"""Bridges between mpmath numbers and gmpy2 for arithmetic-heavy inner loops."""

from __future__ import annotations

import math

import gmpy2
import mpmath
from gmpy2 import mpc as gmpc
from gmpy2 import mpfr
from mpmath import mp


def bits_for(dps: int) -> int:
    return int(dps * 3.3219280948873626) + 8


def to_g_real(x) -> mpfr:
    x = mpmath.mpmathify(x)
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return mpfr(0)
    v = gmpy2.mul_2exp(mpfr(man, max(int(man).bit_length(), 2)), exp)
    return -v if sign else v


def to_g(z):
    z = mpmath.mpmathify(z)
    if isinstance(z, mpmath.mpc):
        return gmpc(to_g_real(z.real), to_g_real(z.imag))
    return gmpc(to_g_real(z), 0)


def to_m_real(x):
    if gmpy2.is_zero(x):
        return mpmath.mpf(0)
    man, exp = x.as_mantissa_exp()
    with mp.workprec(max(mp.prec, x.precision)):
        return mpmath.mpf((int(man), int(exp)))


def to_m(z):
    with mp.workprec(max(mp.prec, z.precision[0], z.precision[1])):
        return mpmath.mpc(to_m_real(z.real), to_m_real(z.imag))


_COEFFS: dict[int, list] = {}


def _stirling(prec: int) -> list:
    cached = _COEFFS.get(prec)
    if cached is None:
        with mp.workprec(prec + 10):
            cached = [to_g_real(mpmath.bernoulli(2 * j) / (2 * j * (2 * j - 1))) for j in range(1, 200)]
        _COEFFS[prec] = cached
    return cached


def lgamma(z):
    """Principal complex log Gamma in the ambient gmpy2 precision."""
    prec = gmpy2.get_context().precision
    zr, zi = float(z.real), float(z.imag)
    radius = max(12.0, 0.12 * prec)
    shift = 0
    if zr < 0 or math.hypot(zr, zi) < radius:
        need = math.sqrt(max(radius * radius - zi * zi, 0.0)) - zr
        shift = max(0, int(math.ceil(need)), int(math.ceil(-zr)) + 1)
    w = z + shift
    res = (w - 0.5) * gmpy2.log(w) - w + gmpy2.log(2 * gmpy2.const_pi()) / 2
    inv = 1 / w
    inv2 = inv * inv
    power = inv
    tol = gmpy2.mul_2exp(mpfr(1), -prec) * (1 + abs(res))
    for c in _stirling(prec):
        term = c * power
        if abs(term) < tol:
            break
        res += term
        power *= inv2
    if shift:
        prod = gmpc(1)
        arg = 0.0
        for j in range(shift):
            prod *= z + j
            arg += math.atan2(zi, zr + j)
        lp = gmpy2.log(prod)
        turns = round((arg - float(lp.imag)) / (2 * math.pi))
        res -= lp + gmpc(0, 2 * turns) * gmpy2.const_pi()
    return res
