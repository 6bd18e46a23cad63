"""High-precision log-gamma, zeta, completed zeta and Whittaker functions.

Every public operation takes a PrecisionContext and returns a ComplexValue
carrying an absolute error estimate. The underscore helpers work at the
ambient mpmath precision and are what the other modules call in hot loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
from mpmath import mp, mpc, mpf

from .errors import PoleInputError, PrecisionFailure, QuadratureFailure

GUARD_DIGITS = 10


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision and truncation policy shared by all operations."""

    working_digits: int = 30
    truncation_bound: int = 60000
    quadrature_step_target: float = 1e-12

    def __post_init__(self):
        if self.working_digits < 30:
            raise ValueError("working_digits must be at least 30")
        if self.truncation_bound <= 0:
            raise ValueError("truncation_bound must be positive")
        if not self.quadrature_step_target > 0:
            raise ValueError("quadrature_step_target must be positive")

    @property
    def dps(self) -> int:
        return self.working_digits + GUARD_DIGITS

    @property
    def target(self) -> float:
        """Largest admissible error estimate for a returned value."""
        return 10.0 ** (-self.working_digits / 2)

    def workdps(self):
        return mp.workdps(self.dps)


@dataclass(frozen=True)
class ComplexValue:
    """A complex number with a first-order absolute error estimate."""

    re: mpf
    im: mpf
    err: float = 0.0

    @classmethod
    def of(cls, z, err=0.0) -> "ComplexValue":
        z = mpmath.mpmathify(z)
        if isinstance(z, mpc):
            return cls(z.real, z.imag, float(err))
        return cls(z, mpf(0), float(err))

    @property
    def value(self):
        return mpc(self.re, self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return abs(self.value)

    def conj(self) -> "ComplexValue":
        return ComplexValue(self.re, -self.im, self.err)

    def __neg__(self):
        return ComplexValue(-self.re, -self.im, self.err)

    def _coerce(self, other):
        if isinstance(other, ComplexValue):
            return other
        return ComplexValue.of(other)

    def __add__(self, other):
        o = self._coerce(other)
        return ComplexValue.of(self.value + o.value, self.err + o.err)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return ComplexValue.of(self.value - o.value, self.err + o.err)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        err = float(abs(self.value)) * o.err + float(abs(o.value)) * self.err
        return ComplexValue.of(self.value * o.value, err)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        den = float(abs(o.value))
        if den == 0:
            raise ZeroDivisionError("division by a zero ComplexValue")
        q = self.value / o.value
        err = self.err / den + float(abs(q)) * o.err / den
        return ComplexValue.of(q, err)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def exp(self) -> "ComplexValue":
        v = mpmath.exp(self.value)
        return ComplexValue.of(v, float(abs(v)) * self.err)

    def __repr__(self):
        return f"ComplexValue({mpmath.nstr(self.value, 20)}, err={self.err:.2e})"


def _eps() -> mpf:
    return mpf(2) ** (-mp.prec)


_BERN_CACHE: dict[int, list] = {}


def _stirling_coeffs(prec: int, count: int) -> list:
    """B_{2j} / (2j (2j-1)) for j = 1..count at the given binary precision."""
    cached = _BERN_CACHE.get(prec)
    if cached is None or len(cached) < count:
        with mp.workprec(prec):
            cached = [mpmath.bernoulli(2 * j) / (2 * j * (2 * j - 1)) for j in range(1, count + 1)]
        _BERN_CACHE[prec] = cached
    return cached


def _is_nonpositive_integer(z) -> bool:
    if isinstance(z, mpc):
        if z.imag != 0:
            return False
        z = z.real
    return z <= 0 and z == int(z)


def _loggamma(z):
    """Principal log Gamma at the ambient precision via shifted Stirling series."""
    z = mpmath.mpmathify(z)
    if _is_nonpositive_integer(z):
        raise PoleInputError(f"log_gamma has a pole at {z}")
    real = not isinstance(z, mpc)
    if real and z < 0:
        z = mpc(z, 0)
        real = False
    prec = mp.prec
    radius = max(12.0, 0.12 * prec)
    zr = float(z.real) if not real else float(z)
    zi = 0.0 if real else float(z.imag)
    shift = 0
    if zr < 0 or math.hypot(zr, zi) < radius:
        need = math.sqrt(max(radius * radius - zi * zi, 0.0)) - zr
        shift = max(0, int(math.ceil(need)), int(math.ceil(-zr)) + 1)
    w = z + shift
    logw = mpmath.log(w)
    res = (w - mpf(0.5)) * logw - w + mpmath.log(2 * mp.pi) / 2
    inv = 1 / w
    inv2 = inv * inv
    power = inv
    coeffs = _stirling_coeffs(prec, 200)
    tol = _eps() * (1 + abs(res))
    prev = None
    for c in coeffs:
        term = c * power
        mag = abs(term)
        if mag < tol:
            break
        if prev is not None and mag > prev:
            raise PrecisionFailure("Stirling series diverged before reaching precision")
        prev = mag
        res += term
        power *= inv2
    else:
        raise PrecisionFailure("Stirling series did not converge")
    if shift:
        prod = mpf(1) if real else mpc(1)
        arg = 0.0
        for j in range(shift):
            prod *= z + j
            if not real:
                arg += math.atan2(zi, zr + j)
        if real:
            res -= mpmath.log(prod)
        else:
            lp = mpmath.log(prod)
            turns = round((arg - float(lp.imag)) / (2 * math.pi))
            res -= lp + mpc(0, 2 * turns) * mp.pi
    return res


def _gamma(z):
    return mpmath.exp(_loggamma(z))


_LOG_CACHE: dict[int, list] = {}


def _logs(prec: int, n: int) -> list:
    """log(1), ..., log(n) at the given precision, cached."""
    cached = _LOG_CACHE.get(prec)
    if cached is None:
        cached = [mpf(0)]
        _LOG_CACHE[prec] = cached
    if len(cached) < n:
        with mp.workprec(prec):
            cached.extend(mpmath.log(j) for j in range(len(cached) + 1, n + 1))
    return cached


def _zeta_em(s, n_terms: int):
    """Euler-Maclaurin with n_terms explicit terms; returns (value, tail estimate)."""
    prec = mp.prec
    logs = _logs(prec, n_terms)
    partial = mpf(0)
    for n in range(2, n_terms):
        partial += mpmath.exp(-s * logs[n - 1])
    partial += 1
    big_n = mpf(n_terms)
    n_pow = mpmath.exp(-s * logs[n_terms - 1])
    res = partial + big_n * n_pow / (s - 1) + n_pow / 2
    # terms B_{2j}/(2j)! s(s+1)...(s+2j-2) N^{-s-2j+1}
    coeffs = _stirling_coeffs(prec, 400)
    rising = s
    npow = n_pow / big_n
    inv_n2 = 1 / (big_n * big_n)
    tol = _eps() * (1 + abs(res))
    prev = None
    last = None
    for j in range(1, 400):
        # B_{2j}/(2j)! = c_j (2j-1) 2j / (2j)! = c_j / (2j-2)!
        term = coeffs[j - 1] * rising * npow / mpmath.factorial(2 * j - 2)
        mag = abs(term)
        res += term
        last = mag
        if mag < tol:
            return res, mag
        if prev is not None and mag > prev:
            return res, None
        prev = mag
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        npow *= inv_n2
    return res, last


def _zeta(s):
    """Riemann zeta at the ambient precision (Euler-Maclaurin)."""
    s = mpmath.mpmathify(s)
    if s == 1:
        raise PoleInputError("zeta has a pole at s=1")
    n_terms = int(15 + 0.06 * mp.prec + abs(complex(s)) / 4)
    for _ in range(8):
        val, tail = _zeta_em(s, n_terms)
        if tail is not None:
            return val
        n_terms *= 2
    raise PrecisionFailure(f"Euler-Maclaurin did not converge at s={s}")


def _xi(s):
    if mpmath.re(s) < 0.5:
        # xi(s) = xi(1 - s) keeps Gamma(s/2) away from its poles at nonpositive even s
        s = 1 - s
    return mpmath.exp(-s / 2 * mpmath.log(mp.pi) + _loggamma(s / 2)) * _zeta(s)


def _rel_err(value, digits_lost: float = 3.0) -> float:
    return float(abs(value)) * 10.0 ** (-(mp.dps - digits_lost)) + 10.0 ** (-(mp.dps - digits_lost))


def log_gamma(z, ctx: PrecisionContext) -> ComplexValue:
    """Principal branch of log Gamma(z)."""
    with ctx.workdps():
        v = _loggamma(mpmath.mpmathify(z))
        return ComplexValue.of(v, _rel_err(v))


def zeta(s, ctx: PrecisionContext) -> ComplexValue:
    """Riemann zeta by Euler-Maclaurin summation."""
    with ctx.workdps():
        v = _zeta(mpmath.mpmathify(s))
        return ComplexValue.of(v, _rel_err(v))


def zeta_laurent_at_1(order: int, ctx: PrecisionContext, radius: float = 0.1, nodes: int = 48) -> list:
    """Laurent coefficients [c_-1, c_0, ..., c_{order-1}] of zeta(1+w) = 1/w + sum c_j w^j."""
    if order < 0 or order > 8:
        raise ValueError("order must lie in 0..8")
    out = [mpf(1)]
    if order == 0:
        return out
    with mp.workdps(ctx.dps + 12):
        r = mpf(radius)
        vals = []
        ws = []
        for m in range(nodes):
            w = r * mpmath.expjpi(mpf(2 * m + 1) / nodes)
            ws.append(w)
            vals.append(_zeta(1 + w) - 1 / w)
        coeffs = []
        half = []
        for j in range(order):
            cj = sum(v * w ** (-j) for v, w in zip(vals, ws)) / nodes
            hj = sum(v * w ** (-j) for v, w in zip(vals[::2], ws[::2])) / (nodes // 2)
            coeffs.append(cj.real)
            half.append(abs(cj - hj) * r**j)
        if max(half) > 10.0 ** (-ctx.working_digits):
            raise PrecisionFailure("Laurent circle quadrature did not converge")
        out.extend(coeffs)
    with ctx.workdps():
        return [+c for c in out]


def completed_xi(s, ctx: PrecisionContext) -> ComplexValue:
    """xi(s) = pi^{-s/2} Gamma(s/2) zeta(s)."""
    with ctx.workdps():
        s = mpmath.mpmathify(s)
        if s == 0 or s == 1:
            raise PoleInputError("xi has poles at s=0 and s=1")
        v = _xi(s)
        return ComplexValue.of(v, _rel_err(v))


def _whittaker(kappa, mu, y):
    """W_{kappa,mu}(y) = e^{-y/2} y^{mu+1/2} U(1/2+mu-kappa, 1+2mu, y)."""
    a = mpf(0.5) + mu - kappa
    b = 1 + 2 * mu
    return mpmath.exp(-y / 2) * mpmath.power(y, mu + mpf(0.5)) * mpmath.hyperu(a, b, y)


def whittaker_W(kappa, mu, y, ctx: PrecisionContext) -> ComplexValue:
    """Whittaker W function via Tricomi's confluent hypergeometric U."""
    y = mpmath.mpmathify(y)
    if not y > 0:
        raise ValueError("y must be positive")
    with ctx.workdps():
        v = _whittaker(mpmath.mpmathify(kappa), mpmath.mpmathify(mu), y)
    with mp.workdps(ctx.dps + 15):
        w = _whittaker(mpmath.mpmathify(kappa), mpmath.mpmathify(mu), y)
    with ctx.workdps():
        err = float(abs(v - w)) + _rel_err(v)
        if err > ctx.target * max(1.0, float(abs(w))):
            raise PrecisionFailure("Whittaker evaluation lost too many digits")
        return ComplexValue.of(w, err)


def mellin_whittaker_check(kappa, mu, s, ctx: PrecisionContext):
    """Integral of W_{kappa,mu}(y) y^{s+kappa-2} e^{-y/2} over (0, inf) and its Gamma-ratio closed form."""
    kappa = mpmath.mpmathify(kappa)
    mu = mpmath.mpmathify(mu)
    s = mpmath.mpmathify(s)
    # near 0, W behaves like y^{1/2 - |Re mu|}
    if float(mpmath.re(s + kappa - abs(mpmath.re(mu)) - 0.5)) <= 0:
        raise QuadratureFailure("Mellin integral diverges at the origin for these parameters")
    # substitute y = e^x; the integrand then decays exponentially at both ends
    lo_rate = float(mpmath.re(s + kappa - abs(mpmath.re(mu)) - 0.5))
    x_lo = -(ctx.working_digits * 2.303 + 10) / lo_rate
    x_hi = math.log(4 * (ctx.working_digits * 2.303 + 40 + 4 * abs(float(mpmath.re(s + kappa)))))
    with mp.workdps(ctx.dps + 5):
        def integrand(x):
            y = mpmath.exp(x)
            return _whittaker(kappa, mu, y) * mpmath.power(y, s + kappa - 1) * mpmath.exp(-y / 2)

        def trapezoid(h):
            n = int(math.ceil((x_hi - x_lo) / h))
            return h * mpmath.fsum(integrand(x_lo + j * h) for j in range(n + 1))

        coarse = trapezoid(0.2)
        lhs = trapezoid(0.1)
        qerr = abs(lhs - coarse)
        if qerr > 1e-6 * (1 + abs(lhs)):
            raise QuadratureFailure("Mellin quadrature did not settle")
        rhs = mpmath.exp(
            _loggamma(s + kappa + mu - mpf(0.5)) + _loggamma(s + kappa - mu - mpf(0.5)) - _loggamma(s)
        )
    with ctx.workdps():
        return ComplexValue.of(lhs, float(qerr) + _rel_err(lhs)), ComplexValue.of(rhs, _rel_err(rhs))


def stirling_log_abs_gamma(sigma: float, tau: float) -> float:
    """Leading terms of log|Gamma(sigma + i tau)| without the bounded remainder."""
    if sigma < 0.1:
        raise ValueError("sigma must be at least 0.1")
    at = abs(tau)
    return 0.5 * (sigma - 0.5) * math.log(sigma * sigma + tau * tau) - at * math.atan2(at, sigma) - sigma
