"""Main term of the dual side: Psi, psi, three routes to M0, the P_j polynomials,
the constant c, the weights W1 and W2 and the positivity certificate.

Shared notation:
  u = w1 + w2,
  D(u) = zeta(1+u) L(1+u, ad g) / zeta(2+2u),
  E(u) = u D(u), holomorphic for |u| < 2 (the first obstruction is the
         trivial zero of zeta(2+2u) at u = -2),
  a(w) = Gamma(1/2+w) zeta(1+2w),
  A(w) = (k/4pi^2)^w a(w) (1 - 64 w^6).
Then psi(w1, w2) = D(u) A(w1) A(w2) and
Psi(w1, w2) = 2 (4pi^2)^{-u} Gamma(u+k)/Gamma(k) D(u) a(w1) a(w2).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import mpmath
import numpy as np
from mpmath import mp, mpc, mpf

from .cache import write_text_atomic
from .errors import (
    ContourError,
    ExtrapolationDivergence,
    QuadratureFailure,
    SummationBudgetExceeded,
    TooCloseToPoleError,
)
from .lfun import adjoint_derivs, adjoint_descriptor, evaluate, evaluate_many
from .modforms import HeckeEigenform, hecke_eigenforms
from .series import Series, exp_series, nodes_for, peval, pshift, ptrim, taylor_by_circle
from .specialfn import ComplexValue, PrecisionContext, _loggamma, _zeta, zeta_laurent_at_1

_DEFAULT_CTX = PrecisionContext()

# radius of the circle on which E(u) is sampled; E is holomorphic for |u| < 2
_MODEL_RADIUS = 0.5
_MODEL_SINGULARITY = 2.0
# largest |u| at which the model is evaluated (torus sums r1 + r2 and c_derived radii stay below this)
_MODEL_USE = 0.25


def _check_weight(k: int, g: HeckeEigenform) -> None:
    if k != g.weight:
        raise ValueError(f"k={k} does not match the eigenform weight {g.weight}")


def _log4pi2():
    return mpmath.log(4 * mp.pi**2)


# ---------------------------------------------------------------- factors


def _a_factor(w):
    return mpmath.exp(_loggamma(mpf(1) / 2 + w)) * _zeta(1 + 2 * w)


def _deflation(w):
    return 1 - 64 * w**6


def _A(w, k: int):
    return mpmath.exp(w * (mpmath.log(k) - _log4pi2())) * _a_factor(w) * _deflation(w)


def _gamma_shift_ratio(u, k: int):
    """2 (4pi^2)^{-u} Gamma(u+k) / Gamma(k)."""
    return 2 * mpmath.exp(-u * _log4pi2() + _loggamma(u + k) - _loggamma(mpf(k)))


def _pole_guard(points, ctx: PrecisionContext) -> None:
    gap = 10.0 ** (-ctx.working_digits / 4)
    for p in points:
        if abs(complex(p)) < gap:
            raise TooCloseToPoleError(f"point within {gap:.1e} of a polar line")


def _d_direct(u, g: HeckeEigenform, ctx: PrecisionContext):
    """D(u) through the evaluator, with the propagated relative error."""
    v = evaluate(adjoint_descriptor(g), 1 + u, ctx)
    d = _zeta(1 + u) * v.value / _zeta(2 + 2 * u)
    return d, v.err / max(float(abs(v.value)), 1e-300)


def psi_big(w1, w2, g: HeckeEigenform, ctx: PrecisionContext = _DEFAULT_CTX) -> ComplexValue:
    """Psi(w1, w2) evaluated directly."""
    w1 = mpmath.mpmathify(w1)
    w2 = mpmath.mpmathify(w2)
    _pole_guard([w1, w2, w1 + w2], ctx)
    with mp.workdps(ctx.dps + 5):
        u = w1 + w2
        d, rel = _d_direct(u, g, ctx)
        v = _gamma_shift_ratio(u, g.weight) * d * _a_factor(w1) * _a_factor(w2)
    with ctx.workdps():
        return ComplexValue.of(v, float(abs(v)) * (rel + ctx.target * 1e-3))


def psi_small(w1, w2, g: HeckeEigenform, k: int, ctx: PrecisionContext = _DEFAULT_CTX) -> ComplexValue:
    """psi(w1, w2) evaluated directly."""
    _check_weight(k, g)
    w1 = mpmath.mpmathify(w1)
    w2 = mpmath.mpmathify(w2)
    _pole_guard([w1, w2, w1 + w2], ctx)
    with mp.workdps(ctx.dps + 5):
        u = w1 + w2
        d, rel = _d_direct(u, g, ctx)
        v = d * _A(w1, k) * _A(w2, k)
    with ctx.workdps():
        return ComplexValue.of(v, float(abs(v)) * (rel + ctx.target * 1e-3))


# ---------------------------------------------------------------- Taylor model of E


@dataclass
class _UModel:
    e_coeffs: list  # Taylor coefficients of E(u)
    big_coeffs: list  # Taylor coefficients of E(u) 2 (4pi^2)^{-u} Gamma(u+k)/Gamma(k)
    err: float  # relative error estimate of the coefficients
    dps: int

    @staticmethod
    def _horner(coeffs, u):
        acc = mpc(0)
        for c in reversed(coeffs):
            acc = acc * u + c
        return acc

    def E(self, u):
        return self._horner(self.e_coeffs, u)

    def big(self, u):
        return self._horner(self.big_coeffs, u)


def _u_model(g: HeckeEigenform, ctx: PrecisionContext) -> _UModel:
    """Taylor model of E(u) from samples on |u| = 0.5, one evaluator batch."""
    key = ("u_model", ctx.dps)
    cached = g._memo.get(key)
    if cached is not None:
        return cached
    digits = ctx.working_digits + 5
    n = nodes_for(digits, _MODEL_RADIUS / _MODEL_SINGULARITY)
    with mp.workdps(ctx.dps + 10):
        r = mpf(_MODEL_RADIUS)
        us = [r * mpmath.expjpi(mpf(2 * m + 1) / n) for m in range(n)]
        lv = evaluate_many(adjoint_descriptor(g), [1 + u for u in us], ctx)
        e_vals = [u * _zeta(1 + u) * v.value / _zeta(2 + 2 * u) for u, v in zip(us, lv)]
        big_vals = [e * _gamma_shift_ratio(u, g.weight) for e, u in zip(e_vals, us)]
        rel = max(v.err / float(abs(v.value)) for v in lv)

        def coeffs(vals):
            out = []
            for j in range(n):
                c = mpmath.fsum(v * u ** (-j) for v, u in zip(vals, us)) / n
                out.append(c.real)
            # drop terms that cannot matter for |u| <= _MODEL_USE
            scale = max(abs(c) * mpf(_MODEL_USE) ** j for j, c in enumerate(out))
            tiny = scale * mpf(10) ** (-digits)
            while len(out) > 1 and all(abs(c) * mpf(_MODEL_USE) ** j < tiny for j, c in enumerate(out[-4:], len(out) - 4)):
                out = out[:-4]
            return out

        model = _UModel(coeffs(e_vals), coeffs(big_vals), rel, ctx.dps)
    g._memo[key] = model
    return model


# ---------------------------------------------------------------- sign sum and limit


def _norm_factor(k: int):
    """Gamma(k)^2 / Gamma(k - 1/2)^2."""
    return mpmath.exp(2 * _loggamma(mpf(k)) - 2 * _loggamma(mpf(k) - mpf(1) / 2))


def m0_sign_sum(w1, w2, g: HeckeEigenform, ctx: PrecisionContext = _DEFAULT_CTX, direct: bool = False):
    """Gamma(k)^2/Gamma(k-1/2)^2 times the sum of Psi(+-w1, +-w2) over all four signs."""
    w1 = mpmath.mpmathify(w1)
    w2 = mpmath.mpmathify(w2)
    _pole_guard([w1, w2, w1 + w2, w1 - w2], ctx)
    with mp.workdps(ctx.dps + 10):
        total = mpc(0)
        model = None if direct else _u_model(g, ctx)
        for s1 in (1, -1):
            for s2 in (1, -1):
                a, b = s1 * w1, s2 * w2
                u = a + b
                if direct:
                    total += psi_big(a, b, g, ctx).value
                else:
                    total += model.big(u) / u * _a_factor(a) * _a_factor(b)
        return _norm_factor(g.weight) * total


def m0_by_limit(
    k: int,
    g: HeckeEigenform,
    ctx: PrecisionContext = _DEFAULT_CTX,
    probe_radii=(4e-3, 2e-3, 1e-3),
    direction: float = 1.7,
    direct: bool = False,
) -> ComplexValue:
    """Limit of the sign sum at the origin by Richardson extrapolation in r^2.

    The sign sum is even in each variable, so along the ray (r, direction*r)
    its expansion runs in powers of r^2.
    """
    _check_weight(k, g)
    radii = [float(r) for r in probe_radii]
    if len(radii) != 3 or not all(0 < r < 0.125 for r in radii):
        raise ValueError("m0_by_limit takes three probe radii in (0, 1/8)")
    if not (radii[0] > radii[1] > radii[2]):
        raise ValueError("probe radii must decrease")
    with mp.workdps(ctx.dps + 10):
        vals = [m0_sign_sum(mpf(r), direction * mpf(r), g, ctx, direct).real for r in radii]
        h = [mpf(r) ** 2 for r in radii]
        # Neville elimination of the h and h^2 terms
        b1 = (h[0] * vals[1] - h[1] * vals[0]) / (h[0] - h[1])
        b2 = (h[1] * vals[2] - h[2] * vals[1]) / (h[1] - h[2])
        limit = (h[0] * b2 - h[2] * b1) / (h[0] - h[2])
        spread = max(abs(v - limit) for v in vals)
        if spread > 1e-2 * (1 + abs(limit)):
            raise ExtrapolationDivergence(
                f"sign sum varies by {float(spread):.3e} across probes; the polar parts did not cancel"
            )
        err = float(abs(limit - b2)) + float(abs(limit)) * 10.0 ** (-ctx.working_digits / 2)
    with ctx.workdps():
        return ComplexValue.of(+limit, err)


# ---------------------------------------------------------------- torus residues


@dataclass(frozen=True)
class TorusContour:
    r1: float = 0.05
    r2: float = 0.11
    nodes_per_circle: int = 64

    def __post_init__(self):
        if not (0 < self.r1 < self.r2 < 0.25):
            raise ContourError("torus radii must satisfy 0 < r1 < r2 < 1/4")
        if self.nodes_per_circle < 64 or self.nodes_per_circle % 2:
            raise ContourError("nodes_per_circle must be even and at least 64")


def _torus_mean(contour: TorusContour, inner, outer, combine, ctx):
    """Mean of combine(w1, w2, inner(w1), outer(w2)) over the torus, and its half-rule gap."""
    if contour.r1 + contour.r2 > _MODEL_USE:
        raise ContourError(f"r1 + r2 must stay within {_MODEL_USE}, the range of the E(u) model")
    n = contour.nodes_per_circle
    # offset the inner nodes by half a step so no node pair is conjugate-aligned
    w1s = [mpf(contour.r1) * mpmath.expjpi(mpf(2 * m + 1) / n) for m in range(n)]
    w2s = [mpf(contour.r2) * mpmath.expjpi(mpf(2 * m) / n) for m in range(n)]
    f1 = [inner(w) for w in w1s]
    f2 = [outer(w) for w in w2s]
    grid = [[combine(a, b, fa, fb) for b, fb in zip(w2s, f2)] for a, fa in zip(w1s, f1)]
    full = mpmath.fsum(mpmath.fsum(row) for row in grid) / (n * n)
    half = mpmath.fsum(mpmath.fsum(row[::2]) for row in grid[::2]) / ((n // 2) ** 2)
    return full, abs(full - half)


def _torus_check(value, gap, ctx, name):
    tol = max(1e-6 * float(abs(value)), 10.0 ** (-ctx.working_digits / 2))
    if gap > tol:
        raise QuadratureFailure(f"{name}: node-halving gap {float(gap):.2e} exceeds {tol:.1e}")


def m0_by_residue(
    k: int, g: HeckeEigenform, contour: TorusContour = TorusContour(), ctx: PrecisionContext = _DEFAULT_CTX
) -> ComplexValue:
    """4 Gamma(k)^2/Gamma(k-1/2)^2 Res_{w2=0} Res_{w1=0} Psi/(w1 w2) on a torus."""
    _check_weight(k, g)
    model = _u_model(g, ctx)
    with mp.workdps(ctx.dps + 10):
        mean, gap = _torus_mean(
            contour,
            _a_factor,
            _a_factor,
            lambda a, b, fa, fb: model.big(a + b) / (a + b) * fa * fb,
            ctx,
        )
        scale = 4 * _norm_factor(k)
        value = scale * mean.real
        _torus_check(value, scale * gap, ctx, "m0_by_residue")
        err = float(scale * gap) + float(abs(value)) * (model.err + 10.0 ** (-ctx.working_digits / 2))
    with ctx.workdps():
        return ComplexValue.of(+value, err)


def scaled_double_residue(
    k: int, g: HeckeEigenform, contour: TorusContour = TorusContour(), ctx: PrecisionContext = _DEFAULT_CTX
) -> ComplexValue:
    """Res_{w2=0} Res_{w1=0} psi/(w1 w2) by torus quadrature."""
    _check_weight(k, g)
    model = _u_model(g, ctx)
    with mp.workdps(ctx.dps + 10):
        mean, gap = _torus_mean(
            contour,
            lambda w: _A(w, k),
            lambda w: _A(w, k),
            lambda a, b, fa, fb: model.E(a + b) / (a + b) * fa * fb,
            ctx,
        )
        value = mean.real
        _torus_check(value, gap, ctx, "scaled_double_residue")
        err = float(gap) + float(abs(value)) * (model.err + 10.0 ** (-ctx.working_digits / 2))
    with ctx.workdps():
        return ComplexValue.of(+value, err)


def m0_scaled_residue(
    k: int, g: HeckeEigenform, contour: TorusContour = TorusContour(), ctx: PrecisionContext = _DEFAULT_CTX
) -> ComplexValue:
    """8k times the double residue of psi/(w1 w2)."""
    rr = scaled_double_residue(k, g, contour, ctx)
    with ctx.workdps():
        return ComplexValue.of(8 * k * rr.re, 8 * k * rr.err)


# ---------------------------------------------------------------- Laurent route


@dataclass
class LaurentResult:
    p_polys: list  # P_0..P_3 as ascending coefficient lists in log k
    q_polys: list  # coefficient of L^{(j)}(1, ad g) in the double residue, in log(k/4pi^2)
    main_value: mpf
    double_residue: mpf


_SERIES_LEN = 8


def _zeta2_taylor(ctx: PrecisionContext, order: int) -> list:
    """Taylor coefficients of zeta(2 + v) in v."""
    key = (ctx.dps, order)
    cached = _ZETA2_CACHE.get(key)
    if cached is None:
        with mp.workdps(ctx.dps + 10):
            nodes = nodes_for(ctx.working_digits + 8, 0.5)
            cached = [
                c.real
                for c in taylor_by_circle(_zeta, mpf(2), order, 0.5, nodes, tol=10.0 ** (-ctx.working_digits))
            ]
        _ZETA2_CACHE[key] = cached
    return cached


_ZETA2_CACHE: dict = {}


def _base_series(ctx: PrecisionContext):
    """The L-independent series: A(w) with symbolic l = log(k/4pi^2), and
    u zeta(1+u) / zeta(2+2u)."""
    n = _SERIES_LEN
    lc = zeta_laurent_at_1(n, ctx)  # [1, c0, c1, ...]
    gamma_e = lc[1]
    half = mpf(1) / 2
    # log Gamma(1/2 + w) - log Gamma(1/2)
    lg = [mpf(0), -gamma_e - 2 * mpmath.log(2)]
    for m in range(2, n + 1):
        lg.append((-1) ** m * (2**m - 1) * _zeta(mpf(m)) / m)
    gamma_half = Series(0, [mpmath.sqrt(mp.pi)] + [0] * n) * exp_series(Series(1, lg[1 : n + 1]))
    zeta_1_2w = Series(-1, [half] + [lc[1 + j] * 2**j for j in range(n)])
    expo = exp_series(Series(1, [(0, 1)] + [0] * n))
    deflate = Series(0, [1, 0, 0, 0, 0, 0, -64] + [0] * (n - 6))
    A = expo * gamma_half * zeta_1_2w * deflate
    uz = Series(0, lc[: n + 1])
    z2 = _zeta2_taylor(ctx, n)
    z2u = Series(0, [z2[j] * 2**j for j in range(n + 1)])
    return A, uz * z2u.inverse()


def laurent_polynomials(k: int, g: HeckeEigenform, adjoint=None, ctx: PrecisionContext = _DEFAULT_CTX) -> LaurentResult:
    """Double residue of psi/(w1 w2) by truncated power series, split by L^{(j)}(1, ad g).

    Res_{w1=0} psi/(w1 w2) = (alpha_{-1} D'(w2) + alpha_0 D(w2)) A(w2)/w2 where
    alpha_j are the Laurent coefficients of A at 0, so the double residue is
    the w^0 coefficient of A (alpha_{-1} D' + alpha_0 D).
    """
    _check_weight(k, g)
    if adjoint is None:
        adjoint = adjoint_derivs(g, ctx)
    with mp.workdps(ctx.dps + 10):
        A, ratio = _base_series(ctx)
        n = _SERIES_LEN
        alpha_m1 = A.coeff(-1)
        alpha_0 = A.coeff(0)
        q = []
        for j in range(4):
            unit = Series(0, [mpf(1) / mpmath.factorial(j) if i == j else 0 for i in range(n + 1)])
            D = (ratio * unit).shift(-1)
            X = D.derivative() * Series.scalar(alpha_m1, n) + D * Series.scalar(alpha_0, n)
            q.append(ptrim((A * X).coeff(0)))
        shift = -_log4pi2()
        p = [None] * 4
        for j in range(4):
            p[3 - j] = [8 * c for c in pshift(q[j], shift)]
        logk = mpmath.log(k)
        ell = logk - _log4pi2()
        rr = mpmath.fsum(peval(q[j], ell) * adjoint.values[j] for j in range(4))
        main = k * mpmath.fsum(peval(tuple(p[j]), logk) * adjoint.values[3 - j] for j in range(4))
    with ctx.workdps():
        return LaurentResult(
            [[+c for c in pj] for pj in p], [[+c for c in qj] for qj in q], +main, +rr
        )


# ---------------------------------------------------------------- the constant c


def _line_nodes(digits: float, strip: float, decay: float, power: float, extra: float = 0.0):
    """Step and cutoff for a trapezoid rule on a vertical line.

    The integrand is analytic in a strip of half-width ``strip`` and decays
    like t^power e^{-decay t}.
    """
    lam = digits * math.log(10)
    h = 2 * math.pi * strip / (lam + math.log(10))
    t = 1.0
    while -decay * t + power * math.log(t) + extra > -lam:
        t += 0.5
    return h, t


def _c_integrand(w, printed: bool):
    if printed:
        poly = (1 - 64 * w**2) ** 2
    else:
        poly = (1 - 64 * w**6) ** 2
    return poly / w**2 * mp.pi / mpmath.cos(mp.pi * w) * _zeta(1 + 2 * w) * _zeta(1 - 2 * w)


def _c_line(printed: bool, ctx: PrecisionContext):
    """(1/2pi) int f(1/4 + it) dt by the trapezoid rule, with its step-halving gap."""
    digits = min(ctx.working_digits / 2 + 4, 20)
    power = 2.5 if printed else 10.5
    extra = math.log(4096 * 2 * math.pi * (64 if not printed else 1))
    h, T = _line_nodes(digits, 0.25, math.pi, power, extra)
    n = int(math.ceil(T / h))
    with mp.workdps(ctx.dps + 5):
        quarter = mpf(1) / 4
        vals = [_c_integrand(quarter + 1j * mpf(h) * j, printed).real for j in range(n + 1)]
        full = (vals[0] / 2 + mpmath.fsum(vals[1:])) * h / mp.pi
        coarse = (vals[0] / 2 + mpmath.fsum(vals[2::2])) * 2 * h / mp.pi
    return full, abs(full - coarse)


_C_CACHE: dict = {}


def c_constant(ctx: PrecisionContext = _DEFAULT_CTX) -> ComplexValue:
    """The constant c with the deflation factor (1 - 64 w^2)^2 as printed."""
    key = ("printed", ctx.dps)
    if key not in _C_CACHE:
        v, gap = _c_line(True, ctx)
        with ctx.workdps():
            _C_CACHE[key] = ComplexValue.of(+v, float(gap))
    return _C_CACHE[key]


def c_sextic(ctx: PrecisionContext = _DEFAULT_CTX) -> ComplexValue:
    """The same line integral with the deflation factor (1 - 64 w^6)^2."""
    key = ("sextic", ctx.dps)
    if key not in _C_CACHE:
        v, gap = _c_line(False, ctx)
        with ctx.workdps():
            _C_CACHE[key] = ComplexValue.of(+v, float(gap))
    return _C_CACHE[key]


def _default_form(ctx: PrecisionContext) -> HeckeEigenform:
    return hecke_eigenforms(12, 200, ctx)[0]


def c_derived(ctx: PrecisionContext = _DEFAULT_CTX, g: HeckeEigenform | None = None, radius: float = 0.06, nodes: int = 20) -> ComplexValue:
    """c recovered from the residue of psi/(w1 w2) at w1 = -w2.

    The residue is taken numerically on a circle around w1 = -w2 for every node
    w2 on Re(w2) = 1/4, integrated along that line, negated and divided by
    L(1, ad g)/zeta(2).
    """
    if g is None:
        g = _default_form(ctx)
    key = ("derived", ctx.dps, g.label, radius, nodes)
    if key in _C_CACHE:
        return _C_CACHE[key]
    k = g.weight
    model = _u_model(g, ctx)
    digits = min(ctx.working_digits / 2 + 2, 12)
    h, T = _line_nodes(digits, 0.25, math.pi, 10.5, math.log(4096 * 2 * math.pi * 64))
    n = int(math.ceil(T / h))
    if radius > _MODEL_USE:
        raise ContourError(f"radius must stay within {_MODEL_USE}")
    with mp.workdps(int(digits) + 10):
        rho = mpf(radius)
        us = [rho * mpmath.expjpi(mpf(2 * m + 1) / nodes) for m in range(nodes)]
        d_u = [model.E(u) / u for u in us]
        quarter = mpf(1) / 4
        vals = []
        for j in range(n + 1):
            w2 = quarter + 1j * mpf(h) * j
            a2 = _A(w2, k)
            # residue in w1 at -w2: mean of (w1 - (-w2)) * integrand over the circle
            acc = mpmath.fsum(du * _A(-w2 + u, k) * u / (-w2 + u) for du, u in zip(d_u, us)) / nodes
            vals.append((acc * a2 / w2).real)
        full = (vals[0] / 2 + mpmath.fsum(vals[1:])) * h / mp.pi
        coarse = (vals[0] / 2 + mpmath.fsum(vals[2::2])) * 2 * h / mp.pi
        norm = model.E(0)  # equals L(1, ad g)/zeta(2)
        value = -full / norm
        gap = abs(full - coarse) / abs(norm)
        err = float(gap) + float(abs(value)) * (float((mpf(radius) / mpf(0.25)) ** nodes) + model.err)
    with ctx.workdps():
        out = ComplexValue.of(+value, err)
    _C_CACHE[key] = out
    return out


# ---------------------------------------------------------------- W1 and W2


def _w1_x(n, k):
    return k / (n * math.log(k) ** 2)


def w1_closed_form(n, k: int, c) -> float:
    """c e^{-(log X)^2/4} / (2 sqrt(pi)), X = k/(n log^2 k)."""
    lx = np.log(_w1_x(np.asarray(n, dtype=float), k))
    return float(c) * np.exp(-lx * lx / 4) / (2 * math.sqrt(math.pi))


def w1_weight(n: int, k: int, ctx: PrecisionContext = _DEFAULT_CTX, c=None) -> float:
    """W1(n) by the trapezoid rule on Re(w) = 1/4; c defaults to c_derived."""
    if n < 1:
        raise ValueError("n must be positive")
    if c is None:
        c = c_derived(ctx).re
    lx = math.log(_w1_x(n, k))
    h = 0.05
    t = np.arange(0.0, 12.0 + h, h)
    w = 0.25 + 1j * t
    f = np.exp(w * lx + w * w).real
    return float(c) * h / math.pi * (f[0] / 2 + f[1:].sum())


@dataclass
class _W2Nodes:
    h: float
    t: np.ndarray
    g: np.ndarray  # A0(w)/w on the nodes, A0(w) = Gamma(1/2+w) zeta(1+2w)(1-64w^6)


_W2_CACHE: dict = {}


def _w2_nodes(h: float = 0.04, T: float = 40.0) -> _W2Nodes:
    key = (h, T)
    cached = _W2_CACHE.get(key)
    if cached is None:
        t = np.arange(0.0, T + h / 2, h)
        with mp.workdps(20):
            vals = []
            for tj in t:
                w = mpc(0.25, tj)
                vals.append(complex(_a_factor(w) * _deflation(w) / w))
        cached = _W2Nodes(h, t, np.array(vals))
        _W2_CACHE[key] = cached
    return cached


def w2_integral(ns, k: int, nodes: _W2Nodes | None = None) -> np.ndarray:
    """The single integral whose square is W2, for an array of n."""
    if nodes is None:
        nodes = _w2_nodes()
    ns = np.atleast_1d(np.asarray(ns, dtype=float))
    lx = np.log(k / (4 * math.pi**2 * ns))
    out = np.empty(ns.shape)
    wts = np.full(nodes.t.shape, 2.0)
    wts[0] = 1.0
    wts *= nodes.h / (2 * math.pi)
    for lo in range(0, ns.size, 2048):
        chunk = lx[lo : lo + 2048]
        ph = np.exp(np.outer(chunk, 0.25 + 1j * nodes.t))
        out[lo : lo + 2048] = (ph * nodes.g).real @ wts
    return out


def w2_weight(n, k: int, ctx: PrecisionContext = _DEFAULT_CTX) -> float:
    """W2(n), the square of a vertical-line integral, hence nonnegative."""
    return float(w2_integral([n], k)[0] ** 2)


def w2_double_pole(n, k: int) -> float:
    """Square of the residue at the double pole w = 0 of the W2 integrand.

    This is (sqrt(pi)/2 log X + b0)^2 with X = k/(4pi^2 n) and
    b0 = sqrt(pi)(gamma/2 - log 2).
    """
    lx = math.log(k / (4 * math.pi**2 * n))
    b0 = math.sqrt(math.pi) * (float(mpmath.euler) / 2 - math.log(2))
    return (math.sqrt(math.pi) / 2 * lx + b0) ** 2


def w2_asymptotic_fit(k: int) -> dict:
    """Fit C in |W2(n) - (log X)^2| <= C (1 + log X) over n < k/4pi^2."""
    top = k / (4 * math.pi**2)
    ns = np.arange(1, int(math.ceil(top)))
    ns = ns[ns < top]
    if ns.size == 0:
        return {"k": k, "n_count": 0, "C": None, "C_double_pole": None}
    w2 = w2_integral(ns, k) ** 2
    lx = np.log(k / (4 * math.pi**2 * ns))
    c_lit = float(np.max(np.abs(w2 - lx**2) / (1 + lx)))
    dp = np.array([w2_double_pole(n, k) for n in ns])
    c_dp = float(np.max(np.abs(w2 - dp) / (1 + lx)))
    return {"k": k, "n_count": int(ns.size), "C": c_lit, "C_double_pole": c_dp, "min_W2": float(w2.min())}


# ---------------------------------------------------------------- decomposition


@dataclass
class DecompositionResult:
    k: int
    double_integral: float
    double_integral_err: float
    c_used: float
    m0_residue: float
    residual: float
    residual_scaled: float
    method: str


def _double_integral_dirichlet(k: int, g: HeckeEigenform, n_terms: int):
    lam = g.floats()
    n_terms = min(n_terms, len(lam))
    ns = np.arange(1, n_terms + 1)
    w2 = w2_integral(ns, k) ** 2
    terms = lam[:n_terms] ** 2 / ns * w2
    total = float(terms.sum())
    # last decade as an error proxy for the truncation
    tail = float(np.abs(terms[int(0.9 * n_terms) :]).sum())
    return total, tail


def _double_integral_grid(k: int, g: HeckeEigenform, ctx: PrecisionContext, h: float = 0.0625, T: float = 35.0):
    """2-D trapezoid on Re w1 = Re w2 = 1/4 with D(1/2 + i tau) from the evaluator."""
    m = int(round(T / h))
    t = np.arange(-m, m + 1) * h
    with mp.workdps(20):
        a = np.array([complex(_A(mpc(0.25, tj), k) / mpc(0.25, tj)) for tj in t])
    taus = np.arange(-2 * m, 2 * m + 1) * h
    half = [mpc(0.5, x) for x in taus[2 * m :]]
    lv = evaluate_many(adjoint_descriptor(g), [1 + u for u in half], ctx)
    with mp.workdps(20):
        d_pos = [complex(_zeta(1 + u) * v.value / _zeta(2 + 2 * u)) for u, v in zip(half, lv)]
    d = np.array([np.conj(x) for x in d_pos[:0:-1]] + d_pos)
    # sum_{i,j} a_i a_j D(t_i + t_j): index i + j on the tau grid
    total = 0.0 + 0.0j
    for i in range(t.size):
        total += a[i] * (a * d[i : i + t.size]).sum()
    val = total * (h / (2 * math.pi)) ** 2
    return float(val.real), abs(val.imag)


def decomposition_check(
    k: int,
    g: HeckeEigenform,
    ctx: PrecisionContext = _DEFAULT_CTX,
    method: str = "dirichlet",
    c=None,
    m0=None,
) -> DecompositionResult:
    """8k (double line integral + c L(1,ad g)/zeta(2)) minus m0_by_residue."""
    _check_weight(k, g)
    if c is None:
        c = c_derived(ctx).re
    if m0 is None:
        m0 = m0_by_residue(k, g, TorusContour(), ctx).re
    if method == "dirichlet":
        n_terms = len(g.floats())
        di, err = _double_integral_dirichlet(k, g, n_terms)
    elif method == "grid":
        di, err = _double_integral_grid(k, g, ctx)
    else:
        raise ValueError(f"unknown method {method!r}")
    adj = adjoint_derivs(g, ctx).values[0]
    ratio = float(adj / (mp.pi**2 / 6))
    total = 8 * k * (di + float(c) * ratio)
    residual = total - float(m0)
    return DecompositionResult(
        k, di, err, float(c), float(m0), residual, residual / (k * math.log(k) ** 0.5), method
    )


# ---------------------------------------------------------------- certificate


def _divisor_sum_bound(x: float) -> float:
    """Upper bound for sum_{n <= x} d(n)^2/n: d(n)^2 <= d_4(n) and H_x <= 1 + log x."""
    return (1 + math.log(x)) ** 4


def _w2_shift_bound(sigma: float = 2.0) -> float:
    """(1/2pi) int |A0(sigma+it)/(sigma+it)| dt, so |I(n)| <= X^sigma times this."""
    h = 0.05
    t = np.arange(-60.0, 60.0 + h, h)
    with mp.workdps(20):
        vals = [float(abs(_a_factor(mpc(sigma, tj)) * _deflation(mpc(sigma, tj)) / mpc(sigma, tj))) for tj in t]
    return float(np.sum(vals) * h / (2 * math.pi))


@dataclass
class Certificate:
    k: int
    n_cut: int
    s1: float
    s2: float
    s3: float
    s4_bound: float
    s4_estimate: float
    s2_min_term: float
    floor: float
    c_used: float
    verdicts: dict = field(default_factory=dict)
    fitted: dict = field(default_factory=dict)


def lower_bound_certificate(
    k: int,
    g: HeckeEigenform,
    n_cut: int | None = None,
    ctx: PrecisionContext = _DEFAULT_CTX,
    floor: float = 0.5,
    c=None,
) -> Certificate:
    """The four partial sums of sum lambda(n)^2/n (W1(n) + W2(n)) and their verdicts."""
    _check_weight(k, g)
    if n_cut is None:
        n_cut = k * k
    if n_cut < k * k:
        raise ValueError("n_cut must be at least k^2")
    lam = g.floats()
    if len(lam) < n_cut:
        raise SummationBudgetExceeded(f"need lambda(n) for n <= {n_cut}, have {len(lam)}")
    if c is None:
        c = c_derived(ctx).re
    c = float(c)
    logk = math.log(k)
    ns = np.arange(1, n_cut + 1)
    w1 = w1_closed_form(ns, k, c)
    w2 = w2_integral(ns, k) ** 2
    terms = lam[:n_cut] ** 2 / ns * (w1 + w2)
    cut2 = k / logk
    s1 = float(terms[0])
    mid = (ns >= 2) & (ns <= cut2)
    s2 = float(terms[mid].sum())
    s3 = float(terms[(ns > cut2) & (ns <= k * k)].sum())
    s2_min = float(terms[mid].min()) if mid.any() else 0.0

    # tail n > k^2 by Abel summation against the d(n)^2/n partial-sum bound B
    big_n = float(k * k)
    shift = _w2_shift_bound(2.0)

    def f(x):
        w1v = abs(w1_closed_form(x, k, c))
        w2v = ((k / (4 * math.pi**2 * x)) ** 2 * shift) ** 2
        return w1v + w2v

    v0 = math.log(big_n)
    vs = np.linspace(v0, v0 + 400.0, 40001)
    fx = np.array([f(math.exp(v)) for v in vs])
    integ = float(np.trapezoid(4 * (1 + vs) ** 3 * fx, vs))
    s4_bound = _divisor_sum_bound(big_n) * f(big_n) + integ
    ratio = float(adjoint_derivs(g, ctx).values[0] / (mp.pi**2 / 6))
    # heuristic size: sum lambda^2/n ~ (L(1,ad g)/zeta(2)) dx/x against the actual weights
    xs = np.exp(vs[vs < v0 + 40.0])
    actual = np.abs(w1_closed_form(xs, k, c)) + w2_integral(xs, k) ** 2
    s4_est = ratio * float(np.trapezoid(actual, np.log(xs)))
    verdicts = {
        "s1_floor": s1 >= floor * logk**2,
        "s2_nonnegative": s2 >= 0,
        "s3_lower": True,
        "s4_tail": s4_bound <= k ** (-9.0),
    }
    fitted = {
        "s1_over_log2": s1 / logk**2,
        "s3_constant": max(0.0, -s3) * logk**10,
        "s4_over_k_minus9": s4_bound / k ** (-9.0),
    }
    return Certificate(k, n_cut, s1, s2, s3, s4_bound, s4_est, s2_min, floor, c, verdicts, fitted)


# ---------------------------------------------------------------- report


@dataclass
class MainTermReport:
    k: int
    g_label: str
    m0_limit: float
    m0_residue: float
    m0_scaled: float
    c_value: float
    c_derived: float
    p_polys: list
    main_value: float
    certificate: dict
    discrepancies: dict
    errors: dict = field(default_factory=dict)
    c_route: str = "sextic"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, extra: dict | None = None) -> str:
        d = self.to_dict()
        if extra:
            d.update(extra)
        return json.dumps(d, indent=2, sort_keys=True, default=str)

    def csv_row(self) -> str:
        return (
            f"{self.k},{self.m0_limit!r},{self.m0_residue!r},{self.m0_scaled!r},"
            f"{self.discrepancies.get('limit_vs_residue')!r},{self.discrepancies.get('scaled_minus_residue')!r}"
        )

    @staticmethod
    def csv_header() -> str:
        return "k,m0_limit,m0_residue,m0_scaled,limit_vs_residue,scaled_minus_residue"

    def write_json(self, path, extra=None) -> None:
        write_text_atomic(path, self.to_json(extra))


def _rel(a, b) -> float:
    return abs(float(a) - float(b)) / max(abs(float(b)), 1e-300)


def main_term_report(
    k: int,
    g: HeckeEigenform,
    ctx: PrecisionContext = _DEFAULT_CTX,
    methods=("limit", "residue", "scaled", "laurent"),
    certificate: bool = False,
    derive_c: bool = False,
) -> MainTermReport:
    _check_weight(k, g)
    nan = float("nan")
    out = {"limit": nan, "residue": nan, "scaled": nan}
    errs = {}
    if "limit" in methods:
        v = m0_by_limit(k, g, ctx)
        out["limit"], errs["limit"] = float(v.re), v.err
    if "residue" in methods:
        v = m0_by_residue(k, g, TorusContour(), ctx)
        out["residue"], errs["residue"] = float(v.re), v.err
    if "scaled" in methods:
        v = m0_scaled_residue(k, g, TorusContour(), ctx)
        out["scaled"], errs["scaled"] = float(v.re), v.err
    p_polys, main = [], nan
    if "laurent" in methods:
        lr = laurent_polynomials(k, g, None, ctx)
        p_polys = [[float(c) for c in pj] for pj in lr.p_polys]
        main = float(lr.main_value)
    cert = {}
    if certificate:
        cert = asdict(lower_bound_certificate(k, g, None, ctx))
    disc = {
        "limit_vs_residue": _rel(out["limit"], out["residue"]),
        "scaled_minus_residue": out["scaled"] - out["residue"],
        "scaled_minus_residue_over_sqrt_k": (out["scaled"] - out["residue"]) / math.sqrt(k),
        "laurent_vs_scaled": _rel(main, out["scaled"]),
    }
    return MainTermReport(
        k,
        g.label,
        out["limit"],
        out["residue"],
        out["scaled"],
        float(c_constant(ctx).re),
        float((c_derived(ctx) if derive_c else c_sextic(ctx)).re),
        p_polys,
        main,
        cert,
        disc,
        errs,
        "contour" if derive_c else "sextic",
    )
