"""Smoothed approximate functional equation evaluator for self-dual L-functions.

A descriptor carries Dirichlet coefficients b(n) and gamma data, so that

    Lambda(s) = Q^{s/2} prod_j Gamma_R(s + mu_j) L(s),  Gamma_R(s) = pi^{-s/2} Gamma(s/2),

satisfies Lambda(s) = eps Lambda(1 - s). With a smoothing G (G(0) = 1) and
nodes z_j = c0 + i t_j on one vertical line,

    Lambda(s) = I_G(s) + eps I_G~(1 - s) - r1 G(1-s)/(1-s) + r0 G(-s)/s,
    I_G(s) = (1/2 pi i) int gamma(z) L_N(z) G(z - s)/(z - s) dz,

where L_N is the truncated Dirichlet series. The node values gamma(z_j) L_N(z_j)
do not depend on s, so a plan is built once per batch and reused.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
import mpmath
from gmpy2 import mpc as gmpc
from gmpy2 import mpfr
import numpy as np
from mpmath import mp, mpc, mpf
from scipy.special import loggamma as np_loggamma
from scipy.special import logsumexp

from ._gmp import bits_for, to_g, to_m
from ._gmp import lgamma as g_lgamma
from .cache import DiskCache
from .errors import (
    FunctionalEquationError,
    InsufficientCoefficientsError,
    PoleInputError,
    PrecisionFailure,
    QuadratureFailure,
)
from .modforms import HeckeEigenform
from .specialfn import ComplexValue, PrecisionContext, _loggamma

# nats of growth tolerated from the gamma factor before switching to Gaussian smoothing
_AMP_NATS = 14.0


@dataclass(frozen=True, eq=False)
class LFunctionDescriptor:
    degree: int
    coefficients: tuple
    gamma_shifts: tuple
    conductor_scale: float = 1.0
    pole_at_1: bool = False
    sign_hint: float | None = None
    pole_residue: object = None
    label: str = ""
    _state: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.coefficients[0] != 1:
            raise ValueError("b(1) must equal 1")
        if len(self.gamma_shifts) != self.degree:
            raise ValueError("need one gamma shift per degree")

    @property
    def n_coefficients(self) -> int:
        return len(self.coefficients)


@dataclass(frozen=True)
class AdjointDerivatives:
    values: tuple
    errors: tuple

    def __post_init__(self):
        if not self.values[0] > 0:
            raise PrecisionFailure("L(1, ad g) came out nonpositive")


# ---------------------------------------------------------------- builders


def _spf_table(n: int) -> list[int]:
    spf = list(range(n + 1))
    for p in range(2, int(n**0.5) + 1):
        if spf[p] == p:
            for m in range(p * p, n + 1, p):
                if spf[m] == m:
                    spf[m] = p
    return spf


def build_zeta(n_max: int = 4000) -> LFunctionDescriptor:
    return LFunctionDescriptor(1, tuple([mpf(1)] * n_max), (0,), 1.0, True, 1.0, mpf(1), "zeta")


def build_gl2(g: HeckeEigenform) -> LFunctionDescriptor:
    """L(s, g); 2 (2pi)^{-s-(k-1)/2} Gamma(s+(k-1)/2) = Gamma_R(s+(k-1)/2) Gamma_R(s+(k+1)/2)."""
    k = g.weight
    return LFunctionDescriptor(
        2, tuple(g.lambdas), (mpf(k - 1) / 2, mpf(k + 1) / 2), 1.0, False, None, None, f"L(s,{g.label})"
    )


def _coefficient_cache(cache: DiskCache | None, name: str, compute, dps: int):
    if cache is not None:
        text = cache.read("lcoeff", name)
        if text is not None:
            lines = text.split("\n")
            if lines[0] == f"rsmoment-lcoeff 1 dps {dps}":
                with mp.workdps(dps):
                    return tuple(mpf(x) for x in lines[1:] if x)
    out = compute()
    if cache is not None:
        with mp.workdps(dps):
            body = "\n".join(mpmath.nstr(x, dps, min_fixed=-1, max_fixed=-1) for x in out)
        cache.write("lcoeff", name, f"rsmoment-lcoeff 1 dps {dps}\n" + body + "\n")
    return out


def build_rankin_selberg(f: HeckeEigenform, g: HeckeEigenform, cache: DiskCache | None = None) -> LFunctionDescriptor:
    """L(s, f x g) = zeta(2s) sum lambda_f(n) lambda_g(n) n^{-s}, weights l <= k."""
    if f.weight > g.weight:
        f, g = g, f
    ell, k = f.weight, g.weight
    n_max = min(f.n_max, g.n_max)
    same = f.weight == g.weight and f.index == g.index

    def compute():
        prod = [a * b for a, b in zip(f.lambdas[:n_max], g.lambdas[:n_max])]
        out = list(prod)
        d = 2
        while d * d <= n_max:
            for m in range(1, n_max // (d * d) + 1):
                out[d * d * m - 1] += prod[m - 1]
            d += 1
        return tuple(out)

    dps = mp.dps
    coeffs = _coefficient_cache(cache, f"rs-{f.label}-{g.label}-n{n_max}-d{dps}.txt.gz", compute, dps)
    a = mpf(k + ell) / 2
    b = mpf(k - ell) / 2
    shifts = (a - 1, a, b, b + 1)
    residue = None
    if same:
        from_adj = g._memo.get("adjoint_at_1")
        residue = from_adj
    return LFunctionDescriptor(4, coeffs, shifts, 1.0, same, None, residue, f"L(s,{f.label}x{g.label})")


def _adjoint_coefficients(lam) -> tuple:
    n_max = len(lam)
    spf = _spf_table(n_max)
    b = [mpf(0)] * (n_max + 1)
    b[1] = mpf(1)
    for n in range(2, n_max + 1):
        p = spf[n]
        m, e = n, 0
        while m % p == 0:
            m //= p
            e += 1
        if m > 1:
            b[n] = b[m] * b[n // m]
            continue
        # prime power p^e: 1 / (1 - A X + A X^2 - X^3), A = lambda(p^2) = lambda(p)^2 - 1
        big_a = lam[p - 1] ** 2 - 1
        seq = [mpf(1), big_a]
        for j in range(2, e + 1):
            seq.append(big_a * seq[j - 1] - big_a * seq[j - 2] + (seq[j - 3] if j >= 3 else 0))
        b[n] = seq[e]
    return tuple(b[1:])


def build_adjoint(g: HeckeEigenform, cache: DiskCache | None = None) -> LFunctionDescriptor:
    """L(s, ad g) with Gamma_R(s+1) Gamma_R(s+k-1) Gamma_R(s+k) and level one."""
    k = g.weight
    dps = mp.dps
    coeffs = _coefficient_cache(
        cache, f"adj-{g.label}-n{g.n_max}-d{dps}.txt.gz", lambda: _adjoint_coefficients(g.lambdas), dps
    )
    return LFunctionDescriptor(3, coeffs, (1, k - 1, k), 1.0, False, 1.0, None, f"L(s,ad {g.label})")


def build_maass_gl2(lam, t: float, parity: int) -> LFunctionDescriptor:
    """L(s, f) for a Maass form with spectral parameter t; parity 0 even, 1 odd."""
    t = mpf(t)
    return LFunctionDescriptor(
        2, tuple(lam), (parity + mpc(0, t), parity - mpc(0, t)), 1.0, False, None, None, f"L(s,maass {t})"
    )


def build_maass_rankin_selberg(lam_f, t: float, g: HeckeEigenform) -> LFunctionDescriptor:
    """L(s, f x g) for a Maass form f and holomorphic g of weight k."""
    k = g.weight
    n_max = min(len(lam_f), g.n_max)
    prod = [mpf(a) * b for a, b in zip(lam_f[:n_max], g.lambdas[:n_max])]
    out = list(prod)
    d = 2
    while d * d <= n_max:
        for m in range(1, n_max // (d * d) + 1):
            out[d * d * m - 1] += prod[m - 1]
        d += 1
    it = mpc(0, t)
    a, b = mpf(k - 1) / 2, mpf(k + 1) / 2
    return LFunctionDescriptor(4, tuple(out), (a + it, a - it, b + it, b - it), 1.0, False, None, None, "maass x g")


def build_maass_adjoint(lam_f, t: float) -> LFunctionDescriptor:
    """L(s, ad f) for an even Maass form: Gamma_R(s) Gamma_R(s + 2it) Gamma_R(s - 2it)."""
    it2 = mpc(0, 2 * t)
    return LFunctionDescriptor(3, _adjoint_coefficients([mpf(x) for x in lam_f]), (0, it2, -it2), 1.0, False, 1.0, None, "ad maass")


# ---------------------------------------------------------------- planning (float64)


def _log_gamma_np(desc: LFunctionDescriptor, z: np.ndarray) -> np.ndarray:
    out = z / 2 * math.log(desc.conductor_scale) if desc.conductor_scale != 1 else np.zeros_like(z)
    for mu in desc.gamma_shifts:
        w = z + complex(mu)
        out = out - w / 2 * math.log(math.pi) + np_loggamma(w / 2)
    return out


def _decay_rate(desc) -> float:
    return math.pi * desc.degree / 4


def _choose_width(desc, s: complex) -> float | None:
    """Gaussian width B for exp(w^2/B^2) smoothing, or None for G = 1."""
    a = _decay_rate(desc)
    if a * abs(s.imag) <= _AMP_NATS:
        return None
    return 2 * math.sqrt(_AMP_NATS) / a


def _log_dirichlet_bound(desc, sigma: float, n_max: int) -> float:
    """log of a bound for sum_{n<=N} |b(n)| n^{-sigma} assuming |b(n)| <= d_degree(n)."""
    d = desc.degree
    if sigma > 1.05:
        return d * math.log(float(mpmath.zeta(sigma)))
    # crude: sum_{n<=N} d(n)^.. n^{-sigma} <= N^{1-sigma} (log N + 1)^d / (1 - sigma) style
    ln = math.log(n_max) + 1
    return (1 - sigma) * math.log(n_max) + d * math.log(ln) + 1.0


def _envelope(desc, c: float, s: complex, width, taus: np.ndarray) -> np.ndarray:
    z = c + 1j * taus
    w = z - s
    val = _log_gamma_np(desc, z).real - np.log(np.abs(w))
    if width is not None:
        val = val + (w * w).real / width**2
    return val


@dataclass
class _Plan:
    c0: float
    h: float
    j_max: int
    n_terms: int
    node_values: list  # gamma(z_j) L_N(z_j) for j = 0..j_max (t_j = j h); negatives by conjugation
    digits: int
    bits: int


def _representatives(s_list, count: int = 6):
    """A few batch points spanning the extremes of Re s and |Im s|."""
    if len(s_list) <= count:
        return list(s_list)
    picks = {
        min(range(len(s_list)), key=lambda i: s_list[i].real),
        max(range(len(s_list)), key=lambda i: s_list[i].real),
        min(range(len(s_list)), key=lambda i: abs(s_list[i].imag)),
        max(range(len(s_list)), key=lambda i: abs(s_list[i].imag)),
    }
    order = sorted(range(len(s_list)), key=lambda i: abs(s_list[i].imag))
    for q in range(1, count - 1):
        picks.add(order[q * (len(order) - 1) // (count - 1)])
    return [s_list[i] for i in sorted(picks)]


def _requirements(desc, s_list, digits: float, c0: float):
    """Window half-width, step and coefficient count needed for a batch at abscissa c0."""
    ln10 = math.log(10)
    tol_nats = digits * ln10 + 6
    t_hi = 0.0
    n_need = 8
    step = 1.0
    for s in _representatives(s_list):
        for target_s, dual in ((s, False), (1 - s, True)):
            width = _choose_width(desc, s)
            log_gs = float(_log_gamma_np(desc, np.array([s]))[0].real)
            thresh = log_gs - tol_nats
            span = 60.0
            while True:
                taus = np.arange(-span, span + 0.25, 0.25)
                env = _envelope(desc, c0, target_s, width, taus) + _log_dirichlet_bound(desc, c0, 10)
                above = np.nonzero(env > thresh)[0]
                if above.size == 0:
                    break
                if above[0] > 0 and above[-1] < taus.size - 1:
                    t_hi = max(t_hi, abs(taus[above[0]]), abs(taus[above[-1]]))
                    break
                span *= 2
                if span > 1e5:
                    raise QuadratureFailure("integrand window did not close")
            # coefficient count from the Mellin tail bound
            best_logm = []
            sig_grid = np.arange(max(1.3 - target_s.real, 0.3), 60.0, 0.5)
            taus = np.arange(-max(t_hi, 40.0) - 20, max(t_hi, 40.0) + 20, 0.5)
            for sp in sig_grid:
                env = _envelope(desc, target_s.real + sp, target_s, width, taus)
                best_logm.append((target_s.real + sp, logsumexp(env) + math.log(0.5 / (2 * math.pi))))
            n_try = 8
            while True:
                ln_n = math.log(n_try)
                tail = min(
                    lm + (1 - sg) * ln_n + (desc.degree - 1) * math.log(ln_n + 1) - math.log(sg - 1)
                    for sg, lm in best_logm
                )
                if tail < thresh:
                    break
                n_try = int(n_try * 1.15) + 1
                if n_try > 10**7:
                    raise InsufficientCoefficientsError("coefficient requirement exceeds 10^7")
            n_need = max(n_need, n_try)
            # trapezoid step from the amplification on the shifted line c0 - delta
            delta = c0 - max(s.real, 1 - s.real) - 0.25
            taus = np.arange(-t_hi - 30, t_hi + 30, 0.25)
            env = _envelope(desc, c0 - delta, target_s, width, taus) + _log_dirichlet_bound(desc, c0 - delta, n_try)
            log_amp = logsumexp(env) + math.log(0.25 / (2 * math.pi)) - log_gs
            step = min(step, 2 * math.pi * delta / (max(log_amp, 0.0) + tol_nats))
    return t_hi + 2.0, step, n_need


def _fixed_point_sums(coeffs, c0: float, h: float, j_max: int, prec_bits: int, cache: dict):
    """L_N(c0 + i j h) for j = 0..j_max using fixed-point integer arithmetic."""
    n_terms = len(coeffs)
    key = ("amp", c0, n_terms, prec_bits)
    amps = cache.get(key)
    with mp.workprec(prec_bits + 20):
        scale = mpf(2) ** prec_bits
        if amps is None:
            amps = np.array(
                [gmpy2.mpz(int(mpmath.nint(b * mpmath.power(n, -c0) * scale))) for n, b in enumerate(coeffs, 1)],
                dtype=object,
            )
            cache[key] = amps
        rot_key = ("rot", h, n_terms, prec_bits)
        rot = cache.get(rot_key)
        if rot is None:
            rr, ri = [], []
            for n in range(1, n_terms + 1):
                ang = h * mpmath.log(n)
                rr.append(gmpy2.mpz(int(mpmath.nint(mpmath.cos(ang) * scale))))
                ri.append(gmpy2.mpz(int(mpmath.nint(-mpmath.sin(ang) * scale))))
            rot = (np.array(rr, dtype=object), np.array(ri, dtype=object))
            cache[rot_key] = rot
    rr, ri = rot
    vr = amps.copy()
    vi = np.array([gmpy2.mpz(0)] * n_terms, dtype=object)
    out = []
    for _ in range(j_max + 1):
        out.append(gmpc(gmpy2.mul_2exp(mpfr(vr.sum()), -prec_bits), gmpy2.mul_2exp(mpfr(vi.sum()), -prec_bits)))
        vr, vi = (vr * rr - vi * ri) >> prec_bits, (vr * ri + vi * rr) >> prec_bits
    return out


def _lgamma_mp(desc, z):
    out = z / 2 * mpmath.log(desc.conductor_scale) if desc.conductor_scale != 1 else mpf(0)
    lp = mpmath.log(mp.pi)
    for mu in desc.gamma_shifts:
        w = z + mu
        out += -w / 2 * lp + _loggamma(w / 2)
    return out


def _lgamma_g(desc, z):
    """log gamma(z) for the descriptor's completion, in gmpy2 arithmetic."""
    out = gmpc(0)
    if desc.conductor_scale != 1:
        out = z / 2 * gmpy2.log(mpfr(desc.conductor_scale))
    lp = gmpy2.log(gmpy2.const_pi())
    for mu in desc._state.setdefault("g_shifts", [to_g(mu) for mu in desc.gamma_shifts]):
        w = z + mu
        out += -w / 2 * lp + g_lgamma(w / 2)
    return out


def _conj_closed(desc) -> bool:
    shifts = [complex(mu) for mu in desc.gamma_shifts]
    return all(any(abs(x.conjugate() - y) < 1e-12 for y in shifts) for x in shifts)


def _get_plan(desc, s_list, ctx: PrecisionContext) -> _Plan:
    digits = ctx.working_digits / 2 + 8
    base = max(max(s.real, 1 - s.real) for s in s_list)
    state = desc._state.setdefault("plans", [])
    for plan in state:
        if plan.digits >= digits and plan.bits >= bits_for(ctx.dps + 5) and base + 1.0 <= plan.c0 <= base + 2.5:
            t_hi, step, n_need = _requirements(desc, s_list, digits, plan.c0)
            if plan.h <= step and plan.j_max * plan.h >= t_hi and plan.n_terms >= n_need:
                return plan
    c0 = math.ceil((base + 1.5) * 4) / 4
    t_hi, step, n_need = _requirements(desc, s_list, digits, c0)
    # step from a dyadic ladder so later batches can share the plan
    h = 2.0 ** math.floor(math.log2(step))
    t_hi = 10 * math.ceil(t_hi / 10)
    if n_need > desc.n_coefficients:
        raise InsufficientCoefficientsError(
            f"{desc.label} needs {n_need} coefficients at s={s_list[0]}, only {desc.n_coefficients} supplied"
        )
    if n_need > ctx.truncation_bound:
        raise InsufficientCoefficientsError(f"{desc.label} needs {n_need} terms, above truncation_bound")
    n_terms = min(desc.n_coefficients, max(n_need, int(n_need * 1.2)))
    j_max = int(math.ceil(t_hi / h))
    bits = bits_for(ctx.dps + 5)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        sums = _fixed_point_sums(desc.coefficients[:n_terms], c0, h, j_max, bits + 16, desc._state)
        vals = [gmpy2.exp(_lgamma_g(desc, gmpc(c0, j * h))) * sums[j] for j in range(j_max + 1)]
    plan = _Plan(c0, h, j_max, n_terms, vals, int(math.ceil(digits)), bits)
    state.append(plan)
    return plan


# ---------------------------------------------------------------- evaluation


def _smoothing(width, shift=0):
    """G(w) = exp(w^2/B^2 + shift w) with B = None meaning no Gaussian factor."""
    if width is None and shift == 0:
        return None
    inv_b2 = 0 if width is None else 1 / mpfr(width) ** 2
    shift = mpfr(shift)

    def g(w):
        return gmpy2.exp(w * w * inv_b2 + shift * w)

    return g


def _node_integral(plan: _Plan, s, g):
    """(h/2pi) sum_j F_j G(z_j - s)/(z_j - s) over t_j in [-j_max h, j_max h]."""
    total = gmpc(0)
    c0 = mpfr(plan.c0)
    h = mpfr(plan.h)
    for j, val in enumerate(plan.node_values):
        w = gmpc(c0, j * h) - s
        if g is None:
            total += val / w
            if j:
                wc = gmpc(c0, -j * h) - s
                total += val.conjugate() / wc
        else:
            total += val * g(w) / w
            if j:
                wc = gmpc(c0, -j * h) - s
                total += val.conjugate() * g(wc) / wc
    return total * h / (2 * gmpy2.const_pi())


def _lambda_pieces(desc, plan, s, width, shift):
    """Direct and dual pieces of Lambda(s) = direct + eps dual, in gmpy2 numbers."""
    g = _smoothing(width, shift)
    gt = _smoothing(width, -shift)
    direct = _node_integral(plan, s, g)
    dual = _node_integral(plan, 1 - s, gt)
    if desc.pole_at_1:
        if desc.pole_residue is None:
            raise ValueError(f"{desc.label} has a pole at 1 but no residue was supplied")
        r1 = gmpy2.exp(_lgamma_g(desc, gmpc(1))) * to_g(desc.pole_residue)
        gv = g or (lambda w: mpfr(1))
        # r0 = -eps r1, so the s = 0 pole term joins the dual piece
        return direct - r1 * gv(1 - s) / (1 - s), dual - r1 * gv(-s) / s
    return direct, dual


def _check_symmetric(desc):
    if not _conj_closed(desc):
        raise ValueError("gamma shifts must be closed under conjugation")


def _check_poles(desc, pts):
    for s in pts:
        if desc.pole_at_1 and abs(s - 1) < 1e-12:
            raise PoleInputError(f"{desc.label} has a pole at s=1")
        for mu in desc.gamma_shifts:
            w = (s + complex(mu)) / 2
            if abs(w.imag) < 1e-12 and w.real <= 0 and abs(w.real - round(w.real)) < 1e-12:
                raise PoleInputError("s is a pole of the gamma factor")


def evaluate_many(desc: LFunctionDescriptor, s_values, ctx: PrecisionContext) -> list[ComplexValue]:
    """L(desc, s) for a batch of points sharing one plan."""
    _check_symmetric(desc)
    pts = [complex(s) for s in s_values]
    _check_poles(desc, pts)
    eps = root_number(desc, ctx)
    plan = _get_plan(desc, pts, ctx)
    out = []
    with gmpy2.context(gmpy2.get_context(), precision=plan.bits):
        for s_c, s_raw in zip(pts, s_values):
            s = to_g(s_raw)
            a, b = _lambda_pieces(desc, plan, s, _choose_width(desc, s_c), 0)
            val = (a + eps * b) / gmpy2.exp(_lgamma_g(desc, s))
            out.append(to_m(val))
    with ctx.workdps():
        res = []
        for v in out:
            err = float(abs(v)) * 10.0 ** (-plan.digits) + 10.0 ** (-plan.digits)
            res.append(ComplexValue.of(v, err))
        return res


def evaluate(desc: LFunctionDescriptor, s, ctx: PrecisionContext) -> ComplexValue:
    return evaluate_many(desc, [s], ctx)[0]


_FE_POINTS = (complex(0.6, 0.35), complex(0.45, 0.8), complex(0.7, 1.3))


def functional_equation_check(desc: LFunctionDescriptor, test_points=_FE_POINTS, ctx: PrecisionContext | None = None):
    """Root number by least squares over two smoothings, and the worst relative mismatch."""
    ctx = ctx or PrecisionContext()
    _check_symmetric(desc)
    pts = [complex(p) for p in test_points]
    _check_poles(desc, pts)
    plan = _get_plan(desc, pts, ctx)
    with gmpy2.context(gmpy2.get_context(), precision=plan.bits):
        rows = []
        for p in pts:
            s = to_g(p)
            width = _choose_width(desc, p)
            a1, b1 = _lambda_pieces(desc, plan, s, width, 0)
            a2, b2 = _lambda_pieces(desc, plan, s, width, mpfr(1) / 3)
            rows.append((a1, b1, a2, b2))
        num = sum(((b2 - b1).conjugate() * (a1 - a2) for a1, b1, a2, b2 in rows), gmpc(0))
        den = sum((gmpy2.norm(b2 - b1) for a1, b1, a2, b2 in rows), mpfr(0))
        eps = num / den
        worst = 0.0
        for a1, b1, a2, b2 in rows:
            l1 = a1 + eps * b1
            l2 = a2 + eps * b2
            worst = max(worst, float(abs(l1 - l2) / abs(l1)))
        return float(eps.real), worst


def root_number(desc: LFunctionDescriptor, ctx: PrecisionContext) -> int:
    """Measured root number, cached on the descriptor; raises if it is not +-1."""
    cached = desc._state.get("eps")
    if cached is not None:
        return cached
    eps, viol = functional_equation_check(desc, _FE_POINTS, ctx)
    tol = 10.0 ** (-min(12, ctx.working_digits / 2 - 2))
    if abs(abs(eps) - 1) > tol or viol > tol:
        raise FunctionalEquationError(f"{desc.label}: measured eps={eps:.3e}, violation {viol:.2e}")
    sign = 1 if eps > 0 else -1
    if desc.sign_hint is not None and sign != desc.sign_hint:
        raise FunctionalEquationError(f"{desc.label}: measured sign {sign} disagrees with hint")
    desc._state["eps"] = sign
    desc._state["eps_violation"] = viol
    return sign


def derivative(desc: LFunctionDescriptor, s, j: int, radius: float, ctx: PrecisionContext, nodes: int = 32) -> ComplexValue:
    """j-th derivative by the trapezoid rule on a circle of the given radius."""
    return derivatives(desc, s, j, radius, ctx, nodes)[j]


def derivatives(desc, s, j_max: int, radius: float, ctx: PrecisionContext, nodes: int = 32) -> list[ComplexValue]:
    """L^{(j)}(s) for j = 0..j_max from one circle of evaluations."""
    if j_max < 0 or j_max > 4:
        raise ValueError("derivative order must lie in 0..4")
    s_c = complex(s)
    if desc.pole_at_1 and abs(s_c - 1) <= radius * 1.05:
        raise PoleInputError("pole of the L-function inside the derivative disc")
    with mp.workdps(ctx.dps + 5):
        r = mpf(radius)
        ws = [r * mpmath.expjpi(mpf(2 * m) / nodes) for m in range(nodes)]
        pts = [mpmath.mpmathify(s) + w for w in ws]
        vals = [v.value for v in evaluate_many(desc, pts, ctx)]
        out = []
        for j in range(j_max + 1):
            full = sum(v * w ** (-j) for v, w in zip(vals, ws)) / nodes
            half = sum(v * w ** (-j) for v, w in zip(vals[::2], ws[::2])) / (nodes // 2)
            fact = mpmath.factorial(j)
            err = float(abs(full - half) * fact) + float(fact / r**j) * 10.0 ** (-(ctx.working_digits / 2 + 8))
            out.append((full * fact, err))
    with ctx.workdps():
        return [ComplexValue.of(v, e) for v, e in out]


def adjoint_descriptor(g: HeckeEigenform) -> LFunctionDescriptor:
    desc = g._memo.get("adjoint_desc")
    if desc is None:
        desc = build_adjoint(g)
        g._memo["adjoint_desc"] = desc
    return desc


def adjoint_derivs(g: HeckeEigenform, ctx: PrecisionContext) -> AdjointDerivatives:
    """L^{(j)}(1, ad g) for j = 0..3."""
    key = ("adjoint_derivs", ctx)
    cached = g._memo.get(key)
    if cached is not None:
        return cached
    with ctx.workdps():
        vals = derivatives(adjoint_descriptor(g), 1, 3, 0.1, ctx)
        out = AdjointDerivatives(tuple(v.re for v in vals), tuple(v.err for v in vals))
    g._memo[key] = out
    g._memo.setdefault("adjoint_at_1", out.values[0])
    return out
