"""The six spectral components of the second-moment identity and its verification.

Left side: M_hol (holomorphic forms of weight l <= k), M_Maass (ingested Maass
data plus a tail budget), M_Eis (continuous spectrum). Right side: M0 from
mainterm, M_Eis~ (continuous spectrum of the dual expansion) and a band for
|M_Maass~|, whose phases are unknown.

Critical-line L-values are memoised on the eigenform keyed by (kind, t, dps),
so refining a trapezoid grid by halving its step reuses every old node.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

import mpmath
import numpy as np
from mpmath import mp, mpc, mpf
from scipy.special import k0

from .cache import write_text_atomic
from .errors import (
    DataParseError,
    DataValidationError,
    DimensionZeroError,
    InsufficientCoefficientsError,
)
from .lfun import (
    adjoint_descriptor,
    build_gl2,
    build_maass_adjoint,
    build_maass_gl2,
    build_maass_rankin_selberg,
    build_rankin_selberg,
    evaluate,
    evaluate_many,
)
from .mainterm import TorusContour, m0_by_residue
from .modforms import HeckeEigenform, _cusp_form_abs2, _domain_nodes, cusp_dim, hecke_eigenforms, petersson_rho1_sq
from .specialfn import PrecisionContext, _zeta
from .weights import h_hol, h_maass, h_tilde

_DEFAULT_CTX = PrecisionContext()

DEFAULT_C_TAIL = 100.0
DEFAULT_MAJORANT = 1e3
# smallest spectral parameter of an even Maass cusp form for SL2(Z)
FIRST_EVEN_MAASS_T = 13.7797513518907
REPORT_SCHEMA_VERSION = 1


# ---------------------------------------------------------------- Maass data


@dataclass(frozen=True)
class MaassFormData:
    t: float
    parity: int
    lam: tuple
    source_tag: str = ""

    def __post_init__(self):
        if not self.t > 0:
            raise DataValidationError(f"spectral parameter must be positive, got {self.t}")
        if self.parity not in (1, -1):
            raise DataValidationError(f"parity must be +1 or -1, got {self.parity}")
        if not self.lam or self.lam[0] != 1.0:
            raise DataValidationError(f"record t={self.t}: lambda(1) must equal 1")

    @property
    def n_max(self) -> int:
        return len(self.lam)


_PRECISION_RE = re.compile(r"^#\s*precision\s*[:=]\s*(\S+)", re.I)
_SOURCE_RE = re.compile(r"^#\s*source\s*[:=]\s*(.+)$", re.I)


def _hecke_violation(lam, limit: int) -> tuple[float, tuple]:
    """Worst |lambda(mn) - lambda(m) lambda(n)| over coprime m, n and lambda(p^2) = lambda(p)^2 - 1."""
    worst, where = 0.0, ()
    n_max = min(len(lam), limit)
    for m in range(2, n_max + 1):
        for n in range(m + 1, n_max // m + 1):
            if math.gcd(m, n) == 1:
                d = abs(lam[m * n - 1] - lam[m - 1] * lam[n - 1]) / (1 + abs(lam[m - 1] * lam[n - 1]))
                if d > worst:
                    worst, where = d, (m, n)
    p = 2
    while p * p <= n_max:
        if all(p % q for q in range(2, int(p**0.5) + 1)):
            d = abs(lam[p * p - 1] - (lam[p - 1] ** 2 - 1)) / (1 + lam[p - 1] ** 2)
            if d > worst:
                worst, where = d, (p, p)
        p += 1
    return worst, where


def ingest_maass_data(path, ctx: PrecisionContext = _DEFAULT_CTX, check_limit: int = 200) -> list[MaassFormData]:
    """Read the Maass CSV, validate every record and return them sorted by t.

    Layout: optional comment lines (``# precision: 1e-10``, ``# source: ...``),
    the header ``t,parity,n_max``, then per record one ``t,parity,n_max`` line
    followed by one line of n_max comma-separated lambda values.
    """
    text = Path(path).read_text(encoding="utf-8")
    precision = 1e-8
    source = Path(path).name
    rows = []
    for line in text.splitlines():
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            m = _PRECISION_RE.match(s)
            if m:
                try:
                    precision = float(m.group(1))
                except ValueError as exc:
                    raise DataParseError(f"bad precision declaration: {s}") from exc
            m = _SOURCE_RE.match(s)
            if m:
                source = m.group(1).strip()
            continue
        rows.append(s)
    if not rows:
        return []
    if [c.strip() for c in rows[0].split(",")] != ["t", "parity", "n_max"]:
        raise DataParseError(f"expected header 't,parity,n_max', got {rows[0]!r}")
    body = rows[1:]
    if len(body) % 2:
        raise DataParseError("each record needs a 't,parity,n_max' line and a lambda line")
    tol = max(10 * precision, 10.0 ** (-ctx.working_digits))
    out = []
    for i in range(0, len(body), 2):
        rec = i // 2
        try:
            t_s, p_s, n_s = next(csv.reader([body[i]]))
            t, parity, n_max = float(t_s), int(p_s), int(n_s)
            lam = tuple(float(x) for x in next(csv.reader([body[i + 1]])))
        except (ValueError, StopIteration) as exc:
            raise DataParseError(f"record {rec}: {exc}") from exc
        if len(lam) != n_max:
            raise DataParseError(f"record {rec} (t={t}): declared n_max={n_max}, found {len(lam)} values")
        try:
            form = MaassFormData(t, parity, lam, source)
        except DataValidationError as exc:
            raise DataValidationError(f"record {rec}: {exc}") from exc
        worst, where = _hecke_violation(lam, check_limit)
        if worst > tol:
            raise DataValidationError(
                f"record {rec} (t={t}): Hecke relation at {where} off by {worst:.2e}, declared precision {precision:g}"
            )
        out.append(form)
    out.sort(key=lambda f: f.t)
    return out


def export_maass_data(records, path, precision: float = 1e-15) -> None:
    """Write records in the ingestion layout; floats use repr so re-reading is exact."""
    buf = io.StringIO()
    buf.write(f"# precision: {precision:g}\n")
    tags = {r.source_tag for r in records}
    if len(tags) == 1:
        buf.write(f"# source: {tags.pop()}\n")
    buf.write("t,parity,n_max\n")
    for r in records:
        buf.write(f"{r.t!r},{r.parity},{r.n_max}\n")
        buf.write(",".join(repr(float(x)) for x in r.lam) + "\n")
    write_text_atomic(path, buf.getvalue())


# ---------------------------------------------------------------- holomorphic part


@dataclass
class HolomorphicSum:
    value: float
    extraction_gap: float
    terms: list
    n_max: int


def _adjoint_at_one(f: HeckeEigenform, ctx: PrecisionContext):
    v = f._memo.get(("adjoint_value", ctx.dps))
    if v is None:
        with ctx.workdps():
            v = evaluate(adjoint_descriptor(f), mpf(1), ctx).re
        f._memo[("adjoint_value", ctx.dps)] = v
        f._memo.setdefault("adjoint_at_1", v)
    return v


def _rs_central(f: HeckeEigenform, g: HeckeEigenform, ctx: PrecisionContext):
    if f is g or (f.weight == g.weight and f.index == g.index):
        # the pole term of the completed function needs L(1, ad g)
        _adjoint_at_one(g, ctx)
    with ctx.workdps():
        return evaluate(build_rankin_selberg(f, g), mpf(1) / 2, ctx).re


def m_hol(k: int, g: HeckeEigenform, ctx: PrecisionContext = _DEFAULT_CTX, n_start: int = 800) -> HolomorphicSum:
    """Sum over even l <= k and weight-l eigenforms f of L(1/2, f x g)^2 / L(1, ad f) h_hol(l, k)."""
    n = max(n_start, g.n_max)
    while True:
        try:
            return _m_hol_at(k, g, ctx, n)
        except InsufficientCoefficientsError:
            if n > ctx.truncation_bound:
                raise
            n *= 2


def _m_hol_at(k, g, ctx, n):
    g_big = g if g.n_max >= n else hecke_eigenforms(k, n, ctx)[g.index]
    terms = []
    for ell in range(12, k + 1, 2):
        if cusp_dim(ell) == 0:
            continue
        forms = hecke_eigenforms(ell, n, ctx)
        weight = h_hol(ell, k, ctx)
        for f in forms:
            if ell == k and f.index == g.index:
                f = g_big
            central = _rs_central(f, g_big, ctx)
            with ctx.workdps():
                term = central**2 / _adjoint_at_one(f, ctx) * weight
            terms.append({"weight": ell, "index": f.index, "central": float(central), "term": float(term)})
    total = math.fsum(t["term"] for t in terms)
    top = math.fsum(t["term"] for t in terms if t["weight"] == k)
    return HolomorphicSum(total, total - top, terms, n)


# ---------------------------------------------------------------- continuous spectrum


@dataclass(frozen=True)
class IdentitySettings:
    """Quadrature settings for the vertical integrals; step halving nests the grids."""

    working_digits: int = 30
    step: float = 0.1
    t_max: float = 30.0

    def __post_init__(self):
        if not (self.step > 0 and self.t_max > self.step):
            raise ValueError("need 0 < step < t_max")

    def context(self, base: PrecisionContext) -> PrecisionContext:
        return PrecisionContext(self.working_digits, base.truncation_bound, base.quadrature_step_target)


REFINEMENT_SETTINGS = (
    IdentitySettings(30, 0.2, 24.0),
    IdentitySettings(30, 0.1, 28.0),
    IdentitySettings(30, 0.05, 32.0),
)


def _grid(settings: IdentitySettings) -> list[float]:
    m = int(round(settings.t_max / settings.step))
    return [round(j * settings.step, 10) for j in range(1, m + 1)]


def _critical_values(g: HeckeEigenform, kind: str, ts, ctx: PrecisionContext) -> dict:
    memo = g._memo.setdefault(("critical", kind, ctx.dps), {})
    missing = [t for t in ts if t not in memo]
    if missing:
        desc = build_gl2(g) if kind == "gl2" else adjoint_descriptor(g)
        with ctx.workdps():
            vals = evaluate_many(desc, [mpc(0.5, t) for t in missing], ctx)
        for t, v in zip(missing, vals):
            memo[t] = complex(v.value)
    return memo


@dataclass
class VerticalIntegral:
    value: float
    quadrature_err: float
    imag_residue: float = 0.0


def _trapezoid_half_line(ts, f, step):
    # integrand vanishes at t = 0 and is even (or conjugate-even), so the full line is twice the half line
    return 2 * step * sum(f[t] for t in ts)


def _with_error(ts, f, step, tail) -> tuple:
    full = _trapezoid_half_line(ts, f, step)
    coarse = _trapezoid_half_line(ts[1::2], f, 2 * step)
    return full, abs(full - coarse) + tail


def m_eis(k: int, g: HeckeEigenform, ctx: PrecisionContext = _DEFAULT_CTX, settings: IdentitySettings | None = None) -> VerticalIntegral:
    """(1/2pi) int |L(1/2+it, g)|^4 / |zeta(1+2it)|^2 h(t, k) dt."""
    settings = settings or IdentitySettings()
    ts = _grid(settings)
    lv = _critical_values(g, "gl2", ts, ctx)
    f = {}
    with ctx.workdps():
        for t in ts:
            z = _zeta(mpc(1, 2 * t))
            f[t] = float(abs(lv[t]) ** 4 / abs(z) ** 2 * h_maass(t, k, ctx))
    total, err = _with_error(ts, f, settings.step, abs(f[ts[-1]]))
    return VerticalIntegral(total / (2 * math.pi), err / (2 * math.pi))


def _tilde_integrand(t, lad, k, ctx) -> complex:
    s = mpc(0.5, t)
    z = _zeta(s)
    zc = _zeta(mpc(0.5, -t))
    den = _zeta(mpc(1, 2 * t)) * _zeta(mpc(1, -2 * t))
    return complex(lad * z**3 * zc**2 / den * h_tilde(t, k, ctx))


def m_tilde_eis(
    k: int,
    g: HeckeEigenform,
    ctx: PrecisionContext = _DEFAULT_CTX,
    settings: IdentitySettings | None = None,
    health_points=(1.3, 4.7, 9.1),
) -> VerticalIntegral:
    """(1/2pi) int L(1/2+it, ad g) zeta(1/2+it)^3 zeta(1/2-it)^2 / |zeta(1+2it)|^2 h~(t, k) dt.

    The integrand at -t is the conjugate of the one at t; imag_residue measures
    that symmetry at a few points where the mirrored node is evaluated directly.
    """
    settings = settings or IdentitySettings()
    ts = _grid(settings)
    lv = _critical_values(g, "adjoint", ts, ctx)
    f = {}
    with ctx.workdps():
        for t in ts:
            f[t] = _tilde_integrand(t, lv[t], k, ctx)
    re_part = {t: v.real for t, v in f.items()}
    total, err = _with_error(ts, re_part, settings.step, abs(f[ts[-1]]))
    mirror = _critical_values(g, "adjoint", [-t for t in health_points], ctx)
    pos = _critical_values(g, "adjoint", list(health_points), ctx)
    imag = 0.0
    with ctx.workdps():
        for t in health_points:
            a = _tilde_integrand(t, pos[t], k, ctx)
            b = _tilde_integrand(-t, mirror[-t], k, ctx)
            imag = max(imag, abs((a + b).imag) / max(abs(a), 1e-300))
    return VerticalIntegral(total / (2 * math.pi), err / (2 * math.pi), imag)


# ---------------------------------------------------------------- Maass parts


def _maass_adjoint_at_one(form: MaassFormData, ctx) -> float:
    with ctx.workdps():
        return float(evaluate(build_maass_adjoint(form.lam, form.t), mpf(1), ctx).re)


def m_maass_partial(
    k: int, g: HeckeEigenform, data, ctx: PrecisionContext = _DEFAULT_CTX, c_tail: float = DEFAULT_C_TAIL
) -> tuple[float, float]:
    """Sum over ingested forms of L(1/2, f x g)^2 / L(1, ad f) h(t_f, k), and the tail budget."""
    value = 0.0
    for form in data:
        with ctx.workdps():
            central = float(evaluate(build_maass_rankin_selberg(form.lam, form.t, g), mpf(1) / 2, ctx).re)
        value += central**2 / _maass_adjoint_at_one(form, ctx) * float(h_maass(form.t, k, ctx))
    return value, c_tail * k**1.5 * 2.0 ** (-k)


def maass_band_term(t: float, l_half: float, l_one_ad: float, k: int, majorant: float = DEFAULT_MAJORANT) -> float:
    """sqrt(majorant L(1/2, f)^5) / L(1, ad f) |h~(t, k)| for one even form."""
    return math.sqrt(majorant * abs(l_half) ** 5) / l_one_ad * float(abs(h_tilde(t, k)))


def maass_band_tail(k: int, t_cut: float, c_tail: float = DEFAULT_C_TAIL) -> float:
    return c_tail * math.sqrt(k) * math.exp(-math.pi * t_cut / 2)


def m_tilde_maass_band(
    k: int,
    g: HeckeEigenform,
    data,
    ctx: PrecisionContext = _DEFAULT_CTX,
    majorant: float = DEFAULT_MAJORANT,
    c_tail: float = DEFAULT_C_TAIL,
    t_first: float = FIRST_EVEN_MAASS_T,
) -> float:
    """Upper band for |M_Maass~|: even ingested forms plus an exponential tail beyond the data."""
    band = 0.0
    even = [f for f in data if f.parity == 1]
    for form in even:
        with ctx.workdps():
            l_half = float(evaluate(build_maass_gl2(form.lam, form.t, 0), mpf(1) / 2, ctx).re)
        band += maass_band_term(form.t, l_half, _maass_adjoint_at_one(form, ctx), k, majorant)
    t_cut = max((f.t for f in data), default=t_first)
    return band + maass_band_tail(k, t_cut, c_tail)


# ---------------------------------------------------------------- direct oracle


def eisenstein_star_half(x: np.ndarray, y: np.ndarray, terms: int = 60) -> np.ndarray:
    """xi(1)-regularised E*(z, 1/2) = sqrt(y)(2 a0 + log y) + 4 sqrt(y) sum d(n) K0(2 pi n y) cos(2 pi n x)."""
    a0 = float(mpmath.euler) / 2 - math.log(2) - 0.5 * math.log(math.pi)
    out = np.sqrt(y) * (2 * a0 + np.log(y))
    for n in range(1, terms + 1):
        d = sum(1 for j in range(1, n + 1) if n % j == 0)
        out = out + 4 * np.sqrt(y) * d * k0(2 * math.pi * n * y) * np.cos(2 * math.pi * n * x)
    return out


def normalised_inner_product_direct(
    g: HeckeEigenform,
    ctx: PrecisionContext = _DEFAULT_CTX,
    quad_grid=(60, 160),
    y_cut: float = 12.0,
    eis_terms: int = 60,
    cusp_terms: int = 80,
) -> float:
    """pi^{-3} Gamma(k)^2/Gamma(k-1/2)^2 L(1, ad g) <E*(., 1/2)^2, |G|^2> by quadrature on the fundamental domain.

    This is the left side of the identity computed without any spectral expansion.
    """
    k = g.weight
    l1 = float(_adjoint_at_one(g, ctx))
    rho = float(petersson_rho1_sq(g, l1))
    x, y, w = _domain_nodes(quad_grid, y_cut)
    cusp = _cusp_form_abs2(g, rho, x, y, min(cusp_terms, g.n_max))
    e = eisenstein_star_half(x, y, eis_terms)
    ratio = math.exp(2 * math.lgamma(k) - 2 * math.lgamma(k - 0.5))
    return ratio * l1 * float(np.sum(w * cusp * e * e)) / math.pi**3


def eisenstein_projection(g: HeckeEigenform, t: float, ctx: PrecisionContext = _DEFAULT_CTX) -> complex:
    """<E(., 1/2+it), |G|^2> in closed form by unfolding against the weight-k cusp form.

    Equals 2^{-2it} pi^{3/2-it} Gamma(k-1/2+it)/Gamma(k) L(1/2+it, ad g) zeta(1/2+it) / (zeta(1+2it) L(1, ad g)),
    which vanishes at t = 0 through the pole of zeta(1+2it).
    """
    if t == 0:
        return 0j
    k = g.weight
    with ctx.workdps():
        s = mpc(0.5, t)
        lad = _critical_values(g, "adjoint", [t], ctx)[t]
        log_pref = (
            (1 - 2 * s) * mpmath.log(2)
            + (2 - s) * mpmath.log(mp.pi)
            + mpmath.loggamma(s + k - 1)
            - mpmath.loggamma(k)
        )
        val = mpmath.exp(log_pref) * lad * _zeta(s) / (_zeta(2 * s) * _adjoint_at_one(g, ctx))
        return complex(val)


# ---------------------------------------------------------------- identity


def tolerance(k: int, rhs: float, c_tail: float = DEFAULT_C_TAIL) -> float:
    """Relative slack capped at 1e-3 and floored at 1e-6, following the neglected-term scale."""
    rel = min(1e-3, max(1e-6, 2.0 ** (-k) * k**1.5 * c_tail))
    return rel * abs(rhs)


@dataclass
class IdentityReport:
    k: int
    g_index: int
    lhs_components: dict
    rhs_components: dict
    tilde_maass_band: float
    neglect_budget: float
    quadrature_err: float
    tolerance: float
    lhs_total: float
    rhs_total: float
    margin: float
    verdict: str
    diagnostics: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)
    schema_version: int = REPORT_SCHEMA_VERSION

    @property
    def allowed(self) -> float:
        return self.tilde_maass_band + self.neglect_budget + self.quadrature_err + self.tolerance

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["allowed"] = self.allowed
        return d

    def to_json(self, extra: dict | None = None) -> str:
        d = self.to_dict()
        if extra:
            d.update(extra)
        return json.dumps(d, indent=2, sort_keys=True, default=str)

    def write_json(self, path, extra=None) -> None:
        write_text_atomic(path, self.to_json(extra))


def verify_identity(
    k: int,
    g_index: int = 0,
    data=(),
    ctx: PrecisionContext = _DEFAULT_CTX,
    settings: IdentitySettings | None = None,
    c_tail: float = DEFAULT_C_TAIL,
    majorant: float = DEFAULT_MAJORANT,
    include_m0: bool = True,
    direct_check: bool = False,
) -> IdentityReport:
    """Assemble both sides and compare within band + budgets + quadrature error + tolerance(k)."""
    if k % 2 or k < 12 or cusp_dim(k) == 0:
        raise DimensionZeroError(f"no cusp forms of weight {k}")
    settings = settings or IdentitySettings()
    ctx = settings.context(ctx)
    data = list(data)
    hol = m_hol(k, hecke_eigenforms(k, 800, ctx)[g_index], ctx)
    n = hol.n_max
    while True:
        g = hecke_eigenforms(k, n, ctx)[g_index]
        try:
            eis = m_eis(k, g, ctx, settings)
            tilde = m_tilde_eis(k, g, ctx, settings)
            break
        except InsufficientCoefficientsError:
            if n > ctx.truncation_bound:
                raise
            n *= 2
    maass, tail = m_maass_partial(k, g, data, ctx, c_tail)
    band = m_tilde_maass_band(k, g, data, ctx, majorant, c_tail)
    m0 = m0_by_residue(k, g, TorusContour(), ctx)
    m0_val = float(m0.re) if include_m0 else 0.0
    lhs = hol.value + maass + eis.value
    rhs = m0_val + tilde.value
    quad = eis.quadrature_err + tilde.quadrature_err + float(m0.err)
    tol = tolerance(k, rhs, c_tail)
    margin = abs(lhs - rhs)
    verdict = "pass" if margin <= band + tail + quad + tol else "fail"
    diag = {
        "extraction_gap": hol.extraction_gap,
        "m_tilde_eis_imag_residue": tilde.imag_residue,
        "holomorphic_terms": hol.terms,
        "coefficients_used": hol.n_max,
        "maass_records": len(data),
    }
    if direct_check:
        diag["lhs_direct_quadrature"] = normalised_inner_product_direct(g, ctx)
    return IdentityReport(
        k,
        g_index,
        {"m_hol": hol.value, "m_maass_partial": maass, "m_eis": eis.value},
        {"m0": m0_val, "m_tilde_eis": tilde.value},
        band,
        tail,
        quad,
        tol,
        lhs,
        rhs,
        margin,
        verdict,
        diag,
        asdict(settings),
    )
