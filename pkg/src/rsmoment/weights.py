"""Spectral weights of the second-moment identity and their size bounds.

All three weights are evaluated as exponentials of sums of log Gamma values
so that nothing overflows for large k or |t|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from mpmath import mp, mpf

from .cache import write_text_atomic
from .specialfn import PrecisionContext, _loggamma

_DEFAULT_CTX = PrecisionContext()


def _check_even(name: str, v: int) -> None:
    if int(v) != v or v <= 0 or v % 2:
        raise ValueError(f"{name} must be a positive even integer, got {v}")


def _log_norm(k):
    # log( Gamma(k) / Gamma(k - 1/2)^2 )
    return _loggamma(mpf(k)) - 2 * _loggamma(mpf(k) - mpf(1) / 2)


def log_h_hol(ell: int, k: int, ctx: PrecisionContext = _DEFAULT_CTX):
    """log h_hol(ell, k) for ell <= k, or -inf when ell > k."""
    _check_even("ell", ell)
    _check_even("k", k)
    if ell > k:
        return mpf("-inf")
    with ctx.workdps():
        half = mpf(1) / 2
        return +(
            -mpmath.log(mp.pi)
            + _log_norm(k)
            + 2 * _loggamma((k + ell - 1) * half)
            + 2 * _loggamma((k - ell + 1) * half)
            - _loggamma((k + ell) * half)
            - _loggamma((k - ell) * half + 1)
        )


def h_hol(ell: int, k: int, ctx: PrecisionContext = _DEFAULT_CTX):
    """Holomorphic spectral weight; zero for ell > k."""
    if ell > k:
        _check_even("ell", ell)
        _check_even("k", k)
        return mpf(0)
    with ctx.workdps():
        return mpmath.exp(log_h_hol(ell, k, ctx))


def log_h_maass(t, k: int, ctx: PrecisionContext = _DEFAULT_CTX):
    _check_even("k", k)
    with ctx.workdps():
        it = mpmath.mpc(0, t)
        return +(
            -mpmath.log(mp.pi)
            + _log_norm(k)
            + 4 * _loggamma(mpf(k) / 2 + it).real
            - 2 * _loggamma(mpf(k + 1) / 2 + it).real
        )


def h_maass(t, k: int, ctx: PrecisionContext = _DEFAULT_CTX):
    """Maass and Eisenstein spectral weight h(t, k), real and positive."""
    with ctx.workdps():
        return mpmath.exp(log_h_maass(t, k, ctx))


def log_h_tilde(t, k: int, ctx: PrecisionContext = _DEFAULT_CTX):
    _check_even("k", k)
    with ctx.workdps():
        t = mpf(t)
        it = mpmath.mpc(0, t)
        q = mpf(1) / 4
        return (
            -(1 + 2 * it) * mpmath.log(2)
            - (2 + it) * mpmath.log(mp.pi)
            + _log_norm(k)
            + _loggamma(mpf(k) - mpf(1) / 2 + it)
            + 2 * _loggamma(q + it / 2)
            + 2 * _loggamma(q - it / 2)
            - _loggamma(mpf(1) / 2 - it)
        )


def h_tilde(t, k: int, ctx: PrecisionContext = _DEFAULT_CTX):
    """Complex weight attached to the dual-side Maass and Eisenstein terms."""
    with ctx.workdps():
        return mpmath.exp(log_h_tilde(t, k, ctx))


# ---------------------------------------------------------------- bound shapes


def log_hol_bound(ell: int, k: int) -> float:
    """log of (1/(k-l)) ((k-l)/(2(k-1)))^((k-l)/2) for ell < k."""
    d = k - ell
    if d <= 0:
        raise ValueError("the holomorphic bound needs ell < k")
    return -math.log(d) + d / 2 * math.log(d / (2 * (k - 1)))


def log_maass_bound(t: float, k: int) -> float:
    t = abs(t)
    base = -k * math.log(2)
    if t <= math.sqrt(k):
        return base - 0.5 * math.log(k)
    if t <= k:
        return base - t * t / k - 0.5 * math.log(k)
    return base + 1.5 * math.log(k) - t - 2 * math.log(t)


def log_tilde_bound(t: float, k: int) -> float:
    t = abs(t)
    if t <= k:
        return 0.5 * math.log(k) - math.pi * t / 2 - math.log1p(t)
    return math.log(k) - math.pi * t / 2 - 1.5 * math.log(t)


def hol_tail_sum(k: int) -> float:
    """Sum over even ell < k of ((k-l)/(2(k-1)))^((k-l)/2), which should be O(1/k)."""
    return sum(math.exp(d / 2 * math.log(d / (2 * (k - 1)))) for d in range(2, k, 2))


# ---------------------------------------------------------------- tables


@dataclass
class SpectralWeightTable:
    k: int
    hol_values: dict = field(default_factory=dict)
    maass_values: dict = field(default_factory=dict)
    tilde_values: dict = field(default_factory=dict)
    bound_ratios: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    def ratio_stats(self) -> dict:
        """Per-weight max ratio, median ratio and their quotient over this table's grid."""
        out = {}
        for lemma in ("hol", "maass", "tilde"):
            r = np.array([row[3] for row in self.rows if row[0].startswith(lemma + " ")])
            if r.size == 0:
                continue
            med = float(np.median(r))
            out[lemma] = {
                "max": float(r.max()),
                "median": med,
                "max_over_median": float(r.max()) / med if med > 0 else math.inf,
            }
        return out

    def to_csv(self) -> str:
        lines = ["parameter,value,bound,ratio"]
        for name, value, bound, ratio in self.rows:
            lines.append(f"{name},{value!r},{bound!r},{ratio!r}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        write_text_atomic(path, self.to_csv())


def _float_exp(x) -> float:
    try:
        return math.exp(float(x))
    except OverflowError:
        return math.inf


def verify_weight_bounds(k: int, t_grid=None, ell_grid=None, ctx: PrecisionContext = _DEFAULT_CTX) -> SpectralWeightTable:
    """Evaluate the three weights on grids and the ratio to each bound shape.

    Ratios are formed in log space, so they stay finite where both the weight
    and the bound underflow a double.
    """
    _check_even("k", k)
    if t_grid is None:
        t_grid = np.linspace(0.0, 3.0 * k, 61)
    if ell_grid is None:
        ell_grid = range(2, k, 2)
    t_grid = [float(t) for t in t_grid]
    if any(abs(t) > 3 * k for t in t_grid):
        raise ValueError("t grid must lie within |t| <= 3k")
    table = SpectralWeightTable(k)
    maxima = {}
    for ell in ell_grid:
        lv = log_h_hol(ell, k, ctx)
        table.hol_values[ell] = h_hol(ell, k, ctx)
        if ell >= k:
            continue
        lb = log_hol_bound(ell, k)
        ratio = _float_exp(lv - lb)
        table.rows.append((f"hol l={ell}", _float_exp(lv), math.exp(lb), ratio))
        maxima["hol"] = max(maxima.get("hol", 0.0), ratio)
    for t in t_grid:
        lv = log_h_maass(t, k, ctx)
        table.maass_values[t] = mpmath.exp(lv)
        lb = log_maass_bound(t, k)
        ratio = _float_exp(lv - lb)
        table.rows.append((f"maass t={t:g}", _float_exp(lv), math.exp(lb), ratio))
        maxima["maass"] = max(maxima.get("maass", 0.0), ratio)
    for t in t_grid:
        lv = log_h_tilde(t, k, ctx)
        table.tilde_values[t] = mpmath.exp(lv)
        lb = log_tilde_bound(t, k)
        ratio = _float_exp(lv.real - lb)
        table.rows.append((f"tilde t={t:g}", _float_exp(lv.real), math.exp(lb), ratio))
        maxima["tilde"] = max(maxima.get("tilde", 0.0), ratio)
    table.bound_ratios = maxima
    return table


def weight_bound_sweep(k_values, t_points: int = 61, ctx: PrecisionContext = _DEFAULT_CTX) -> dict:
    """Bound-ratio statistics over a k grid, in two readings.

    ``pointwise`` pools every (k, parameter) ratio and compares max to median.
    ``sup_per_k`` takes the largest ratio at each k, which is the implied
    constant the bound needs at that k, and compares those across k.
    """
    pooled = {"hol": [], "maass": [], "tilde": []}
    per_k = {"hol": [], "maass": [], "tilde": []}
    for k in k_values:
        table = verify_weight_bounds(k, np.linspace(0.0, 3.0 * k, t_points), ctx=ctx)
        for lemma in pooled:
            r = [row[3] for row in table.rows if row[0].startswith(lemma + " ")]
            pooled[lemma].extend(r)
            per_k[lemma].append(max(r))
    out = {}
    for lemma in pooled:
        p = np.array(pooled[lemma])
        s = np.array(per_k[lemma])
        out[lemma] = {
            "pointwise_max": float(p.max()),
            "pointwise_max_over_median": float(p.max() / np.median(p)),
            "sup_per_k": [float(x) for x in s],
            "sup_max_over_median": float(s.max() / np.median(s)),
        }
    return out
