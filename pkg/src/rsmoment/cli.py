"""Command-line frontend: ``rsmoment <command> [options]``.

Exit status 0 when every check in the report passes, 1 when a verification
fails or a module raises, 2 on usage errors. Reports carry the full run
configuration, the library version and a timestamp; everything else is a
deterministic function of the configuration and the cache contents.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .cache import DiskCache, write_text_atomic
from .errors import RsMomentError

COMMANDS = ("weights", "mainterm", "moment", "identity", "verify-suite", "cache")
NEEDS_FORM = ("mainterm", "moment", "identity")
EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    k: int = 12
    g_index: int = 0
    precision_digits: int = 30
    maass_data_path: str | None = None
    output_path: str | None = None
    format: str = "json"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        if not 30 <= self.precision_digits <= 200:
            raise UsageError(f"--precision must lie in [30, 200], got {self.precision_digits}")
        if self.format not in ("json", "csv"):
            raise UsageError(f"--format must be json or csv, got {self.format!r}")
        if self.command in NEEDS_FORM and (self.k % 2 or self.k < 12):
            raise UsageError(f"--k must be an even integer >= 12 for {self.command}, got {self.k}")
        if self.g_index < 0:
            raise UsageError("--g-index must be nonnegative")


def _ctx(config: RunConfig):
    from .specialfn import PrecisionContext

    return PrecisionContext(config.precision_digits)


def _form(config: RunConfig, n_max: int = 800):
    from .modforms import cusp_dim, hecke_eigenforms

    d = cusp_dim(config.k)
    if config.g_index >= d:
        raise UsageError(f"weight {config.k} has {d} eigenform(s); --g-index {config.g_index} is out of range")
    return hecke_eigenforms(config.k, n_max, _ctx(config), DiskCache())[config.g_index]


# ---------------------------------------------------------------- commands


def _cmd_weights(config: RunConfig) -> tuple[dict, str | None, bool]:
    from .weights import verify_weight_bounds

    t_max = float(config.options.get("t_max") or 3 * config.k)
    table = verify_weight_bounds(config.k, np.linspace(0.0, t_max, 61), ctx=_ctx(config))
    stats = table.ratio_stats()
    ok = all(math.isfinite(s["max"]) for s in stats.values())
    h_kk = float(table.hol_values.get(config.k, float("nan"))) if config.k in table.hol_values else None
    report = {"k": config.k, "t_max": t_max, "ratio_stats": stats, "bound_ratios": table.bound_ratios, "h_hol_kk": h_kk}
    return report, table.to_csv(), ok


def _cmd_mainterm(config: RunConfig):
    from .mainterm import MainTermReport, main_term_report

    method = config.options.get("method") or "all"
    methods = ("limit", "residue", "scaled", "laurent") if method == "all" else (method,)
    rep = main_term_report(
        config.k, _form(config), _ctx(config), methods, bool(config.options.get("certificate")), bool(config.options.get("derive_c"))
    )
    d = rep.to_dict()
    ok = True
    if method == "all":
        ok = d["discrepancies"]["limit_vs_residue"] < 1e-6 and d["discrepancies"]["laurent_vs_scaled"] < 1e-8
    return d, MainTermReport.csv_header() + "\n" + rep.csv_row() + "\n", ok


def _maass_data(config: RunConfig):
    from .moments import ingest_maass_data

    if not config.maass_data_path:
        return []
    return ingest_maass_data(config.maass_data_path, _ctx(config))


def _cmd_moment(config: RunConfig):
    from .moments import IdentitySettings, m_eis, m_hol, m_maass_partial

    ctx = _ctx(config)
    settings = IdentitySettings(config.precision_digits, float(config.options.get("step") or 0.1), float(config.options.get("t_max") or 30))
    hol = m_hol(config.k, _form(config), ctx)
    from .modforms import hecke_eigenforms

    g = hecke_eigenforms(config.k, hol.n_max, ctx)[config.g_index]
    eis = m_eis(config.k, g, ctx, settings)
    maass, tail = m_maass_partial(config.k, g, _maass_data(config), ctx)
    report = {
        "k": config.k,
        "g_index": config.g_index,
        "m_hol": hol.value,
        "extraction_gap": hol.extraction_gap,
        "m_eis": eis.value,
        "m_eis_quadrature_err": eis.quadrature_err,
        "m_maass_partial": maass,
        "maass_tail_budget": tail,
        "lhs_total": hol.value + eis.value + maass,
    }
    cols = list(report)
    csv_text = ",".join(cols) + "\n" + ",".join(repr(report[c]) for c in cols) + "\n"
    return report, csv_text, True


def _cmd_identity(config: RunConfig):
    from .moments import IdentitySettings, verify_identity

    settings = IdentitySettings(config.precision_digits, float(config.options.get("step") or 0.1), float(config.options.get("t_max") or 30))
    rep = verify_identity(config.k, config.g_index, _maass_data(config), _ctx(config), settings)
    d = rep.to_dict()
    flat = {
        "k": rep.k,
        "g_index": rep.g_index,
        **rep.lhs_components,
        **rep.rhs_components,
        "lhs_total": rep.lhs_total,
        "rhs_total": rep.rhs_total,
        "margin": rep.margin,
        "allowed": rep.allowed,
        "verdict": rep.verdict,
    }
    csv_text = ",".join(flat) + "\n" + ",".join(repr(v) if not isinstance(v, str) else v for v in flat.values()) + "\n"
    return d, csv_text, rep.passed


def _cmd_verify_suite(config: RunConfig):
    """Fast structural checks: weight normalisation, functional equations, factorisation, main-term triangle."""
    from mpmath import mpf

    from .lfun import adjoint_descriptor, build_gl2, build_rankin_selberg, evaluate_many, functional_equation_check
    from .mainterm import TorusContour, m0_by_limit, m0_by_residue
    from .modforms import hecke_eigenforms
    from .specialfn import _zeta
    from .weights import h_hol

    ctx = _ctx(config)
    checks = []

    def record(name, value, limit):
        checks.append({"check": name, "value": value, "limit": limit, "pass": bool(value <= limit)})

    for k in range(12, 62, 2):
        record(f"h_hol({k},{k}) - 1", abs(float(h_hol(k, k, ctx)) - 1), 1e-12)
    g = hecke_eigenforms(12, 800, ctx)[0]
    with ctx.workdps():
        for desc in (build_gl2(g), adjoint_descriptor(g)):
            record(f"functional equation {desc.label}", functional_equation_check(desc, ctx=ctx)[1], 1e-8)
        pts = [complex(1.5 + 0.1 * j, 0.7 * j) for j in range(4)]
        ad = evaluate_many(adjoint_descriptor(g), pts, ctx)
        g._memo.setdefault("adjoint_at_1", evaluate_many(adjoint_descriptor(g), [1], ctx)[0].re)
        rs = evaluate_many(build_rankin_selberg(g, g), pts, ctx)
        worst = max(float(abs(_zeta(p) * a.value - r.value) / abs(r.value)) for p, a, r in zip(pts, ad, rs))
    record("zeta L(ad g) = L(g x g)", worst, 1e-10)
    lim = m0_by_limit(12, g, ctx)
    res = m0_by_residue(12, g, TorusContour(), ctx)
    record("M0 limit vs residue (k=12)", abs(float(lim.re - res.re)) / abs(float(res.re)), 1e-6)
    ok = all(c["pass"] for c in checks)
    csv_text = "check,value,limit,pass\n" + "".join(f"{c['check']},{c['value']!r},{c['limit']!r},{c['pass']}\n" for c in checks)
    return {"checks": checks, "all_pass": ok}, csv_text, ok


def cache_admin(action: str, k_range=(12, 12), n_max: int = 800, precision_digits: int = 30, cache: DiskCache | None = None) -> dict:
    """List, clear or warm the coefficient cache; warming skips zero-dimensional weights with a note."""
    from .lfun import build_adjoint, build_gl2, build_rankin_selberg
    from .modforms import cusp_dim, hecke_eigenforms
    from .specialfn import PrecisionContext

    cache = cache or DiskCache()
    if action == "list":
        return {"root": str(cache.root), "entries": [{"name": n, "bytes": b} for n, b in cache.entries()]}
    if action == "clear":
        return {"root": str(cache.root), "removed": cache.clear()}
    if action != "warm":
        raise UsageError(f"unknown cache action {action!r}; choose list, clear or warm")
    ctx = PrecisionContext(precision_digits)
    notes, warmed = [], []
    lo, hi = k_range
    for k in range(lo + lo % 2, hi + 1, 2):
        if cusp_dim(k) == 0:
            notes.append(f"weight {k}: cusp space has dimension zero, nothing cached")
            continue
        with ctx.workdps():
            for g in hecke_eigenforms(k, n_max, ctx, cache):
                build_gl2(g)
                build_adjoint(g, cache)
                build_rankin_selberg(g, g, cache)
        warmed.append(k)
    return {"root": str(cache.root), "warmed": warmed, "notes": notes}


def _cmd_cache(config: RunConfig):
    action = config.options.get("action") or "list"
    k_lo = int(config.options.get("k_min") or config.k)
    k_hi = int(config.options.get("k_max") or k_lo)
    report = cache_admin(action, (k_lo, k_hi), int(config.options.get("n_max") or 800), config.precision_digits)
    rows = report.get("entries", [])
    csv_text = "name,bytes\n" + "".join(f"{r['name']},{r['bytes']}\n" for r in rows)
    return report, csv_text, True


_DISPATCH = {
    "weights": _cmd_weights,
    "mainterm": _cmd_mainterm,
    "moment": _cmd_moment,
    "identity": _cmd_identity,
    "verify-suite": _cmd_verify_suite,
    "cache": _cmd_cache,
}


def _envelope(config: RunConfig, report: dict, status: str) -> dict:
    return {
        "schema_version": 1,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "run_config": asdict(config),
        "status": status,
        "report": report,
    }


def _emit(config: RunConfig, doc: dict, csv_text: str | None) -> None:
    if config.format == "csv" and csv_text is not None:
        text = csv_text
    else:
        text = json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"
    if config.output_path:
        write_text_atomic(config.output_path, text)
    else:
        sys.stdout.write(text)


def run(config: RunConfig) -> int:
    """Dispatch one command, write its report and return the exit status."""
    try:
        report, csv_text, ok = _DISPATCH[config.command](config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RsMomentError, ArithmeticError, OSError) as exc:
        doc = _envelope(config, {"error": type(exc).__name__, "message": str(exc)}, "error")
        _emit(config, doc, None)
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(config, _envelope(config, report, "pass" if ok else "fail"), csv_text)
    return EXIT_PASS if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rsmoment", description="Second-moment identity verification for Rankin-Selberg L-functions.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, k_required=True):
        sp.add_argument("--k", type=int, required=k_required, default=12, help="even weight")
        sp.add_argument("--g-index", type=int, default=0, help="eigenform index, sorted by lambda(2)")
        sp.add_argument("--precision", type=int, default=30, help="working digits, 30 to 200")
        sp.add_argument("--output", help="report path; stdout when omitted")
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("weights", help="spectral weights and bound ratios")
    common(sp)
    sp.add_argument("--t-max", type=float)
    sp = sub.add_parser("mainterm", help="M0 by several routes, P_j polynomials")
    common(sp)
    sp.add_argument("--method", choices=("all", "limit", "residue", "scaled", "laurent"), default="all")
    sp.add_argument("--certificate", action="store_true")
    sp.add_argument("--derive-c", action="store_true", help="recompute c by contour integration")
    for name, help_ in (("moment", "spectral side components"), ("identity", "end-to-end identity check")):
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.add_argument("--maass-data", help="Maass form CSV")
        sp.add_argument("--step", type=float, help="trapezoid step on the critical line")
        sp.add_argument("--t-max", type=float, help="truncation of the critical-line integrals")
    sp = sub.add_parser("verify-suite", help="fast structural checks")
    common(sp, k_required=False)
    sp = sub.add_parser("cache", help="list, clear or warm the coefficient cache")
    sp.add_argument("action", choices=("list", "clear", "warm"))
    common(sp, k_required=False)
    sp.add_argument("--k-min", type=int)
    sp.add_argument("--k-max", type=int)
    sp.add_argument("--n-max", type=int, default=800)
    return p


def config_from_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    skip = {"command", "k", "g_index", "precision", "output", "format", "maass_data"}
    options = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    return RunConfig(
        args.command,
        args.k,
        args.g_index,
        args.precision,
        getattr(args, "maass_data", None),
        args.output,
        args.format,
        options,
    )


def main(argv=None) -> int:
    try:
        config = config_from_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
