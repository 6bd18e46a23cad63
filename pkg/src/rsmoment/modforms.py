"""Level-one holomorphic Hecke eigenforms and the real-analytic Eisenstein series.

q-expansions are built exactly over the integers with FLINT polynomials, the
Hecke operator T_2 is diagonalised in high precision, and the eigenforms are
returned with arithmetic normalisation lambda(n) = a(n) / n^{(k-1)/2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import flint
import mpmath
import numpy as np
from mpmath import mp, mpf

from .cache import FORMAT_VERSION, DiskCache
from .errors import (
    DimensionZeroError,
    EigenvalueCollisionError,
    PrecisionFailure,
    TruncationError,
)
from .specialfn import ComplexValue, PrecisionContext, _loggamma, _xi


@dataclass(frozen=True, eq=False)
class HeckeEigenform:
    """Arithmetically normalised eigenform; lambdas[n-1] holds lambda(n)."""

    weight: int
    index: int
    lambdas: tuple
    n_max: int
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    def lam(self, n: int):
        return self.lambdas[n - 1]

    @property
    def label(self) -> str:
        return f"{self.weight}.{self.index}"

    def floats(self) -> np.ndarray:
        """lambda(1..n_max) as float64, cached."""
        arr = self._memo.get("floats")
        if arr is None:
            arr = np.array([float(x) for x in self.lambdas])
            self._memo["floats"] = arr
        return arr


@dataclass(frozen=True)
class EisensteinTruncation:
    coprime_pair_bound: int = 200
    fourier_term_bound: int = 30

    def __post_init__(self):
        if self.coprime_pair_bound < 1 or self.fourier_term_bound < 1:
            raise ValueError("truncation bounds must be at least 1")


def cusp_dim(k: int) -> int:
    """Dimension of the space of level-one cusp forms of weight k."""
    if k < 2 or k % 2:
        raise ValueError("weight must be an even integer at least 2")
    if k == 2:
        return 0
    dim_mk = k // 12 + (0 if k % 12 == 2 else 1)
    return max(dim_mk - 1, 0)


def _divisor_power_sums(power: int, n_max: int) -> list[int]:
    sig = [0] * (n_max + 1)
    for d in range(1, n_max + 1):
        dp = d**power
        for m in range(d, n_max + 1, d):
            sig[m] += dp
    return sig


def _eisenstein_polys(n_max: int):
    s3 = _divisor_power_sums(3, n_max)
    s5 = _divisor_power_sums(5, n_max)
    e4 = flint.fmpz_poly([1] + [240 * s3[n] for n in range(1, n_max + 1)])
    e6 = flint.fmpz_poly([1] + [-504 * s5[n] for n in range(1, n_max + 1)])
    return e4, e6


def echelon_basis(k: int, n_max: int) -> list[list[int]]:
    """Integer q-expansions f_1..f_d with f_i = q^i + O(q^{d+1}), coefficients a(0..n_max)."""
    d = cusp_dim(k)
    if d == 0:
        raise DimensionZeroError(f"S_{k} is zero-dimensional")
    length = n_max + 1
    e4, e6 = _eisenstein_polys(n_max)
    e4_cubed = e4.mul_low(e4, length).mul_low(e4, length)
    delta_1728 = e4_cubed - e6.mul_low(e6, length)
    delta = flint.fmpz_poly([int(c) // 1728 for c in delta_1728.coeffs()])
    rows = []
    for c in range(1, d + 1):
        w = k - 12 * c
        b = 0 if w % 4 == 0 else 1
        a = (w - 6 * b) // 4
        f = delta.pow_trunc(c, length)
        for _ in range(a):
            f = f.mul_low(e4, length)
        for _ in range(b):
            f = f.mul_low(e6, length)
        rows.append(f)
    for i in range(d - 1, -1, -1):
        for j in range(i + 1, d):
            coeff = int(rows[i][j + 1])
            if coeff:
                rows[i] = rows[i] - coeff * rows[j]
    out = []
    for f in rows:
        cs = [int(c) for c in f.coeffs()]
        out.append(cs + [0] * (length - len(cs)))
    return out


def _serialise_basis(k: int, n_max: int, rows) -> str:
    head = f"rsmoment-qexp {FORMAT_VERSION} weight {k} n_max {n_max} dim {len(rows)} exponent {k - 1}/2\n"
    return head + "\n".join(" ".join(str(c) for c in row[1:]) for row in rows) + "\n"


def _parse_basis(text: str, k: int, n_max: int):
    lines = text.strip().split("\n")
    parts = lines[0].split()
    if parts[0] != "rsmoment-qexp" or int(parts[1]) != FORMAT_VERSION:
        return None
    if int(parts[3]) != k or int(parts[5]) != n_max:
        return None
    return [[0] + [int(c) for c in line.split()] for line in lines[1:]]


def _load_basis(k: int, n_max: int, cache: DiskCache | None):
    name = f"qexp-k{k}-n{n_max}.txt.gz"
    if cache is not None:
        text = cache.read("qexp", name)
        if text is not None:
            rows = _parse_basis(text, k, n_max)
            if rows is not None:
                return rows
    rows = echelon_basis(k, n_max)
    if cache is not None:
        cache.write("qexp", name, _serialise_basis(k, n_max, rows))
    return rows


def _hecke_matrix(rows, p: int, k: int):
    d = len(rows)
    mat = mpmath.matrix(d, d)
    pk = p ** (k - 1)
    for i in range(d):
        for j in range(1, d + 1):
            v = rows[i][p * j]
            if j % p == 0:
                v += pk * rows[i][j // p]
            mat[i, j - 1] = v
    return mat


def _left_eigen(mat):
    """Eigenvalues and left eigenvectors normalised to first entry 1."""
    evals, evecs = mpmath.eig(mat.T)
    out = []
    for idx, ev in enumerate(evals):
        vec = [evecs[r, idx] for r in range(mat.rows)]
        if vec[0] == 0:
            raise EigenvalueCollisionError("eigenvector with vanishing first coefficient")
        out.append((mpmath.re(ev), [mpmath.re(v / vec[0]) for v in vec]))
    return out


_FORM_CACHE: dict = {}


def hecke_eigenforms(k: int, n_max: int, ctx: PrecisionContext, cache: DiskCache | None = None):
    """Hecke eigenbasis of S_k sorted by lambda(2) ascending."""
    d = cusp_dim(k)
    if d == 0:
        raise DimensionZeroError(f"S_{k} is zero-dimensional")
    if n_max < 2 * d + 1:
        raise ValueError("n_max must be at least 2*dim+1")
    key = (k, n_max, ctx.dps)
    if key in _FORM_CACHE:
        return _FORM_CACHE[key]
    for (kk, nn, dd), forms in _FORM_CACHE.items():
        if kk == k and dd == ctx.dps and nn >= n_max:
            out = [HeckeEigenform(k, f.index, f.lambdas[:n_max], n_max) for f in forms]
            _FORM_CACHE[key] = out
            return out
    rows = _load_basis(k, n_max, cache)
    half = mpf(k - 1) / 2
    # digits lost when combining basis rows: coefficient size against n^{(k-1)/2}
    loss = 0.0
    for n in range(1, n_max + 1):
        big = max(abs(r[n]) for r in rows)
        if big:
            top = big.bit_length() * 0.30103 + (k - 1) / 2 * math.log10(d)
            loss = max(loss, top - (k - 1) / 2 * math.log10(n))
    # the eigenproblem also loses digits: matrix entries dwarf the eigenvalues
    entries = max(abs(rows[i][2 * j]) for i in range(d) for j in range(1, d + 1))
    loss += max(0.0, entries.bit_length() * 0.30103 - (k - 1) / 2 * math.log10(2))
    work = ctx.dps + int(loss) + 15
    with mp.workdps(work):
        spectrum = _left_eigen(_hecke_matrix(rows, 2, k))
        vals = sorted(ev for ev, _ in spectrum)
        scale = mpf(2) ** half
        gaps = [abs(b - a) / scale for a, b in zip(vals, vals[1:])]
        if gaps and min(gaps) < mpf(10) ** (-ctx.working_digits):
            if n_max < 3 * d:
                raise EigenvalueCollisionError("T_2 spectrum degenerate and n_max too small for T_3")
            m3 = _hecke_matrix(rows, 3, k)
            m2 = _hecke_matrix(rows, 2, k)
            spectrum = _left_eigen(m2 + m3 * mpf(3) ** (-half) * scale * mpf("0.7071"))
            spectrum = [(sum(v[j] * m2[j, 0] for j in range(d)), v) for _, v in spectrum]
            vals = sorted(ev for ev, _ in spectrum)
            gaps = [abs(b - a) / scale for a, b in zip(vals, vals[1:])]
            if min(gaps) < mpf(10) ** (-ctx.working_digits):
                raise EigenvalueCollisionError("Hecke spectrum degenerate under T_2 and T_3")
        spectrum.sort(key=lambda pair: pair[0])
        logs = [mpf(0)] + [mpmath.log(n) for n in range(2, n_max + 1)]
        forms = []
        for idx, (_, coeffs) in enumerate(spectrum):
            lam = []
            for n in range(1, n_max + 1):
                a_n = mpmath.fsum(c * r[n] for c, r in zip(coeffs, rows))
                lam.append(a_n * mpmath.exp(-half * logs[n - 1]))
            with ctx.workdps():
                lam = tuple(+x for x in lam)
            forms.append(HeckeEigenform(k, idx, lam, n_max))
    for f in forms:
        _check_hecke(f, ctx)
    _FORM_CACHE[key] = forms
    return forms


def _check_hecke(f: HeckeEigenform, ctx: PrecisionContext) -> None:
    n_max = f.n_max
    tol = mpf(10) ** (-ctx.working_digits / 2)
    with ctx.workdps():
        for m, n in [(2, 3), (2, 2), (3, 3), (2, 5), (4, 6)]:
            if m * n > n_max:
                continue
            lhs = f.lam(m) * f.lam(n)
            rhs = sum(f.lam(m * n // (dd * dd)) for dd in range(1, math.gcd(m, n) + 1) if m % dd == 0 and n % dd == 0)
            if abs(lhs - rhs) > tol:
                raise PrecisionFailure(f"Hecke relation failed for weight {f.weight} at ({m},{n})")


def petersson_rho1_sq(g: HeckeEigenform, adjoint_value) -> mpf:
    """|rho_g(1)|^2 = pi / (2 Gamma(k) L(1, ad g))."""
    adjoint_value = mpmath.mpmathify(adjoint_value)
    if not adjoint_value > 0:
        raise ValueError("adjoint value must be positive")
    return mp.pi / (2 * mpmath.exp(_loggamma(mpf(g.weight))) * adjoint_value)


def _eisenstein_direct(z: complex, s: complex, bound: int):
    """Coprime-pair sum over |cz+d| <= bound, with a continuum tail correction."""
    x, y = z.real, z.imag
    total = complex(y**s)
    for c in range(1, int(bound / y) + 1):
        half = math.sqrt(max(bound * bound - (c * y) ** 2, 0.0))
        d = np.arange(math.ceil(-c * x - half), math.floor(-c * x + half) + 1)
        d = d[np.gcd(d, c) == 1]
        norm2 = (c * x + d) ** 2 + (c * y) ** 2
        total += np.sum(np.exp(-s * np.log(norm2))) * y**s
    sigma = s.real
    # lattice {cz+d} has covolume y; coprime density 6/pi^2; half the pairs counted
    tail = (3 / math.pi**2) / y * 2 * math.pi * bound ** (2 - 2 * s) / (2 * s - 2) * y**s
    next_order = abs(tail) * 2 / bound + abs(y**s) * 1e-15 * bound**2
    return total + tail, next_order


def _divisor_twist(n: int, s):
    return mpmath.fsum(mpmath.power(dd, 1 - 2 * s) for dd in range(1, n + 1) if n % dd == 0)


def _eisenstein_fourier(z, s, terms: int):
    x, y = mpmath.re(z), mpmath.im(z)
    const = y**s + _xi(2 - 2 * s) / _xi(2 * s) * y ** (1 - s)
    pref = 2 * mpmath.sqrt(y) / _xi(2 * s)
    acc = mpc0 = mpmath.mpc(0)
    last = mpc0
    for n in range(1, terms + 1):
        term = (
            pref
            * mpmath.power(n, s - mpf(0.5))
            * _divisor_twist(n, s)
            * mpmath.besselk(s - mpf(0.5), 2 * mp.pi * n * y)
            * 2
            * mpmath.cos(2 * mp.pi * n * x)
        )
        acc += term
        last = term
    tail = abs(last) * mpmath.exp(-2 * mp.pi * y) / (1 - mpmath.exp(-2 * mp.pi * y))
    return const + acc, tail


def eisenstein_value(z, s, trunc: EisensteinTruncation, ctx: PrecisionContext, method: str | None = None) -> ComplexValue:
    """E(z, s) by the coprime-pair sum (Re s > 1) or the Fourier expansion."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("z must lie in the upper half-plane")
    if method is None:
        method = "fourier"
    if method == "direct":
        s_c = complex(s)
        if s_c.real <= 1:
            raise ValueError("the coprime-pair sum needs Re s > 1")
        val, err = _eisenstein_direct(z, s_c, trunc.coprime_pair_bound)
        if err > 1e-5 * max(1.0, abs(val)):
            raise TruncationError("coprime-pair bound too small for the requested accuracy")
        return ComplexValue.of(val, err)
    with ctx.workdps():
        val, tail = _eisenstein_fourier(mpmath.mpmathify(z), mpmath.mpmathify(s), trunc.fourier_term_bound)
        if tail > ctx.target * max(1, abs(val)):
            raise TruncationError("fourier_term_bound too small for the requested accuracy")
        return ComplexValue.of(val, float(tail) + float(abs(val)) * 10.0 ** (-ctx.working_digits))


def _bessel_k_imag(t: float, x: np.ndarray) -> np.ndarray:
    """K_{it}(x) for real t and x >= 1 by the cosh integral, vectorised over x."""
    u_max = math.acosh(1 + 80.0 / float(np.min(x)))
    u = np.linspace(0.0, u_max, 1200)
    h = u[1] - u[0]
    w = np.full(u.shape, h)
    w[0] = h / 2
    integrand = np.exp(-np.multiply.outer(x, np.cosh(u))) * np.cos(t * u)
    return integrand @ w


def _eisenstein_grid(t: float, x: np.ndarray, y: np.ndarray, terms: int, ctx: PrecisionContext) -> np.ndarray:
    """E(x+iy, 1/2+it) on paired arrays; identically zero at t = 0."""
    if t == 0:
        return np.zeros_like(x, dtype=complex)
    with ctx.workdps():
        s = mpmath.mpc(0.5, t)
        phi = complex(_xi(2 - 2 * s) / _xi(2 * s))
        pref = complex(2 / _xi(2 * s))
        coeff = [complex(mpmath.power(n, s - 0.5) * _divisor_twist(n, s)) for n in range(1, terms + 1)]
    out = y ** complex(0.5, t) + phi * y ** complex(0.5, -t)
    for n in range(1, terms + 1):
        kk = _bessel_k_imag(t, 2 * math.pi * n * y)
        out = out + pref * np.sqrt(y) * coeff[n - 1] * kk * 2 * np.cos(2 * math.pi * n * x)
    return out


def _cusp_form_abs2(g: HeckeEigenform, rho1_sq: float, x: np.ndarray, y: np.ndarray, terms: int) -> np.ndarray:
    """y^k |g(z)|^2 with g = rho(1) (4 pi)^{k/2} sum lambda(n) n^{(k-1)/2} q^n."""
    k = g.weight
    lam = g.floats()[:terms]
    n = np.arange(1, terms + 1)
    logmag = (k / 2) * np.log(4 * math.pi * y)[:, None] + (k - 1) / 2 * np.log(n)[None, :] - 2 * math.pi * np.outer(y, n)
    phase = np.exp(2j * math.pi * np.outer(x, n))
    series = np.sum(lam[None, :] * np.exp(logmag) * phase, axis=1)
    return rho1_sq * np.abs(series) ** 2


def _domain_nodes(quad_grid, y_cut: float):
    nx, ny = quad_grid
    gx, wx = np.polynomial.legendre.leggauss(nx)
    gy, wy = np.polynomial.legendre.leggauss(ny)
    xs = 0.25 * (gx + 1)
    wxs = 0.25 * wx
    pts_x, pts_y, wts = [], [], []
    for xi, wxi in zip(xs, wxs):
        lo = math.sqrt(1 - xi * xi)
        # y = lo + (Y - lo) v^2 clusters nodes near the bottom where |G|^2 lives
        v = 0.5 * (gy + 1)
        yy = lo + (y_cut - lo) * v * v
        jac = (y_cut - lo) * 2 * v * 0.5
        pts_x.append(np.full(ny, xi))
        pts_y.append(yy)
        wts.append(2 * wxi * wy * jac / yy**2)
    return np.concatenate(pts_x), np.concatenate(pts_y), np.concatenate(wts)


def _adjoint_at_one(g: HeckeEigenform, ctx: PrecisionContext):
    from .lfun import adjoint_derivs

    return adjoint_derivs(g, ctx).values[0]


def fundamental_domain_inner_product(
    g: HeckeEigenform,
    t: float,
    trunc: EisensteinTruncation,
    quad_grid=(40, 80),
    ctx: PrecisionContext | None = None,
    adjoint_value=None,
    y_cut: float = 10.0,
) -> ComplexValue:
    """Integral of E(z, 1/2+it) |G(z)|^2 over the fundamental domain, y <= y_cut."""
    ctx = ctx or PrecisionContext()
    if abs(t) > 10:
        raise ValueError("|t| must be at most 10")
    if adjoint_value is None:
        adjoint_value = _adjoint_at_one(g, ctx)
    rho = float(petersson_rho1_sq(g, adjoint_value))
    terms = min(g.n_max, 60)
    x, y, w = _domain_nodes(quad_grid, y_cut)
    cusp = _cusp_form_abs2(g, rho, x, y, terms)
    eis = _eisenstein_grid(float(t), x, y, min(trunc.fourier_term_bound, 20), ctx)
    val = np.sum(w * eis * cusp)
    coarse = _coarse_estimate(g, rho, t, trunc, quad_grid, ctx, y_cut, terms)
    # mass beyond the cut: |G|^2 ~ y^k e^{-4 pi y}
    return ComplexValue.of(complex(val), abs(val - coarse) + 1e-14)


def _coarse_estimate(g, rho, t, trunc, quad_grid, ctx, y_cut, terms):
    nx, ny = quad_grid
    x, y, w = _domain_nodes((max(nx * 3 // 4, 4), max(ny * 3 // 4, 4)), y_cut)
    cusp = _cusp_form_abs2(g, rho, x, y, terms)
    eis = _eisenstein_grid(float(t), x, y, min(trunc.fourier_term_bound, 20), ctx)
    return np.sum(w * eis * cusp)


def petersson_norm_quadrature(
    g: HeckeEigenform, quad_grid=(40, 80), ctx: PrecisionContext | None = None, adjoint_value=None, y_cut: float = 10.0
) -> float:
    """<1, |G|^2> by the same fundamental-domain quadrature; equals 1 for a normalised G."""
    ctx = ctx or PrecisionContext()
    if adjoint_value is None:
        adjoint_value = _adjoint_at_one(g, ctx)
    rho = float(petersson_rho1_sq(g, adjoint_value))
    x, y, w = _domain_nodes(quad_grid, y_cut)
    return float(np.sum(w * _cusp_form_abs2(g, rho, x, y, min(g.n_max, 60))))
