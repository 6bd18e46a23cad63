import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp, mpc, mpf

from rsmoment import mainterm as M
from rsmoment.errors import ContourError, SummationBudgetExceeded, TooCloseToPoleError
from rsmoment.lfun import adjoint_derivs
from rsmoment.modforms import hecke_eigenforms
from rsmoment.specialfn import PrecisionContext

CTX = PrecisionContext(30)
# frozen from independent routes at k = 12 (limit extrapolation and torus residue agree to 1.5e-13)
M0_K12 = 214.0210245771
M0_SCALED_K12 = 223.307585534096


def rel(a, b):
    return abs(float(a) - float(b)) / abs(float(b))


def test_psi_big_symmetric_and_real(delta):
    a = M.psi_big(0.1, 0.07, delta, CTX)
    b = M.psi_big(0.07, 0.1, delta, CTX)
    assert abs(a.value - b.value) < 1e-20 * abs(a.value)
    assert abs(a.im) == 0


def test_psi_big_simple_pole(delta):
    vals = [mpf(w) * M.psi_big(w, 0.1, delta, CTX).value for w in (2e-3, 1e-3, 5e-4)]
    # w1 Psi is holomorphic at w1 = 0, so successive differences shrink linearly
    d1, d2 = abs(vals[0] - vals[1]), abs(vals[1] - vals[2])
    assert d2 < 0.6 * d1
    assert abs(vals[2]) < 1e6


def test_psi_small_two_routes(delta):
    w1, w2, k = mpf("0.1"), mpf("0.07"), 12
    small = M.psi_small(w1, w2, delta, k, CTX).value
    big = M.psi_big(w1, w2, delta, CTX).value
    with mp.workdps(45):
        u = w1 + w2
        expected = big * (k / (4 * mp.pi**2)) ** u * (1 - 64 * w1**6) * (1 - 64 * w2**6)
        expected /= 2 * (4 * mp.pi**2) ** (-u) * mpmath.gamma(u + k) / mpmath.gamma(k)
        assert abs(small - expected) < 1e-14 * abs(expected)
    assert abs(M.psi_small(w2, w1, delta, k, CTX).value - small) < 1e-14 * abs(small)


def test_deflation_cancels_pole(delta):
    near = abs(M.psi_small(-0.5 + 1e-4, 0.1, delta, 12, CTX).value)
    away = abs(M.psi_small(-0.4, 0.1, delta, 12, CTX).value)
    assert near < 2 * away
    assert abs(M.psi_big(-0.5 + 1e-4, 0.1, delta, CTX).value) > 100 * near


def test_pole_guard(delta):
    with pytest.raises(TooCloseToPoleError):
        M.psi_big(1e-12, 0.1, delta, CTX)


def test_weight_mismatch(delta):
    with pytest.raises(ValueError):
        M.psi_small(0.1, 0.1, delta, 16, CTX)


def test_sign_sum_finite_near_origin(delta):
    limit = M.m0_by_limit(12, delta, CTX)
    probe = M.m0_sign_sum(mpf(1e-3), mpf(1.7e-3), delta, CTX).real
    assert abs(probe / limit.re) < 10
    assert abs(probe / limit.re - 1) < 1e-3


def test_sign_sum_model_vs_direct(delta):
    a = M.m0_sign_sum(mpf("0.02"), mpf("0.034"), delta, CTX)
    b = M.m0_sign_sum(mpf("0.02"), mpf("0.034"), delta, CTX, direct=True)
    assert abs(a - b) < 1e-10 * abs(b)


def test_limit_vs_residue(delta):
    lim = M.m0_by_limit(12, delta, CTX)
    res = M.m0_by_residue(12, delta, M.TorusContour(), CTX)
    assert rel(lim.re, res.re) < 1e-6
    assert lim.im == 0 and res.im == 0
    assert rel(res.re, M0_K12) < 1e-10


def test_holomorphy_probe(delta):
    limit = M.m0_by_limit(12, delta, CTX).re
    worst = 0.0
    for r in (1e-3, 3e-3, 1e-2):
        for ang in (0.3, 0.9, 1.3):
            w1, w2 = r * math.cos(ang), r * math.sin(ang)
            v = M.m0_sign_sum(mpf(w1), mpf(w2), delta, CTX).real
            worst = max(worst, float(abs(v - limit)) / r)
    assert worst < 1e4


def test_residue_node_doubling_and_radius(delta):
    a = M.m0_by_residue(12, delta, M.TorusContour(), CTX).re
    b = M.m0_by_residue(12, delta, M.TorusContour(nodes_per_circle=128), CTX).re
    c = M.m0_by_residue(12, delta, M.TorusContour(0.07, 0.13), CTX).re
    assert rel(a, b) < 1e-8
    assert rel(a, c) < 1e-8


def test_contour_validation():
    with pytest.raises(ContourError):
        M.TorusContour(0.12, 0.05)
    with pytest.raises(ContourError):
        M.TorusContour(nodes_per_circle=10)


def test_contour_outside_model(delta):
    with pytest.raises(ContourError):
        M.m0_by_residue(12, delta, M.TorusContour(0.1, 0.2), CTX)


def test_scaled_residue(delta):
    a = M.m0_scaled_residue(12, delta, M.TorusContour(), CTX)
    b = M.m0_scaled_residue(12, delta, M.TorusContour(nodes_per_circle=128), CTX)
    assert rel(a.re, b.re) < 1e-8
    assert a.im == 0
    assert rel(a.re, M0_SCALED_K12) < 1e-10


def test_laurent_matches_quadrature(delta):
    lr = M.laurent_polynomials(12, delta, None, CTX)
    sc = M.m0_scaled_residue(12, delta, M.TorusContour(), CTX)
    assert rel(lr.main_value, sc.re) < 1e-8
    for j, pj in enumerate(lr.p_polys):
        assert len(pj) == j + 1
        assert abs(pj[-1]) > 1e-6
    # leading coefficient of Q_0 is 1/(2 pi)
    assert abs(float(lr.q_polys[0][-1]) - 1 / (2 * math.pi)) < 1e-12


def test_p_polynomial_identity(delta):
    lr = M.laurent_polynomials(12, delta, None, CTX)
    adj = adjoint_derivs(delta, CTX)
    with mp.workdps(40):
        s = mpmath.fsum(mpmath.polyval(list(reversed(lr.p_polys[j])), mpmath.log(12)) * adj.values[3 - j] for j in range(4))
    sc = M.m0_scaled_residue(12, delta, M.TorusContour(), CTX).re
    assert rel(s, sc / (8 * 12) * 8) < 1e-8


def test_c_values():
    assert abs(float(M.c_constant(CTX).re) + 539.0957) < 1e-3
    assert abs(float(M.c_sextic(CTX).re) + 112733.02649679) < 1e-6


def test_c_integrand_conjugate_symmetric():
    with mp.workdps(30):
        for t in (0.3, 2.0, 7.5):
            for printed in (True, False):
                a = M._c_integrand(mpc(0.25, t), printed)
                b = M._c_integrand(mpc(0.25, -t), printed)
                assert abs(a - mpmath.conj(b)) < 1e-20 * abs(a)


def test_c_derived_independent_of_form(delta, g16):
    a = M.c_derived(CTX, delta)
    b = M.c_derived(CTX, g16)
    assert rel(a.re, b.re) < 1e-8
    # the residue at w1 = -w2 carries the sextic deflation, not the printed quadratic one
    assert rel(a.re, M.c_sextic(CTX).re) < 1e-8
    assert rel(a.re, M.c_constant(CTX).re) > 10


def test_w1_two_routes():
    c = float(M.c_sextic(CTX).re)
    for n in (1, 5, 40, 300):
        assert abs(M.w1_weight(n, 40, CTX, c) - M.w1_closed_form(n, 40, c)) < 1e-8 * abs(c)


@given(st.integers(1, 10**6), st.integers(6, 100).map(lambda j: 2 * j))
def test_w1_bounded(n, k):
    c = -112733.02649679
    assert abs(M.w1_closed_form(n, k, c)) <= abs(c) / (2 * math.sqrt(math.pi)) + 1e-9


@given(st.integers(1, 10**5), st.integers(6, 100).map(lambda j: 2 * j))
def test_w2_nonnegative(n, k):
    assert M.w2_weight(n, k, CTX) >= 0


def test_w2_is_square():
    i = M.w2_integral([3, 7], 100)
    assert M.w2_weight(7, 100) == pytest.approx(float(i[1] ** 2), rel=1e-12)


def test_w2_fit_reports():
    fit = M.w2_asymptotic_fit(200)
    assert fit["n_count"] == 5
    assert fit["min_W2"] >= 0
    assert math.isfinite(fit["C"]) and math.isfinite(fit["C_double_pole"])
    assert M.w2_asymptotic_fit(12)["C"] is None


def test_decomposition(delta):
    c = float(M.c_sextic(CTX).re)
    d = M.decomposition_check(12, delta, CTX, c=c, m0=M0_K12)
    assert d.method == "dirichlet" and math.isfinite(d.residual)
    assert d.residual_scaled == d.residual / (12 * math.log(12) ** 0.5)


def test_double_integral_grid_real():
    g = hecke_eigenforms(12, 4000, CTX)[0]
    val, imag = M._double_integral_grid(12, g, CTX, h=0.25, T=12.0)
    assert imag < 1e-8 * max(1.0, abs(val))


def test_certificate_budget(delta):
    short = hecke_eigenforms(12, 100, CTX)[0]
    with pytest.raises(SummationBudgetExceeded):
        M.lower_bound_certificate(12, short, None, CTX, c=-112733.0)
    with pytest.raises(ValueError):
        M.lower_bound_certificate(12, delta, 50, CTX, c=-112733.0)


def test_certificate_fields(delta):
    cert = M.lower_bound_certificate(12, delta, None, CTX, c=float(M.c_sextic(CTX).re))
    assert cert.n_cut == 144
    assert set(cert.verdicts) == {"s1_floor", "s2_nonnegative", "s3_lower", "s4_tail"}
    assert cert.s4_bound > 0 and cert.s4_estimate > 0


def test_main_term_report_json(delta, tmp_path):
    rep = M.main_term_report(12, delta, CTX, methods=("limit", "residue", "scaled", "laurent"))
    assert rep.discrepancies["limit_vs_residue"] < 1e-6
    assert rep.discrepancies["laurent_vs_scaled"] < 1e-8
    assert rep.c_route == "sextic"
    p = tmp_path / "r.json"
    rep.write_json(p)
    assert '"m0_residue"' in p.read_text()
    assert rep.csv_row().count(",") == M.MainTermReport.csv_header().count(",")
