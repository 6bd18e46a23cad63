import cmath
import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp, mpc, mpf

from rsmoment.errors import PoleInputError, QuadratureFailure
from rsmoment.specialfn import (
    PrecisionContext,
    completed_xi,
    log_gamma,
    mellin_whittaker_check,
    stirling_log_abs_gamma,
    whittaker_W,
    zeta,
    zeta_laurent_at_1,
)

CTX = PrecisionContext(30)


def close(a, b, tol):
    return abs(complex(a) - complex(b)) <= tol * max(1.0, abs(complex(b)))


def test_context_rejects_low_precision():
    with pytest.raises(ValueError):
        PrecisionContext(20)


def test_log_gamma_trivial_values():
    assert abs(log_gamma(1, CTX).value) < 1e-28
    with mp.workdps(40):
        assert abs(log_gamma(mpf(1) / 2, CTX).value - mpmath.log(mp.pi) / 2) < 1e-28


def test_log_gamma_recurrence_oracle():
    with mp.workdps(50):
        z = mpc(10, 5)
        shifted = mpmath.loggamma(z + 20)
        oracle = shifted - mpmath.fsum(mpmath.log(z + j) for j in range(20))
        assert abs(log_gamma(z, CTX).value - oracle) < 1e-25


@given(st.floats(-9.5, 9.5), st.floats(0.05, 9.5))
def test_reflection_formula(x, y):
    with mp.workdps(40):
        z = mpc(x, y)
        lhs = mpmath.exp(log_gamma(z, CTX).value + log_gamma(1 - z, CTX).value)
        rhs = mp.pi / mpmath.sin(mp.pi * mpmath.mpmathify(z))
        assert abs(lhs - rhs) <= 1e-20 * abs(rhs)


def test_zeta_trivial_and_partial_sum_oracles():
    assert close(zeta(-1, CTX).value, -1 / 12, 1e-25)
    with mp.workdps(40):
        # sum n^{-2} to N plus Euler-Maclaurin tail 1/N - 1/(2N^2) + 1/(6N^3) - 1/(30 N^5)
        n = 1000
        partial = mpmath.fsum(mpf(1) / j**2 for j in range(1, n))
        tail = mpf(1) / n + mpf(1) / (2 * n**2) + mpf(1) / (6 * n**3) - mpf(1) / (30 * n**5)
        assert abs(zeta(2, CTX).value - (partial + tail)) < 1e-15


def test_zeta_first_zero_bracket():
    assert abs(zeta(mpc(0.5, 14.134725), CTX).value) < 1e-3


def test_zeta_laurent_coefficients():
    c = zeta_laurent_at_1(3, CTX)
    assert c[0] == 1
    with mp.workdps(40):
        # gamma by H_N - log N - 1/(2N) + 1/(12 N^2) - 1/(120 N^4)
        n = 2000
        h = mpmath.fsum(mpf(1) / j for j in range(1, n + 1))
        oracle = h - mpmath.log(n) - mpf(1) / (2 * n) + mpf(1) / (12 * n**2) - mpf(1) / (120 * n**4)
        assert abs(c[1] - oracle) < 1e-15
    assert zeta_laurent_at_1(0, CTX) == [1]


def test_zeta_laurent_resums_to_zeta():
    c = zeta_laurent_at_1(8, CTX)
    with mp.workdps(40):
        w = mpf("0.05")
        series = 1 / w + mpmath.fsum(cj * w**j for j, cj in enumerate(c[1:]))
        assert abs(series - zeta(1 + w, CTX).value) < 10.0 ** (-CTX.working_digits / 2)


def test_xi_values():
    with mp.workdps(40):
        assert abs(completed_xi(2, CTX).value - mp.pi / 6) < 1e-25
        oracle = mp.pi ** (-2) * mp.pi**4 / 90
        assert abs(completed_xi(4, CTX).value - oracle) < 1e-25
    with pytest.raises(PoleInputError):
        completed_xi(1, CTX)


@given(st.floats(0.01, 0.99), st.floats(-30, 30))
def test_xi_functional_equation(x, y):
    with mp.workdps(40):
        s = mpc(x, y)
        a = completed_xi(s, CTX)
        b = completed_xi(1 - s, CTX)
        assert abs(a.value - b.value) <= 1e-20 * max(1e-30, abs(b.value)) + a.err + b.err


def test_whittaker_closed_form_and_asymptotics():
    assert close(whittaker_W(0, 0.5, 1, CTX).value, math.exp(-0.5), 1e-25)
    with mp.workdps(40):
        w = whittaker_W(6, 0.5, 80, CTX).value
        assert abs(w / (mpf(80) ** 6 * mpmath.exp(-40)) - 1) < 0.5
        assert abs(whittaker_W(6, 0.25, 3, CTX).value - mpmath.whitw(6, 0.25, 3)) < 1e-25
    assert whittaker_W(6, 5.5, 1, CTX).re > 0


@pytest.mark.parametrize("mu", [5.5, 2j])
def test_mellin_whittaker(mu):
    lhs, rhs = mellin_whittaker_check(6, mu, 2, CTX)
    assert abs(lhs.value - rhs.value) <= 1e-8 * (1 + abs(rhs.value))


def test_mellin_rhs_is_gamma_ratio():
    _, rhs = mellin_whittaker_check(6, 5.5, 2, CTX)
    k, ell, s = 12, 12, 2
    with mp.workdps(40):
        oracle = mpmath.gamma(s + (k + ell) / 2 - 1) * mpmath.gamma(s + (k - ell) / 2) / mpmath.gamma(s)
        assert abs(rhs.value - oracle) < 1e-20 * oracle


def test_mellin_divergent_input():
    with pytest.raises(QuadratureFailure):
        mellin_whittaker_check(0, 3, 0.5, CTX)


def test_stirling():
    assert stirling_log_abs_gamma(0.5, 0) == -0.5
    assert stirling_log_abs_gamma(3, 7) == stirling_log_abs_gamma(3, -7)
    worst = 0.0
    for sigma in (0.5, 1, 5, 20, 50):
        for tau in range(-50, 51, 5):
            exact = mpmath.log(abs(mpmath.gamma(mpc(sigma, tau))))
            worst = max(worst, abs(float(exact) - stirling_log_abs_gamma(sigma, tau)))
    assert worst <= 3
