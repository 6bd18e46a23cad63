import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp, mpf

from conftest import synthetic_hecke_lambdas
from rsmoment import moments as Mo
from rsmoment.errors import DataParseError, DataValidationError, DimensionZeroError
from rsmoment.lfun import build_rankin_selberg, evaluate
from rsmoment.mainterm import TorusContour, m0_by_residue
from rsmoment.modforms import hecke_eigenforms
from rsmoment.specialfn import PrecisionContext
from rsmoment.weights import h_hol

CTX = PrecisionContext(30)
COARSE = Mo.IdentitySettings(30, 0.5, 12.0)


@pytest.fixture(scope="module")
def g12():
    return hecke_eigenforms(12, 4000, CTX)[0]


def test_ingest_empty(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("# precision: 1e-10\n")
    assert Mo.ingest_maass_data(p) == []


def test_ingest_sorted_and_tagged(maass_csv):
    p = maass_csv([(17.7, -1, synthetic_hecke_lambdas(60, 1)), (13.8, 1, synthetic_hecke_lambdas(60, 2))])
    recs = Mo.ingest_maass_data(p)
    assert [r.t for r in recs] == [13.8, 17.7]
    assert recs[0].source_tag == "synthetic Satake parameters"
    assert recs[1].n_max == 60


def test_ingest_names_bad_record(maass_csv):
    lam = synthetic_hecke_lambdas(60, 3)
    lam[5] += 1e-3  # lambda(6)
    p = maass_csv([(13.8, 1, synthetic_hecke_lambdas(60, 4)), (15.0, 1, lam)])
    with pytest.raises(DataValidationError, match=r"record 1 \(t=15.0\): Hecke relation"):
        Mo.ingest_maass_data(p)


def test_ingest_precision_controls_tolerance(maass_csv):
    lam = synthetic_hecke_lambdas(60, 5)
    lam[5] += 1e-9
    with pytest.raises(DataValidationError):
        Mo.ingest_maass_data(maass_csv([(13.8, 1, lam)], precision="1e-12"))
    assert len(Mo.ingest_maass_data(maass_csv([(13.8, 1, lam)], precision="1e-8", name="b.csv"))) == 1


@pytest.mark.parametrize(
    "body, exc",
    [
        ("t,parity\n", DataParseError),
        ("t,parity,n_max\n13.8,1,3\n", DataParseError),
        ("t,parity,n_max\n13.8,1,3\n1.0,0.5\n", DataParseError),
        ("t,parity,n_max\n13.8,2,2\n1.0,0.5\n", DataValidationError),
        ("t,parity,n_max\n-1,1,2\n1.0,0.5\n", DataValidationError),
        ("t,parity,n_max\n13.8,1,2\n0.9,0.5\n", DataValidationError),
        ("t,parity,n_max\n13.8,x,2\n1.0,0.5\n", DataParseError),
    ],
)
def test_ingest_malformed(tmp_path, body, exc):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(exc):
        Mo.ingest_maass_data(p)


@given(st.integers(0, 10**6), st.floats(9.0, 40.0), st.sampled_from([1, -1]))
def test_export_round_trip(tmp_path_factory, seed, t, parity):
    rec = Mo.MaassFormData(t, parity, tuple(synthetic_hecke_lambdas(40, seed)), "synthetic")
    p = tmp_path_factory.mktemp("rt") / "m.csv"
    Mo.export_maass_data([rec], p)
    assert Mo.ingest_maass_data(p) == [rec]


def test_band_term_first_even_form():
    # L(1/2, f) ~ 0.3 and L(1, ad f) ~ 1 are the right scale for the first even form
    v = Mo.maass_band_term(Mo.FIRST_EVEN_MAASS_T, 0.3, 1.0, 40, majorant=1e3)
    assert v < 1e-6


def test_band_without_data_is_pure_tail(g12):
    band = Mo.m_tilde_maass_band(12, g12, [], CTX)
    assert band == Mo.maass_band_tail(12, Mo.FIRST_EVEN_MAASS_T)
    assert band == 100 * math.sqrt(12) * math.exp(-math.pi * Mo.FIRST_EVEN_MAASS_T / 2)


def test_band_ignores_odd_forms(g12):
    odd = Mo.MaassFormData(9.53, -1, tuple(synthetic_hecke_lambdas(30, 7)))
    assert Mo.m_tilde_maass_band(12, g12, [odd], CTX) == Mo.maass_band_tail(12, 9.53)


def test_m_hol_weight_twelve(g12):
    hol = Mo.m_hol(12, g12, CTX)
    with mp.workdps(30):
        central = evaluate(build_rankin_selberg(g12, g12), mpf(1) / 2, CTX).re
        expected = central**2 / Mo._adjoint_at_one(g12, CTX) * h_hol(12, 12, CTX)
    assert hol.extraction_gap == 0
    assert len(hol.terms) == 1
    assert abs(hol.value - float(expected)) < 1e-12 * abs(hol.value)
    assert hol.value > 0


def test_m_eis_nonnegative(g12):
    e = Mo.m_eis(12, g12, CTX, COARSE)
    assert e.value >= 0 and e.quadrature_err < 1e-3 * e.value


def test_m_tilde_eis_conjugate_symmetry(g12):
    assert Mo.m_tilde_eis(12, g12, CTX, COARSE).imag_residue < 1e-8


def test_direct_oracle_matches_spectral_lhs(g12):
    lhs = Mo.m_hol(12, g12, CTX).value + Mo.m_eis(12, g12, CTX, Mo.IdentitySettings(30, 0.1, 28.0)).value
    direct = Mo.normalised_inner_product_direct(g12, CTX)
    assert abs(lhs - direct) < 1e-6


@pytest.mark.parametrize("t", [0.5, 1.0, 3.0])
def test_projection_conjugate(g12, t):
    a = Mo.eisenstein_projection(g12, t, CTX)
    b = Mo.eisenstein_projection(g12, -t, CTX)
    assert abs(a - b.conjugate()) < 1e-12 * abs(a)


def test_projection_degenerate_at_zero(g12):
    assert Mo.eisenstein_projection(g12, 0.0, CTX) == 0
    assert abs(Mo.eisenstein_projection(g12, 1e-6, CTX)) < 1e-4


def test_tolerance_cap_and_floor():
    assert Mo.tolerance(12, 2.0) == pytest.approx(2e-3)
    assert Mo.tolerance(200, 2.0) == pytest.approx(2e-6)
    k = 60
    assert Mo.tolerance(k, 1.0) == pytest.approx(max(1e-6, 2.0**-k * k**1.5 * 100))


def test_identity_report_shape_and_m0_ablation(tmp_path):
    rep = Mo.verify_identity(12, settings=COARSE, ctx=CTX)
    ablated = Mo.verify_identity(12, settings=COARSE, ctx=CTX, include_m0=False)
    m0 = float(m0_by_residue(12, hecke_eigenforms(12, 800, CTX)[0], TorusContour(), CTX).re)
    assert rep.rhs_components["m0"] == pytest.approx(m0)
    assert ablated.rhs_components["m0"] == 0
    assert abs(ablated.rhs_total - (rep.rhs_total - m0)) < 1e-9
    assert ablated.margin == pytest.approx(abs(rep.lhs_total - rep.rhs_components["m_tilde_eis"]))
    # neglect budget at k = 12 is c_tail k^1.5 2^-k, about 1.0
    assert rep.neglect_budget == pytest.approx(100 * 12**1.5 / 4096)
    p = tmp_path / "id.json"
    rep.write_json(p, {"note": "x"})
    d = json.loads(p.read_text())
    assert d["allowed"] == pytest.approx(rep.allowed)
    assert d["schema_version"] == Mo.REPORT_SCHEMA_VERSION and d["note"] == "x"
    assert rep.verdict in ("pass", "fail") and rep.passed == (rep.verdict == "pass")


def test_identity_rejects_empty_space():
    with pytest.raises(DimensionZeroError):
        Mo.verify_identity(14, settings=COARSE)
