"""Riesz-type scans, the main term, decay fits, and the Mellin identity."""

import math
import warnings

import numpy as np
import pytest

from dzeta.coefficients import build_table
from dzeta.fields import make_field
from dzeta.kernels import kernel_function, residue_calibrate
from dzeta.riesz import (decay_fit, m_k_decay_probe, main_term,
                         mellin_identity_check, mellin_p_nodes, p_eval,
                         riesz_scan)

FQ = make_field(None)
FI = make_field(-1)
F5 = make_field(5)


@pytest.fixture(scope="module")
def table_q():
    return build_table(FQ, 10 ** 6)


@pytest.fixture(scope="module")
def table_i():
    return build_table(FI, 10 ** 6)


@pytest.fixture(scope="module")
def table_5():
    return build_table(F5, 4 * 10 ** 5)


def test_p_eval_rational_form(table_q):
    # P(y) for Q equals 2 sum mu(n)/n e^{-y/n^2} once the finite-N residual
    # of the dropped constant is restored
    y = 50.0
    val, tail, N_used = p_eval(FQ, y, table_q, n_mult=1000.0)
    n = np.arange(1, N_used + 1, dtype=float)
    direct = 2.0 * float(np.sum(table_q.b[1:N_used + 1] / n * np.exp(-y / n ** 2)))
    shift = 2.0 * float(table_q.m[N_used])
    assert val == pytest.approx(direct - shift, abs=1e-12)
    assert tail >= 0.0


def test_p_eval_small_y(table_q):
    val, _, _ = p_eval(FQ, 1e-8, table_q)
    assert abs(val) < 1e-7          # Z(0+) = 0 makes P(0+) -> 0


def test_p_eval_gaussian_cross_check(table_i):
    y = 100.0
    val, _, N_used = p_eval(FI, y, table_i, n_mult=2000.0)
    n = np.arange(1, N_used + 1, dtype=float)
    direct = float(np.sum(table_i.b[1:N_used + 1] / n * np.expm1(-10.0 / n)))
    assert val == pytest.approx(direct, abs=1e-12)


def test_p_eval_tail_budget_warning():
    small = build_table(FQ, 100)
    with pytest.warns(UserWarning):
        p_eval(FQ, 10 ** 4, small)


@pytest.mark.parametrize("d", [None, -1, 5])
def test_p_eval_generic_kernel_matches_closed(d):
    # same truncation both routes, so this isolates kernel-evaluation agreement
    field = make_field(d)
    table = build_table(field, 500)
    closed = kernel_function(field.r1, field.r2)
    quad = kernel_function(field.r1, field.r2, method="quadrature")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        for y in (1.0, 10.0, 100.0):
            v_closed, _, _ = p_eval(field, y, table, kernel=closed, n_mult=3.0)
            v_quad, _, _ = p_eval(field, y, table, kernel=quad, n_mult=3.0)
            assert v_quad == pytest.approx(v_closed, abs=1e-8)


def test_main_term_zero_for_r0(table_q):
    consts = residue_calibrate(1, 0)
    assert main_term(FQ, 1e4, 0.1, consts, table_q) == 0.0


def test_main_term_cutoff_edge(table_5):
    consts = residue_calibrate(2, 0)
    # y small enough that [y^{1/2-eps}] - 1 = 0: empty sum
    assert main_term(F5, 2.0, 0.1, consts, table_5) == 0.0


def test_main_term_direct_formula(table_5):
    consts = residue_calibrate(2, 0)
    y, eps = 1e4, 0.1
    cutoff = int(math.floor(y ** 0.4)) - 1
    n = np.arange(1, cutoff + 1, dtype=float)
    expected = -4.0 * float(np.sum(
        table_5.b[1:cutoff + 1] / n
        * (np.log(n / math.sqrt(y)) - 0.5772156649015329)))
    got = main_term(F5, y, eps, consts, table_5)
    assert got == pytest.approx(expected, rel=1e-10)


def test_main_term_eps_validation(table_5):
    consts = residue_calibrate(2, 0)
    with pytest.raises(ValueError):
        main_term(F5, 100.0, 0.6, consts, table_5)


def test_decay_fit_synthetic_quarter():
    y = np.geomspace(1e2, 1e6, 60)
    fit = decay_fit(y, 3.0 * y ** -0.25)
    assert fit["slope"] == pytest.approx(-0.25, abs=0.01)
    assert fit["decay_flag"]


def test_decay_fit_synthetic_flat():
    y = np.geomspace(1e2, 1e6, 60)
    fit = decay_fit(y, np.full_like(y, 0.3))
    assert abs(fit["slope"]) < 0.01
    assert not fit["decay_flag"]


def test_decay_fit_oscillating_envelope():
    y = np.geomspace(1e2, 1e6, 200)
    sig = y ** -0.25 * np.sin(np.log(y) * 3.0)
    fit = decay_fit(y, sig)
    assert -0.35 < fit["slope"] < -0.15


def test_decay_fit_degenerate():
    y = np.geomspace(1e2, 1e6, 40)
    with pytest.raises(RuntimeError):
        decay_fit(y, np.zeros_like(y))


def test_riesz_scan_structure_real_quadratic(table_5):
    scan = riesz_scan(F5, table_5, 1e2, 1e5, 30, eps=0.1, n_mult=600.0)
    assert np.all(np.isfinite(scan.P_values))
    assert np.all(scan.main_term != 0.0)
    p_fit = decay_fit(scan.y_grid, scan.P_values)
    assert scan.fitted_exponent["slope"] < p_fit["slope"]


def test_riesz_scan_r0_main_identically_zero(table_q):
    scan = riesz_scan(FQ, table_q, 1e2, 1e5, 25, n_mult=300.0)
    assert np.all(scan.main_term == 0.0)
    assert np.all(scan.corrected == scan.P_values)


def test_riesz_scan_grid_guard(table_q):
    with pytest.raises(ValueError):
        riesz_scan(FQ, table_q, 1e2, 1e4, 10)


def test_riesz_scan_csv(tmp_path, table_q):
    scan = riesz_scan(FQ, table_q, 1e2, 1e5, 12, n_mult=100.0)
    path = tmp_path / "scan.csv"
    scan.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "y,P,main,corrected"
    assert len(lines) == 13


@pytest.mark.parametrize("field,table_name", [
    (FQ, "table_q"), (FI, "table_i"), (F5, "table_5")])
def test_mellin_identity_five_sample_points(field, table_name, request):
    table = request.getfixturevalue(table_name)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        nodes = mellin_p_nodes(field, table)
        for s in (0.15, 0.25, 0.35, 0.45, 0.25 + 0.1j):
            rep = mellin_identity_check(field, s, table, p_nodes=nodes)
            assert rep["passed"], (field.label(), s, rep["rel_discrepancy"])
            assert rep["rel_discrepancy"] <= 1e-3


def test_mellin_reality_for_real_s(table_q):
    rep = mellin_identity_check(FQ, 0.25, table_q)
    assert abs(rep["lhs"][1]) <= 1e-6
    assert abs(rep["rhs"][1]) <= 1e-12


def test_mellin_hardy_littlewood_factor(table_q):
    rep = mellin_identity_check(FQ, 0.25, table_q)
    assert rep["hl_factor"] == pytest.approx(2.0, abs=1e-3)


def test_mellin_domain_guard(table_q):
    for s in (0.0, 0.5, 0.7, -0.1):
        with pytest.raises(ValueError):
            mellin_identity_check(FQ, s, table_q)


def test_m_k_decay_probe(table_q):
    rep = m_k_decay_probe(table_q)
    assert 0.3 < rep["M_exponent"] < 0.7
    assert -0.7 < rep["m_exponent"] < -0.3


def test_m_k_decay_probe_requires_big_table():
    t = build_table(FQ, 10 ** 4)
    with pytest.raises(ValueError):
        m_k_decay_probe(t)
