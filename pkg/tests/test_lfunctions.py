"""zeta/L/zeta_K evaluation, the functional equation, and zero lists."""

import math

import mpmath
import numpy as np
import pytest

from dzeta.coefficients import build_table
from dzeta.fields import class_number_data, make_field
from dzeta.lfunctions import (argument_principle_count, completed_lambda,
                              dedekind_eval, expansion_data, find_zeros,
                              hardy_z, hurwitz_zeta, l_eval, zeta_K_prime_at,
                              zeta_eval)

mpmath.mp.dps = 30

FQ = make_field(None)
FI = make_field(-1)
F5 = make_field(5)
F3 = make_field(-3)

CATALAN = 0.915965594177219015054603514932

# first three ordinates of the zeta zeros (classical values)
ZETA_ZEROS = [14.134725141734694, 21.022039638771555, 25.010857580145688]


def test_zeta_classical_values():
    assert zeta_eval(2.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-14)
    assert zeta_eval(-1.0) == pytest.approx(-1.0 / 12.0, rel=1e-14)
    assert zeta_eval(0.0) == pytest.approx(-0.5, rel=1e-14)


def test_zeta_near_first_zero():
    assert abs(zeta_eval(0.5 + 14.134725j)) < 1e-4


def test_zeta_accuracy_on_strip():
    # relative target away from zeros, absolute at the same scale where |zeta|
    # collapses (s = -2 + 0.3i sits next to the trivial zero)
    worst = 0.0
    for sig in (-2.0, -0.5, 0.5, 1.5, 3.0):
        for t in (0.3, 14.0, 62.0, 145.0, 199.0):
            s = complex(sig, t)
            ref = complex(mpmath.zeta(mpmath.mpc(sig, t)))
            err = abs(zeta_eval(s) - ref)
            worst = max(worst, err / max(1.0, abs(ref)))
    assert worst <= 1e-10


def test_zeta_pole_rejected():
    with pytest.raises(ValueError):
        zeta_eval(1.0)


def test_hurwitz_against_mpmath():
    for a in (0.25, 0.75, 1.0):
        for s in (2.0 + 0j, 0.5 + 9j, -1.5 + 30j):
            ref = complex(mpmath.zeta(mpmath.mpc(s), a))
            assert abs(hurwitz_zeta(s, a) - ref) <= 1e-11 * max(1.0, abs(ref))


def test_l_values():
    assert l_eval(1.0, FI) == pytest.approx(math.pi / 4, rel=1e-13)
    assert l_eval(2.0, FI) == pytest.approx(CATALAN, rel=1e-13)
    assert abs(l_eval(0.0, F5)) < 1e-9          # trivial zero of an even character
    assert l_eval(1.0, F3) == pytest.approx(math.pi / (3 * math.sqrt(3)), rel=1e-12)


def test_l_rejected_for_rational():
    with pytest.raises(ValueError):
        l_eval(2.0, FQ)


def test_dedekind_factorization():
    s = 2.0
    assert dedekind_eval(s, FI) == pytest.approx(
        complex(zeta_eval(s) * l_eval(s, FI)), rel=1e-14)
    assert dedekind_eval(3.0, FQ) == pytest.approx(complex(zeta_eval(3.0)), rel=1e-15)


def test_dedekind_matches_coefficient_series():
    t = build_table(FI, 10 ** 5)
    n = np.arange(1, t.N + 1, dtype=float)
    direct = float(np.sum(t.a[1:] / n ** 2))
    assert complex(dedekind_eval(2.0, FI)).real == pytest.approx(direct, abs=1e-4)


def test_completed_lambda_value():
    # Lambda(2) for Q: pi^{-1} Gamma(1) zeta(2) = pi/6
    assert complex(completed_lambda(2.0, FQ)) == pytest.approx(math.pi / 6, rel=1e-13)


def test_completed_lambda_poles():
    for s in (0.0, 1.0):
        with pytest.raises(ValueError):
            completed_lambda(s, FQ)


@pytest.mark.parametrize("field", [FQ, FI, F5, F3])
def test_functional_equation_grid(field):
    worst = 0.0
    for sig in (0.25, 0.4, 0.6, 0.75):
        for t in (1.5, 4.0, 8.0, 13.0, 18.0):
            s = complex(sig, t)
            a = complex(completed_lambda(s, field))
            b = complex(completed_lambda(1 - s, field))
            worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
    assert worst <= 1e-8


def test_hardy_rotation_is_real_scale():
    # the rotated factor equals |factor| up to sign on the critical line
    t = np.linspace(2.0, 28.0, 30)
    z = hardy_z(t, FI, "L")
    vals = np.abs(l_eval(0.5 + 1j * t, FI))
    assert np.allclose(np.abs(z), vals, atol=1e-10)


def test_find_zeros_rational():
    zl = find_zeros(FQ, 30.0)
    assert len(zl) == 3
    for got, ref in zip(zl.gamma, ZETA_ZEROS):
        assert abs(got - ref) <= 2e-9
    assert np.all(zl.localization_err <= 1e-9)
    assert all(s == "zeta" for s in zl.source)
    assert np.all(np.diff(zl.gamma) > 0)


def test_find_zeros_gaussian_first_L_gamma():
    zl = find_zeros(FI, 10.0)
    assert len(zl) == 1 and zl.source[0] == "L"
    assert zl.gamma[0] == pytest.approx(6.0209, abs=5e-4)


@pytest.mark.parametrize("field", [FQ, FI, F5, F3])
def test_zero_completeness_argument_principle(field):
    zl = find_zeros(field, 50.0)
    assert argument_principle_count(field, 50.0) == len(zl)
    assert zl.window_count_constant < 5.0


def test_find_zeros_budget_guard():
    with pytest.raises(ValueError):
        find_zeros(FQ, 250.0)


def test_zeros_threads_deterministic():
    a = find_zeros(FI, 25.0, threads=1)
    b = find_zeros(FI, 25.0, threads=3)
    assert np.allclose(a.gamma, b.gamma, atol=1e-12)
    assert a.source == b.source


def test_zeta_K_prime_dual_route():
    zl = find_zeros(F5, 25.0)
    assert zl.dual_route_max <= 1e-6
    rho = 0.5 + 1j * float(zl.gamma[0])
    v = zeta_K_prime_at(rho, F5, zl.source[0])
    assert abs(v) > 1e-3


def test_zeta_K_prime_guard_on_fake_multiple_zero():
    # feeding an L-factor zero with a zeta tag makes the product formula
    # nearly vanish, which must trip the simplicity guard
    zl = find_zeros(FI, 10.0)
    rho = 0.5 + 1j * float(zl.gamma[0])      # an L zero
    with pytest.raises(RuntimeError):
        zeta_K_prime_at(rho, FI, "zeta")


def test_bracketing_rule():
    zl = find_zeros(FI, 30.0, c0=0.01)
    # with c0 = 0.01 the threshold is ~1.9, so close merged ordinates share brackets
    assert zl.bracket_count <= len(zl)
    gaps = np.diff(zl.gamma)
    same = zl.bracket_id[1:] == zl.bracket_id[:-1]
    assert np.all(gaps[same] < 2.0)
    # a large constant makes every bracket a singleton
    zl2 = find_zeros(FI, 30.0, c0=5.0)
    assert zl2.bracket_count == len(zl2)


def test_zero_csv(tmp_path):
    zl = find_zeros(FQ, 22.0)
    path = tmp_path / "zeros.csv"
    zl.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0].split(",")[:2] == ["gamma", "source"]
    assert len(lines) == len(zl) + 1


def test_expansion_data_values():
    ed = expansion_data(FQ)
    assert ed.zeta_K_prime_at_0 == pytest.approx(-0.5, abs=1e-10)
    assert ed.residue_at_1 == pytest.approx(1.0, abs=1e-8)

    edi = expansion_data(FI)
    assert edi.residue_at_1 == pytest.approx(math.pi / 4, abs=1e-8)
    assert edi.zeta_K_prime_at_0 == pytest.approx(-0.25, abs=1e-10)

    inv5 = class_number_data(F5)
    ed5 = expansion_data(F5, inv5)
    assert ed5.zeta_K_prime_at_0 == pytest.approx(-inv5.hR / 2.0, rel=1e-6)
    assert ed5.residue_at_1 == pytest.approx(inv5.L1, rel=1e-8)
    assert ed5.residuals["class_formula_rel"] <= 1e-6
