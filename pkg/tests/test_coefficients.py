"""Coefficient arrays a_n, b_n and the partial sums M_K, m_K."""

import math

import numpy as np
import pytest

from dzeta.coefficients import (b_via_prime_ideals, build_table,
                                convolution_residual, dirichlet_inverse,
                                ideal_counts, partial_sums)
from dzeta.fields import make_field

FIELDS = [None, -1, 5, -3]


def mobius_oracle(n: int) -> int:
    """Moebius function by trial factorization."""
    if n == 1:
        return 1
    out = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            out = -out
        p += 1 if p == 2 else 2
    if n > 1:
        out = -out
    return out


def gaussian_norm_count_oracle(n: int) -> int:
    """Ideal count of Z[i] at norm n: lattice points on x^2+y^2=n, over 4 units."""
    count = 0
    for x in range(-math.isqrt(n), math.isqrt(n) + 1):
        rem = n - x * x
        y = math.isqrt(rem)
        if y * y == rem:
            count += 2 if y > 0 else 1
    return count // 4


def test_ideal_counts_rational():
    a = ideal_counts(make_field(None), 50)
    assert np.all(a[1:] == 1)


def test_ideal_counts_gaussian_examples():
    a = ideal_counts(make_field(-1), 30)
    assert a[5] == 2        # 5 = (2+i)(2-i)
    assert a[3] == 0        # 3 inert
    assert a[2] == 1        # ramified


@pytest.mark.parametrize("d", [-1])
def test_ideal_counts_lattice_oracle(d):
    N = 500
    a = ideal_counts(make_field(d), N)
    for n in range(1, N + 1):
        assert a[n] == gaussian_norm_count_oracle(n), n


def test_dirichlet_inverse_is_mobius_for_Q():
    t = build_table(make_field(None), 300)
    assert t.b[1:11].tolist() == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]
    for n in range(1, 301):
        assert t.b[n] == mobius_oracle(n), n


def test_dirichlet_inverse_examples():
    fi = make_field(-1)
    t = build_table(fi, 30)
    assert t.b[1] == 1
    assert t.b[2] == -1


def test_dirichlet_inverse_rejects_bad_series():
    a = np.zeros(10, dtype=np.int64)
    a[1] = 2
    with pytest.raises(ValueError):
        dirichlet_inverse(a)


@pytest.mark.parametrize("d", FIELDS)
def test_prime_ideal_oracle_matches_inverse(d):
    field = make_field(d)
    N = 10 ** 4
    t = build_table(field, N)
    assert np.array_equal(b_via_prime_ideals(field, N), t.b)


def test_prime_ideal_examples():
    fi = make_field(-1)
    b = b_via_prime_ideals(fi, 30)
    assert b[2] == -1       # single ramified ideal (1+i)
    b = b_via_prime_ideals(fi, 25)
    assert b[25] == 1       # (2+i)(2-i), nu = 2
    bq = b_via_prime_ideals(make_field(None), 12)
    assert bq[12] == 0      # 12 not squarefree


@pytest.mark.parametrize("d", FIELDS)
def test_convolution_identity_exhaustive(d):
    t = build_table(make_field(d), 5000)
    assert convolution_residual(t.a, t.b, 5000) == 0


@pytest.mark.parametrize("d", [-1, 5, -3])
def test_b_bounded_by_divisor_count(d):
    N = 10 ** 4
    t = build_table(make_field(d), N)
    div = np.zeros(N + 1, dtype=np.int64)
    for k in range(1, N + 1):
        div[k::k] += 1
    assert np.all(np.abs(t.b[1:]) <= div[1:])


def test_partial_sums_examples():
    t = build_table(make_field(None), 10)
    assert t.M[1] == 1 and t.m[1] == 1.0
    assert t.M[3] == -1


def test_partial_sums_match_direct():
    t = build_table(make_field(5), 2000)
    M, m = partial_sums(t.b)
    assert np.array_equal(M, t.M)
    n = np.arange(1, 2001, dtype=float)
    assert m[2000] == pytest.approx(math.fsum((t.b[1:] / n).tolist()), abs=1e-14)


def test_m_trend_towards_zero():
    # |m_K(10^{k+1})| <= |m_K(10^k)| + 0.05 for k = 2..5 (noisy-monotone trend)
    t = build_table(make_field(None), 10 ** 6)
    vals = [abs(float(t.m[10 ** k])) for k in range(2, 7)]
    for lo, hi in zip(vals, vals[1:]):
        assert hi <= lo + 0.05
    assert abs(float(t.m[10 ** 6])) < 0.01


def test_csv_export(tmp_path):
    t = build_table(make_field(-1), 20)
    path = tmp_path / "coeffs.csv"
    t.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "n,a_n,b_n,M_K(n),m_K(n)"
    assert len(lines) == 21
    first = lines[1].split(",")
    assert first[:3] == ["1", "1", "1"]
