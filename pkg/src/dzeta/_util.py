"""Shared numerical helpers: Bernoulli data, compensated sums, extrapolation.

Everything here is plumbing used by more than one module; nothing in this file
is part of the public API.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

EULER_GAMMA = 0.5772156649015328606065120900824024

# B_2, B_4, ..., B_24 (exact, then floated once).
_BERNOULLI_FRACTIONS = [
    Fraction(1, 6),
    Fraction(-1, 30),
    Fraction(1, 42),
    Fraction(-1, 30),
    Fraction(5, 66),
    Fraction(-691, 2730),
    Fraction(7, 6),
    Fraction(-3617, 510),
    Fraction(43867, 798),
    Fraction(-174611, 330),
    Fraction(854513, 138),
    Fraction(-236364091, 2730),
]

BERNOULLI_EVEN = np.array([float(b) for b in _BERNOULLI_FRACTIONS])

# Coefficients B_{2k} / (2k (2k-1)) of the Stirling series for log Gamma.
STIRLING_COEFFS = np.array(
    [float(b / (2 * k * (2 * k - 1))) for k, b in enumerate(_BERNOULLI_FRACTIONS, start=1)]
)

_CHUNK = 4096


def compensated_sum(values) -> float:
    """Deterministic near-exact sum: chunked pairwise partials combined by fsum."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        return 0.0
    if x.size <= _CHUNK:
        return math.fsum(x.tolist())
    n_full = (x.size // _CHUNK) * _CHUNK
    partials = x[:n_full].reshape(-1, _CHUNK).sum(axis=1).tolist()
    partials.extend(x[n_full:].tolist())
    return math.fsum(partials)


def compensated_cumsum(values) -> np.ndarray:
    """Running sums with an fsum-corrected carry between chunks."""
    x = np.asarray(values, dtype=float).ravel()
    out = np.empty_like(x)
    carry_terms: list[float] = []
    for start in range(0, x.size, _CHUNK):
        block = x[start:start + _CHUNK]
        out[start:start + _CHUNK] = np.cumsum(block) + math.fsum(carry_terms)
        carry_terms.append(math.fsum(block.tolist()))
    return out


def neville_to_zero(hs, vals):
    """Polynomial extrapolation of vals(h) to h=0.

    Returns (limit, residual) where residual is the last correction taken,
    a usable error estimate when vals(h) is smooth in h.
    """
    hs = [float(h) for h in hs]
    t = [float(v) for v in vals]
    n = len(t)
    if n == 1:
        return t[0], abs(t[0]) * 1e-15
    prev_top = t[0]
    for level in range(1, n):
        nxt = []
        for i in range(n - level):
            num = hs[i] * t[i + 1] - hs[i + level] * t[i]
            nxt.append(num / (hs[i] - hs[i + level]))
        prev_top = t[0]
        t = nxt
    # residual: last correction applied to the top entry
    return t[0], abs(t[0] - prev_top)


def nth_derivative(f, x0: float, n: int, h0: float = 1e-2, levels: int = 6):
    """n-th derivative of a smooth real function by central differences.

    Order-h^2 symmetric stencil, Richardson-extrapolated over `levels`
    halvings of the step (per the h^2 expansion of the stencil error).
    Returns (value, residual_estimate).
    """
    if n == 0:
        return float(f(x0)), 0.0
    hs, vals = [], []
    for lev in range(levels):
        h = h0 / (2 ** lev)
        acc = 0.0
        for k in range(n + 1):
            acc += (-1) ** k * math.comb(n, k) * float(f(x0 + (n / 2 - k) * h))
        hs.append(h * h)
        vals.append(acc / h ** n)
    return neville_to_zero(hs, vals)


def digamma_real(x: float, shift_cap: int = 64) -> float:
    """psi(x) for real x > 0 via upward recurrence and the Bernoulli series."""
    if x <= 0:
        raise ValueError("digamma_real requires x > 0")
    acc = 0.0
    steps = 0
    while x < 12.0:
        acc -= 1.0 / x
        x += 1.0
        steps += 1
        if steps > shift_cap:
            raise RuntimeError("digamma shift cap exceeded")
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for k, b2k in enumerate(BERNOULLI_EVEN[:8], start=1):
        series += b2k / (2 * k) * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def zeta_real_int(s: float, terms: int = 40) -> float:
    """Riemann zeta at real s > 1 by Euler-Maclaurin; used for series constants."""
    if s <= 1:
        raise ValueError("zeta_real_int requires s > 1")
    m = terms
    acc = math.fsum(float(k) ** (-s) for k in range(1, m))
    tail = m ** (1.0 - s) / (s - 1.0) + 0.5 * m ** (-s)
    corr = 0.0
    poch = s
    mp = float(m)
    for k, b2k in enumerate(BERNOULLI_EVEN[:8], start=1):
        corr += b2k / math.factorial(2 * k) * poch * mp ** (-s - 2 * k + 1)
        poch *= (s + 2 * k - 1) * (s + 2 * k)
    return acc + tail + corr
