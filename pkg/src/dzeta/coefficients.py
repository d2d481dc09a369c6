"""Dirichlet coefficients of zeta_K and 1/zeta_K up to a bound N.

a_n counts integral ideals of norm n; for quadratic fields it is the divisor
sum a_n = sum_{d | n} chi(d), and for Q it is identically 1.  b_n are the
coefficients of the reciprocal series, obtained by inverting the Dirichlet
convolution (b = a^{-1}, so sum_{d|n} a_d b_{n/d} = [n == 1]).  For Q this
makes b_n the Moebius function.

b_via_prime_ideals recomputes b_n from its combinatorial definition -- signed
counts (-1)^nu over products of nu distinct prime ideals of norm n -- and is
kept as the independent oracle for the inversion.

M_K(x) = sum_{n <= x} b_n and m_K(x) = sum_{n <= x} b_n / n are carried as
running-sum arrays (m with compensated summation).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ._util import compensated_cumsum
from .fields import FieldDescriptor, character_table


@dataclass(frozen=True)
class CoefficientTable:
    """Arrays indexed 1..N (slot 0 unused)."""

    field: FieldDescriptor
    N: int
    a: np.ndarray   # int64, a[0] = 0
    b: np.ndarray   # int64
    M: np.ndarray   # int64 running sums of b
    m: np.ndarray   # float64 running sums of b_n / n

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "a_n", "b_n", "M_K(n)", "m_K(n)"])
            for n in range(1, self.N + 1):
                writer.writerow([n, int(self.a[n]), int(self.b[n]),
                                 int(self.M[n]), repr(float(self.m[n]))])


def ideal_counts(field: FieldDescriptor, N: int) -> np.ndarray:
    """a_1..a_N as int64 (index 0 unused), via a divisor sieve in O(N log N)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    a = np.zeros(N + 1, dtype=np.int64)
    if field.is_rational:
        a[1:] = 1
        return a
    chi = character_table(field)
    q = field.conductor
    for d in range(1, N + 1):
        c = int(chi[d % q])
        if c:
            a[d::d] += c
    return a


def dirichlet_inverse(a: np.ndarray, N: int | None = None) -> np.ndarray:
    """b with sum_{d|n} a_d b_{n/d} = [n == 1], by a push sieve in O(N log N).

    When index n is reached, b[n] is final (all contributions come from
    divisor pairs with smaller cofactor), so its multiples can be updated.
    """
    if N is None:
        N = len(a) - 1
    if N < 1 or len(a) < N + 1:
        raise ValueError("need coefficients a_1..a_N")
    if a[1] != 1:
        raise ValueError("series is not invertible: a_1 != 1")
    b = np.zeros(N + 1, dtype=np.int64)
    b[1] = 1
    for n in range(1, N // 2 + 1):
        bn = b[n]
        if bn:
            dmax = N // n
            b[2 * n::n] -= bn * a[2:dmax + 1]
    return b


def _prime_sieve(N: int) -> np.ndarray:
    sieve = np.ones(N + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(math.isqrt(N)) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.flatnonzero(sieve)


def b_via_prime_ideals(field: FieldDescriptor, N: int) -> np.ndarray:
    """b_1..b_N from the combinatorial definition (independent oracle).

    Prime ideals of norm <= N: for Q each rational prime; for quadratic fields
    a split prime gives two distinct ideals of norm p, a ramified prime one of
    norm p, an inert prime one of norm p^2.  Every product of distinct prime
    ideals with norm <= N contributes (-1)^nu to b at its norm.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    primes = _prime_sieve(N)
    norms: list[int] = []
    if field.is_rational:
        norms.extend(int(p) for p in primes)
    else:
        from .fields import kronecker_chi
        for p in primes:
            c = kronecker_chi(field, int(p))
            if c == 1:
                norms.extend([int(p), int(p)])
            elif c == 0:
                norms.append(int(p))
            elif p * p <= N:
                norms.append(int(p * p))
    norms.sort()
    b = np.zeros(N + 1, dtype=np.int64)
    b[1] = 1
    K = len(norms)

    def descend(start: int, prod: int, sign: int) -> None:
        for j in range(start, K):
            nxt = prod * norms[j]
            if nxt > N:
                return
            b[nxt] += sign
            descend(j + 1, nxt, -sign)

    descend(0, 1, -1)
    return b


def partial_sums(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(M, m) running sums of b_n and b_n/n, indexed like b."""
    N = len(b) - 1
    M = np.zeros(N + 1, dtype=np.int64)
    M[1:] = np.cumsum(b[1:])
    m = np.zeros(N + 1, dtype=float)
    n_vals = np.arange(1, N + 1, dtype=float)
    m[1:] = compensated_cumsum(b[1:] / n_vals)
    return M, m


def build_table(field: FieldDescriptor, N: int) -> CoefficientTable:
    a = ideal_counts(field, N)
    b = dirichlet_inverse(a, N)
    M, m = partial_sums(b)
    return CoefficientTable(field=field, N=N, a=a, b=b, M=M, m=m)


def convolution_residual(a: np.ndarray, b: np.ndarray, N: int) -> int:
    """max |sum_{d|n} a_d b_{n/d} - [n==1]| over n <= N (0 iff b inverts a)."""
    c = np.zeros(N + 1, dtype=np.int64)
    for d in range(1, N + 1):
        qmax = N // d
        c[d::d] += a[d] * b[1:qmax + 1]
    c[1] -= 1
    return int(np.max(np.abs(c[1:])))
