"""Analytic invariants of Q and quadratic fields Q(sqrt(d)).

A field is described by its fundamental discriminant d_K, embedding signature
(r1, r2), degree n = r1 + 2*r2, the gamma-factor scale eta = 4^r2 pi^n / |d_K|,
the number of roots of unity w, and r = r1 + r2 - 1 (the order of the zeta
zero at s = 0).  For quadratic fields the attached character is the Kronecker
symbol chi(m) = (d_K / m), and the class-number data (h, R, hR) comes from
L(1, chi) through the Dirichlet class number formula:

    real quadratic    (d_K > 0):  L(1, chi) = 2 h R / sqrt(d_K)
    imaginary quadratic (d_K < 0):  L(1, chi) = 2 pi h / (w sqrt(|d_K|))

Only h*R is determined in the real case (no fundamental-unit machinery here);
the imaginary case isolates the integer h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._util import digamma_real


def _is_squarefree(d: int) -> bool:
    n = abs(d)
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        while n % p == 0:
            n //= p
        p += 1 if p == 2 else 2
    return True


def _jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n > 0."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("jacobi symbol needs odd n > 0")
    a %= n
    result = 1
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker_symbol(D: int, m: int) -> int:
    """Kronecker symbol (D/m) for m >= 1."""
    if m < 1:
        raise ValueError("m must be >= 1")
    e = 0
    while m % 2 == 0:
        m //= 2
        e += 1
    if e:
        if D % 2 == 0:
            return 0
        s2 = (1 if D % 8 in (1, 7) else -1) ** e
    else:
        s2 = 1
    return s2 * _jacobi(D % m, m)


@dataclass(frozen=True)
class FieldDescriptor:
    """Immutable analytic data of Q (d is None) or Q(sqrt(d))."""

    d: int | None
    d_K: int
    r1: int
    r2: int
    degree_n: int
    eta: float
    w: int
    r: int

    @property
    def is_rational(self) -> bool:
        return self.d is None

    @property
    def conductor(self) -> int:
        return abs(self.d_K)

    def label(self) -> str:
        return "Q" if self.d is None else f"Q(sqrt({self.d}))"


@dataclass(frozen=True)
class FieldInvariants:
    """Class-number data derived from L(1, chi)."""

    h: int | None
    R: float | None
    hR: float
    L1: float
    h_residual: float
    product_only: bool


def make_field(d: int | None = None) -> FieldDescriptor:
    """Build the descriptor for Q (d=None) or the quadratic field Q(sqrt(d))."""
    if d is None:
        return FieldDescriptor(d=None, d_K=1, r1=1, r2=0, degree_n=1,
                               eta=math.pi, w=2, r=0)
    d = int(d)
    if d in (0, 1):
        raise ValueError("d must not be 0 or 1")
    if not _is_squarefree(d):
        raise ValueError(f"d={d} is not squarefree")
    d_K = d if d % 4 == 1 else 4 * d
    if d > 0:
        r1, r2 = 2, 0
    else:
        r1, r2 = 0, 1
    n = r1 + 2 * r2
    eta = 4.0 ** r2 * math.pi ** n / abs(d_K)
    w = {-1: 4, -3: 6}.get(d, 2)
    return FieldDescriptor(d=d, d_K=d_K, r1=r1, r2=r2, degree_n=n,
                           eta=eta, w=w, r=r1 + r2 - 1)


def kronecker_chi(field: FieldDescriptor, m: int) -> int:
    """chi_{d_K}(m), the quadratic character attached to the field."""
    if field.is_rational:
        raise ValueError("Q carries no quadratic character")
    if m < 1:
        raise ValueError("m must be a positive integer")
    return kronecker_symbol(field.d_K, m)


def character_table(field: FieldDescriptor) -> np.ndarray:
    """chi(m mod q) for m = 0..q-1, q = |d_K|; chi has period q."""
    q = field.conductor
    tab = np.zeros(q, dtype=np.int8)
    for m in range(1, q):
        tab[m] = kronecker_chi(field, m)
    return tab


def class_number_data(field: FieldDescriptor,
                      precision_budget: float = 1e-10) -> FieldInvariants:
    """L(1, chi) and the class-number data it determines.

    The conditionally convergent character sum is accelerated by summing each
    residue class with the digamma series:  L(1,chi) = -(1/q) sum_a chi(a) psi(a/q).
    """
    if field.is_rational:
        raise ValueError("class_number_data is defined for quadratic fields only")
    if precision_budget <= 0:
        raise ValueError("precision_budget must be positive")
    q = field.conductor
    terms = []
    for a in range(1, q):
        c = kronecker_chi(field, a)
        if c:
            terms.append(c * digamma_real(a / q))
    L1 = -math.fsum(terms) / q
    # digamma values are accurate to ~1e-15; the combination loses ~q ulps
    err = 1e-14 * q
    if err > precision_budget:
        raise RuntimeError(
            f"L(1,chi) error estimate {err:.2e} exceeds budget {precision_budget:.2e}")
    if L1 <= 0:
        raise RuntimeError("L(1,chi) must be positive for a real primitive character")
    if field.d_K < 0:
        h_float = field.w * math.sqrt(abs(field.d_K)) * L1 / (2 * math.pi)
        h = round(h_float)
        residual = abs(h_float - h)
        if residual > 1e-6:
            raise RuntimeError(f"class number failed to round: residual {residual:.2e}")
        return FieldInvariants(h=h, R=1.0, hR=float(h), L1=L1,
                               h_residual=residual, product_only=False)
    hR = math.sqrt(field.d_K) * L1 / 2
    return FieldInvariants(h=None, R=None, hR=hR, L1=L1,
                           h_residual=0.0, product_only=True)


def field_to_json(field: FieldDescriptor,
                  invariants: FieldInvariants | None = None) -> dict:
    """Serialization consumed by the CLI and all reports."""
    out = {
        "d": field.d,
        "d_K": field.d_K,
        "r1": field.r1,
        "r2": field.r2,
        "n": field.degree_n,
        "eta": field.eta,
        "w": field.w,
        "h": None,
        "R": None,
        "hR": None,
        "L1": None,
    }
    if invariants is not None:
        out.update(h=invariants.h, R=invariants.R, hR=invariants.hR, L1=invariants.L1)
    elif field.is_rational:
        out.update(h=1, R=1.0, hR=1.0, L1=None)
    return out
