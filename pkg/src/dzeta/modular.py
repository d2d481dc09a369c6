"""Assembly of the alpha <-> beta kernel identity over zeta_K zeros.

With alpha*beta = eta and Z the (r1, r2) kernel, the identity verified here is

    sqrt(a) Sum b_n/n Z(a/n) - sqrt(b) Sum b_n/n Z(b/n)
        = -[1/(sqrt(b)(r-1)!)] d^{r-1}/ds^{r-1} (s-1)^r b^s G(s)/zeta_K(s) |_{s=1}
          -[1/(sqrt(b)(r-1)!)] d^{r-1}/ds^{r-1} s^r     b^s G(s)/zeta_K(s) |_{s=0}
          -(1/sqrt(b)) Sum_rho b^rho G(rho) / zeta_K'(rho),

where G(s) = Gamma^r1((1-s)/2) Gamma^r2(1-s).  The residue groups vanish when
r = 0; for real quadratic fields they have closed forms through hR and
zeta_K'(0), used as mandatory cross-checks.  The zero sum pairs each rho with
its conjugate (2 Re of the upper-half-plane term) and is reported as running
partial sums per bracket: its convergence is a hypothesis, so reports carry a
trend verdict, never an asserted limit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from ._util import EULER_GAMMA, compensated_sum, neville_to_zero, nth_derivative
from .coefficients import CoefficientTable, build_table
from .fields import FieldDescriptor, FieldInvariants, class_number_data
from .kernels import kernel_function, log_gamma_complex
from .lfunctions import (ExpansionData, ZeroList, dedekind_eval, expansion_data,
                         find_zeros)


@dataclass
class RelationReport:
    field: FieldDescriptor
    alpha: float
    beta: float
    lhs: float
    rhs_s1: float
    rhs_s0: float
    rhs_zero: float
    rhs_zero_partial: list          # (bracket_id, gamma_end, running partial)
    discrepancy: float
    trend: dict                     # checkpoint height -> discrepancy
    passed: bool
    errors: dict                    # per-quantity error estimates
    truncation: dict                # N_terms, T, n_zeros, bracket_count
    corollary: dict
    notes: list = dc_field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "field": self.field.label(),
            "alpha": self.alpha,
            "beta": self.beta,
            "lhs": self.lhs,
            "rhs_s1": self.rhs_s1,
            "rhs_s0": self.rhs_s0,
            "rhs_zero": self.rhs_zero,
            "rhs_zero_partial": self.rhs_zero_partial,
            "discrepancy": self.discrepancy,
            "trend": self.trend,
            "passed": self.passed,
            "errors": self.errors,
            "truncation": self.truncation,
            "corollary": self.corollary,
            "notes": self.notes,
        }


# ----------------------------------------------------------------------
# left-hand side
# ----------------------------------------------------------------------

def _tail_estimate(field: FieldDescriptor, u: float, N: int) -> float:
    """Truncation bound for sum_{n>N} |b_n/n Z(u/n)| using small-x kernel decay."""
    lnN = math.log(N)
    div3 = (0.5 * (lnN + 2 * EULER_GAMMA) + 0.25) / N ** 2   # sum d(n)/n^3 tail
    div2 = (lnN + 2 * EULER_GAMMA + 1.0) / N                 # sum d(n)/n^2 tail
    r1, r2 = field.r1, field.r2
    if (r1, r2) == (1, 0):
        return 2.0 * u * u * div3
    if (r1, r2) == (0, 1):
        return u * div2
    if (r1, r2) == (2, 0):
        return 6.0 * u * u * (1.0 + abs(math.log(u / N))) * div3
    # generic fallback from the O(x^{-c}) bound with c = -1/4
    return 2.0 * u ** 0.25 * (lnN + 2.0) / N ** 0.25


def lhs_sum(field: FieldDescriptor, alpha: float, table: CoefficientTable,
            kernel=None) -> tuple[float, float]:
    """sqrt(a) S(a) - sqrt(b) S(b) with S(u) = sum b_n/n Z(u/n); returns (value, err)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    beta = field.eta / alpha
    if kernel is None:
        kernel = kernel_function(field.r1, field.r2)
    n = np.arange(1, table.N + 1, dtype=float)
    w = table.b[1:] / n

    def side(u: float) -> tuple[float, float]:
        terms = w * kernel(u / n)
        val = compensated_sum(terms)
        rough = float(np.sum(np.abs(terms)))
        return val, _tail_estimate(field, u, table.N) + 1e-15 * rough

    # at the symmetric point the two series coincide term by term; a 1-ulp
    # difference between alpha and eta/alpha must not break the cancellation
    if math.isclose(alpha, beta, rel_tol=4e-16):
        return 0.0, 0.0
    s_a, e_a = side(alpha)
    s_b, e_b = side(beta)
    value = math.sqrt(alpha) * s_a - math.sqrt(beta) * s_b
    err = math.sqrt(alpha) * e_a + math.sqrt(beta) * e_b
    target = 1e-8 * math.sqrt(max(alpha, beta))
    if err > target:
        warnings.warn(f"kernel-sum tail estimate {err:.2e} exceeds {target:.2e}; "
                      "increase the coefficient bound N", stacklevel=2)
    return value, err


# ----------------------------------------------------------------------
# residue groups at s = 1 and s = 0
# ----------------------------------------------------------------------

_H_RING = [0.01 * 2.0 ** (-k) for k in range(6)]


def _signed_ring() -> list[float]:
    out = []
    for h in _H_RING:
        out.extend([h, -h])
    return out


def _gamma_group(field: FieldDescriptor, s: complex) -> complex:
    """Gamma^r1((1-s)/2) Gamma^r2(1-s) via integer log-gamma multiples."""
    acc = 0.0 + 0.0j
    if field.r1:
        acc += field.r1 * log_gamma_complex((1.0 - s) / 2.0)
    if field.r2:
        acc += field.r2 * log_gamma_complex(1.0 - s)
    return np.exp(acc)


def _real_part_checked(value: complex, what: str) -> float:
    if abs(value.imag) > 1e-9 * max(1.0, abs(value.real)):
        raise RuntimeError(f"{what}: unexpected imaginary part {value.imag:.2e}")
    return float(value.real)


def _leibniz_residue(field: FieldDescriptor, beta: float, fn, at: float) -> float:
    """-(1/(sqrt(b)(r-1)!)) d^{r-1}/ds^{r-1} [beta^s fn(s)] at `at`, fn analytic."""
    r = field.r
    derivs = []
    for i in range(r):
        if i == 0:
            hs = _signed_ring()
            val, resid = neville_to_zero(hs, [fn(at + h) for h in hs])
            if resid > 1e-6 * max(1.0, abs(val)):
                raise RuntimeError(f"extrapolation residual {resid:.2e} at s={at}")
            derivs.append(val)
        else:
            val, _ = nth_derivative(fn, at, i, h0=5e-3, levels=6)
            derivs.append(val)
    lb = math.log(beta)
    acc = math.fsum(math.comb(r - 1, i) * lb ** (r - 1 - i) * derivs[i]
                    for i in range(r))
    return -(beta ** at) / (math.sqrt(beta) * math.factorial(r - 1)) * acc


def residue_term_s1(field: FieldDescriptor, beta: float,
                    expansion: ExpansionData | None = None,
                    invariants: FieldInvariants | None = None) -> tuple[float, dict]:
    """Residue group at s=1 (0 when r=0), with the closed hR form as cross-route."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    r = field.r
    if r == 0:
        return 0.0, {"routes": None}

    def M(s: float) -> float:
        val = (s - 1.0) ** r * _gamma_group(field, complex(s)) \
            / dedekind_eval(complex(s), field)
        return _real_part_checked(complex(val), "M(s)")

    # beta^s is split off by the Leibniz rule; fold beta^1 back in at s=1
    value_a = _leibniz_residue(field, beta, M, 1.0)
    meta: dict = {"leibniz": value_a}
    if not field.is_rational and field.d_K > 0 and r == 1:
        inv = invariants if invariants is not None else class_number_data(field)
        closed = -2.0 * math.sqrt(beta * field.d_K) / inv.hR
        meta["closed_hR"] = closed
        rel = abs(value_a - closed) / max(1e-30, abs(closed))
        meta["route_rel_diff"] = rel
        if rel > 1e-6:
            raise RuntimeError(f"s=1 residue routes disagree by {rel:.2e}")
    return value_a, meta


def residue_term_s0(field: FieldDescriptor, beta: float,
                    expansion: ExpansionData | None = None,
                    invariants: FieldInvariants | None = None) -> tuple[float, dict]:
    """Residue group at s=0 (0 when r=0), cross-checked against -pi/(sqrt(b) zeta_K'(0))."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    r = field.r
    if r == 0:
        return 0.0, {"routes": None}

    def Nfun(s: float) -> float:
        val = s ** r * _gamma_group(field, complex(s)) \
            / dedekind_eval(complex(s), field)
        return _real_part_checked(complex(val), "N(s)")

    value_a = _leibniz_residue(field, beta, Nfun, 0.0)
    meta: dict = {"leibniz": value_a}
    if not field.is_rational and field.d_K > 0 and r == 1:
        exp_data = expansion if expansion is not None else expansion_data(field, invariants)
        closed = -math.pi / (math.sqrt(beta) * exp_data.zeta_K_prime_at_0)
        meta["closed_zeta_prime"] = closed
        rel = abs(value_a - closed) / max(1e-30, abs(closed))
        meta["route_rel_diff"] = rel
        if rel > 1e-6:
            raise RuntimeError(f"s=0 residue routes disagree by {rel:.2e}")
    return value_a, meta


# ----------------------------------------------------------------------
# zero sum
# ----------------------------------------------------------------------

def _zero_terms(field: FieldDescriptor, beta: float, zeros: ZeroList) -> np.ndarray:
    """2 Re of each upper-half-plane term beta^rho G(rho)/zeta_K'(rho)."""
    if len(zeros) == 0:
        return np.empty(0)
    keep = ~zeros.excluded
    if np.any(zeros.excluded):
        warnings.warn(f"{int(np.sum(zeros.excluded))} collision-flagged zero(s) "
                      "excluded from the zero sum", stacklevel=3)
    terms = np.zeros(len(zeros))
    rho = 0.5 + 1j * zeros.gamma[keep]
    acc = rho * math.log(beta)
    if field.r1:
        acc = acc + field.r1 * log_gamma_complex((1.0 - rho) / 2.0)
    if field.r2:
        acc = acc + field.r2 * log_gamma_complex(1.0 - rho)
    terms[keep] = 2.0 * np.real(np.exp(acc) / zeros.zeta_K_prime[keep])
    return terms


def zero_sum(field: FieldDescriptor, beta: float, zeros: ZeroList) -> list:
    """Bracketed running partials of -(1/sqrt(b)) * sum over zeros (conjugates paired).

    Returns [(bracket_id, gamma_end, partial), ...]; empty list for no zeros.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    terms = _zero_terms(field, beta, zeros)
    partials = []
    acc: list[float] = []
    for br in range(zeros.bracket_count):
        idx = np.flatnonzero(zeros.bracket_id == br)
        acc.extend(terms[idx].tolist())
        partials.append((int(br), float(zeros.gamma[idx[-1]]),
                         -math.fsum(acc) / math.sqrt(beta)))
    return partials


def _zero_partial_below(field, beta, zeros, height) -> float:
    """Partial zero sum over all full brackets contained below `height`."""
    terms = _zero_terms(field, beta, zeros)
    acc = []
    for br in range(zeros.bracket_count):
        idx = np.flatnonzero(zeros.bracket_id == br)
        if float(zeros.gamma[idx[-1]]) > height:
            break
        acc.extend(terms[idx].tolist())
    return -math.fsum(acc) / math.sqrt(beta)


# ----------------------------------------------------------------------
# full verification
# ----------------------------------------------------------------------

def _corollary_report(field, alpha, beta, lhs, rhs_s1, rhs_s0, rhs_zero,
                      table) -> dict:
    """Measured comparisons against the corollary displays (printed normalizations)."""
    out: dict = {}
    rhs_total = rhs_s1 + rhs_s0 + rhs_zero
    n = np.arange(1, table.N + 1, dtype=float)
    w = table.b[1:] / n
    # the displays drop the kernel's constant using sum b_n/n = 0; at finite N
    # that leaves a residual (sqrt(a) - sqrt(b)) m_K(N), subtracted off here
    m_N = float(table.m[table.N])
    display_shift = (math.sqrt(alpha) - math.sqrt(beta)) * m_N
    if field.is_rational:
        # conjecture display: e^{-x^2} sums against -(1/(2 sqrt(b))) zero sum
        s_a = compensated_sum(w * np.exp(-((alpha / n) ** 2)))
        s_b = compensated_sum(w * np.exp(-((beta / n) ** 2)))
        lhs_display = math.sqrt(alpha) * s_a - math.sqrt(beta) * s_b
        corrected = lhs_display - display_shift
        out["display_lhs_raw"] = lhs_display
        out["display_lhs"] = corrected
        out["display_rhs"] = rhs_zero / 2.0
        out["conjugate_pair_factor"] = 2.0
        out["display_discrepancy"] = corrected - rhs_zero / 2.0
    elif field.d_K < 0:
        s_a = compensated_sum(w * np.exp(-(alpha / n)))
        s_b = compensated_sum(w * np.exp(-(beta / n)))
        lhs_display = math.sqrt(alpha) * s_a - math.sqrt(beta) * s_b
        corrected = lhs_display - display_shift
        out["display_lhs_raw"] = lhs_display
        out["display_lhs"] = corrected
        out["printed_rhs_half"] = rhs_zero / 2.0
        out["main_identity_rhs"] = rhs_zero
        d_full = abs(corrected - rhs_zero)
        d_half = abs(corrected - rhs_zero / 2.0)
        out["matched_normalization"] = ("main_identity" if d_full < d_half
                                        else "printed_half")
        out["display_discrepancy_full"] = corrected - rhs_zero
        out["display_discrepancy_half"] = corrected - rhs_zero / 2.0
    else:
        # real quadratic: Bessel display; both printed normalizations reported
        lhs_display = lhs / 4.0
        printed = (rhs_s1 / 4.0) + rhs_s0 + rhs_zero / 4.0  # middle term as printed
        quartered = rhs_total / 4.0
        out["display_lhs"] = lhs_display
        out["printed_rhs"] = printed
        out["quartered_rhs"] = quartered
        d_p, d_q = abs(lhs_display - printed), abs(lhs_display - quartered)
        out["matched_normalization"] = "quartered" if d_q < d_p else "printed"
        out["display_discrepancy_printed"] = lhs_display - printed
        out["display_discrepancy_quartered"] = lhs_display - quartered
    return out


def verify_relation(field: FieldDescriptor, alpha: float, T: float, N: int,
                    c0: float = 0.01, threads: int = 1,
                    table: CoefficientTable | None = None,
                    zeros: ZeroList | None = None) -> RelationReport:
    """Assemble both sides, record per-quantity errors and the discrepancy trend.

    PASS: |discrepancy(T)| <= |discrepancy(T/4)| or below 1e-3 (1 + |lhs|);
    convergence of the zero series is conjectural and never asserted.
    """
    if not (0 < T <= 100):
        raise ValueError("desk budget: 0 < T <= 100")
    if not (1 <= N <= 10 ** 7):
        raise ValueError("desk budget: 1 <= N <= 1e7")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    beta = field.eta / alpha

    def stage(name, fn):
        try:
            return fn()
        except Exception as exc:
            raise RuntimeError(f"component '{name}' failed: {exc}") from exc

    table = table if table is not None else stage(
        "coefficients", lambda: build_table(field, N))
    zeros = zeros if zeros is not None else stage(
        "zeros", lambda: find_zeros(field, T, c0=c0, threads=threads))
    invariants = None if field.is_rational else stage(
        "class_number", lambda: class_number_data(field))
    expansion = stage("expansion", lambda: expansion_data(field, invariants))
    lhs, lhs_err = stage("lhs", lambda: lhs_sum(field, alpha, table))
    rhs_s1, meta1 = stage("residue_s1",
                          lambda: residue_term_s1(field, beta, expansion, invariants))
    rhs_s0, meta0 = stage("residue_s0",
                          lambda: residue_term_s0(field, beta, expansion, invariants))
    partials = stage("zero_sum", lambda: zero_sum(field, beta, zeros))
    rhs_zero = partials[-1][2] if partials else 0.0

    discrepancy = lhs - (rhs_s1 + rhs_s0 + rhs_zero)
    trend = {}
    for frac in (0.25, 0.5, 0.75, 1.0):
        h = T * frac
        trend[f"{h:g}"] = lhs - (rhs_s1 + rhs_s0
                                 + _zero_partial_below(field, beta, zeros, h))
    d_full = abs(trend[f"{T:g}"])
    d_quarter = abs(trend[f"{T * 0.25:g}"])
    passed = bool(d_full <= d_quarter or d_full <= 1e-3 * (1.0 + abs(lhs)))

    # error estimate for the neglected zero tail: scale of the first missing term
    tail_gamma = T + 1.0
    probe = 0.5 + 1j * tail_gamma
    acc = probe * math.log(beta)
    if field.r1:
        acc += field.r1 * log_gamma_complex((1.0 - probe) / 2.0)
    if field.r2:
        acc += field.r2 * log_gamma_complex(1.0 - probe)
    kept = zeros.zeta_K_prime[~zeros.excluded]
    floor = float(np.min(np.abs(kept))) if kept.size else 1.0
    zero_tail = 6.0 * math.log(T + 2.0) * 2.0 * abs(np.exp(acc)) \
        / (floor * math.sqrt(beta))

    errors = {
        "lhs": lhs_err,
        "rhs_s1": meta1.get("route_rel_diff", 0.0) * abs(rhs_s1),
        "rhs_s0": meta0.get("route_rel_diff", 0.0) * abs(rhs_s0),
        "zero_tail": zero_tail,
        "localization_max": float(np.max(zeros.localization_err)) if len(zeros) else 0.0,
    }
    truncation = {"N_terms": table.N, "T": float(T), "n_zeros": len(zeros),
                  "bracket_count": zeros.bracket_count,
                  "excluded_zeros": int(np.sum(zeros.excluded))}
    corollary = _corollary_report(field, alpha, beta, lhs, rhs_s1, rhs_s0,
                                  rhs_zero, table)
    notes = []
    if zeros.collisions:
        notes.append(f"{len(zeros.collisions)} collision pair(s) excluded")
    return RelationReport(field=field, alpha=alpha, beta=beta, lhs=lhs,
                          rhs_s1=rhs_s1, rhs_s0=rhs_s0, rhs_zero=rhs_zero,
                          rhs_zero_partial=[list(p) for p in partials],
                          discrepancy=discrepancy, trend=trend, passed=passed,
                          errors=errors, truncation=truncation,
                          corollary=corollary, notes=notes)
