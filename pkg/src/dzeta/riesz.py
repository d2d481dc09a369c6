"""Riesz-type scans: P(y) = sum b_n/n Z(sqrt(y)/n) and its structure.

Under GRH, P(y) minus a finite main term (a log-polynomial sum with the
calibrated residue constants, cut off at y^{1/2-eps}) is O(y^{-1/4+delta});
the scans here fit envelope exponents empirically and never assert the
conditional rate.  The unconditional anchor is the Mellin identity

    Int_0^inf y^{-s-1} P(y) dy = 2 Gamma^r1(-s) Gamma^r2(-2s) / zeta_K(2s+1)

for 0 < Re s < 1/2, checked by quadrature in u = log y with series tails.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._util import EULER_GAMMA, compensated_sum
from .coefficients import CoefficientTable
from .fields import FieldDescriptor
from .kernels import (KernelSpec, ResidueConstants, kernel_function,
                      log_gamma_complex, residue_calibrate)
from .lfunctions import dedekind_eval


@dataclass
class RieszScan:
    field: FieldDescriptor
    y_grid: np.ndarray
    P_values: np.ndarray
    main_term: np.ndarray
    corrected: np.ndarray
    fitted_exponent: dict
    eps: float
    N_used: np.ndarray

    def to_csv(self, path) -> None:
        import csv
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["y", "P", "main", "corrected"])
            for i in range(len(self.y_grid)):
                w.writerow([repr(float(self.y_grid[i])),
                            repr(float(self.P_values[i])),
                            repr(float(self.main_term[i])),
                            repr(float(self.corrected[i]))])


def _default_n_used(table_N: int, y: float, n_mult: float) -> int:
    return int(min(table_N, max(2000, math.ceil(n_mult * math.sqrt(y)))))


def p_eval(field: FieldDescriptor, y: float, table: CoefficientTable,
           kernel=None, n_mult: float = 40.0) -> tuple[float, float, int]:
    """P(y) by a compensated fixed-order sum; returns (value, tail_est, N_used)."""
    if y <= 0:
        raise ValueError("y must be positive")
    if table.N < 10.0 * math.sqrt(y):
        warnings.warn(f"table.N={table.N} is below the tail budget 10*sqrt(y) "
                      f"for y={y:g}", stacklevel=2)
    if kernel is None:
        kernel = kernel_function(field.r1, field.r2)
    N_used = _default_n_used(table.N, y, n_mult)
    n = np.arange(1, N_used + 1, dtype=float)
    terms = table.b[1:N_used + 1] / n * kernel(math.sqrt(y) / n)
    value = compensated_sum(terms)
    tail = _p_tail_estimate(field, y, N_used)
    return value, tail, N_used


def _p_tail_estimate(field: FieldDescriptor, y: float, N: int) -> float:
    lnN = math.log(N)
    div3 = (0.5 * (lnN + 2 * EULER_GAMMA) + 0.25) / N ** 2
    div2 = (lnN + 2 * EULER_GAMMA + 1.0) / N
    r1, r2 = field.r1, field.r2
    if (r1, r2) == (1, 0):
        return 2.0 * y * div3
    if (r1, r2) == (0, 1):
        return math.sqrt(y) * div2
    if (r1, r2) == (2, 0):
        return 6.0 * y * (1.0 + abs(math.log(math.sqrt(y) / N))) * div3
    return 2.0 * y ** 0.125 * (lnN + 2.0) / N ** 0.25


def main_term(field: FieldDescriptor, y: float, eps: float,
              consts: ResidueConstants, table: CoefficientTable) -> float:
    """The GRH main term: a cutoff sum of b_n/n against the residue log-polynomial.

    Zero when r = 0 or when the cutoff [y^{1/2-eps}] - 1 is empty.
    """
    r = field.r
    if r == 0:
        return 0.0
    if not (0.0 < eps < 0.5):
        raise ValueError("need 0 < eps < 1/2")
    cutoff = int(math.floor(y ** (0.5 - eps))) - 1
    if cutoff < 1:
        return 0.0
    if cutoff > table.N:
        raise ValueError(f"cutoff {cutoff} exceeds table.N={table.N}")
    n = np.arange(1, cutoff + 1, dtype=float)
    logs = np.log(n / math.sqrt(y))
    poly = np.zeros_like(logs)
    for i in range(r + 1):
        poly += consts.C[i] * math.comb(r, i) * logs ** (r - i)
    lead = consts.leading_power_coeff / math.factorial(r)
    return -lead * compensated_sum(table.b[1:cutoff + 1] / n * poly)


def decay_fit(y_grid, corrected, decades: float = 2.0) -> dict:
    """Envelope slope of log|corrected| vs log y over the top `decades` decades.

    The signal oscillates through zero, so the fit runs on right-to-left
    running maxima of |corrected| (a one-sided envelope).
    """
    y = np.asarray(y_grid, dtype=float)
    c = np.abs(np.asarray(corrected, dtype=float))
    window = y >= y[-1] / 10.0 ** decades
    if np.count_nonzero(c[window] > 0) < 0.8 * np.count_nonzero(window):
        raise RuntimeError("degenerate fit: too many zero corrected values")
    env = np.maximum.accumulate(c[::-1])[::-1]
    mask = window & (env > 0)
    lx, le = np.log(y[mask]), np.log(env[mask])
    n_pts = len(lx)
    slope, intercept = np.polyfit(lx, le, 1)
    resid = le - (slope * lx + intercept)
    denom = float(np.sum((lx - lx.mean()) ** 2))
    stderr = math.sqrt(float(np.sum(resid ** 2)) / max(1, n_pts - 2) / denom)
    return {
        "slope": float(slope),
        "stderr": float(stderr),
        "n_points": int(n_pts),
        "decay_flag": bool(slope <= -0.15),
    }


def riesz_scan(field: FieldDescriptor, table: CoefficientTable,
               y_min: float = 1e2, y_max: float = 1e6, points: int = 40,
               eps: float = 0.1, consts: ResidueConstants | None = None,
               kernel=None, n_mult: float = 40.0) -> RieszScan:
    """Log-spaced scan of P, the main term, and the corrected remainder."""
    if y_max / y_min < 10.0 ** 3:
        raise ValueError("y grid must span at least 3 decades")
    if consts is None:
        consts = residue_calibrate(field.r1, field.r2)
    if kernel is None:
        kernel = kernel_function(field.r1, field.r2)
    y_grid = np.geomspace(y_min, y_max, points)
    P = np.empty(points)
    main = np.empty(points)
    n_used = np.empty(points, dtype=np.int64)
    for i, y in enumerate(y_grid):
        P[i], _, n_used[i] = p_eval(field, float(y), table, kernel, n_mult)
        main[i] = main_term(field, float(y), eps, consts, table)
    if not np.all(np.isfinite(P)):
        raise RuntimeError("non-finite P value in scan")
    corrected = P - main
    fit = decay_fit(y_grid, corrected)
    return RieszScan(field=field, y_grid=y_grid, P_values=P, main_term=main,
                     corrected=corrected, fitted_exponent=fit, eps=eps,
                     N_used=n_used)


# ----------------------------------------------------------------------
# Mellin identity (the module's unconditional anchor)
# ----------------------------------------------------------------------

def _log_weighted_reciprocal(table: CoefficientTable, m: int) -> float:
    """J_m = sum b_n log n / n^m (= d/ds of the reciprocal series at m)."""
    n = np.arange(2, table.N + 1, dtype=float)
    return compensated_sum(table.b[2:] * np.log(n) / n ** m)


def _left_tail_series(field: FieldDescriptor, s: complex, y0: float,
                      table: CoefficientTable, k_max: int = 18) -> complex:
    """Exact Int_0^{y0} y^{-s-1} P(y) dy from the small-y series of P."""
    r1, r2 = field.r1, field.r2
    total = 0.0 + 0.0j
    if (r1, r2) == (1, 0):
        for k in range(1, k_max):
            zk = complex(dedekind_eval(2.0 * k + 1.0, field)).real
            c = 2.0 * (-1.0) ** k / (math.factorial(k) * zk)
            total += c * y0 ** (k - s) / (k - s)
    elif (r1, r2) == (0, 1):
        for k in range(1, 2 * k_max):
            zk = complex(dedekind_eval(k + 1.0, field)).real
            c = (-1.0) ** k / (math.factorial(k) * zk)
            total += c * y0 ** (k / 2.0 - s) / (k / 2.0 - s)
    elif (r1, r2) == (2, 0):
        h = 0.0
        for k in range(1, k_max):
            h += 1.0 / k
            zk = complex(dedekind_eval(2.0 * k + 1.0, field)).real
            jk = _log_weighted_reciprocal(table, 2 * k + 1)
            B = 4.0 / (math.factorial(k) ** 2 * zk)
            A = 4.0 / math.factorial(k) ** 2 * ((h - EULER_GAMMA) / zk + jk)
            p = k - s
            total += y0 ** p * (A / p - 0.5 * B * (math.log(y0) / p - 1.0 / p ** 2))
    else:
        raise NotImplementedError("left-tail series only for the closed-form kernels")
    return total


def mellin_p_nodes(field: FieldDescriptor, table: CoefficientTable,
                   kernel=None, y_min: float = 1e-4, y_max: float = 1e8,
                   du: float = 0.04, n_mult: float = 10.0):
    """Scan inputs for the identity check: P on a Simpson grid in u = log y.

    Reusable across several values of s for the same field/table.
    """
    if kernel is None:
        kernel = kernel_function(field.r1, field.r2)
    u0, u1 = math.log(y_min), math.log(y_max)
    n_iv = int(math.ceil((u1 - u0) / du))
    n_iv += n_iv % 2
    u = np.linspace(u0, u1, n_iv + 1)
    P = np.empty(n_iv + 1)
    for i, ui in enumerate(u):
        P[i], _, _ = p_eval(field, math.exp(ui), table, kernel, n_mult)
    return u, P


def mellin_identity_check(field: FieldDescriptor, s: complex,
                          table: CoefficientTable, kernel=None,
                          y_min: float = 1e-4, y_max: float = 1e8,
                          du: float = 0.04, n_mult: float = 10.0,
                          p_nodes=None) -> dict:
    """Check Int y^{-s-1} P(y) dy = 2 Gamma^r1(-s) Gamma^r2(-2s) / zeta_K(2s+1).

    Composite Simpson in u = log y plus series left tail and a model-based
    right tail; PASS at relative discrepancy <= 1e-3 (quadrature-limited).
    `p_nodes` takes a precomputed (u, P) pair from mellin_p_nodes.
    """
    s = complex(s)
    if not (0.0 < s.real < 0.5):
        raise ValueError("need 0 < Re s < 1/2")
    if p_nodes is None:
        u, P = mellin_p_nodes(field, table, kernel, y_min, y_max, du, n_mult)
    else:
        u, P = p_nodes
        y_min, y_max = math.exp(u[0]), math.exp(u[-1])
    n_iv = len(u) - 1
    u0, u1 = u[0], u[-1]
    f = np.exp(-s * u) * P
    h = (u1 - u0) / n_iv
    simpson_w = np.ones(n_iv + 1)
    simpson_w[1:-1:2] = 4.0
    simpson_w[2:-1:2] = 2.0
    integral = complex(h / 3.0 * np.sum(simpson_w * f))

    left = _left_tail_series(field, s, y_min, table)
    tail_scale = y_max ** (-s)
    p_top = P[-5:]
    p_mean = float(np.mean(p_top))
    p_spread = float(np.max(p_top) - np.min(p_top))
    err_est = 0.0
    if field.r >= 1:
        right = p_mean * tail_scale / s
        err_est += p_spread * abs(tail_scale / s)
    else:
        right = 0.0
        err_est += (abs(p_mean) + p_spread) * abs(tail_scale) / s.real

    lhs = integral + left + right
    acc = 0.0 + 0.0j
    if field.r1:
        acc += field.r1 * log_gamma_complex(-s)
    if field.r2:
        acc += field.r2 * log_gamma_complex(-2.0 * s)
    rhs = 2.0 * np.exp(acc) / complex(dedekind_eval(2.0 * s + 1.0, field))
    rhs = complex(rhs)

    rel = abs(lhs - rhs) / abs(rhs)
    report = {
        "s": [s.real, s.imag],
        "lhs": [lhs.real, lhs.imag],
        "rhs": [rhs.real, rhs.imag],
        "rel_discrepancy": rel,
        "err_est": err_est / abs(rhs),
        "nodes": int(n_iv + 1),
        "passed": bool(rel <= 1e-3),
    }
    if not report["passed"] and report["err_est"] > 1e-3:
        report["note"] = "quadrature error estimate exceeds the tolerance"
    if field.is_rational:
        remark_rhs = rhs / 2.0  # the single-kernel display carries half of P
        report["hl_remark_rhs"] = [remark_rhs.real, remark_rhs.imag]
        report["hl_factor"] = abs(lhs / remark_rhs)
    return report


def m_k_decay_probe(table: CoefficientTable, x_min: float = 1e3,
                    bins: int = 24) -> dict:
    """Empirical envelope exponents of |M_K| and |m_K| (informational only)."""
    if table.N < 10 ** 6:
        raise ValueError("decay probe needs table.N >= 1e6")
    edges = np.geomspace(x_min, table.N, bins + 1).astype(np.int64)
    mids, m_env, mm_env = [], [], []
    for i in range(bins):
        lo, hi = edges[i], edges[i + 1]
        if hi <= lo:
            continue
        mids.append(math.sqrt(lo * hi))
        m_env.append(float(np.max(np.abs(table.M[lo:hi + 1]))))
        mm_env.append(float(np.max(np.abs(table.m[lo:hi + 1]))))
    lx = np.log(mids)
    slope_M = float(np.polyfit(lx, np.log(np.maximum(m_env, 1e-300)), 1)[0])
    slope_m = float(np.polyfit(lx, np.log(np.maximum(mm_env, 1e-300)), 1)[0])
    return {
        "x": mids,
        "M_envelope": m_env,
        "m_envelope": mm_env,
        "M_exponent": slope_M,
        "m_exponent": slope_m,
    }
