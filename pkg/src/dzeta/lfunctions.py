"""Evaluation of zeta(s), L(s, chi), zeta_K(s), Lambda_K(s) and their zeros.

zeta_K factors as zeta(s) * L(s, chi_{d_K}) for quadratic fields, so zero
finding reduces to two real rotated functions on the critical line: the
classical Hardy Z for the zeta factor and its analogue

    Z_chi(t) = Re[ e^{i theta_chi(t)} L(1/2 + it, chi) ],
    theta_chi(t) = Im log Gamma((1/2 + a + it)/2) + (t/2) log(q/pi),

for the L factor (a = 0 or 1 as chi is even or odd; real primitive quadratic
characters have root number +1, which is what makes the rotation real).

All plain evaluations use Euler-Maclaurin for the Hurwitz zeta with
ceil(|Im s|) + 30 main terms and 8 Bernoulli corrections.
"""

from __future__ import annotations

import functools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._util import BERNOULLI_EVEN, digamma_real, neville_to_zero
from .fields import FieldDescriptor, FieldInvariants, character_table, class_number_data
from .kernels import log_gamma_complex

_EM_DEPTH = 8
_chi_table = functools.lru_cache(maxsize=None)(character_table)


def hurwitz_zeta(s, a: float = 1.0):
    """zeta(s, a) for complex s (scalar or array), 0 < a <= 1, s != 1."""
    if not (0.0 < a <= 1.0):
        raise ValueError("need 0 < a <= 1")
    arr = np.asarray(s, dtype=complex)
    scalar = arr.ndim == 0
    sv = np.atleast_1d(arr).ravel()
    if np.any(sv == 1.0):
        raise ValueError("pole at s = 1")
    M = int(math.ceil(np.max(np.abs(sv.imag)) if sv.size else 0.0)) + 30
    base = np.arange(M, dtype=float) + a            # a, a+1, ..., a+M-1
    main = np.exp(-np.outer(sv, np.log(base))).sum(axis=1)
    P = float(M + a)
    logP = math.log(P)
    tail = np.exp((1.0 - sv) * logP) / (sv - 1.0) + 0.5 * np.exp(-sv * logP)
    corr = np.zeros_like(sv)
    poch = sv.copy()
    for k in range(1, _EM_DEPTH + 1):
        corr += BERNOULLI_EVEN[k - 1] / math.factorial(2 * k) * poch \
            * np.exp((-sv - 2 * k + 1) * logP)
        poch = poch * (sv + 2 * k - 1) * (sv + 2 * k)
    out = main + tail + corr
    if scalar:
        return complex(out[0])
    return out.reshape(arr.shape)


def zeta_eval(s):
    """Riemann zeta by Euler-Maclaurin; raises at the pole s = 1."""
    return hurwitz_zeta(s, 1.0)


def l_eval(s, field: FieldDescriptor):
    """L(s, chi_{d_K}) = q^{-s} sum_a chi(a) zeta(s, a/q); entire for these chi."""
    if field.is_rational:
        raise ValueError("Q carries no L-factor")
    q = field.conductor
    chi = _chi_table(field)
    arr = np.asarray(s, dtype=complex)
    scalar = arr.ndim == 0
    sv = np.atleast_1d(arr).ravel()
    out = np.zeros_like(sv)
    at_pole = sv == 1.0
    if np.any(at_pole):
        # the chi-weighted combination is finite at s=1: L(1) = -(1/q) sum chi(a) psi(a/q)
        val = -math.fsum(int(chi[a]) * digamma_real(a / q)
                         for a in range(1, q) if chi[a]) / q
        out[at_pole] = val
    if np.any(~at_pole):
        sub = sv[~at_pole]
        acc = np.zeros_like(sub)
        for a in range(1, q):
            c = int(chi[a])
            if c:
                acc += c * hurwitz_zeta(sub, a / q)
        out[~at_pole] = np.exp(-sub * math.log(q)) * acc
    if scalar:
        return complex(out[0])
    return out.reshape(arr.shape)


def dedekind_eval(s, field: FieldDescriptor):
    """zeta_K(s): zeta(s) for Q, zeta(s) * L(s, chi) for quadratic fields."""
    if field.is_rational:
        return zeta_eval(s)
    return zeta_eval(s) * l_eval(s, field)


def completed_lambda(s, field: FieldDescriptor):
    """Lambda_K(s) = eta^{-s/2} Gamma^r1(s/2) Gamma^r2(s) zeta_K(s)."""
    arr = np.asarray(s, dtype=complex)
    if np.any(arr == 0.0) or np.any(arr == 1.0):
        raise ValueError("Lambda_K has poles at s = 0 and s = 1")
    acc = -0.5 * arr * math.log(field.eta)
    if field.r1:
        acc = acc + field.r1 * log_gamma_complex(arr / 2.0)
    if field.r2:
        acc = acc + field.r2 * log_gamma_complex(arr)
    return np.exp(acc) * dedekind_eval(s, field)


# ----------------------------------------------------------------------
# rotated real functions on the critical line
# ----------------------------------------------------------------------

def hardy_z(t, field: FieldDescriptor, source: str):
    """Real rotated value of the tagged factor at s = 1/2 + it."""
    tv = np.asarray(t, dtype=float)
    s = 0.5 + 1j * tv
    if source == "zeta":
        theta = np.imag(log_gamma_complex(0.25 + 0.5j * tv)) \
            - 0.5 * tv * math.log(math.pi)
        vals = zeta_eval(s)
    elif source == "L":
        if field.is_rational:
            raise ValueError("no L-factor for Q")
        a_par = 0 if field.d_K > 0 else 1
        q = field.conductor
        theta = np.imag(log_gamma_complex((s + a_par) / 2.0)) \
            + 0.5 * tv * math.log(q / math.pi)
        vals = l_eval(s, field)
    else:
        raise ValueError(f"unknown factor tag {source!r}")
    return np.real(np.exp(1j * theta) * vals)


# ----------------------------------------------------------------------
# zero lists
# ----------------------------------------------------------------------

@dataclass
class ZeroList:
    """Merged critical-line ordinates of both factors, with derivative data."""

    field: FieldDescriptor
    T: float
    c0: float
    gamma: np.ndarray            # strictly increasing ordinates
    source: list                 # "zeta" | "L" per zero
    zeta_K_prime: np.ndarray     # complex, nan for excluded zeros
    localization_err: np.ndarray
    bracket_id: np.ndarray
    excluded: np.ndarray         # bool: collision-flagged zeros
    collisions: list             # (gamma_i, gamma_j) pairs closer than 1e-6
    refined_windows: list
    window_count_constant: float
    dual_route_max: float

    def __len__(self) -> int:
        return len(self.gamma)

    @property
    def bracket_count(self) -> int:
        return int(self.bracket_id[-1]) + 1 if len(self.gamma) else 0

    def to_csv(self, path) -> None:
        import csv
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["gamma", "source", "re_zeta_K_prime", "im_zeta_K_prime",
                        "localization_err", "bracket_id"])
            for i in range(len(self.gamma)):
                w.writerow([repr(float(self.gamma[i])), self.source[i],
                            repr(float(self.zeta_K_prime[i].real)),
                            repr(float(self.zeta_K_prime[i].imag)),
                            repr(float(self.localization_err[i])),
                            int(self.bracket_id[i])])


def _scan_sign_changes(field, source, t_lo, t_hi, step):
    grid = np.arange(t_lo, t_hi + step, step)
    vals = hardy_z(grid, field, source)
    flips = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    return [(grid[i], grid[i + 1], vals[i]) for i in flips]


def _bisect_batch(field, source, brackets, tol=1e-9):
    if not brackets:
        return np.empty(0), np.empty(0)
    lo = np.array([b[0] for b in brackets])
    hi = np.array([b[1] for b in brackets])
    flo = np.array([b[2] for b in brackets])
    while np.max(hi - lo) > 2.0 * tol:
        mid = 0.5 * (lo + hi)
        fm = hardy_z(mid, field, source)
        same = np.sign(fm) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi), 0.5 * (hi - lo)


def _closeness_threshold(c0, g1, g2):
    def one(g):
        return math.exp(-c0 * g / math.log(g)) if g > math.e else 1.0
    return one(g1) + one(g2)


def find_zeros(field: FieldDescriptor, T: float, step: float = 0.05,
               c0: float = 0.01, t_min: float = 0.05, threads: int = 1,
               bisect_tol: float = 1e-9) -> ZeroList:
    """Scan both factors to height T, bisect, merge, bracket, differentiate.

    Sign scan at `step` (refined x10 in any unit window whose candidate count
    exceeds 3 log T0, per the zero-density shape), bisection to 1e-9, and
    conjugate zeros implied rather than stored.
    """
    if T > 200:
        raise ValueError("desk-scale budget is T <= 200")
    if T <= t_min:
        raise ValueError("T must exceed t_min")
    sources = ["zeta"] if field.is_rational else ["zeta", "L"]
    refined_windows = []
    all_gamma, all_src, all_err = [], [], []
    for source in sources:
        if threads > 1:
            edges = np.linspace(t_min, T, threads + 1)
            windows = [(edges[i], min(edges[i + 1] + step, T)) for i in range(threads)]
            with ThreadPoolExecutor(max_workers=threads) as pool:
                chunks = list(pool.map(
                    lambda w: _scan_sign_changes(field, source, w[0], w[1], step),
                    windows))
            brackets = [b for ch in chunks for b in ch]
            # windows overlap by one step; drop duplicated brackets
            seen = set()
            uniq = []
            for b in brackets:
                key = round(b[0] / step)
                if key not in seen:
                    seen.add(key)
                    uniq.append(b)
            brackets = sorted(uniq)
        else:
            brackets = _scan_sign_changes(field, source, t_min, T, step)
        # density-informed refinement of suspicious unit windows
        counts: dict[int, int] = {}
        for b in brackets:
            counts[int(b[0])] = counts.get(int(b[0]), 0) + 1
        for w0, cnt in sorted(counts.items()):
            if cnt > 3.0 * math.log(w0 + 2):
                refined_windows.append((source, w0))
                brackets = [b for b in brackets if int(b[0]) != w0]
                brackets.extend(_scan_sign_changes(
                    field, source, float(w0), min(float(w0 + 1), T), step / 10.0))
        brackets.sort()
        gam, err = _bisect_batch(field, source, brackets, tol=bisect_tol)
        all_gamma.extend(gam.tolist())
        all_src.extend([source] * len(gam))
        all_err.extend(err.tolist())

    order = np.argsort(all_gamma)
    gamma = np.array(all_gamma)[order]
    src = [all_src[i] for i in order]
    err = np.array(all_err)[order]
    gamma = gamma[gamma <= T]
    src = src[:len(gamma)]
    err = err[:len(gamma)]

    excluded = np.zeros(len(gamma), dtype=bool)
    collisions = []
    for i in range(len(gamma) - 1):
        if gamma[i + 1] - gamma[i] < 1e-6:
            collisions.append((float(gamma[i]), float(gamma[i + 1])))
            excluded[i] = excluded[i + 1] = True
    if collisions:
        warnings.warn(f"{len(collisions)} gamma pair(s) closer than 1e-6; "
                      "flagged and excluded from zero sums", stacklevel=2)

    zkp = np.full(len(gamma), np.nan + 0j, dtype=complex)
    dual_max = 0.0
    for i in range(len(gamma)):
        if excluded[i]:
            continue
        rho = 0.5 + 1j * gamma[i]
        val, rel = _zeta_K_prime_meta(rho, field, src[i])
        zkp[i] = val
        dual_max = max(dual_max, rel)

    bracket_id = np.zeros(len(gamma), dtype=np.int64)
    for i in range(1, len(gamma)):
        gap = gamma[i] - gamma[i - 1]
        thresh = _closeness_threshold(c0, float(gamma[i - 1]), float(gamma[i]))
        bracket_id[i] = bracket_id[i - 1] + (0 if gap < thresh else 1)

    wc = 0.0
    for w0 in range(int(t_min), int(T)):
        cnt = int(np.sum((gamma >= w0) & (gamma < w0 + 1)))
        wc = max(wc, cnt / math.log(w0 + 2))

    return ZeroList(field=field, T=float(T), c0=c0, gamma=gamma, source=src,
                    zeta_K_prime=zkp, localization_err=err,
                    bracket_id=bracket_id, excluded=excluded,
                    collisions=collisions, refined_windows=refined_windows,
                    window_count_constant=wc, dual_route_max=dual_max)


# ----------------------------------------------------------------------
# derivatives at zeros
# ----------------------------------------------------------------------

def _cdiff(f, z: complex, h: float = 1e-6) -> complex:
    d1 = (f(z + h) - f(z - h)) / (2 * h)
    d2 = (f(z + h / 2) - f(z - h / 2)) / h
    return (4.0 * d2 - d1) / 3.0


def _zeta_K_prime_meta(rho: complex, field: FieldDescriptor, source: str):
    if source == "zeta":
        deriv = _cdiff(zeta_eval, rho)
        other = 1.0 + 0j if field.is_rational else l_eval(rho, field)
    elif source == "L":
        if field.is_rational:
            raise ValueError("no L-factor for Q")
        deriv = _cdiff(lambda s: l_eval(s, field), rho)
        other = zeta_eval(rho)
    else:
        raise ValueError(f"unknown factor tag {source!r}")
    product_route = deriv * other
    direct_route = _cdiff(lambda s: dedekind_eval(s, field), rho)
    if abs(product_route) < 1e-8:
        raise RuntimeError(
            f"|zeta_K'(rho)| < 1e-8 at gamma={rho.imag:.6f}: possible multiple "
            "zero; the relation is inapplicable at this rho")
    rel = abs(product_route - direct_route) / abs(product_route)
    if rel > 1e-6:
        raise RuntimeError(
            f"derivative routes disagree by {rel:.2e} at gamma={rho.imag:.6f}")
    return product_route, rel


def zeta_K_prime_at(rho: complex, field: FieldDescriptor, source: str) -> complex:
    """zeta_K'(rho) by the product rule on the tagged factor, cross-checked
    against a direct central difference of zeta_K to 1e-6 relative."""
    return _zeta_K_prime_meta(rho, field, source)[0]


# ----------------------------------------------------------------------
# expansions at s = 0 and s = 1
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ExpansionData:
    """Leading behaviour of zeta_K at s=0 (zero of order r) and s=1 (pole)."""

    field: FieldDescriptor
    zeta_K_prime_at_0: float     # lim zeta_K(s)/s^r (the value itself when r=0)
    residue_at_1: float          # lim (s-1) zeta_K(s)
    taylor_at_0: np.ndarray      # coefficients c_0..c_r of zeta_K at 0
    laurent_at_1: np.ndarray     # a_{-1}, a_0, ..., a_{r-1}
    residuals: dict


_H_RING = [0.01 * 2.0 ** (-k) for k in range(6)]


def _signed_ring():
    hs = []
    for h in _H_RING:
        hs.extend([h, -h])
    return hs


def expansion_data(field: FieldDescriptor,
                   invariants: FieldInvariants | None = None) -> ExpansionData:
    """Richardson-extrapolated limits at s=0 and s=1, with the class-number
    consistency check zeta_K^{(r)}-limit = -hR/w to 1e-6 relative."""
    r = field.r
    hs = _signed_ring()

    res1, res1_err = neville_to_zero(
        hs, [h * float(np.real(dedekind_eval(1.0 + h, field))) for h in hs])
    if res1_err > 1e-6 * max(1.0, abs(res1)):
        raise RuntimeError(f"residue-at-1 extrapolation residual {res1_err:.2e}")

    gamma0, g0_err = neville_to_zero(
        hs, [float(np.real(dedekind_eval(1.0 + h, field))) - res1 / h for h in hs])

    if r == 0:
        z0 = float(np.real(dedekind_eval(0.0, field)))
        z0_err = 0.0
        taylor = np.array([z0])
        laurent = np.array([res1])
    else:
        z0, z0_err = neville_to_zero(
            hs, [float(np.real(dedekind_eval(h, field))) / h ** r for h in hs])
        if z0_err > 1e-6 * max(1.0, abs(z0)):
            raise RuntimeError(f"s=0 limit extrapolation residual {z0_err:.2e}")
        # c_0..c_{r-1} vanish by the order-r zero; c_r is the measured limit
        taylor = np.zeros(r + 1)
        taylor[r] = z0
        laurent = np.array([res1] + [gamma0] * min(r, 1))

    residuals = {"residue_at_1": res1_err, "zeta_K_prime_at_0": z0_err,
                 "laurent_const": g0_err}

    # class-number-formula consistency at s=0: lim zeta_K(s)/s^r = -hR/w
    if field.is_rational:
        hr_w = -1.0 / field.w
    else:
        inv = invariants if invariants is not None else class_number_data(field)
        hr_w = -inv.hR / field.w
    rel = abs(z0 - hr_w) / abs(hr_w)
    residuals["class_formula_rel"] = rel
    if rel > 1e-6:
        raise RuntimeError(
            f"s=0 expansion disagrees with -hR/w by {rel:.2e} for {field.label()}")

    return ExpansionData(field=field, zeta_K_prime_at_0=z0, residue_at_1=res1,
                         taylor_at_0=taylor, laurent_at_1=laurent,
                         residuals=residuals)


# ----------------------------------------------------------------------
# argument-principle count
# ----------------------------------------------------------------------

def argument_principle_count(field: FieldDescriptor, T: float,
                             re_lo: float = -0.5, re_hi: float = 1.5,
                             t_min: float = 0.1, coarse: float = 0.05,
                             max_rounds: int = 40) -> int:
    """Winding number of zeta_K around the pole-free rectangle
    [re_lo, re_hi] x [t_min, T]; equals the count of zeros with t_min < gamma < T."""
    corners = [complex(re_lo, t_min), complex(re_hi, t_min),
               complex(re_hi, T), complex(re_lo, T), complex(re_lo, t_min)]
    pts: list[complex] = []
    for p, q in zip(corners[:-1], corners[1:]):
        n = max(2, int(abs(q - p) / coarse))
        seg = p + (q - p) * np.arange(n) / n
        pts.extend(seg.tolist())
    pts.append(corners[-1])
    z = np.array(pts, dtype=complex)
    f = dedekind_eval(z, field)
    for _ in range(max_rounds):
        dphi = np.angle(f[1:] / f[:-1])
        bad = np.flatnonzero(np.abs(dphi) > 0.5 * math.pi)
        if bad.size == 0:
            break
        mids = 0.5 * (z[bad] + z[bad + 1])
        fm = dedekind_eval(mids, field)
        z = np.insert(z, bad + 1, mids)
        f = np.insert(f, bad + 1, fm)
    else:
        raise RuntimeError("phase tracking failed to converge; zero on contour?")
    total = float(np.sum(np.angle(f[1:] / f[:-1])))
    w = total / (2.0 * math.pi)
    if abs(w - round(w)) > 0.1:
        raise RuntimeError(f"winding number {w:.3f} is not close to an integer")
    return int(round(w))
