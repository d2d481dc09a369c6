"""Command-line entry point: reproducible runs with machine-readable reports.

Subcommands: field, coeffs, kernel eval, zeros scan, verify-modular,
riesz-scan, mellin-check, selftest.  Every run emits a schema-versioned JSON
report (no timestamps, deterministic byte-for-byte for a fixed config) and
optional CSV.  Exit codes: 0 pass, 2 numeric-tolerance failure, 1 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

import numpy as np

__all__ = ["RunConfig", "run_command", "main", "run_selftest_checks"]

SCHEMA_VERSION = 1


@dataclasses.dataclass
class RunConfig:
    field: str = "Q"
    precision: str = "standard"
    N: int | None = None
    T: float = 30.0
    t_max: float | None = None
    quad_step: float = 1e-2
    c0: float = 0.01
    eps: float = 0.1
    y_min: float = 1e2
    y_max: float = 1e6
    points: int = 40
    threads: int = 1
    out: str | None = None
    csv: str | None = None
    random_free: bool = True

    def validate(self) -> None:
        for name in ("T", "quad_step", "c0", "eps", "y_min", "y_max"):
            if getattr(self, name) is not None and getattr(self, name) <= 0:
                raise ValueError(f"budget '{name}' must be positive")
        if self.N is not None and self.N < 1:
            raise ValueError("coefficient bound N must be >= 1")
        if self.points < 2 or self.threads < 1:
            raise ValueError("points and threads must be positive")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        bad = set(data) - known
        if bad:
            raise ValueError(f"unknown config keys: {sorted(bad)}")
        return cls(**data)


def _parse_field(token: str):
    from .fields import make_field
    if token.strip().upper() == "Q":
        return make_field(None)
    return make_field(int(token))


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(_jsonify(report), indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dzeta", description=__doc__)
    p.add_argument("--config", help="JSON file with RunConfig keys (CLI flags win)")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, field=True):
        if field:
            sp.add_argument("--field", default=None, help='"Q" or a squarefree d')
        sp.add_argument("--out", default=None, help="write the JSON report here")
        sp.add_argument("--extended", action="store_true",
                        help="extended-precision summation mode")

    sp = sub.add_parser("field", help="field invariants as JSON")
    add_common(sp)

    sp = sub.add_parser("coeffs", help="coefficient table and partial sums")
    add_common(sp)
    sp.add_argument("--coeff-bound", type=int, default=None)
    sp.add_argument("--csv", default=None)

    sp = sub.add_parser("kernel", help="kernel operations")
    ksub = sp.add_subparsers(dest="kernel_command", required=True)
    ke = ksub.add_parser("eval", help="evaluate the line-integral kernel")
    ke.add_argument("--r1", type=int, required=True)
    ke.add_argument("--r2", type=int, required=True)
    ke.add_argument("--x", type=float, required=True)
    ke.add_argument("--abscissa", type=float, required=True)
    ke.add_argument("--out", default=None)
    ke.add_argument("--extended", action="store_true")

    sp = sub.add_parser("zeros", help="zero-list operations")
    zsub = sp.add_subparsers(dest="zeros_command", required=True)
    zs = zsub.add_parser("scan", help="scan critical-line zeros to height T")
    zs.add_argument("--field", default=None)
    zs.add_argument("--T", type=float, required=True)
    zs.add_argument("--c0", type=float, default=None)
    zs.add_argument("--csv", default=None)
    zs.add_argument("--out", default=None)

    sp = sub.add_parser("verify-modular", help="assemble and check the identity")
    add_common(sp)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--T", type=float, default=None)
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--c0", type=float, default=None)
    sp.add_argument("--csv", default=None, help="per-bracket zero partials")

    sp = sub.add_parser("riesz-scan", help="P(y)/main-term scan with decay fits")
    add_common(sp)
    sp.add_argument("--y-min", type=float, default=None)
    sp.add_argument("--y-max", type=float, default=None)
    sp.add_argument("--points", type=int, default=None)
    sp.add_argument("--eps", type=float, default=None)
    sp.add_argument("--coeff-bound", type=int, default=None)
    sp.add_argument("--csv", default=None)

    sp = sub.add_parser("mellin-check", help="Mellin-transform identity check")
    add_common(sp)
    sp.add_argument("--s", required=True, help="RE or RE,IM with 0 < RE < 1/2")
    sp.add_argument("--coeff-bound", type=int, default=None)

    sp = sub.add_parser("selftest", help="run the fast invariant suite")
    add_common(sp, field=False)
    return p


def _merge_config(args) -> RunConfig:
    data: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data.update(json.load(fh))
    cfg = RunConfig.from_dict(data)
    mapping = {
        "field": "field", "out": "out", "csv": "csv", "T": "T", "c0": "c0",
        "eps": "eps", "points": "points", "coeff_bound": "N", "N": "N",
        "y_min": "y_min", "y_max": "y_max",
    }
    for arg_name, cfg_name in mapping.items():
        val = getattr(args, arg_name, None)
        if val is not None:
            setattr(cfg, cfg_name, val)
    if getattr(args, "extended", False):
        cfg.precision = "extended"
    cfg.threads = int(os.environ.get("DZETA_THREADS", cfg.threads))
    cfg.validate()
    return cfg


# ----------------------------------------------------------------------
# subcommand bodies (each returns (results_dict, passed))
# ----------------------------------------------------------------------

def _cmd_field(cfg: RunConfig):
    from .fields import class_number_data, field_to_json
    field = _parse_field(cfg.field)
    inv = None if field.is_rational else class_number_data(field)
    return field_to_json(field, inv), True


def _cmd_coeffs(cfg: RunConfig):
    from .coefficients import build_table
    if cfg.N is None:
        raise ValueError("coeffs requires --coeff-bound")
    field = _parse_field(cfg.field)
    table = build_table(field, cfg.N)
    if cfg.csv:
        table.to_csv(cfg.csv)
    results = {
        "N": table.N,
        "m_K_at_N": float(table.m[table.N]),
        "M_K_at_N": int(table.M[table.N]),
        "head": {
            "a": table.a[1:min(11, table.N + 1)].tolist(),
            "b": table.b[1:min(11, table.N + 1)].tolist(),
        },
        "csv": cfg.csv,
    }
    return results, True


def _cmd_kernel_eval(args, cfg: RunConfig):
    from .kernels import KernelSpec, z_line_integral
    spec = KernelSpec(r1=args.r1, r2=args.r2, quad_step=cfg.quad_step,
                      t_max=cfg.t_max, precision=cfg.precision)
    value, err = z_line_integral(spec, args.x, abscissa=args.abscissa)
    results = {"value": value, "err_est": err, "method": "trapezoid-line-integral",
               "r1": args.r1, "r2": args.r2, "x": args.x, "abscissa": args.abscissa}
    return results, True


def _cmd_zeros(cfg: RunConfig):
    from .lfunctions import argument_principle_count, find_zeros
    field = _parse_field(cfg.field)
    zl = find_zeros(field, cfg.T, c0=cfg.c0, threads=cfg.threads)
    count = argument_principle_count(field, cfg.T)
    if cfg.csv:
        zl.to_csv(cfg.csv)
    results = {
        "T": cfg.T,
        "count": len(zl),
        "argument_principle_count": count,
        "counts_agree": count == len(zl),
        "gamma": zl.gamma.tolist(),
        "source": zl.source,
        "bracket_count": zl.bracket_count,
        "max_localization_err": float(np.max(zl.localization_err)) if len(zl) else 0.0,
        "window_count_constant": zl.window_count_constant,
        "dual_route_max_rel": zl.dual_route_max,
        "collisions": zl.collisions,
    }
    return results, bool(count == len(zl))


def _cmd_verify_modular(args, cfg: RunConfig):
    from .modular import verify_relation
    field = _parse_field(cfg.field)
    if cfg.N is None:
        raise ValueError("verify-modular requires --N (coefficient bound)")
    rep = verify_relation(field, args.alpha, cfg.T, cfg.N,
                          c0=cfg.c0, threads=cfg.threads)
    if cfg.csv:
        import csv as _csv
        with open(cfg.csv, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["bracket_id", "gamma_end", "zero_partial"])
            for row in rep.rhs_zero_partial:
                w.writerow(row)
    return rep.to_dict(), rep.passed


def _cmd_riesz_scan(cfg: RunConfig):
    from .coefficients import build_table
    from .riesz import decay_fit, riesz_scan
    field = _parse_field(cfg.field)
    if cfg.N is None:
        raise ValueError("riesz-scan requires --coeff-bound")
    table = build_table(field, cfg.N)
    scan = riesz_scan(field, table, cfg.y_min, cfg.y_max, cfg.points, eps=cfg.eps)
    if cfg.csv:
        scan.to_csv(cfg.csv)
    p_fit = decay_fit(scan.y_grid, scan.P_values)
    results = {
        "eps": scan.eps,
        "fitted_exponent": scan.fitted_exponent,
        "p_envelope": p_fit,
        "main_term_zero": bool(np.all(scan.main_term == 0.0)),
        "y": scan.y_grid.tolist(),
        "P": scan.P_values.tolist(),
        "main": scan.main_term.tolist(),
        "corrected": scan.corrected.tolist(),
        "N_used": scan.N_used.tolist(),
    }
    return results, True


def _cmd_mellin_check(args, cfg: RunConfig):
    from .coefficients import build_table
    from .riesz import mellin_identity_check
    field = _parse_field(cfg.field)
    parts = [float(tok) for tok in args.s.split(",")]
    s = complex(parts[0], parts[1] if len(parts) > 1 else 0.0)
    N = cfg.N if cfg.N is not None else 10 ** 6
    table = build_table(field, N)
    rep = mellin_identity_check(field, s, table)
    return rep, bool(rep["passed"])


def _cmd_selftest(cfg: RunConfig):
    checks = run_selftest_checks()
    passed = all(c["passed"] for c in checks)
    return {"checks": checks, "all_passed": passed}, passed


def run_selftest_checks() -> list:
    """Fast cross-module invariant checks with recorded tolerances."""
    import itertools

    from ._util import EULER_GAMMA
    from .coefficients import (b_via_prime_ideals, build_table,
                               convolution_residual)
    from .fields import class_number_data, kronecker_chi, make_field
    from .kernels import (KernelSpec, bessel_k0, residue_at_zero,
                          residue_calibrate, z_closed_form, z_line_integral)
    from .lfunctions import expansion_data, find_zeros, l_eval, zeta_eval
    from .lfunctions import completed_lambda

    checks = []

    def record(name, achieved, target, extra=None):
        entry = {"name": name, "achieved": float(achieved),
                 "target": float(target), "passed": bool(achieved <= target)}
        if extra:
            entry.update(extra)
        checks.append(entry)

    fQ, fi, f5, f3 = make_field(None), make_field(-1), make_field(5), make_field(-3)

    worst = 0.0
    for (r1, r2) in ((1, 0), (0, 1), (2, 0)):
        spec = KernelSpec(r1=r1, r2=r2)
        for x in (0.5, 2.0):
            v, _ = z_line_integral(spec, x, abscissa=-0.25)
            worst = max(worst, abs(v - float(z_closed_form(r1, r2, x))))
    record("kernel_closed_vs_integral", worst, 1e-8)

    spec20 = KernelSpec(2, 0)
    v, _ = z_line_integral(spec20, 0.5, abscissa=-0.5)
    record("bessel_mellin_identity",
           abs(v / 4.0 - (bessel_k0(1.0) + EULER_GAMMA + math.log(0.5))), 1e-8)

    worst = 0.0
    powers = {}
    for (r1, r2) in ((0, 1), (2, 0)):
        rc = residue_calibrate(r1, r2)
        powers[f"{r1},{r2}"] = rc.matched_power
        spec = KernelSpec(r1=r1, r2=r2)
        for x in (0.5, 2.0):
            zt, _ = z_line_integral(spec, x, abscissa=spec.d)
            zz, _ = z_line_integral(spec, x, abscissa=spec.c)
            worst = max(worst, abs(zz - (zt - residue_at_zero(rc, x))))
    record("residue_decomposition", worst, 1e-8, {"matched_powers": powers})

    bad = 0
    for f in (fi, f5):
        chi = [kronecker_chi(f, m) for m in range(1, 201 * 201)]
        for a, b in itertools.product(range(1, 201), repeat=2):
            if chi[a * b - 1] != chi[a - 1] * chi[b - 1]:
                bad += 1
    record("chi_multiplicativity", bad, 0)

    worst = 0
    for f in (fQ, fi, f5, f3):
        t = build_table(f, 4000)
        worst = max(worst, convolution_residual(t.a, t.b, 4000))
        worst = max(worst, int(np.max(np.abs(
            b_via_prime_ideals(f, 1500) - t.b[:1501]))))
    record("coefficient_inversion_and_oracle", worst, 0)

    worst = 0.0
    for f in (fQ, fi, f5):
        for s in (0.3 + 2.0j, 0.5 + 5.0j, 0.7 + 11.0j, 0.45 + 17.0j):
            a = completed_lambda(s, f)
            b = completed_lambda(1 - s, f)
            worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
    record("functional_equation_defect", worst, 1e-8)

    record("zeta_spot_values",
           max(abs(zeta_eval(2.0) - math.pi ** 2 / 6),
               abs(zeta_eval(-1.0) + 1.0 / 12.0),
               abs(l_eval(2.0, fi) - 0.915965594177219015)), 1e-12)

    inv_i = class_number_data(fi)
    inv_3 = class_number_data(f3)
    record("class_numbers", max(abs(inv_i.h - 1), abs(inv_3.h - 1))
           + inv_i.h_residual + inv_3.h_residual, 1e-6)

    ed5 = expansion_data(f5)
    record("zeta_K_prime_at_zero_vs_hR", ed5.residuals["class_formula_rel"], 1e-6)

    zl = find_zeros(fQ, 16.0)
    record("first_zeta_zero", abs(float(zl.gamma[0]) - 14.134725141734693), 1e-8)

    return checks


def run_command(argv=None) -> int:
    """Parse argv, run the subcommand, emit the report; returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _merge_config(args)
        if args.command == "field":
            results, passed = _cmd_field(cfg)
        elif args.command == "coeffs":
            results, passed = _cmd_coeffs(cfg)
        elif args.command == "kernel":
            results, passed = _cmd_kernel_eval(args, cfg)
        elif args.command == "zeros":
            results, passed = _cmd_zeros(cfg)
        elif args.command == "verify-modular":
            results, passed = _cmd_verify_modular(args, cfg)
        elif args.command == "riesz-scan":
            results, passed = _cmd_riesz_scan(cfg)
        elif args.command == "mellin-check":
            results, passed = _cmd_mellin_check(args, cfg)
        elif args.command == "selftest":
            results, passed = _cmd_selftest(cfg)
        else:  # pragma: no cover
            raise ValueError(f"unknown command {args.command}")
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except RuntimeError as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return 2
    report = {
        "schema": SCHEMA_VERSION,
        "command": args.command,
        "config": cfg.to_dict(),
        "results": results,
        "passed": bool(passed),
    }
    _emit(report, cfg.out)
    return 0 if passed else 2


def main() -> None:
    raise SystemExit(run_command())


if __name__ == "__main__":
    main()
