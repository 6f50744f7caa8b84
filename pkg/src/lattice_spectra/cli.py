"""Command-line front end for batch verification runs and report generation.

All runs are driven by a single structured JSON input document (no
positional numeric arguments), so results are reproducible from the file
alone.  Exit codes are a stable contract:

    0   success
    1   a mathematical condition failed (bound states, residual above tol)
    2   input error (malformed file, violated precondition)
    3   numerical failure (non-convergence, lost accuracy)

CSV and JSON outputs carry a ``schema`` tag; floats are written with
round-trip precision, '.' decimal separators and LF line endings, so
identical inputs (and seed) produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .constraints import (
    coulomb_energy_discrete,
    expected_sign,
    product_identity_residual,
    recover_potential,
    recover_potential_mp,
    signed_log_product,
)
from .continuum import (
    QuadratureGrid,
    constraint_residual_jost,
    constraint_residual_phase,
    convergence_study,
)
from .errors import NumericalError
from .freecase import (
    appendix_g,
    appendix_pro,
    cos_product,
    free_product_identity,
    sine_product_residual,
)
from .hamiltonian import HalfChainDiagonal, SpectrumPair, spectrum_pair, spectrum_pair_mp
from .scattering import CompactPotential, jost_polynomial, scattering_phase

EXIT_OK = 0
EXIT_CONDITION = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

_THREADS_ENV = "LATTICE_SPECTRA_THREADS"


class InputFileError(ValueError):
    pass


def _load_document(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputFileError(f"cannot read input file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputFileError(f"input file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputFileError("input document must be a JSON object")
    return doc


def _finite_floats(doc: dict, key: str) -> list[float]:
    raw = doc[key]
    if not isinstance(raw, list) or not raw:
        raise InputFileError(f"key {key!r} must be a non-empty array of numbers")
    out = []
    for x in raw:
        if not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x):
            raise InputFileError(f"key {key!r} contains a non-finite or non-numeric entry")
        out.append(float(x))
    return out


def _diagonal_from_document(doc: dict) -> HalfChainDiagonal:
    has_v, has_b = "v" in doc, "b" in doc
    if has_v == has_b:
        raise InputFileError("exactly one of the keys 'v' and 'b' must be present")
    if has_b:
        return HalfChainDiagonal(np.array(_finite_floats(doc, "b")))
    return HalfChainDiagonal.from_potential(np.array(_finite_floats(doc, "v")))


def _compact_potential_from_document(doc: dict) -> CompactPotential:
    if "v" not in doc:
        raise InputFileError("scattering input requires the key 'v'")
    V = CompactPotential(np.array(_finite_floats(doc, "v")))
    if V.J == 0:
        raise InputFileError("potential support is empty (all entries zero)")
    return V


def _setting(args, doc: dict, name: str, default):
    """Flag value if given, else the input-file field, else the default."""
    cli_val = getattr(args, name, None)
    if cli_val is not None:
        return cli_val
    if doc is not None and name in doc:
        return doc[name]
    return default


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_verify_product(args) -> int:
    doc = _load_document(args.input)
    b = _diagonal_from_document(doc)
    if args.m is not None and args.m != b.M:
        raise InputFileError(f"--m {args.m} does not match the file length M={b.M}")
    tol = float(_setting(args, doc, "tol", 1e-8))
    s = spectrum_pair(b)
    residual = product_identity_residual(s)
    slp = signed_log_product(s)
    coulomb = coulomb_energy_discrete(s)
    passed = residual <= tol
    report = {
        "schema": "product-report/1",
        "M": s.M,
        "residual": residual,
        "log_abs": slp.log_abs,
        "sign": float(np.real(slp.sign)),
        "expected_sign": expected_sign(s.M),
        "interlacing_ok": True,  # SpectrumPair construction enforces it
        "coulomb_energy": coulomb,
        "coulomb_expected": -s.M * math.log(2.0),
        "tol": tol,
        "passed": bool(passed),
    }
    _write_json(_out_dir(args) / "product_report.json", report)
    print(f"M={s.M}  product residual={residual:.3e}  "
          f"sign={report['sign']:+.0f} (expected {report['expected_sign']:+.0f})")
    print(f"coulomb energy={coulomb:.12f}  expected={-s.M * math.log(2.0):.12f}")
    return EXIT_OK if passed else EXIT_CONDITION


def cmd_recover(args) -> int:
    doc = _load_document(args.input)
    if "mu" not in doc or "nu" not in doc:
        raise InputFileError("recover input requires the keys 'mu' and 'nu'")
    mu = _finite_floats(doc, "mu")
    nu = _finite_floats(doc, "nu")
    tol = float(_setting(args, doc, "tol", 1e-8))
    bits = _setting(args, doc, "precision_bits", None)
    if bits is not None:
        bits = int(bits)
        b_mp = recover_potential_mp(mu, nu, bits)
        mu_rt, nu_rt = spectrum_pair_mp(
            HalfChainDiagonal(np.array([float(x) for x in b_mp])), bits
        )
        # round trip measured on the spectra at working precision
        err = max(
            max(abs(float(a - b)) for a, b in zip(mu_rt, mu)),
            max(abs(float(a - b)) for a, b in zip(nu_rt, nu)),
        )
        b_list = [float(x) for x in b_mp]
    else:
        s = SpectrumPair(np.array(mu), np.array(nu))
        b = recover_potential(s)
        rt = spectrum_pair(b)
        err = max(float(np.max(np.abs(rt.mu - s.mu))), float(np.max(np.abs(rt.nu - s.nu))))
        b_list = [float(x) for x in b.entries]
    passed = err <= tol
    report = {
        "schema": "recover-report/1",
        "M": len(mu),
        "b": b_list,
        "round_trip_error": err,
        "precision_bits": bits,
        "tol": tol,
        "passed": bool(passed),
    }
    _write_json(_out_dir(args) / "recover_report.json", report)
    print("recovered b: " + ", ".join(f"{x:.12g}" for x in b_list))
    print(f"round-trip spectral error={err:.3e}  tol={tol:.1e}")
    return EXIT_OK if passed else EXIT_CONDITION


def cmd_scatter(args) -> int:
    doc = _load_document(args.input)
    V = _compact_potential_from_document(doc)
    grid = int(_setting(args, doc, "grid", 4096))
    out = _out_dir(args)
    F = jost_polynomial(V)
    report = {
        "schema": "scatter-report/1",
        "J": V.J,
        "coefficients": [float(c) for c in F.coeffs],
        "roots": [[float(r.real), float(r.imag)] for r in F.roots],
        "conditions": F.report.to_dict(),
    }
    _write_json(out / "scatter_report.json", report)
    print(f"J={V.J}  degree={F.degree}  min|root|={F.report.min_root_abs:.6g}  "
          f"F(1)={F.report.value_at_plus1:.6g}  F(-1)={F.report.value_at_minus1:.6g}")
    if not F.report.passed:
        print("conditions FAILED (bound or semi-bound state); no phase table written")
        return EXIT_CONDITION
    table = scattering_phase(F, grid)
    table.to_csv(out / "phase_table.csv")
    from .plots import save_phase_figure

    save_phase_figure(table, out / "phase_table.png")
    print(f"phase table ({grid + 1} samples) -> {out / 'phase_table.csv'}")
    return EXIT_OK


def cmd_constraint(args) -> int:
    doc = _load_document(args.input)
    V = _compact_potential_from_document(doc)
    grid_n = int(_setting(args, doc, "grid", 4096))
    tol = float(_setting(args, doc, "tol", 1e-7))
    out = _out_dir(args)
    F = jost_polynomial(V)
    if not F.report.passed:
        _write_json(out / "constraint_report.json", {
            "schema": "constraint-report/1",
            "conditions": F.report.to_dict(),
            "passed": False,
        })
        print("conditions FAILED (bound or semi-bound state); constraint undefined")
        return EXIT_CONDITION
    grid = QuadratureGrid(grid_n)
    phase = scattering_phase(F, grid_n)
    r_phase = constraint_residual_phase(phase, grid)
    r_jost = constraint_residual_jost(F, grid)
    passed = abs(r_phase) <= tol and abs(r_jost) <= tol
    report = {
        "schema": "constraint-report/1",
        "grid": grid_n,
        "residual_phase_form": r_phase,
        "residual_jost_form": r_jost,
        "difference": r_phase - r_jost,
        "conditions": F.report.to_dict(),
        "tol": tol,
        "passed": bool(passed),
    }
    _write_json(out / "constraint_report.json", report)
    print(f"phase-form residual={r_phase:.3e}  jost-form residual={r_jost:.3e}  "
          f"difference={r_phase - r_jost:.3e}")
    return EXIT_OK if passed else EXIT_CONDITION


def cmd_converge(args) -> int:
    doc = _load_document(args.input)
    V = _compact_potential_from_document(doc)
    if args.m_list is None:
        raise InputFileError("--m-list is required (e.g. --m-list 50,100,200,400)")
    try:
        m_list = [int(tok) for tok in args.m_list.split(",") if tok.strip()]
    except ValueError as exc:
        raise InputFileError(f"bad --m-list: {exc}") from exc
    grid_n = int(_setting(args, doc, "grid", 4096))
    tol = float(_setting(args, doc, "tol", 1e-8))
    out = _out_dir(args)
    study = convergence_study(V, m_list, QuadratureGrid(grid_n),
                              workers=args.workers)
    study.to_csv(out / "convergence.csv")
    from .plots import save_convergence_figure

    save_convergence_figure(study, out / "convergence.png")
    worst = max(abs(r.sum_S) for r in study.rows)
    report = {
        "schema": "convergence-report/1",
        "grid": grid_n,
        "M_list": m_list,
        "max_abs_sum_S": worst,
        "s0_decay_exponent": study.s0_decay_exponent,
        "s1_decay_exponent": study.s1_decay_exponent,
        "limit_s0": study.rows[0].limit_s0,
        "limit_s1": study.rows[0].limit_s1,
        "residual_EQ": study.rows[0].residual_EQ,
        "tol": tol,
        "passed": bool(worst <= tol),
    }
    _write_json(out / "convergence_report.json", report)
    for r in study.rows:
        print(f"M={r.M:5d}  sum_S={r.sum_S:+.3e}  sum_S0={r.sum_S0:+.9f}  "
              f"sum_S1={r.sum_S1:+.9f}")
    print(f"limits: s0={study.rows[0].limit_s0:+.9f}  s1={study.rows[0].limit_s1:+.9f}  "
          f"decay exponents: {study.s0_decay_exponent:.2f} / {study.s1_decay_exponent:.2f}")
    return EXIT_OK if worst <= tol else EXIT_CONDITION


def cmd_freecase(args) -> int:
    if args.m is None or args.m < 1:
        raise InputFileError("--m must be a positive integer (largest M to check)")
    tol = args.tol if args.tol is not None else 1e-9
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    worst = {"product": 0.0, "cos_product": 0.0, "first_factors": 0.0,
             "full_ring": 0.0, "sine_product": 0.0}
    for M in range(1, args.m + 1):
        worst["product"] = max(worst["product"], free_product_identity(M))
        worst["cos_product"] = max(worst["cos_product"],
                                   abs(cos_product(M) * 2.0**M - 1.0))
        for n in range(1, M + 1):
            got = appendix_pro(M, n)
            want = (-1.0) ** n / math.cos(math.pi * n / (2 * M + 1))
            worst["first_factors"] = max(worst["first_factors"], abs(got - want))
        n = int(rng.integers(-M, M + 1))
        for alpha in (0.0, *rng.uniform(-2.0, 2.0, size=2)):
            got = appendix_g(M, n, float(alpha))
            want = 4.0 * math.cos(alpha * (2 * M + 1)) ** 2
            worst["full_ring"] = max(worst["full_ring"], abs(got - want))
    for _ in range(10):
        n = int(rng.integers(1, 21))
        x = float(rng.uniform(-3.0, 3.0))
        worst["sine_product"] = max(worst["sine_product"], sine_product_residual(n, x))
    passed = all(v <= tol for v in worst.values())
    report = {"schema": "freecase-report/1", "M_max": args.m, "tol": tol,
              "seed": args.seed if args.seed is not None else 0,
              "max_residuals": worst, "passed": bool(passed)}
    _write_json(_out_dir(args) / "freecase_report.json", report)
    for name, val in worst.items():
        print(f"{name:>14s}: max residual {val:.3e}")
    return EXIT_OK if passed else EXIT_CONDITION


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lattice-spectra",
        description="Verification toolkit for spectra of discrete Schrödinger "
                    "chains with even potentials.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="JSON input document")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        p.add_argument("--tol", type=float, default=None, help="pass/fail tolerance")
        p.add_argument("--seed", type=int, default=None, help="seed for randomized checks")

    p = sub.add_parser("verify-product", help="cross-gap product identity for a diagonal")
    common(p)
    p.add_argument("--m", type=int, default=None, help="expected chain half-length")
    p.set_defaults(func=cmd_verify_product)

    p = sub.add_parser("recover", help="inverse recovery of b from two spectra")
    common(p)
    p.add_argument("--precision-bits", dest="precision_bits", type=int, default=None,
                   help="use extended precision with this many significand bits")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("scatter", help="Jost polynomial, conditions, phase table")
    common(p)
    p.add_argument("--grid", type=int, default=None, help="phase-table grid size")
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("constraint", help="continuum constraint residuals (both forms)")
    common(p)
    p.add_argument("--grid", type=int, default=None, help="quadrature grid size")
    p.set_defaults(func=cmd_constraint)

    p = sub.add_parser("converge", help="finite-M sums versus their large-M limits")
    common(p)
    p.add_argument("--m-list", dest="m_list", default=None,
                   help="comma-separated ascending chain half-lengths")
    p.add_argument("--grid", type=int, default=None, help="quadrature grid size")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("freecase", help="zero-potential closed forms up to --m")
    common(p, needs_input=False)
    p.add_argument("--m", type=int, default=None, help="largest M to verify")
    p.set_defaults(func=cmd_freecase)

    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    workers = 1
    env = os.environ.get(_THREADS_ENV)
    if env:
        try:
            workers = max(1, int(env))
        except ValueError:
            print(f"ignoring malformed {_THREADS_ENV}={env!r}", file=sys.stderr)
    args.workers = workers
    try:
        return args.func(args)
    except (InputFileError, ValueError, TypeError, IndexError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
