"""Command-line driver.

Exit codes: 0 success, 2 verification failure, 3 richness failure,
4 parameter outside a guard, 5 I/O or format error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import List, Optional, Sequence

from . import counterexample as cx
from .certificate import SoSCertificate, cert_stats, verify
from .moment import kernel, moment_matrix, spectral_bounds, sphere_moment_matrix
from .poly import ceil_log2, rational_bits, rational_to_json
from .richness import RichnessReport, richness_report
from .rewrite import RewriteError, rewrite_bounded
from .systems import (
    SPHERE,
    SYSTEMS,
    ConstraintSystem,
    NotEnumerableError,
    ParameterError,
    enumerate_solutions,
    make_system,
)

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_RICHNESS = 3
EXIT_PARAMETER = 4
EXIT_IO = 5


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- I/O helpers ----------------------------------------------------------------

def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc}") from exc


def read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_IO, f"{path} is not valid JSON: {exc}") from exc


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    write_text(path, buf.getvalue())


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(EXIT_PARAMETER, f"not a rational number: {text!r}") from exc


def parse_range(text: str) -> List[int]:
    """``"3"``, ``"1..5"`` or ``"1,2,4"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(t) for t in text.split(",")]
    except ValueError as exc:
        raise CliError(EXIT_PARAMETER, f"bad integer range {text!r}") from exc


def parse_edges(text: Optional[str]):
    """``"0-1,1-2"`` (0-based vertices)."""
    if not text:
        return ()
    try:
        return tuple(tuple(int(v) for v in pair.split("-")) for pair in text.split(","))
    except ValueError as exc:
        raise CliError(EXIT_PARAMETER, f"bad edge list {text!r}") from exc


def load_system(args) -> ConstraintSystem:
    """A registry name with ``--n`` etc., or a path to a system JSON file."""
    name = args.system
    if name is None:
        raise CliError(EXIT_PARAMETER, "--system is required")
    if name.endswith(".json") or os.path.exists(name):
        try:
            return ConstraintSystem.from_json(read_json(name))
        except (KeyError, TypeError, ValueError) as exc:
            raise CliError(EXIT_IO, f"{name} is not a system file: {exc}") from exc
    if name not in SYSTEMS:
        raise CliError(EXIT_PARAMETER, f"unknown system {name!r}; choose from {sorted(SYSTEMS)}")
    if args.n is None:
        raise CliError(EXIT_PARAMETER, "--n is required for registry systems")
    eps = parse_rational(args.eps) if args.eps is not None else None
    return make_system(name, args.n, k=args.k, eps=eps, edges=parse_edges(getattr(args, "edges", None)))


def load_certificate(path: str) -> SoSCertificate:
    try:
        return SoSCertificate.from_json(read_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_IO, f"{path} is not a certificate file: {exc}") from exc


def matrix_json(M) -> dict:
    return {
        "degree": M.degree,
        "dimension": M.size,
        "basis": [list(m) for m in M.basis],
        "entries": [[rational_to_json(v) for v in row] for row in M.entries],
        "scale": M.scale,
        "source": M.source,
    }


# -- commands -------------------------------------------------------------------

def cmd_system(args) -> int:
    sys_ = load_system(args)
    text = dumps(sys_.to_json())
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_moment(args) -> int:
    sys_ = load_system(args)
    if sys_.solution_kind == SPHERE:
        M = sphere_moment_matrix(sys_.nvars, args.degree)
    else:
        M = moment_matrix(enumerate_solutions(sys_), args.degree)
    out = matrix_json(M)
    kern = kernel(M)
    bounds = spectral_bounds(M)
    out["system"] = sys_.label
    out["kernel"] = [list(v) for v in kern.vectors]
    out["delta"] = rational_to_json(bounds.delta)
    out["sharp_bound"] = None if bounds.sharp_bound is None else rational_to_json(bounds.sharp_bound)
    text = dumps(out)
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    print(f"{sys_.label}: moment matrix {M.size}x{M.size}, kernel dimension {len(kern)}", file=sys.stderr)
    return EXIT_OK


def cmd_richness(args) -> int:
    sys_ = load_system(args)
    k = args.k_completeness if args.k_completeness is not None else args.degree
    report = richness_report(sys_, None, args.degree, k)
    if args.report:
        write_text(args.report, dumps(report.to_json()))
    verdict = "rich" if report.rich_verdict else "not rich"
    delta_bits = ceil_log2(1 / report.delta) if report.delta > 0 else None
    print(f"{sys_.label}: d={report.d} k={report.k} log2(1/delta)<={delta_bits} "
          f"complete={report.complete} robust={report.robust} -> {verdict}")
    return EXIT_OK if report.rich_verdict else EXIT_RICHNESS


def cmd_verify(args) -> int:
    sys_ = load_system(args)
    cert = load_certificate(args.cert)
    try:
        v = verify(cert, sys_)
    except ValueError as exc:
        raise CliError(EXIT_VERIFY, f"malformed certificate: {exc}") from exc
    if v.ok:
        st = cert_stats(cert)
        print(f"certificate verifies (degree {cert.degree}, max |coeff| {st.max_abs_coeff}, {st.bit_size} bits)")
        return EXIT_OK
    residue = str(v.residue)
    if len(residue) > 200:
        residue = residue[:200] + "..."
    print(f"certificate FAILS: {v.reason}; residue has {len(v.residue)} terms: {residue}")
    return EXIT_VERIFY


def cmd_rewrite(args) -> int:
    sys_ = load_system(args)
    cert = load_certificate(args.cert)
    try:
        report = RichnessReport.from_json(read_json(args.richness))
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_IO, f"{args.richness} is not a richness report: {exc}") from exc
    if not report.rich_verdict:
        print(f"{report.label} is not rich; cannot rewrite")
        return EXIT_RICHNESS
    S = enumerate_solutions(sys_)
    try:
        outcome = rewrite_bounded(cert, sys_, S, report)
    except RewriteError as exc:
        print(f"rewrite failed: {exc}")
        return EXIT_VERIFY
    if args.out:
        write_text(args.out, dumps(outcome.cert_out.to_json()))
    if args.report:
        rows = [(p.name, p.max_coeff_num_bits, p.stats.bit_size, p.degree) for p in outcome.phases]
        write_csv(args.report, ("phase", "max_coeff_num_bits", "total_bits", "degree"), rows)
    print(f"rewritten: max |coeff| {outcome.stats_before.max_abs_coeff} -> {outcome.stats_after.max_abs_coeff}, "
          f"bits {outcome.stats_before.bit_size} -> {outcome.stats_after.bit_size} "
          f"(bound {outcome.theoretical_bound_bits})")
    return EXIT_OK


def cmd_counterexample(args) -> int:
    if args.n is None or args.eps is None:
        raise CliError(EXIT_PARAMETER, "--n and --eps are required")
    eps = parse_rational(args.eps)
    n, d = args.n, args.degree
    if args.k is None:
        cert = cx.chain_certificate(n, eps)
        sys_ = cx.chain(n, eps)
        dual = cx.phi(n, eps, max(d, cert.degree))
        audit = cx.phi_audit(n, eps, max(d, 2))
        extra = {"phi_audit_ok": audit.ok, "sharp_aggregate_holds": audit.sharp_aggregate_holds,
                 "bullet_aggregate_holds": audit.bullet_aggregate_holds}
    else:
        cert = cx.boolean_chain_certificate(n, args.k, eps)
        sys_ = cx.boolean_chain(n, args.k, eps)
        dual = cx.product_functional(n, args.k, eps, max(d, cert.degree))
        extra = {"variables": sys_.nvars, "blocks": n, "block_size": 2 * args.k}
    v = verify(cert, sys_)
    if not v.ok:
        print(f"explicit certificate fails: {v.reason}")
        return EXIT_VERIFY
    audit_dual = cx.audit_certificate_against_dual(cert, dual, sys_)
    lower = cx.coefficient_lower_bound(n, args.k, eps, max(d, 2))
    st = cert_stats(cert)
    if args.emit:
        write_text(args.emit, dumps(cert.to_json()))
    if args.table:
        write_csv(args.table, ("n", "eps", "degree", "upper_bits", "lower_bits"),
                  [(n, str(eps), d, rational_bits(st.max_abs_coeff), rational_bits(lower))])
    summary = {
        "system": sys_.label,
        "max_abs_coeff": rational_to_json(st.max_abs_coeff),
        "lower_bound": rational_to_json(lower),
        "dual_implied_bound": rational_to_json(audit_dual.implied_bound),
        "dual_bound_holds": audit_dual.holds,
        **extra,
    }
    if args.report:
        write_text(args.report, dumps(summary))
    print(f"{sys_.label}: max |coeff| {st.max_abs_coeff} ({rational_bits(st.max_abs_coeff)} bits), "
          f"lower bound {lower} ({rational_bits(lower)} bits), dual-implied {audit_dual.implied_bound}")
    return EXIT_OK


def _growth_cell(cell):
    n, eps, d = cell
    row = cx.growth_row(n, eps, d)
    return (row.n, str(row.eps), row.degree, row.upper_bits, row.lower_bits)


def cmd_growth(args) -> int:
    ns = parse_range(args.n_range if args.n_range is not None else "1..5")
    eps = parse_rational(args.eps if args.eps is not None else "1/4")
    d = args.degree
    cells = [(n, eps, d) for n in ns]
    for n, _, _ in cells:
        if n < 1:
            raise CliError(EXIT_PARAMETER, f"n must be positive, got {n}")
    if args.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_growth_cell, cells))
    else:
        rows = [_growth_cell(c) for c in cells]
    header = ("n", "eps", "degree", "upper_bits", "lower_bits")
    if args.out:
        write_csv(args.out, header, rows)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def _system_flags(p: argparse.ArgumentParser, block_flag: str = "--k") -> None:
    p.add_argument("--system", help="registry name or system JSON file")
    p.add_argument("--n", type=int)
    p.add_argument(block_flag, dest="k", type=int, help="block half-size for boolean_chain")
    p.add_argument("--eps", help="rational epsilon, e.g. 1/4")
    p.add_argument("--edges", help="max_clique edges, e.g. 0-1,1-2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sosbits", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("system", help="write a registry system as JSON")
    _system_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_system)

    p = sub.add_parser("moment", help="moment matrix, kernel and eigenvalue bounds")
    _system_flags(p)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("richness", help="richness report")
    _system_flags(p, block_flag="--block-k")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--k", dest="k_completeness", type=int, help="derivation degree (default: --degree)")
    p.add_argument("--report")
    p.set_defaults(func=cmd_richness)

    p = sub.add_parser("verify-cert", help="verify a certificate")
    _system_flags(p)
    p.add_argument("--cert", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rewrite-cert", help="rewrite a certificate with bounded coefficients")
    _system_flags(p)
    p.add_argument("--cert", required=True)
    p.add_argument("--richness", required=True)
    p.add_argument("--out")
    p.add_argument("--report", help="CSV of per-phase coefficient statistics")
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("counterexample", help="explicit chain certificate and dual lower bound")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int, help="block half-size; omit for the plain chain")
    p.add_argument("--eps")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--emit", help="certificate JSON output")
    p.add_argument("--table", help="growth CSV output")
    p.add_argument("--report", help="summary JSON output")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("growth-sweep", help="coefficient growth table over n")
    p.add_argument("--n", dest="n_range", help="range such as 1..5")
    p.add_argument("--eps")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_growth)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ParameterError, NotEnumerableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
