"""Rewrite a certificate over a rich system into one with bounded coefficients.

Steps: project every Gram block away from the kernel of the moment matrix
(``X -> P X P`` with ``P = I - Pi``), which changes the certified polynomial
only by a polynomial vanishing on the solutions; absorb that difference into
the equality multipliers through the stored completeness derivations; then
re-solve the multipliers from scratch as a basic solution of the exact linear
system, which is what keeps their coefficients small.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .certificate import SoSCertificate, cert_stats, gram_polynomial, verify
from .moment import kernel, moment_matrix, spectral_bounds
from .poly import (
    CoefficientStats,
    Polynomial,
    ceil_log2,
    monomial_basis,
    norm,
    rational_bits,
)
from .richness import Derivation, RichnessReport, derive_in_degree
from .systems import ConstraintSystem, SolutionSet

BOUND_CONSTANT = 32


class RewriteError(ValueError):
    pass


@dataclass
class Phase:
    name: str
    stats: CoefficientStats
    degree: int

    @property
    def max_coeff_num_bits(self) -> int:
        return abs(self.stats.max_abs_coeff.numerator).bit_length()


@dataclass
class RewriteOutcome:
    cert_out: SoSCertificate
    stats_before: CoefficientStats
    stats_after: CoefficientStats
    theoretical_bound_bits: int
    absorbed: SoSCertificate
    kernel_rank: int
    trace_ok: bool
    averaging_ok: bool
    phases: List[Phase] = field(default_factory=list)


def _deg(p: Polynomial) -> int:
    d = p.degree()
    return -1 if d == float("-inf") else int(d)


def basis_kernel(basis: Sequence[tuple], S: SolutionSet) -> List[List[int]]:
    """Kernel of the moment matrix over ``basis``: vectors ``c`` with ``c . v(a) = 0`` on ``S``."""
    rows = []
    for pt in S.points:
        row = []
        for m in basis:
            val = Fraction(1)
            for x, e in zip(pt, m):
                if e:
                    val *= x ** e
            row.append(val)
        rows.append(row)
    return linalg.nullspace(rows, len(basis))


def _complement_projector(kern: Sequence[Sequence[int]], n: int) -> linalg.Matrix:
    pi = linalg.orthogonal_projector(kern, n)
    return [[Fraction(int(i == j)) - pi[i][j] for j in range(n)] for i in range(n)]


def _solve_multipliers(sys: ConstraintSystem, residual: Polynomial, degrees: Sequence[int]) -> Tuple[int, Derivation]:
    for k in degrees:
        found = derive_in_degree(sys, [residual], k)[0]
        if found is not None:
            return k, found
    raise RewriteError(f"residual identity has no solution at degrees {list(degrees)}")


def _check_report(report: RichnessReport, sys: ConstraintSystem, S: SolutionSet, cert: SoSCertificate) -> None:
    if not report.rich_verdict:
        raise RewriteError(f"richness report for {report.label} is not rich")
    if report.d < cert.degree:
        raise RewriteError(f"report degree {report.d} is below certificate degree {cert.degree}")
    if cert.degree > report.k:
        raise RewriteError(f"certificate degree {cert.degree} exceeds report k={report.k}")
    fresh = kernel(moment_matrix(S, report.d))
    if fresh.basis != report.kernel.basis or fresh.vectors != report.kernel.vectors:
        raise RewriteError("richness report is stale: kernel does not match the solution set")
    if len(report.witnesses) != len(report.kernel):
        raise RewriteError("richness report lacks a witness for every kernel polynomial")
    for w, p in zip(report.witnesses, report.kernel.polynomials(sys.nvars)):
        if w.target != p or not w.verify(sys.equalities):
            raise RewriteError("richness witness does not derive its kernel polynomial")
        if w.degree > report.k:
            raise RewriteError(f"witness degree {w.degree} exceeds k={report.k}")


def _average(p: Polynomial, S: SolutionSet) -> Fraction:
    return sum((p.evaluate(pt) for pt in S.points), Fraction(0)) / len(S.points)


def rewrite_bounded(cert: SoSCertificate, sys: ConstraintSystem, S: SolutionSet,
                    report: RichnessReport, s_norm: Optional[Fraction] = None) -> RewriteOutcome:
    """Bounded-coefficient certificate for the same target over a rich solution set."""
    v = verify(cert, sys)
    if not v.ok:
        raise RewriteError(f"input certificate does not verify: {v.reason}")
    _check_report(report, sys, S, cert)
    nv = sys.nvars
    stats_before = cert_stats(cert)
    phases = [Phase("input", stats_before, cert.degree)]

    # (1)-(2) projection of every Gram block onto the complement of the kernel
    kern = basis_kernel(cert.basis, S)
    P = _complement_projector(kern, len(cert.basis))
    C2 = linalg.congruence(P, cert.gram_C)
    D2 = tuple(linalg.congruence(P, D) for D in cert.gram_D)

    # (3) the dropped part vanishes on S, so it is a kernel combination with known derivations
    dropped = gram_polynomial(cert.gram_C, cert.basis, nv) - gram_polynomial(C2, cert.basis, nv)
    for D, Dp, q in zip(cert.gram_D, D2, sys.inequalities):
        dropped = dropped + (gram_polynomial(D, cert.basis, nv) - gram_polynomial(Dp, cert.basis, nv)) * q
    if _deg(dropped) > report.d:
        raise RewriteError(f"projected difference has degree {_deg(dropped)} > {report.d}")
    coords = report.kernel.coordinates(dropped.to_vector(report.kernel.basis))
    if coords is None:
        raise RewriteError("projected difference is not in the kernel span; solution set mismatch")
    lam = list(cert.eq_multipliers)
    for c, w in zip(coords, report.witnesses):
        if c:
            for i, q in w.multipliers:
                lam[i] = lam[i] + q * c
    absorbed = cert.replace(gram_C=C2, gram_D=D2, eq_multipliers=tuple(lam),
                            degree=max(cert.degree, max((w.degree for w in report.witnesses), default=0)))
    va = verify(absorbed, sys)
    if not va.ok:
        raise RewriteError(f"absorbed certificate does not verify: {va.reason}")
    phases.append(Phase("absorbed", cert_stats(absorbed), absorbed.degree))

    # (4) re-solve the multipliers as a basic solution
    residual = cert.target - cert.objective_shift - gram_polynomial(C2, cert.basis, nv)
    for Dp, q in zip(D2, sys.inequalities):
        residual = residual - gram_polynomial(Dp, cert.basis, nv) * q
    degrees = sorted({cert.degree, report.k})
    k_used, der = _solve_multipliers(sys, residual, degrees)
    new_lam = [der.multiplier(i) for i in range(len(sys.equalities))]
    out = cert.replace(gram_C=C2, gram_D=D2, eq_multipliers=tuple(new_lam), degree=k_used)
    vo = verify(out, sys)
    if not vo.ok:
        raise RewriteError(f"rewritten certificate does not verify: {vo.reason}")
    stats_after = cert_stats(out)
    phases.append(Phase("output", stats_after, out.degree))

    # (5) quantitative checks: averaging identity and trace bound
    mean = _average(cert.target - cert.objective_shift, S)
    gram_mean = _average(gram_polynomial(C2, cert.basis, nv), S)
    ineq_means = [_average(gram_polynomial(Dp, cert.basis, nv) * q, S) for Dp, q in zip(D2, sys.inequalities)]
    averaging_ok = mean == gram_mean + sum(ineq_means) and gram_mean >= 0 and all(x >= 0 for x in ineq_means)
    h = max(sum(m) for m in cert.basis)
    if tuple(cert.basis) == tuple(monomial_basis(nv, h)):
        delta_h = spectral_bounds(moment_matrix(S, h)).delta
        trace_ok = delta_h * linalg.trace(C2) <= mean
    else:
        trace_ok = True
    bound = theoretical_bound(report, sys, cert.target, s_norm if s_norm is not None else S.norm_bound)
    return RewriteOutcome(out, stats_before, stats_after, bound, absorbed, len(kern), trace_ok, averaging_ok, phases)


def theoretical_bound(report: RichnessReport, sys: ConstraintSystem, target: Polynomial,
                      s_norm: Fraction = Fraction(1), c0: int = BOUND_CONSTANT) -> int:
    """Explicit instance of the bit bound ``poly(n^k, log 1/delta, log 1/eps)``.

    ``c0 * (n^k + L(1/delta) + L(1/eps) + b(||r||) + b(||S||) + b(||P||) n^k)``
    with ``L`` the ceiling log2 clamped at 0 and ``b`` the rational bit count.
    """
    if not report.rich_verdict:
        raise RewriteError("theoretical bound needs a rich report")
    n, k = sys.nvars, report.k
    nk = n ** k
    log = lambda q: max(0, ceil_log2(q)) if q > 0 else 0
    eps = report.epsilon if report.epsilon is not None else Fraction(1)
    return c0 * (
        nk
        + log(1 / report.delta)
        + log(1 / eps)
        + rational_bits(norm(target))
        + rational_bits(Fraction(s_norm))
        + rational_bits(sys.eq_stats.max_abs_coeff) * nk
    )


def inflate_certificate(cert: SoSCertificate, sys: ConstraintSystem, u: Sequence, witness: Derivation,
                        t) -> SoSCertificate:
    """Add ``t u u^T`` to the Gram matrix and compensate in the multipliers.

    ``u`` is a coefficient vector over ``cert.basis`` whose polynomial ``u(x)``
    has ``witness`` as a derivation; then ``t u(x)^2 = sum (t u(x) w_i) p_i``.
    """
    t = Fraction(t)
    n = len(cert.basis)
    upoly = Polynomial.from_vector(cert.nvars, cert.basis, u)
    if witness.target != upoly:
        raise ValueError("witness does not derive u")
    C = [[cert.gram_C[i][j] + t * Fraction(u[i]) * Fraction(u[j]) for j in range(n)] for i in range(n)]
    lam = list(cert.eq_multipliers)
    for i, w in witness.multipliers:
        lam[i] = lam[i] - upoly * w * t
    degree = max(cert.degree, max(_deg(l * p) for l, p in zip(lam, sys.equalities)))
    return cert.replace(gram_C=C, eq_multipliers=tuple(lam), degree=degree)
