"""Sum-of-squares certificates in Gram form and their exact verification.

A certificate proves ``target - shift >= 0`` on the constrained set via

    target - shift = <C, v v^T> + sum_i <D_i, v v^T> q_i + sum_j lam_j p_j

with ``C`` and every ``D_i`` positive semidefinite and ``v`` the monomial
vector over ``basis``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import linalg
from .linalg import Matrix
from .poly import (
    CoefficientStats,
    Monomial,
    Polynomial,
    coeff_stats,
    monomial_basis,
    poly_from_json,
    poly_to_json,
    rational_from_json,
    rational_to_json,
)
from .systems import ConstraintSystem


class CertificateShapeError(ValueError):
    pass


@dataclass(frozen=True)
class SoSCertificate:
    nvars: int
    degree: int
    basis: Tuple[Monomial, ...]
    gram_C: Matrix
    gram_D: Tuple[Matrix, ...]
    eq_multipliers: Tuple[Polynomial, ...]
    target: Polynomial
    objective_shift: Fraction = Fraction(0)

    @classmethod
    def create(cls, nvars: int, degree: int, gram_C, eq_multipliers: Sequence[Polynomial],
               target: Polynomial, gram_D: Sequence = (), basis: Optional[Sequence[Monomial]] = None,
               objective_shift=0) -> "SoSCertificate":
        """Normalize inputs; the default basis is all monomials of degree ``<= ceil(d/2)``."""
        if basis is None:
            basis = monomial_basis(nvars, -(-degree // 2))
        return cls(
            nvars, degree, tuple(tuple(m) for m in basis), linalg.to_fractions(gram_C),
            tuple(linalg.to_fractions(D) for D in gram_D), tuple(eq_multipliers), target,
            Fraction(objective_shift),
        )

    def replace(self, **changes) -> "SoSCertificate":
        fields = dict(
            nvars=self.nvars, degree=self.degree, basis=self.basis, gram_C=self.gram_C,
            gram_D=self.gram_D, eq_multipliers=self.eq_multipliers, target=self.target,
            objective_shift=self.objective_shift,
        )
        fields.update(changes)
        return SoSCertificate(**fields)

    def to_json(self) -> dict:
        mat = lambda a: [[rational_to_json(v) for v in row] for row in a]
        return {
            "nvars": self.nvars,
            "degree": self.degree,
            "basis": [list(m) for m in self.basis],
            "gram_C": mat(self.gram_C),
            "gram_D": [mat(D) for D in self.gram_D],
            "eq_multipliers": [poly_to_json(q) for q in self.eq_multipliers],
            "target": poly_to_json(self.target),
            "objective_shift": rational_to_json(self.objective_shift),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SoSCertificate":
        mat = lambda a: [[rational_from_json(v) for v in row] for row in a]
        return cls(
            int(obj["nvars"]),
            int(obj["degree"]),
            tuple(tuple(int(e) for e in m) for m in obj["basis"]),
            mat(obj["gram_C"]),
            tuple(mat(D) for D in obj.get("gram_D", [])),
            tuple(poly_from_json(q) for q in obj["eq_multipliers"]),
            poly_from_json(obj["target"]),
            rational_from_json(obj.get("objective_shift", {"num": "0", "den": "1"})),
        )


def gram_polynomial(G: Matrix, basis: Sequence[Monomial], nvars: int) -> Polynomial:
    """``<G, v v^T>`` as a polynomial."""
    terms = {}
    for a, row in enumerate(G):
        ma = basis[a]
        for b, g in enumerate(row):
            if g:
                m = tuple(x + y for x, y in zip(ma, basis[b]))
                terms[m] = terms.get(m, 0) + g
    return Polynomial(nvars, terms)


def gram_from_squares(squares: Sequence[Polynomial], basis: Sequence[Monomial]) -> Matrix:
    """Gram matrix of ``sum h^2``: ``sum c c^T`` with ``c`` the coefficient vector of each ``h``."""
    n = len(basis)
    G = linalg.zeros(n)
    for h in squares:
        c = h.to_vector(basis)
        for i in range(n):
            if c[i]:
                for j in range(n):
                    if c[j]:
                        G[i][j] += c[i] * c[j]
    return G


@dataclass
class Verdict:
    ok: bool
    residue: Polynomial
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _deg(p: Polynomial) -> int:
    d = p.degree()
    return -1 if d == float("-inf") else int(d)


def _check_shape(cert: SoSCertificate, sys: ConstraintSystem) -> None:
    n = len(cert.basis)
    if cert.nvars != sys.nvars:
        raise CertificateShapeError(f"certificate has {cert.nvars} variables, system has {sys.nvars}")
    if len(cert.eq_multipliers) != len(sys.equalities):
        raise CertificateShapeError(
            f"{len(cert.eq_multipliers)} multipliers for {len(sys.equalities)} equalities"
        )
    if len(cert.gram_D) != len(sys.inequalities):
        raise CertificateShapeError(f"{len(cert.gram_D)} Gram blocks for {len(sys.inequalities)} inequalities")
    for name, G in [("C", cert.gram_C)] + [(f"D{i}", D) for i, D in enumerate(cert.gram_D)]:
        if len(G) != n or any(len(row) != n for row in G):
            raise CertificateShapeError(f"Gram block {name} is not {n}x{n}")
        if not linalg.is_symmetric(G):
            raise CertificateShapeError(f"Gram block {name} is not symmetric")
    if any(len(m) != cert.nvars for m in cert.basis):
        raise CertificateShapeError("basis monomials have the wrong length")
    for q in cert.eq_multipliers:
        if q.nvars != cert.nvars:
            raise CertificateShapeError("multiplier with the wrong variable count")


def certificate_rhs(cert: SoSCertificate, sys: ConstraintSystem) -> Polynomial:
    """``<C, v v^T> + sum <D_i, v v^T> q_i + sum lam_j p_j``."""
    out = gram_polynomial(cert.gram_C, cert.basis, cert.nvars)
    for D, q in zip(cert.gram_D, sys.inequalities):
        out = out + gram_polynomial(D, cert.basis, cert.nvars) * q
    for lam, p in zip(cert.eq_multipliers, sys.equalities):
        if lam:
            out = out + lam * p
    return out


def verify(cert: SoSCertificate, sys: ConstraintSystem) -> Verdict:
    """Exact check of PSD-ness, degree bounds and the polynomial identity."""
    _check_shape(cert, sys)
    residue = cert.target - cert.objective_shift - certificate_rhs(cert, sys)
    blocks = [("C", cert.gram_C, None)] + [
        (f"D{i}", D, q) for i, (D, q) in enumerate(zip(cert.gram_D, sys.inequalities))
    ]
    for name, G, q in blocks:
        res = linalg.ldlt(G)
        if not res.psd:
            return Verdict(False, residue, f"Gram block {name} is not PSD: {res.reason}")
        sq = gram_polynomial(G, cert.basis, cert.nvars)
        deg = _deg(sq * q) if q is not None else _deg(sq)
        if deg > cert.degree:
            return Verdict(False, residue, f"Gram block {name} term has degree {deg} > {cert.degree}")
    for j, (lam, p) in enumerate(zip(cert.eq_multipliers, sys.equalities)):
        if lam and _deg(lam * p) > cert.degree:
            return Verdict(False, residue, f"multiplier {j} term has degree {_deg(lam * p)} > {cert.degree}")
    if not residue.is_zero():
        return Verdict(False, residue, "identity does not hold")
    return Verdict(True, residue)


def cert_stats(cert: SoSCertificate) -> CoefficientStats:
    """Coefficient norm and bit size over every Gram entry and multiplier coefficient."""
    values: List[Fraction] = [v for row in cert.gram_C for v in row]
    for D in cert.gram_D:
        values.extend(v for row in D for v in row)
    out = CoefficientStats.of_values(values)
    for q in cert.eq_multipliers:
        out = out.merge(coeff_stats(q))
    return out


def zero_certificate(sys: ConstraintSystem, degree: int = 0) -> SoSCertificate:
    n = len(monomial_basis(sys.nvars, -(-degree // 2)))
    return SoSCertificate.create(
        sys.nvars, degree, linalg.zeros(n), [Polynomial.zero(sys.nvars)] * len(sys.equalities),
        Polynomial.zero(sys.nvars), gram_D=[linalg.zeros(n) for _ in sys.inequalities],
    )


def random_certificate(sys: ConstraintSystem, degree: int, rng, squares: int = 3, spread: int = 3) -> SoSCertificate:
    """A verifying certificate with small random data; the target is whatever it proves.

    Squares are random integer polynomials over the half-degree basis and each
    equality gets a random multiplier of admissible degree (inequalities get zero blocks).
    """
    basis = monomial_basis(sys.nvars, degree // 2)
    hs = [
        Polynomial.from_vector(sys.nvars, basis, [rng.randint(-spread, spread) for _ in basis])
        for _ in range(squares)
    ]
    C = gram_from_squares(hs, basis)
    lam = []
    for p in sys.equalities:
        room = degree - _deg(p)
        if room < 0:
            lam.append(Polynomial.zero(sys.nvars))
            continue
        mb = monomial_basis(sys.nvars, room)
        lam.append(Polynomial.from_vector(sys.nvars, mb, [Fraction(rng.randint(-spread, spread), rng.randint(1, 3)) for _ in mb]))
    n = len(basis)
    cert = SoSCertificate.create(sys.nvars, degree, C, lam, Polynomial.zero(sys.nvars),
                                 gram_D=[linalg.zeros(n) for _ in sys.inequalities], basis=basis)
    return cert.replace(target=certificate_rhs(cert, sys))
