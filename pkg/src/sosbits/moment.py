"""Moment matrices, their kernels, and lower bounds on nonzero eigenvalues."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple

from . import linalg
from .linalg import Matrix
from .poly import Monomial, Polynomial, monomial_basis
from .systems import SolutionSet

CHARPOLY_MAX_DIM = 200


class EmptySolutionSetError(ValueError):
    pass


class NonBooleanError(ValueError):
    pass


@dataclass(frozen=True)
class MomentMatrix:
    """``entries[a][b]`` is the average of ``x^(basis[a] + basis[b])``.

    ``scale`` is a positive integer with ``scale * entries`` integral: ``|S|``
    for a Boolean solution set, a product of small integers for the sphere.
    ``points`` keeps the finite solution set the matrix was averaged over.
    """

    degree: int
    nvars: int
    basis: Tuple[Monomial, ...]
    entries: Matrix
    scale: int
    points: Optional[Tuple[Tuple[Fraction, ...], ...]] = None
    source: str = "finite"

    @property
    def size(self) -> int:
        return len(self.basis)

    def scaled(self) -> List[List[int]]:
        out = [[v * self.scale for v in row] for row in self.entries]
        if any(v.denominator != 1 for row in out for v in row):
            raise ValueError("scale does not clear denominators")
        return [[int(v) for v in row] for row in out]

    def quadratic_form(self, c: Sequence) -> Fraction:
        return sum(
            (ci * cj * self.entries[i][j] for i, ci in enumerate(c) if ci for j, cj in enumerate(c) if cj),
            Fraction(0),
        )


@dataclass(frozen=True)
class KernelBasis:
    basis: Tuple[Monomial, ...]
    vectors: Tuple[Tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.vectors)

    def polynomials(self, nvars: int) -> List[Polynomial]:
        return [Polynomial.from_vector(nvars, self.basis, v) for v in self.vectors]

    def coordinates(self, vec: Sequence) -> Optional[List[Fraction]]:
        """Coordinates of ``vec`` in this basis, or ``None`` if outside the span.

        Each basis vector is the only one nonzero at its own free column, so
        the coordinates are read off those columns and then checked.
        """
        coords = []
        total = [Fraction(0)] * len(self.basis)
        for v in self.vectors:
            f = next(i for i, x in enumerate(v) if x and _is_free_column(self.vectors, v, i))
            c = Fraction(vec[f]) / v[f]
            coords.append(c)
            if c:
                for i, x in enumerate(v):
                    if x:
                        total[i] += c * x
        if any(Fraction(a) != b for a, b in zip(vec, total)):
            return None
        return coords


def _is_free_column(vectors, v, i) -> bool:
    return all(w is v or not w[i] for w in vectors)


def _monomial_value(pt: Sequence, m: Monomial):
    val = 1
    for x, e in zip(pt, m):
        if e:
            if not x:
                return 0
            val *= x ** e
    return val


def moment_matrix(S: SolutionSet, d: int) -> MomentMatrix:
    """Exact uniform average of v(a) v(a)^T over the points of ``S``."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    if not S.points:
        raise EmptySolutionSetError("moment matrix of an empty solution set")
    nvars = len(S.points[0])
    basis = tuple(monomial_basis(nvars, d))
    integral = all(x.denominator == 1 for pt in S.points for x in pt)
    pts = [tuple(int(x) for x in pt) for pt in S.points] if integral else list(S.points)
    size = len(pts)
    cache = {}

    def moment(m: Monomial) -> Fraction:
        if m not in cache:
            cache[m] = Fraction(sum(_monomial_value(pt, m) for pt in pts), size)
        return cache[m]

    n = len(basis)
    entries = [[Fraction(0)] * n for _ in range(n)]
    for a in range(n):
        ma = basis[a]
        for b in range(a, n):
            v = moment(tuple(x + y for x, y in zip(ma, basis[b])))
            entries[a][b] = v
            entries[b][a] = v
    boolean = S.is_boolean
    return MomentMatrix(d, nvars, basis, entries, size if boolean else _denominator_lcm(entries),
                        tuple(S.points), "finite")


def _denominator_lcm(entries: Matrix) -> int:
    lcm = 1
    for row in entries:
        for v in row:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    return lcm


def evaluation_matrix(M: MomentMatrix) -> Matrix:
    """Rows ``v(a)`` for each point; ``M = V^T V / |S|``."""
    if M.points is None:
        raise ValueError("moment matrix has no point set")
    return [[Fraction(_monomial_value(pt, m)) for m in M.basis] for pt in M.points]


def kernel(M: MomentMatrix) -> KernelBasis:
    """Exact null space of ``M`` via fraction-free elimination.

    For a finite point set the kernel of ``M`` equals the kernel of the
    evaluation matrix ``V`` (same row space), which is eliminated instead
    because it is smaller and 0/1-valued; the reduced echelon form and hence
    the returned basis are identical either way.
    """
    rows = evaluation_matrix(M) if M.points is not None else M.entries
    vecs = linalg.nullspace(rows, len(M.basis))
    return KernelBasis(M.basis, tuple(tuple(v) for v in vecs))


def integer_eig_lower_bound(M_int: Sequence[Sequence[int]], B: int, N: int) -> Fraction:
    """``(B N)^-N``: a lower bound on |lambda| for every nonzero eigenvalue.

    Valid for any symmetric integer matrix of dimension at most ``N`` whose
    entries are bounded by ``B`` in absolute value.
    """
    n = len(M_int)
    if any(len(row) != n for row in M_int):
        raise ValueError("matrix is not square")
    if not linalg.is_symmetric(linalg.to_fractions(M_int)):
        raise ValueError("matrix is not symmetric")
    if any(Fraction(v).denominator != 1 for row in M_int for v in row):
        raise ValueError("matrix is not integral")
    if B < 1 or N < 1:
        raise ValueError("B and N must be positive")
    if n > N:
        raise ValueError(f"dimension {n} exceeds N={N}")
    if any(abs(v) > B for row in M_int for v in row):
        raise ValueError(f"entry exceeds bound B={B}")
    return Fraction(1, (B * N) ** N)


def charpoly_eig_bound(a: Sequence[Sequence]) -> Optional[Fraction]:
    """For a PSD matrix: e_r / e_(r-1) of its nonzero eigenvalues.

    That ratio equals 1 / sum(1/mu) over the nonzero eigenvalues mu, so it
    never exceeds the smallest one.  Read off the two lowest nonzero
    characteristic-polynomial coefficients.  ``None`` for the zero matrix.
    """
    c = linalg.charpoly(a)
    j = next(i for i, v in enumerate(c) if v)
    if j == len(c) - 1:
        return None
    return abs(c[j]) / abs(c[j + 1])


class SpectralRichness(NamedTuple):
    delta: Fraction
    sharp_bound: Optional[Fraction]
    B: int
    N: int
    scale: int


def spectral_bounds(M: MomentMatrix) -> SpectralRichness:
    """Integer-scaling bound on ``scale * M`` plus the sharper characteristic-polynomial bound."""
    m_int = M.scaled()
    N = len(m_int)
    B = max(abs(v) for row in m_int for v in row)
    delta = integer_eig_lower_bound(m_int, B, N) / M.scale
    sharp = None
    if M.points is not None and len(M.points) < N:
        # V V^T has the same nonzero spectrum as V^T V = |S| M
        V = [[int(x) for x in row] for row in evaluation_matrix(M)]
        small = [[sum(a * b for a, b in zip(r1, r2)) for r2 in V] for r1 in V]
        factor = Fraction(len(M.points), M.scale)
    else:
        small = m_int
        factor = Fraction(1)
    if len(small) <= CHARPOLY_MAX_DIM:
        bound = charpoly_eig_bound(small)
        if bound is not None:
            sharp = bound / factor / M.scale
    return SpectralRichness(delta, sharp, B, N, M.scale)


def spectral_richness(S: SolutionSet, d: int) -> SpectralRichness:
    if not S.points:
        raise EmptySolutionSetError("empty solution set")
    if not S.is_boolean:
        raise NonBooleanError("integer scaling argument needs S inside {0,1}^n")
    return spectral_bounds(moment_matrix(S, d))


# -- sphere --------------------------------------------------------------------

def _double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def sphere_average(n: int, m: Monomial) -> Fraction:
    """Average of ``x^m`` over the unit sphere in R^n.

    Zero if any exponent is odd; otherwise, with ``m = 2a``,
    ``prod (2a_i - 1)!! / prod_{j < |a|} (n + 2j)``.  This is the Gamma-function
    monomial integral divided by the sphere's surface area.
    """
    if any(e % 2 for e in m):
        return Fraction(0)
    half = [e // 2 for e in m]
    num = 1
    for a in half:
        num *= _double_factorial(2 * a - 1)
    den = 1
    for j in range(sum(half)):
        den *= n + 2 * j
    return Fraction(num, den)


def sphere_scale(n: int, d: int) -> int:
    """prod_{j<d} (n + 2j): clears every denominator of the degree-d sphere moment matrix."""
    out = 1
    for j in range(d):
        out *= n + 2 * j
    return out


def sphere_moment_matrix(n: int, d: int) -> MomentMatrix:
    if n < 1 or d < 0:
        raise ValueError("need n >= 1 and d >= 0")
    basis = tuple(monomial_basis(n, d))
    size = len(basis)
    cache = {}
    entries = [[Fraction(0)] * size for _ in range(size)]
    for a in range(size):
        for b in range(a, size):
            m = tuple(x + y for x, y in zip(basis[a], basis[b]))
            if m not in cache:
                cache[m] = sphere_average(n, m)
            entries[a][b] = entries[b][a] = cache[m]
    return MomentMatrix(d, n, basis, entries, sphere_scale(n, d), None, "sphere")
