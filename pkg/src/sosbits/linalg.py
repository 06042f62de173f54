"""Exact rational linear algebra.

Matrices are lists of rows of :class:`Fraction` (ints are accepted on input).
Elimination is fraction-free: every row is scaled to a primitive integer row
and row operations are integer combinations followed by content removal, so
no rational arithmetic happens inside the elimination loop.  The reduced
echelon form is canonical (up to row scaling), which makes kernel bases
reproducible across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

Matrix = List[List[Fraction]]


def to_fractions(a: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in a]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(n: int, m: Optional[int] = None) -> Matrix:
    return [[Fraction(0)] * (n if m is None else m) for _ in range(n)]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)] if a else []


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def matvec(a: Matrix, v: Sequence) -> list:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def is_symmetric(a: Matrix) -> bool:
    n = len(a)
    return all(len(row) == n for row in a) and all(
        a[i][j] == a[j][i] for i in range(n) for j in range(i + 1, n)
    )


def frobenius(a: Matrix, b: Matrix) -> Fraction:
    """<A, B> = trace(A^T B)."""
    return sum((x * y for ra, rb in zip(a, b) for x, y in zip(ra, rb)), Fraction(0))


def trace(a: Matrix) -> Fraction:
    return sum((a[i][i] for i in range(len(a))), Fraction(0))


def congruence(p: Matrix, a: Matrix) -> Matrix:
    """P^T A P."""
    return matmul(transpose(p), matmul(a, p))


# -- LDL^T -------------------------------------------------------------------

@dataclass
class LDLResult:
    psd: bool
    pivots: List[Fraction] = field(default_factory=list)
    order: List[int] = field(default_factory=list)
    reason: Optional[str] = None

    def __bool__(self) -> bool:
        return self.psd


def ldlt(a: Sequence[Sequence]) -> LDLResult:
    """Exact LDL^T with symmetric (diagonal) pivoting, used as a PSD test.

    At each step the smallest-size positive diagonal entry is taken as the
    pivot.  A negative diagonal entry, or an all-zero diagonal with a nonzero
    off-diagonal entry left in the Schur complement, certifies the matrix is
    not PSD.
    """
    n = len(a)
    s = to_fractions(a)
    if not is_symmetric(s):
        raise ValueError("matrix is not symmetric")
    remaining = list(range(n))
    pivots: List[Fraction] = []
    order: List[int] = []
    while remaining:
        diag = [(i, s[i][i]) for i in remaining]
        neg = [i for i, v in diag if v < 0]
        if neg:
            i = neg[0]
            return LDLResult(False, pivots, order, f"negative pivot {s[i][i]} at index {i}")
        pos = [(i, v) for i, v in diag if v > 0]
        if not pos:
            for i in remaining:
                for j in remaining:
                    if s[i][j]:
                        return LDLResult(
                            False, pivots, order, f"zero pivot with nonzero entry at ({i}, {j})"
                        )
            break
        p, pv = min(pos, key=lambda t: (t[1].numerator.bit_length() + t[1].denominator.bit_length(), t[0]))
        remaining.remove(p)
        pivots.append(pv)
        order.append(p)
        row_p = s[p]
        for i in remaining:
            f = row_p[i] / pv
            if not f:
                continue
            row_i = s[i]
            for j in remaining:
                if row_p[j]:
                    row_i[j] -= f * row_p[j]
    return LDLResult(True, pivots, order)


def is_psd(a: Sequence[Sequence]) -> bool:
    return ldlt(a).psd


# -- fraction-free elimination ------------------------------------------------

SparseRow = Dict[int, int]


def _primitive(row: SparseRow) -> SparseRow:
    if not row:
        return row
    g = math.gcd(*row.values())
    if g > 1:
        return {c: v // g for c, v in row.items()}
    return row


def integer_row(values: Sequence, offset: int = 0) -> SparseRow:
    """Scale a rational row to a primitive integer row (sparse)."""
    fr = [(j + offset, Fraction(v)) for j, v in enumerate(values) if v]
    if not fr:
        return {}
    lcm = 1
    for _, v in fr:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    return _primitive({j: int(v * lcm) for j, v in fr})


def _eliminate(row: SparseRow, prow: SparseRow, col: int, pv: int) -> SparseRow:
    # integer combination s*row - t*prow that clears ``col``
    a = row[col]
    g = math.gcd(pv, a)
    s, t = pv // g, a // g
    if s < 0:
        s, t = -s, -t
    new = {c: v * s for c, v in row.items()} if s != 1 else dict(row)
    for c, v in prow.items():
        nv = new.get(c, 0) - t * v
        if nv:
            new[c] = nv
        else:
            new.pop(c, None)
    return _primitive(new)


@dataclass
class Echelon:
    """Reduced echelon form: ``rows[r]`` has pivot ``pivot_cols[r]``."""

    rows: List[SparseRow]
    pivot_cols: List[int]
    zero_rows: List[SparseRow]

    @property
    def rank(self) -> int:
        return len(self.pivot_cols)


def rref(rows: List[SparseRow], ncols: int) -> Echelon:
    """Fraction-free Gauss-Jordan on integer sparse rows.

    Only columns ``< ncols`` are pivoted on; further columns (augmented
    right-hand sides) are carried along.  The pivot row for each column is the
    sparsest candidate, which keeps fill-in low on Macaulay-type systems.
    """
    work = [_primitive(dict(r)) for r in rows if r]
    pivot_rows: List[SparseRow] = []
    pivot_cols: List[int] = []
    active = list(range(len(work)))
    for col in range(ncols):
        cand = [i for i in active if col in work[i]]
        if not cand:
            continue
        p = min(cand, key=lambda i: (len(work[i]), i))
        prow = work[p]
        pv = prow[col]
        for i in cand:
            if i != p:
                work[i] = _eliminate(work[i], prow, col, pv)
        for k, row in enumerate(pivot_rows):
            if col in row:
                pivot_rows[k] = _eliminate(row, prow, col, pv)
        active = [i for i in active if i != p and work[i]]
        pivot_rows.append(prow)
        pivot_cols.append(col)
    zero_rows = [work[i] for i in active if work[i]]
    return Echelon(pivot_rows, pivot_cols, zero_rows)


def matrix_rows(a: Sequence[Sequence]) -> List[SparseRow]:
    return [integer_row(row) for row in a]


def rank(a: Sequence[Sequence]) -> int:
    if not a:
        return 0
    return rref(matrix_rows(a), len(a[0])).rank


def nullspace(a: Sequence[Sequence], ncols: Optional[int] = None) -> List[List[int]]:
    """Primitive integer basis of {x : A x = 0}, one vector per free column.

    The vector for free column ``f`` has a positive entry at ``f`` and zeros at
    every other free column, so the basis is canonical.
    """
    if ncols is None:
        ncols = len(a[0]) if a else 0
    ech = rref(matrix_rows(a), ncols)
    pivot_set = set(ech.pivot_cols)
    basis = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        involved = [(r, c) for r, c in zip(ech.rows, ech.pivot_cols) if f in r]
        lcm = 1
        for r, c in involved:
            pv = abs(r[c])
            lcm = lcm * pv // math.gcd(lcm, pv)
        vec = [0] * ncols
        vec[f] = lcm
        for r, c in involved:
            vec[c] = -r[f] * lcm // r[c]
        g = math.gcd(*vec)
        basis.append([v // g for v in vec])
    return basis


def solve(a: Sequence[Sequence], rhs: Sequence[Sequence]) -> List[Optional[List[Fraction]]]:
    """Solve ``A x = b`` for each column ``b`` in ``rhs`` (given as a list of vectors).

    Returns the basic solution (free variables set to zero, so the support is
    at most rank(A)) or ``None`` when the system is inconsistent.
    """
    m = len(a)
    ncols = len(a[0]) if a else 0
    for b in rhs:
        if len(b) != m:
            raise ValueError("right-hand side has the wrong length")
    rows = []
    for i in range(m):
        rows.append(integer_row(list(a[i]) + [b[i] for b in rhs]))
    ech = rref(rows, ncols)
    out: List[Optional[List[Fraction]]] = []
    for j in range(len(rhs)):
        c = ncols + j
        if any(c in r for r in ech.zero_rows):
            out.append(None)
            continue
        x = [Fraction(0)] * ncols
        for r, pc in zip(ech.rows, ech.pivot_cols):
            if c in r:
                x[pc] = Fraction(r[c], r[pc])
        out.append(x)
    return out


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    cols = solve(a, [[Fraction(int(i == j)) for i in range(n)] for j in range(n)])
    if any(c is None for c in cols) or rank(a) < n:
        raise ValueError("matrix is singular")
    return transpose(cols)


def orthogonal_projector(vectors: Sequence[Sequence], n: int) -> Matrix:
    """Orthogonal projector onto span(vectors) as an exact rational matrix.

    Uses Gram-Schmidt without normalization (so all quantities stay rational):
    P = sum_u u u^T / (u^T u) over the orthogonalized vectors u.
    """
    ortho: List[List[Fraction]] = []
    for v in vectors:
        u = [Fraction(x) for x in v]
        for w in ortho:
            ww = sum(x * x for x in w)
            coef = sum(x * y for x, y in zip(u, w)) / ww
            u = [x - coef * y for x, y in zip(u, w)]
        if any(u):
            ortho.append(u)
    proj = zeros(n)
    for u in ortho:
        uu = sum(x * x for x in u)
        for i in range(n):
            if not u[i]:
                continue
            fi = u[i] / uu
            row = proj[i]
            for j in range(n):
                if u[j]:
                    row[j] += fi * u[j]
    return proj


# -- characteristic polynomial -------------------------------------------------

def charpoly(a: Sequence[Sequence]) -> List[Fraction]:
    """Coefficients ``c[0..n]`` of det(tI - A) = sum c[j] t^j (``c[n] == 1``).

    Similarity reduction to upper Hessenberg form followed by the standard
    three-term recurrence; O(n^3) exact rational operations.
    """
    h = to_fractions(a)
    n = len(h)
    for m in range(1, n - 1):
        i = next((i for i in range(m, n) if h[i][m - 1]), None)
        if i is None:
            continue
        if i != m:
            h[i], h[m] = h[m], h[i]
            for row in h:
                row[i], row[m] = row[m], row[i]
        t = h[m][m - 1]
        for j in range(m + 1, n):
            u = h[j][m - 1] / t
            if not u:
                continue
            rj, rm = h[j], h[m]
            for k in range(n):
                if rm[k]:
                    rj[k] -= u * rm[k]
            for row in h:
                if row[j]:
                    row[m] += u * row[j]
    # p[k] = charpoly of leading k x k block, as coefficient lists
    p: List[List[Fraction]] = [[Fraction(1)]]
    for k in range(1, n + 1):
        prev = p[k - 1]
        cur = [Fraction(0)] + prev  # t * p_{k-1}
        hkk = h[k - 1][k - 1]
        for j, c in enumerate(prev):
            cur[j] -= hkk * c
        prod = Fraction(1)
        for i in range(k - 1, 0, -1):
            prod *= h[i][i - 1]
            if not prod:
                break
            coef = h[i - 1][k - 1] * prod
            if coef:
                for j, c in enumerate(p[i - 1]):
                    cur[j] -= coef * c
        p.append(cur)
    return p[n]
