"""Richness audits: spectral bound, completeness, robustness, and explicit derivations.

A solution set is rich at degree ``d`` when the nonzero eigenvalues of its
moment matrix are bounded below, every kernel polynomial has a low-degree
derivation from the equalities, and every inequality has slack on every
solution.  Besides the generic checks this module builds derivations by hand
for Max-Bisection (symmetrization over transpositions), the unit sphere
(iterated low-degree absorption) and Max-Clique (non-edge elimination).
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from . import linalg
from .moment import (
    KernelBasis,
    MomentMatrix,
    kernel,
    moment_matrix,
    spectral_bounds,
    sphere_moment_matrix,
)
from .poly import (
    Polynomial,
    boolean_constraint,
    mono_degree,
    monomial_basis,
    monomials_of_degree,
    poly_from_json,
    poly_to_json,
    rational_from_json,
    rational_to_json,
    reduce_boolean,
)
from .systems import (
    FINITE,
    SPHERE,
    ConstraintSystem,
    SolutionSet,
    enumerate_solutions,
    max_bisection,
    max_clique,
    unit_vector,
)

VACUOUS_EPSILON = Fraction(1)
BISECTION_PRECHECK_MAX_POINTS = 5000


class DerivationError(ValueError):
    """The target is not in the ideal (or not at the requested degree)."""


class RobustnessError(ValueError):
    def __init__(self, index: int, point, value: Fraction):
        super().__init__(f"inequality {index} has value {value} <= 0 at {tuple(str(v) for v in point)}")
        self.index = index
        self.point = point
        self.value = value


# -- derivations ----------------------------------------------------------------

@dataclass(frozen=True)
class Derivation:
    """``target == sum(multipliers[i] * equalities[i])`` with ``degree`` bounding each term."""

    nvars: int
    target: Polynomial
    multipliers: Tuple[Tuple[int, Polynomial], ...]
    degree: int

    @classmethod
    def build(cls, target: Polynomial, multipliers: Mapping[int, Polynomial],
              equalities: Sequence[Polynomial]) -> "Derivation":
        lam = tuple(sorted((i, q) for i, q in multipliers.items() if q))
        deg = max((_deg(q * equalities[i]) for i, q in lam), default=0)
        return cls(target.nvars, target, lam, deg)

    def multiplier(self, i: int) -> Polynomial:
        return dict(self.multipliers).get(i, Polynomial.zero(self.nvars))

    def combination(self, equalities: Sequence[Polynomial]) -> Polynomial:
        out = Polynomial.zero(self.nvars)
        for i, q in self.multipliers:
            out = out + q * equalities[i]
        return out

    def residue(self, equalities: Sequence[Polynomial]) -> Polynomial:
        return self.target - self.combination(equalities)

    def verify(self, equalities: Sequence[Polynomial]) -> bool:
        if any(i < 0 or i >= len(equalities) for i, _ in self.multipliers):
            return False
        if any(_deg(q * equalities[i]) > self.degree for i, q in self.multipliers):
            return False
        return self.residue(equalities).is_zero()

    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "degree": self.degree,
            "target": poly_to_json(self.target),
            "multipliers": [{"index": i, "poly": poly_to_json(q)} for i, q in self.multipliers],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Derivation":
        return cls(
            int(obj["nvars"]),
            poly_from_json(obj["target"]),
            tuple((int(m["index"]), poly_from_json(m["poly"])) for m in obj["multipliers"]),
            int(obj["degree"]),
        )


def _deg(p: Polynomial) -> int:
    d = p.degree()
    return -1 if d == float("-inf") else int(d)


# -- robustness -----------------------------------------------------------------

def check_robustness(sys: ConstraintSystem, S: SolutionSet) -> Fraction:
    """Minimum of ``q(a)`` over inequalities ``q`` and solutions ``a``.

    With no inequalities the answer is the vacuous sentinel 1.  A value
    ``<= 0`` raises :class:`RobustnessError` naming the offending pair.
    """
    if not sys.inequalities:
        return VACUOUS_EPSILON
    best: Optional[Fraction] = None
    for idx, q in enumerate(sys.inequalities):
        for pt in S.points:
            v = q.evaluate(pt)
            if v <= 0:
                raise RobustnessError(idx, pt, v)
            if best is None or v < best:
                best = v
    if best is None:
        # no solutions: every inequality holds vacuously
        return VACUOUS_EPSILON
    return best


# -- completeness ---------------------------------------------------------------

class Completeness(NamedTuple):
    complete: bool
    witnesses: List[Derivation]
    failures: List[Polynomial]


def _macaulay_columns(sys: ConstraintSystem, k: int) -> List[Tuple[int, tuple]]:
    cols = []
    for i, p in enumerate(sys.equalities):
        dp = _deg(p)
        if dp < 0 or dp > k:
            continue
        for m in monomial_basis(sys.nvars, k - dp):
            cols.append((i, m))
    return cols


def derive_in_degree(sys: ConstraintSystem, targets: Sequence[Polynomial], k: int) -> List[Optional[Derivation]]:
    """Exact degree-``k`` derivations of each target, or ``None`` where none exists.

    Solves the linear system whose columns are the coefficient vectors of
    ``m * p_i`` for every monomial ``m`` with ``deg(m p_i) <= k``.
    """
    rows_basis = monomial_basis(sys.nvars, k)
    row_index = {m: r for r, m in enumerate(rows_basis)}
    cols = _macaulay_columns(sys, k)
    dense = [[Fraction(0)] * len(cols) for _ in rows_basis]
    for c, (i, m) in enumerate(cols):
        for mono, coef in sys.equalities[i]:
            dense[row_index[tuple(a + b for a, b in zip(mono, m))]][c] = coef
    rhs = []
    out: List[Optional[Derivation]] = [None] * len(targets)
    live = []
    for t, target in enumerate(targets):
        if _deg(target) > k:
            continue
        rhs.append(target.to_vector(rows_basis))
        live.append(t)
    if not live:
        return out
    if not cols:
        sols = [None if any(b) else [] for b in rhs]
    else:
        sols = linalg.solve(dense, rhs)
    for t, sol in zip(live, sols):
        if sol is None:
            continue
        lam: Dict[int, Dict[tuple, Fraction]] = {}
        for (i, m), v in zip(cols, sol):
            if v:
                lam.setdefault(i, {})[m] = v
        mult = {i: Polynomial(sys.nvars, terms) for i, terms in lam.items()}
        out[t] = Derivation.build(targets[t], mult, sys.equalities)
    return out


def check_completeness(sys: ConstraintSystem, S: SolutionSet, d: int, k: int,
                       kern: Optional[KernelBasis] = None) -> Completeness:
    """Whether every kernel polynomial of the degree-``d`` moment matrix has a degree-``k`` derivation."""
    if k < d:
        raise ValueError(f"need k >= d (got k={k}, d={d})")
    if kern is None:
        kern = kernel(moment_matrix(S, d))
    polys = kern.polynomials(sys.nvars)
    derived = derive_in_degree(sys, polys, k)
    witnesses = [w for w in derived if w is not None]
    failures = [p for p, w in zip(polys, derived) if w is None]
    return Completeness(not failures, witnesses, failures)


# -- report ---------------------------------------------------------------------

@dataclass
class RichnessReport:
    label: str
    d: int
    k: int
    delta: Fraction
    sharp_bound: Optional[Fraction]
    epsilon: Optional[Fraction]
    complete: bool
    robust: bool
    kernel: KernelBasis
    witnesses: List[Derivation] = field(default_factory=list)
    failures: List[Polynomial] = field(default_factory=list)
    solution_count: Optional[int] = None
    note: str = ""

    @property
    def rich_verdict(self) -> bool:
        return self.delta > 0 and self.complete and self.robust

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "d": self.d,
            "k": self.k,
            "delta": rational_to_json(self.delta),
            "sharp_bound": None if self.sharp_bound is None else rational_to_json(self.sharp_bound),
            "epsilon": None if self.epsilon is None else rational_to_json(self.epsilon),
            "complete": self.complete,
            "robust": self.robust,
            "rich_verdict": self.rich_verdict,
            "solution_count": self.solution_count,
            "note": self.note,
            "kernel": {
                "basis": [list(m) for m in self.kernel.basis],
                "vectors": [[str(v) for v in vec] for vec in self.kernel.vectors],
            },
            "witnesses": [w.to_json() for w in self.witnesses],
            "failures": [poly_to_json(p) for p in self.failures],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RichnessReport":
        kern = KernelBasis(
            tuple(tuple(m) for m in obj["kernel"]["basis"]),
            tuple(tuple(int(v) for v in vec) for vec in obj["kernel"]["vectors"]),
        )
        opt = lambda v: None if v is None else rational_from_json(v)
        return cls(
            label=obj["label"], d=int(obj["d"]), k=int(obj["k"]),
            delta=rational_from_json(obj["delta"]), sharp_bound=opt(obj.get("sharp_bound")),
            epsilon=opt(obj.get("epsilon")), complete=bool(obj["complete"]),
            robust=bool(obj["robust"]), kernel=kern,
            witnesses=[Derivation.from_json(w) for w in obj.get("witnesses", [])],
            failures=[poly_from_json(p) for p in obj.get("failures", [])],
            solution_count=obj.get("solution_count"), note=obj.get("note", ""),
        )


def richness_report(sys: ConstraintSystem, S: Optional[SolutionSet], d: int, k: int) -> RichnessReport:
    """Assemble spectral bound, completeness and robustness at degree ``d``.

    ``S`` may be ``None``: finite systems are then enumerated, and sphere
    systems use the closed-form sphere moments.  An empty solution set gives
    a report with ``rich_verdict`` false.
    """
    if sys.solution_kind == SPHERE:
        M = sphere_moment_matrix(sys.nvars, d)
        count = None
        eps = check_robustness(sys, SolutionSet((), Fraction(1), SPHERE)) if not sys.inequalities else VACUOUS_EPSILON
    else:
        if S is None:
            S = enumerate_solutions(sys)
        count = len(S)
        if not S.points:
            return RichnessReport(sys.label, d, k, Fraction(0), None, None, False, False,
                                  KernelBasis((), ()), note="empty solution set", solution_count=0)
        M = moment_matrix(S, d)
        eps = None
    spectral = spectral_bounds(M)
    kern = kernel(M)
    comp = check_completeness(sys, S, d, k, kern)
    robust = True
    note = ""
    if sys.solution_kind != SPHERE:
        try:
            eps = check_robustness(sys, S)
        except RobustnessError as exc:
            robust = False
            eps = exc.value
            note = str(exc)
    return RichnessReport(sys.label, d, k, spectral.delta, spectral.sharp_bound, eps, comp.complete, robust,
                          kern, comp.witnesses, comp.failures, count, note)


# -- Max-Bisection ----------------------------------------------------------------

_SUM = -1  # key for the sum constraint inside the recursion


def _elementary(nvars: int, support: Sequence[int], l: int) -> Polynomial:
    terms = {}
    for combo in itertools.combinations(support, l):
        e = [0] * nvars
        for i in combo:
            e[i] = 1
        terms[tuple(e)] = Fraction(1)
    return Polynomial(nvars, terms)


def _add_into(acc: Dict[int, Polynomial], other: Mapping[int, Polynomial], scale=1) -> None:
    for key, q in other.items():
        if not q:
            continue
        acc[key] = acc[key] + q * scale if key in acc else q * scale


def _symmetric_derivation(s: Polynomial, support: Sequence[int], weight: int) -> Dict[int, Polynomial]:
    """Derive a symmetric multilinear ``s`` on ``support`` vanishing on its weight slice.

    ``s = sum c_l e_l`` and vanishing forces ``sum c_l C(weight, l) = 0``, so
    ``s = sum c_l (e_l - C(weight, l))``.  Each ``e_l - C(weight, l)`` is derived
    from ``l e_l = (sum x - weight) e_(l-1) + (weight - l + 1) e_(l-1) - boolean residue``.
    """
    nv = s.nvars
    deg = _deg(s)
    coeffs = []
    for l in range(max(deg, 0) + 1):
        e = [0] * nv
        for i in support[:l]:
            e[i] = 1
        coeffs.append(s.coeff(tuple(e)))
    if sum(c * math.comb(weight, l) for l, c in enumerate(coeffs)) != 0:
        raise DerivationError("symmetric part does not vanish on the slice")
    out: Dict[int, Polynomial] = {}
    f: Dict[int, Polynomial] = {}  # derivation of e_(l-1) - C(weight, l-1); empty for l-1 = 0
    for l in range(1, len(coeffs)):
        prev = _elementary(nv, support, l - 1)
        sx = linear_form_on(nv, support, 0)
        _, bool_lam = reduce_boolean(sx * prev)
        step: Dict[int, Polynomial] = {}
        _add_into(step, f, Fraction(weight - l + 1, l))
        _add_into(step, {_SUM: prev}, Fraction(1, l))
        _add_into(step, bool_lam, Fraction(-1, l))
        f = step
        if coeffs[l]:
            _add_into(out, f, coeffs[l])
    return out


def linear_form_on(nvars: int, support: Sequence[int], const) -> Polynomial:
    terms = {}
    for i in support:
        e = [0] * nvars
        e[i] = 1
        terms[tuple(e)] = Fraction(1)
    if const:
        terms[(0,) * nvars] = Fraction(-const)
    return Polynomial(nvars, terms)


def _split_pair(s: Polynomial, i: int, j: int) -> Polynomial:
    """For multilinear ``s = A + x_i B + x_j C + x_i x_j D`` return ``B - C``."""
    out: Dict[tuple, Fraction] = {}
    for m, c in s:
        if m[i] and not m[j]:
            e = list(m)
            e[i] = 0
            key = tuple(e)
            out[key] = out.get(key, 0) + c
        elif m[j] and not m[i]:
            e = list(m)
            e[j] = 0
            key = tuple(e)
            out[key] = out.get(key, 0) - c
    return Polynomial(s.nvars, out)


def _swap(nvars: int, i: int, j: int) -> List[int]:
    perm = list(range(nvars))
    perm[i], perm[j] = j, i
    return perm


def _derive_slice(r: Polynomial, support: Tuple[int, ...], weight: int) -> Dict[int, Polynomial]:
    """Derivation of a multilinear ``r`` on ``support`` that vanishes on the weight slice.

    Keys: variable index for ``x_i^2 - x_i``, ``_SUM`` for ``sum_{support} x - weight``.
    Writes ``r`` as its symmetrization plus transposition differences
    ``s - tau_ij s = (x_i - x_j)(B - C)``; ``B - C`` vanishes on the smaller
    slice with ``i, j`` removed, and the lift back uses
    ``(x_i + x_j - 1)(x_i - x_j) = (x_i^2 - x_i) - (x_j^2 - x_j)``.
    """
    nv = r.nvars
    out: Dict[int, Polynomial] = {}
    if r.is_zero():
        return out
    if _deg(r) == 0 or not support:
        raise DerivationError(f"nonzero constant residue {r}")
    s = r
    for jpos in range(1, len(support)):
        j = support[jpos]
        new = s
        for ipos in range(jpos):
            i = support[ipos]
            swapped = s.permute(_swap(nv, i, j))
            new = new + swapped
            bc = _split_pair(s, i, j)
            if bc.is_zero():
                continue
            sub = tuple(v for v in support if v != i and v != j)
            inner = _derive_slice(bc, sub, weight - 1)
            xi_minus_xj = Polynomial.var(nv, i) - Polynomial.var(nv, j)
            lifted: Dict[int, Polynomial] = {}
            for key, q in inner.items():
                lifted[key] = q * xi_minus_xj
            mu = inner.get(_SUM)
            if mu is not None:
                _add_into(lifted, {i: -mu, j: mu})
            _add_into(out, lifted, Fraction(1, jpos + 1))
        s = new / (jpos + 1)
    _add_into(out, _symmetric_derivation(s, support, weight))
    return out


def _check_vanishes_on_slice(r: Polynomial, n: int) -> None:
    N = 2 * n
    combos = itertools.combinations(range(N), n)
    if math.comb(N, n) > BISECTION_PRECHECK_MAX_POINTS:
        rng = random.Random(0)
        combos = (tuple(sorted(rng.sample(range(N), n))) for _ in range(BISECTION_PRECHECK_MAX_POINTS))
    for ones in combos:
        pt = [0] * N
        for i in ones:
            pt[i] = 1
        v = r.evaluate(pt)
        if v:
            raise DerivationError(f"target is {v} at weight-{n} point {tuple(pt)}")


def derive_bisection(r: Polynomial, n: int, d: Optional[int] = None) -> Derivation:
    """Degree-``deg r`` derivation of ``r`` from the Max-Bisection equalities on ``2n`` variables.

    Multiplier indices follow :func:`sosbits.systems.max_bisection`: ``0..2n-1``
    for the Boolean constraints and ``2n`` for ``sum x - n``.
    """
    N = 2 * n
    if r.nvars != N:
        raise ValueError(f"target has {r.nvars} variables, expected {N}")
    sys = max_bisection(n)
    if d is not None and _deg(r) > d:
        raise DerivationError(f"target degree {_deg(r)} exceeds d={d}")
    _check_vanishes_on_slice(r, n)
    r_star, bool_lam = reduce_boolean(r)
    lam: Dict[int, Polynomial] = dict(bool_lam)
    inner = _derive_slice(r_star, tuple(range(N)), n)
    if _SUM in inner:
        inner[N] = inner.pop(_SUM)
    _add_into(lam, inner)
    out = Derivation.build(r, lam, sys.equalities)
    if not out.verify(sys.equalities):
        raise DerivationError(f"internal: residue {out.residue(sys.equalities)}")
    return out


# -- unit sphere ------------------------------------------------------------------

def _vanishes_on_sphere(p: Polynomial) -> bool:
    deg = max(_deg(p), 0)
    M = sphere_moment_matrix(p.nvars, deg)
    c = p.to_vector(M.basis)
    return M.quadratic_form(c) == 0


def derive_unit_vector(p: Polynomial, d: Optional[int] = None) -> Derivation:
    """``p = lam * (sum x_i^2 - 1)`` by parity split and iterated absorption.

    Each parity part ``f`` of top degree ``K`` is pushed to a homogeneous
    polynomial by ``f <- f + q (sum x^2 - 1)`` with ``q`` the part of ``f``
    below degree ``K``; a homogeneous polynomial vanishing on the sphere is 0.
    """
    n = p.nvars
    g = unit_vector(n).equalities[0]
    if d is not None and _deg(p) > d:
        raise DerivationError(f"target degree {_deg(p)} exceeds d={d}")
    if not _vanishes_on_sphere(p):
        raise DerivationError("target does not vanish on the unit sphere")
    lam = Polynomial.zero(n)
    for parity in (0, 1):
        f = p.homogeneous_part(lambda t, parity=parity: t % 2 == parity)
        if f.is_zero():
            continue
        K = _deg(f)
        while True:
            q = f.homogeneous_part(lambda t: t < K)
            if q.is_zero():
                break
            f = f + q * g
            lam = lam - q
        if not f.is_zero():
            raise DerivationError(f"nonzero homogeneous residue {f}")
    out = Derivation.build(p, {0: lam}, (g,))
    if not out.verify((g,)):
        raise DerivationError(f"residue {out.residue((g,))}")
    return out


# -- Max-Clique -------------------------------------------------------------------

def reduce_clique(p: Polynomial, edges: Iterable[Tuple[int, int]]) -> Tuple[Polynomial, Derivation]:
    """Multilinearize, then remove every monomial whose support is not a clique.

    A monomial containing a non-edge ``{i, j}`` is ``x^rest * (x_i x_j)`` and
    goes entirely into the multiplier of that equality.  Returns ``p_star``
    (clique-supported) and a derivation of ``p - p_star`` from
    :func:`sosbits.systems.max_clique`.
    """
    n = p.nvars
    sys = max_clique(n, edges)
    edge_set = set(sys.param("edges"))
    non_edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if (i, j) not in edge_set]
    eq_index = {pair: n + t for t, pair in enumerate(non_edges)}
    r_star, lam = reduce_boolean(p)
    lam = dict(lam)
    keep: Dict[tuple, Fraction] = {}
    for m, c in r_star:
        supp = [i for i, e in enumerate(m) if e]
        bad = next(((i, j) for i, j in itertools.combinations(supp, 2) if (i, j) not in edge_set), None)
        if bad is None:
            keep[m] = c
            continue
        rest = list(m)
        rest[bad[0]] = 0
        rest[bad[1]] = 0
        _add_into(lam, {eq_index[bad]: Polynomial.monomial(tuple(rest), c)})
    p_star = Polynomial(n, keep)
    der = Derivation.build(p - p_star, lam, sys.equalities)
    return p_star, der
