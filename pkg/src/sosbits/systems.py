"""Registry of constraint systems with exact solution enumeration.

Every system is an equality list ``equalities`` (each ``p == 0``), an
inequality list ``inequalities`` (each ``q >= 0``) and a solution-set kind.
All registry systems except ``unit_vector`` have solutions inside the Boolean
cube, so their solution sets are enumerated by brute force over ``{0,1}^n``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from .poly import (
    CoefficientStats,
    Polynomial,
    Rational,
    boolean_constraint,
    coeff_stats,
    linear_form,
    poly_from_json,
    poly_to_json,
    rational_from_json,
    rational_to_json,
)

FINITE = "finite-enumerable"
SPHERE = "sphere"
UNKNOWN = "empty-unknown"
SOLUTION_KINDS = (FINITE, SPHERE, UNKNOWN)

ENUMERATION_MAX_VARS = 24

Point = Tuple[Fraction, ...]


class ParameterError(ValueError):
    """Raised for parameters outside a construction's valid range."""


class NotEnumerableError(ValueError):
    pass


@dataclass(frozen=True)
class ConstraintSystem:
    nvars: int
    equalities: Tuple[Polynomial, ...]
    inequalities: Tuple[Polynomial, ...]
    label: str
    solution_kind: str = FINITE
    params: Tuple[Tuple[str, object], ...] = ()

    def __post_init__(self):
        if self.solution_kind not in SOLUTION_KINDS:
            raise ValueError(f"unknown solution kind {self.solution_kind!r}")
        for p in self.equalities + self.inequalities:
            if p.nvars != self.nvars:
                raise ValueError(f"{self.label}: polynomial with {p.nvars} variables in a {self.nvars}-variable system")
        object.__setattr__(self, "params", tuple(sorted(self.params, key=lambda kv: kv[0])))

    def param(self, name: str, default=None):
        return dict(self.params).get(name, default)

    @property
    def eq_stats(self) -> CoefficientStats:
        return _stats(self.equalities)

    @property
    def ineq_stats(self) -> CoefficientStats:
        return _stats(self.inequalities)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "nvars": self.nvars,
            "solution_kind": self.solution_kind,
            "params": {k: _param_json(v) for k, v in self.params},
            "equalities": [poly_to_json(p) for p in self.equalities],
            "inequalities": [poly_to_json(q) for q in self.inequalities],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ConstraintSystem":
        params = tuple((k, _param_from_json(v)) for k, v in sorted(obj.get("params", {}).items()))
        return cls(
            nvars=int(obj["nvars"]),
            equalities=tuple(poly_from_json(p) for p in obj["equalities"]),
            inequalities=tuple(poly_from_json(q) for q in obj["inequalities"]),
            label=obj["label"],
            solution_kind=obj.get("solution_kind", FINITE),
            params=params,
        )


def _stats(polys: Iterable[Polynomial]) -> CoefficientStats:
    out = CoefficientStats(Fraction(0), 0)
    for p in polys:
        out = out.merge(coeff_stats(p))
    return out


def _param_json(v):
    if isinstance(v, Fraction):
        return rational_to_json(v)
    if isinstance(v, tuple):
        return [_param_json(x) for x in v]
    return v


def _param_from_json(v):
    if isinstance(v, dict) and "num" in v:
        return rational_from_json(v)
    if isinstance(v, list):
        return tuple(_param_from_json(x) for x in v)
    return v


@dataclass(frozen=True)
class SolutionSet:
    points: Tuple[Point, ...]
    norm_bound: Fraction
    kind: str = FINITE

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def is_boolean(self) -> bool:
        return all(v in (0, 1) for pt in self.points for v in pt)

    @classmethod
    def from_points(cls, points: Iterable[Sequence[Rational]]) -> "SolutionSet":
        pts = tuple(tuple(Fraction(v) for v in p) for p in points)
        bound = max((abs(v) for p in pts for v in p), default=Fraction(0))
        return cls(pts, bound)


# -- constructors -------------------------------------------------------------

def _booleans(n: int) -> List[Polynomial]:
    return [boolean_constraint(n, i) for i in range(n)]


def max_csp(n: int) -> ConstraintSystem:
    _need_positive(n)
    return ConstraintSystem(n, tuple(_booleans(n)), (), f"max_csp({n})", FINITE, (("n", n),))


def max_clique(n: int, edges: Iterable[Tuple[int, int]]) -> ConstraintSystem:
    """Vertices are ``0..n-1``; each non-edge ``{i, j}`` gives ``x_i x_j = 0``."""
    _need_positive(n)
    edge_set = set()
    for i, j in edges:
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ParameterError(f"bad edge ({i}, {j}) for {n} vertices")
        edge_set.add((min(i, j), max(i, j)))
    eqs = _booleans(n)
    x = [Polynomial.var(n, i) for i in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        if (i, j) not in edge_set:
            eqs.append(x[i] * x[j])
    edges_sorted = tuple(sorted(edge_set))
    return ConstraintSystem(
        n, tuple(eqs), (), f"max_clique({n},{list(edges_sorted)})", FINITE,
        (("n", n), ("edges", edges_sorted)),
    )


def balanced_separator(n: int, perturb: bool = True) -> ConstraintSystem:
    """Boolean cube with ``ceil(n/3) <= sum x <= floor(2n/3)``.

    With ``perturb`` both inequalities are loosened by 1/2, which does not
    change the Boolean solutions but makes every solution satisfy them with
    slack at least 1/2.
    """
    _need_positive(n)
    lo, hi = -(-n // 3), (2 * n) // 3
    slack = Fraction(1, 2) if perturb else Fraction(0)
    ones = {i: 1 for i in range(n)}
    upper = linear_form(n, {i: -1 for i in range(n)}, hi + slack)
    lower = linear_form(n, ones, -lo + slack)
    label = f"balanced_separator({n}{'' if perturb else ',unperturbed'})"
    return ConstraintSystem(
        n, tuple(_booleans(n)), (upper, lower), label, FINITE, (("n", n), ("perturb", perturb))
    )


def matching_variables(n: int) -> List[Tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def matching(n: int) -> ConstraintSystem:
    """Perfect matchings of the complete graph on ``n`` vertices.

    One variable per pair ``i < j`` (lexicographic order).  For every vertex:
    its incident edges sum to one, and two distinct incident edges are never
    both chosen.
    """
    if n < 2:
        raise ParameterError("matching needs at least two vertices")
    pairs = matching_variables(n)
    nv = len(pairs)
    index = {p: k for k, p in enumerate(pairs)}
    x = [Polynomial.var(nv, k) for k in range(nv)]
    eqs = _booleans(nv)
    for v in range(n):
        incident = [index[(min(v, u), max(v, u))] for u in range(n) if u != v]
        eqs.append(linear_form(nv, {k: 1 for k in incident}, -1))
    for v in range(n):
        incident = [index[(min(v, u), max(v, u))] for u in range(n) if u != v]
        for a, b in itertools.combinations(incident, 2):
            eqs.append(x[a] * x[b])
    return ConstraintSystem(nv, tuple(eqs), (), f"matching({n})", FINITE, (("n", n),))


def max_bisection(n: int) -> ConstraintSystem:
    """``2n`` Boolean variables with ``sum x = n``; the sum constraint is last."""
    _need_positive(n)
    nv = 2 * n
    eqs = _booleans(nv) + [linear_form(nv, {i: 1 for i in range(nv)}, -n)]
    return ConstraintSystem(nv, tuple(eqs), (), f"max_bisection({n})", FINITE, (("n", n),))


def unit_vector(n: int) -> ConstraintSystem:
    _need_positive(n)
    g = sum((Polynomial.var(n, i) ** 2 for i in range(n)), Polynomial.const(n, -1))
    return ConstraintSystem(n, (g,), (), f"unit_vector({n})", SPHERE, (("n", n),))


def _check_eps(eps: Rational) -> Fraction:
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise ParameterError(f"epsilon must lie in (0, 1/2), got {eps}")
    return eps


def chain(n: int, eps: Rational) -> ConstraintSystem:
    """``y_i^2 - y_{i+1} = 0`` for ``i < n`` and ``y_n^2 = 0``."""
    _need_positive(n)
    eps = _check_eps(eps)
    y = [Polynomial.var(n, i) for i in range(n)]
    eqs = [y[i] ** 2 - y[i + 1] for i in range(n - 1)] + [y[n - 1] ** 2]
    return ConstraintSystem(n, tuple(eqs), (), f"chain({n},{eps})", FINITE, (("n", n), ("eps", eps)))


def block_variable(n: int, k: int, i: int, j: int) -> int:
    """Index of ``w_{ij}`` (block ``i``, member ``j``), blocks of size ``2k``."""
    return i * 2 * k + j


def block_sum(n: int, k: int, i: int) -> Polynomial:
    """``sum_j w_{ij} - k``: the image of ``y_i`` in the Boolean lift."""
    nv = 2 * k * n
    return linear_form(nv, {block_variable(n, k, i, j): 1 for j in range(2 * k)}, -k)


def boolean_chain(n: int, k: int, eps: Rational) -> ConstraintSystem:
    """The chain system with each ``y_i`` replaced by a sum of ``2k`` Boolean variables minus ``k``.

    Equality order: the ``n`` substituted chain equations, then ``w^2 - w``
    for every variable.
    """
    _need_positive(n)
    if k < 1:
        raise ParameterError("block half-size k must be positive")
    eps = _check_eps(eps)
    nv = 2 * k * n
    ys = [block_sum(n, k, i) for i in range(n)]
    eqs = [ys[i] ** 2 - ys[i + 1] for i in range(n - 1)] + [ys[n - 1] ** 2]
    eqs += _booleans(nv)
    return ConstraintSystem(
        nv, tuple(eqs), (), f"boolean_chain({n},{k},{eps})", FINITE,
        (("n", n), ("k", k), ("eps", eps)),
    )


def _need_positive(n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")


SYSTEMS = {
    "max_csp": max_csp,
    "max_clique": max_clique,
    "balanced_separator": balanced_separator,
    "matching": matching,
    "max_bisection": max_bisection,
    "unit_vector": unit_vector,
    "chain": chain,
    "boolean_chain": boolean_chain,
}


def make_system(kind: str, n: int, *, k: Optional[int] = None, eps: Optional[Rational] = None,
                edges: Optional[Iterable[Tuple[int, int]]] = None, perturb: bool = True) -> ConstraintSystem:
    """Build a registry system by name, e.g. ``make_system("chain", 3, eps=Fraction(1, 4))``."""
    if kind not in SYSTEMS:
        raise ParameterError(f"unknown system {kind!r}; choose from {sorted(SYSTEMS)}")
    if kind == "max_clique":
        return max_clique(n, edges or ())
    if kind == "balanced_separator":
        return balanced_separator(n, perturb=perturb)
    if kind == "chain":
        if eps is None:
            raise ParameterError("chain needs eps")
        return chain(n, eps)
    if kind == "boolean_chain":
        if eps is None or k is None:
            raise ParameterError("boolean_chain needs k and eps")
        return boolean_chain(n, k, eps)
    return SYSTEMS[kind](n)


def satisfies(sys: ConstraintSystem, point: Sequence[Rational]) -> bool:
    return all(p.evaluate(point) == 0 for p in sys.equalities) and all(
        q.evaluate(point) >= 0 for q in sys.inequalities
    )


def enumerate_solutions(sys: ConstraintSystem) -> SolutionSet:
    """All Boolean points satisfying every constraint exactly."""
    if sys.solution_kind != FINITE:
        raise NotEnumerableError(f"{sys.label} has solution kind {sys.solution_kind!r}")
    if sys.nvars > ENUMERATION_MAX_VARS:
        raise NotEnumerableError(
            f"{sys.label}: {sys.nvars} variables exceeds the enumeration guard of {ENUMERATION_MAX_VARS}"
        )
    one, zero = Fraction(1), Fraction(0)
    points = []
    for bits in itertools.product((0, 1), repeat=sys.nvars):
        pt = tuple(one if b else zero for b in bits)
        if satisfies(sys, pt):
            points.append(pt)
    # lexicographic order on the 0/1 tuples, so (0,1) comes before (1,0)
    return SolutionSet(tuple(points), Fraction(1) if points else Fraction(0))


def expected_solution_count(sys: ConstraintSystem) -> Optional[int]:
    """Closed-form |S| for the systems where it is known (used by tests)."""
    name = sys.label.split("(")[0]
    n = sys.param("n")
    if name == "max_csp":
        return 2 ** n
    if name == "max_bisection":
        return math.comb(2 * n, n)
    if name == "chain":
        return 1
    return None
