"""Exact sparse multivariate polynomials over the rationals.

A polynomial in ``nvars`` variables is a mapping from exponent tuples to
nonzero :class:`fractions.Fraction` coefficients.  The zero polynomial has no
terms.  Monomials are plain tuples of non-negative ints, one entry per
variable, so ``(2, 0, 1)`` is ``x1^2 * x3``.

Monomial order is graded lexicographic: monomials are compared first by total
degree, then lexicographically with ``x1 > x2 > ... > xn``.  ``monomial_basis``
lists monomials in increasing grlex order within each degree block starting
from the constant, which gives ``(1, x1, x2, x1^2, x1*x2, x2^2, ...)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Callable, Dict, Iterable, Iterator, Mapping, Sequence, Tuple, Union

Monomial = Tuple[int, ...]
Rational = Union[int, Fraction]

#: Degree of the zero polynomial; compares below every integer.
ZERO_DEGREE = float("-inf")

SYMMETRIZE_MAX_VARS = 10


def mono_degree(m: Monomial) -> int:
    return sum(m)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def grlex_key(m: Monomial):
    """Sort key: ascending degree, then x1^k before x1^(k-1)*x2 and so on."""
    return (sum(m), tuple(-e for e in m))


def unit_monomial(nvars: int, i: int, power: int = 1) -> Monomial:
    e = [0] * nvars
    e[i] = power
    return tuple(e)


class Polynomial:
    """Immutable sparse polynomial with Fraction coefficients."""

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Monomial, Rational] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        clean: Dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                m = tuple(int(e) for e in m)
                if len(m) != nvars:
                    raise ValueError(f"monomial {m} has wrong length for nvars={nvars}")
                if any(e < 0 for e in m):
                    raise ValueError(f"negative exponent in {m}")
                c = Fraction(c)
                if c:
                    clean[m] = clean.get(m, Fraction(0)) + c
                    if not clean[m]:
                        del clean[m]
        self.nvars = nvars
        self._terms = clean
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def _raw(cls, nvars: int, terms: Dict[Monomial, Fraction]) -> "Polynomial":
        # trusted path: terms already canonical (no zeros, Fractions, right length)
        p = object.__new__(cls)
        p.nvars = nvars
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls._raw(nvars, {})

    @classmethod
    def const(cls, nvars: int, c: Rational) -> "Polynomial":
        c = Fraction(c)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Polynomial":
        if not 0 <= i < nvars:
            raise ValueError(f"variable index {i} out of range for nvars={nvars}")
        return cls._raw(nvars, {unit_monomial(nvars, i): Fraction(1)})

    @classmethod
    def monomial(cls, m: Monomial, c: Rational = 1) -> "Polynomial":
        return cls(len(m), {m: c})

    @classmethod
    def from_vector(cls, nvars: int, basis: Sequence[Monomial], coeffs: Sequence[Rational]) -> "Polynomial":
        """The polynomial ``coeffs . v`` for a monomial basis ``v``."""
        if len(basis) != len(coeffs):
            raise ValueError("basis and coefficient vector differ in length")
        return cls(nvars, {m: c for m, c in zip(basis, coeffs) if c})

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return self._terms

    def __iter__(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coeff(self, m: Monomial) -> Fraction:
        return self._terms.get(tuple(m), Fraction(0))

    def degree(self):
        """Total degree; :data:`ZERO_DEGREE` for the zero polynomial."""
        if not self._terms:
            return ZERO_DEGREE
        return max(sum(m) for m in self._terms)

    def sorted_terms(self):
        return sorted(self._terms.items(), key=lambda t: grlex_key(t[0]))

    def to_vector(self, basis: Sequence[Monomial]) -> list:
        """Coefficient vector in ``basis``; raises if a term is outside it."""
        index = {m: i for i, m in enumerate(basis)}
        out = [Fraction(0)] * len(basis)
        for m, c in self._terms.items():
            if m not in index:
                raise ValueError(f"monomial {m} is not in the basis")
            out[index[m]] = c
        return out

    def is_multilinear(self) -> bool:
        return all(e <= 1 for m in self._terms for e in m)

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "Polynomial") -> None:
        if self.nvars != other.nvars:
            raise ValueError(f"variable-count mismatch: {self.nvars} vs {other.nvars}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.const(self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v += c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Polynomial._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.nvars, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if not c:
                return Polynomial.zero(self.nvars)
            return Polynomial._raw(self.nvars, {m: v * c for m, v in self._terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check(other)
        out: Dict[Monomial, Fraction] = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                m = tuple(x + y for x, y in zip(ma, mb))
                out[m] = out.get(m, 0) + ca * cb
        return Polynomial._raw(self.nvars, {m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = Polynomial.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(self.nvars, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    # -- evaluation and substitution -------------------------------------
    def evaluate(self, point: Sequence[Rational]) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError(f"point has dimension {len(point)}, polynomial has {self.nvars} variables")
        pt = [Fraction(v) for v in point]
        total = Fraction(0)
        for m, c in self._terms.items():
            term = c
            for v, e in zip(pt, m):
                if e:
                    term *= v ** e
            total += term
        return total

    __call__ = evaluate

    def compose(self, images: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute ``x_i -> images[i]``; all images share one variable count."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        if not images:
            return self
        target = images[0].nvars
        if any(q.nvars != target for q in images):
            raise ValueError("images must share a variable count")
        powers: Dict[Tuple[int, int], Polynomial] = {}

        def power(i: int, e: int) -> Polynomial:
            key = (i, e)
            if key not in powers:
                powers[key] = images[i] ** e
            return powers[key]

        out = Polynomial.zero(target)
        for m, c in self._terms.items():
            term = Polynomial.const(target, c)
            for i, e in enumerate(m):
                if e:
                    term = term * power(i, e)
            out = out + term
        return out

    def permute(self, perm: Sequence[int]) -> "Polynomial":
        """Relabel variables: ``x_i`` becomes ``x_{perm[i]}``."""
        out = {}
        for m, c in self._terms.items():
            e = [0] * self.nvars
            for i, k in enumerate(m):
                e[perm[i]] = k
            out[tuple(e)] = c
        return Polynomial._raw(self.nvars, out)

    def negate_variables(self) -> "Polynomial":
        """``p(-x)``."""
        return Polynomial._raw(
            self.nvars, {m: (-c if sum(m) % 2 else c) for m, c in self._terms.items()}
        )

    def homogeneous_part(self, pred: Callable[[int], bool]) -> "Polynomial":
        return Polynomial._raw(self.nvars, {m: c for m, c in self._terms.items() if pred(sum(m))})

    # -- display ----------------------------------------------------------
    def __repr__(self):
        return f"Polynomial({self.nvars}, {self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for m, c in reversed(self.sorted_terms()):
            mono = "*".join(
                f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}" for i, e in enumerate(m) if e
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def arith(p: Polynomial, q: Polynomial, op: str) -> Polynomial:
    """``op`` is one of ``add``, ``sub``, ``mul``."""
    if p.nvars != q.nvars:
        raise ValueError(f"variable-count mismatch: {p.nvars} vs {q.nvars}")
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown operation {op!r}")


def evaluate(p: Polynomial, point: Sequence[Rational]) -> Fraction:
    return p.evaluate(point)


def variables(nvars: int) -> list:
    return [Polynomial.var(nvars, i) for i in range(nvars)]


def linear_form(nvars: int, coeffs: Mapping[int, Rational], const: Rational = 0) -> Polynomial:
    terms = {unit_monomial(nvars, i): c for i, c in coeffs.items()}
    terms[(0,) * nvars] = Fraction(const)
    return Polynomial(nvars, terms)


def monomials_of_degree(nvars: int, deg: int) -> list:
    """All monomials of total degree exactly ``deg`` in grlex order."""
    out = []
    for combo in combinations_with_replacement(range(nvars), deg):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


def monomial_basis(nvars: int, d: int) -> list:
    """Monomials of degree <= d, graded lexicographic; length C(nvars+d, d)."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    out = []
    for k in range(d + 1):
        out.extend(monomials_of_degree(nvars, k))
    return out


def boolean_constraint(nvars: int, i: int) -> Polynomial:
    """``x_i^2 - x_i``."""
    return Polynomial._raw(
        nvars, {unit_monomial(nvars, i, 2): Fraction(1), unit_monomial(nvars, i): Fraction(-1)}
    )


def reduce_boolean(p: Polynomial) -> Tuple[Polynomial, Dict[int, Polynomial]]:
    """Multilinearize ``p`` modulo ``x_i^2 - x_i``.

    Returns ``(p_star, lam)`` with ``p - p_star == sum(lam[i] * (x_i^2 - x_i))``
    and every ``lam[i] * (x_i^2 - x_i)`` of degree at most ``deg p``.  Only
    indices with a nonzero multiplier appear in ``lam``.
    """
    n = p.nvars
    star: Dict[Monomial, Fraction] = {}
    lam: Dict[int, Dict[Monomial, Fraction]] = {}
    for m, c in p:
        e = list(m)
        for i in range(n):
            # x^e = x^(e - 2u_i) (x_i^2 - x_i) + x^(e - u_i), repeated until e_i = 1
            while e[i] >= 2:
                e[i] -= 2
                q = tuple(e)
                bucket = lam.setdefault(i, {})
                bucket[q] = bucket.get(q, 0) + c
                e[i] += 1
        key = tuple(e)
        star[key] = star.get(key, 0) + c
    p_star = Polynomial(n, star)
    multipliers = {i: Polynomial(n, t) for i, t in lam.items()}
    return p_star, {i: q for i, q in multipliers.items() if q}


def _multiset_permutations(seq: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    items = sorted(seq)
    n = len(items)
    # lexicographic next-permutation walk over the sorted multiset
    while True:
        yield tuple(items)
        i = n - 2
        while i >= 0 and items[i] >= items[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while items[j] <= items[i]:
            j -= 1
        items[i], items[j] = items[j], items[i]
        items[i + 1:] = reversed(items[i + 1:])


def symmetrize(p: Polynomial) -> Polynomial:
    """Average of ``p`` over all permutations of the variable labels."""
    if p.nvars > SYMMETRIZE_MAX_VARS:
        raise ValueError(
            f"symmetrize is limited to {SYMMETRIZE_MAX_VARS} variables (got {p.nvars})"
        )
    out: Dict[Monomial, Fraction] = {}
    for m, c in p:
        orbit = list(_multiset_permutations(m))
        share = c / len(orbit)
        for q in orbit:
            out[q] = out.get(q, 0) + share
    return Polynomial(p.nvars, out)


def rational_bits(q: Rational) -> int:
    """ceil(log2(|num|+1)) + ceil(log2(den)): the bit count used in all reports."""
    q = Fraction(q)
    return abs(q.numerator).bit_length() + (q.denominator - 1).bit_length()


def ceil_log2(q: Rational) -> int:
    """Smallest integer t with 2**t >= q, for q > 0."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("ceil_log2 needs a positive argument")
    t = q.numerator.bit_length() - q.denominator.bit_length() - 1
    while Fraction(2) ** t < q:
        t += 1
    while Fraction(2) ** (t - 1) >= q:
        t -= 1
    return t


@dataclass(frozen=True)
class CoefficientStats:
    """``max_abs_coeff`` is the coefficient norm; ``bit_size`` sums :func:`rational_bits`."""

    max_abs_coeff: Fraction
    bit_size: int

    @classmethod
    def of_values(cls, values: Iterable[Rational]) -> "CoefficientStats":
        best = Fraction(0)
        bits = 0
        for v in values:
            v = Fraction(v)
            if abs(v) > best:
                best = abs(v)
            bits += rational_bits(v)
        return cls(best, bits)

    def merge(self, other: "CoefficientStats") -> "CoefficientStats":
        return CoefficientStats(max(self.max_abs_coeff, other.max_abs_coeff), self.bit_size + other.bit_size)


def coeff_stats(p: Polynomial) -> CoefficientStats:
    return CoefficientStats.of_values(c for _, c in p)


def norm(p: Polynomial) -> Fraction:
    """Largest absolute coefficient."""
    return max((abs(c) for _, c in p), default=Fraction(0))


# -- JSON ------------------------------------------------------------------

def rational_to_json(q: Rational) -> dict:
    q = Fraction(q)
    return {"num": str(q.numerator), "den": str(q.denominator)}


def rational_from_json(obj) -> Fraction:
    if isinstance(obj, dict):
        num, den = int(obj["num"]), int(obj["den"])
    elif isinstance(obj, str):
        return Fraction(obj)
    else:
        raise ValueError(f"cannot decode rational from {obj!r}")
    if den <= 0:
        raise ValueError("denominator must be positive")
    if math.gcd(num, den) != 1:
        raise ValueError(f"{num}/{den} is not in lowest terms")
    return Fraction(num, den)


def poly_to_json(p: Polynomial) -> dict:
    return {
        "nvars": p.nvars,
        "terms": [{"exps": list(m), **rational_to_json(c)} for m, c in p.sorted_terms()],
    }


def poly_from_json(obj: dict) -> Polynomial:
    nvars = int(obj["nvars"])
    terms: Dict[Monomial, Fraction] = {}
    for t in obj["terms"]:
        m = tuple(int(e) for e in t["exps"])
        if m in terms:
            raise ValueError(f"duplicate monomial {m}")
        terms[m] = rational_from_json(t)
    return Polynomial(nvars, terms)
