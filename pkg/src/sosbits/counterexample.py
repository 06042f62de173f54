"""Chain systems whose degree-2 proofs need doubly-exponential coefficients.

Upper side: an explicit certificate for ``eps - y_1 >= 0`` over the chain
``y_i^2 = y_(i+1)``, ``y_n^2 = 0`` with largest coefficient ``(n/4eps)^(2^n - 1)``.
Lower side: the functional ``phi(y^b) = (2eps)^(sum 2^(i-1) b_i)`` (evaluation at
``y_i = (2eps)^(2^(i-1))``) annihilates every chain equation except ``y_n^2``,
which forces some multiplier of ``y_n^2`` to be huge.  The Boolean version
replaces each ``y_i`` by ``sum_j w_ij - k`` and uses a product of symmetric
knapsack pseudo-expectations as the dual witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import linalg
from .certificate import SoSCertificate, gram_polynomial
from .poly import (
    Monomial,
    Polynomial,
    Rational,
    coeff_stats,
    mono_degree,
    monomial_basis,
    monomials_of_degree,
    norm,
)
from .systems import ConstraintSystem, ParameterError, block_sum, boolean_chain, chain


def _check_eps(eps: Rational) -> Fraction:
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise ParameterError(f"epsilon must lie in (0, 1/2), got {eps}")
    return eps


def _deg(p: Polynomial) -> int:
    d = p.degree()
    return -1 if d == float("-inf") else int(d)


# -- pseudo-expectations ----------------------------------------------------------

class PseudoExpectation:
    """A linear functional on polynomials of degree ``<= degree``, given on monomials.

    ``count_base`` is the base ``b`` of the ``b^d`` monomial-count factor used
    when turning ``|E[lam p]|`` into a bound on the coefficients of ``lam``.
    """

    def __init__(self, nvars: int, degree: int, value: Callable[[Monomial], Fraction], label: str,
                 count_base: Optional[int] = None):
        self.nvars = nvars
        self.degree = degree
        self.label = label
        self.count_base = count_base if count_base is not None else nvars
        self._value = value
        self._cache: Dict[Monomial, Fraction] = {}

    def __repr__(self) -> str:
        return f"PseudoExpectation({self.label}, degree={self.degree})"

    def value(self, m: Monomial) -> Fraction:
        m = tuple(m)
        if mono_degree(m) > self.degree:
            raise ValueError(f"monomial {m} exceeds degree {self.degree}")
        if m not in self._cache:
            self._cache[m] = Fraction(self._value(m))
        return self._cache[m]

    def apply(self, p: Polynomial) -> Fraction:
        if p.nvars != self.nvars:
            raise ValueError("variable count mismatch")
        return sum((c * self.value(m) for m, c in p), Fraction(0))

    __call__ = apply

    @property
    def values(self) -> Dict[Monomial, Fraction]:
        return {m: self.value(m) for m in monomial_basis(self.nvars, self.degree)}

    def moment_basis(self) -> List[Monomial]:
        return monomial_basis(self.nvars, self.degree // 2)

    def pseudo_moment_matrix(self) -> List[List[Fraction]]:
        basis = self.moment_basis()
        n = len(basis)
        out = [[Fraction(0)] * n for _ in range(n)]
        for a in range(n):
            for b in range(a, n):
                v = self.value(tuple(x + y for x, y in zip(basis[a], basis[b])))
                out[a][b] = out[b][a] = v
        return out

    def is_psd(self) -> bool:
        return linalg.is_psd(self.pseudo_moment_matrix())

    def annihilates(self, p: Polynomial, extra: int = 0) -> bool:
        """``E[m p] == 0`` for every monomial ``m`` with ``deg(m p) <= degree - extra``."""
        return not self.nonzero_multiples(p, extra)

    def nonzero_multiples(self, p: Polynomial, extra: int = 0) -> List[Tuple[Monomial, Fraction]]:
        top = self.degree - extra - _deg(p)
        if top < 0 or p.is_zero():
            return []
        out = []
        for m in monomial_basis(self.nvars, top):
            v = self.apply(Polynomial.monomial(m) * p)
            if v:
                out.append((m, v))
        return out


def point_evaluation(point: Sequence[Rational], degree: int, label: str = "point") -> PseudoExpectation:
    pt = tuple(Fraction(v) for v in point)

    def value(m: Monomial) -> Fraction:
        out = Fraction(1)
        for x, e in zip(pt, m):
            if e:
                out *= x ** e
        return out

    return PseudoExpectation(len(pt), degree, value, label)


def phi_eval(n: int, eps: Rational, m: Monomial) -> Fraction:
    """``(2 eps)^(sum_i 2^(i-1) m_i)``."""
    eps = _check_eps(eps)
    if len(m) != n:
        raise ValueError(f"monomial has {len(m)} exponents, expected {n}")
    return (2 * eps) ** sum(e << i for i, e in enumerate(m))


def phi(n: int, eps: Rational, degree: int) -> PseudoExpectation:
    eps = _check_eps(eps)
    return PseudoExpectation(n, degree, lambda m: phi_eval(n, eps, m), f"phi({n},{eps})", count_base=n)


def knapsack_value(k: int, r: Fraction, t: int) -> Fraction:
    """``prod_{j < t} (k + r - j) / (2k - j)``: the value on any product of ``t`` distinct variables."""
    out = Fraction(1)
    for j in range(t):
        out *= (k + r - j) / Fraction(2 * k - j)
    return out


def knapsack_pseudoexpectation(k: int, r: Rational, d: int, check: bool = True) -> PseudoExpectation:
    """Symmetric functional on ``2k`` Boolean variables pretending ``sum w = k + r``.

    Monomials are reduced with ``w^2 = w`` first, so Boolean constraints are
    annihilated at every degree.  With ``check`` the pseudo-moment matrix is
    verified PSD exactly and a failure raises :class:`ParameterError`.
    """
    r = Fraction(r)
    if k < 1:
        raise ParameterError("k must be positive")
    if not 0 < r < 1:
        raise ParameterError(f"r must lie in (0, 1), got {r}")
    if d < 0 or d > 2 * k:
        raise ParameterError(f"degree {d} outside 0..{2 * k}")
    values = [knapsack_value(k, r, t) for t in range(2 * k + 1)]
    E = PseudoExpectation(2 * k, d, lambda m: values[sum(1 for e in m if e)], f"knapsack({k},{r})",
                          count_base=2 * k)
    if check and not E.is_psd():
        raise ParameterError(f"knapsack functional (k={k}, r={r}) is not PSD at degree {d}")
    return E


def block_ratios(n: int, eps: Fraction) -> List[Fraction]:
    """``r_i = (2 eps)^(2^(i-1))`` for ``i = 1..n``: the value each block sum is pushed to."""
    return [(2 * eps) ** (1 << i) for i in range(n)]


def product_functional(n: int, k: int, eps: Rational, d: int, check: bool = True) -> PseudoExpectation:
    """``Phi[w_T] = prod_i phi_(r_i)[w_(T_i)]`` over the ``n`` blocks of ``2k`` variables.

    The truncated moment matrix of a product of PSD functionals is a principal
    submatrix of a Kronecker product of PSD matrices, so checking every block
    functional at degree ``d`` certifies ``Phi``.
    """
    eps = _check_eps(eps)
    ratios = block_ratios(n, eps)
    tables = []
    for r in ratios:
        knapsack_pseudoexpectation(k, r, d, check=check)
        tables.append([knapsack_value(k, r, t) for t in range(2 * k + 1)])
    w = 2 * k

    def value(m: Monomial) -> Fraction:
        out = Fraction(1)
        for i in range(n):
            t = sum(1 for e in m[i * w:(i + 1) * w] if e)
            if t:
                out *= tables[i][t]
        return out

    return PseudoExpectation(n * w, d, value, f"product({n},{k},{eps})", count_base=n * k)


# -- explicit certificates --------------------------------------------------------

def chain_certificate(n: int, eps: Rational) -> SoSCertificate:
    """Degree-2 certificate of ``eps - y_1 >= 0`` over ``chain(n, eps)``.

    With ``a = n / (4 eps)`` it is the sum over ``i`` of
    ``(sqrt(eps/n) - a^((2^i - 1)/2) y_i)^2``, whose Gram matrix in basis
    ``(1, y_1, ..., y_n)`` is rational: ``C[0][0] = eps``,
    ``C[0][i] = -a^(2^(i-1) - 1) / 2`` and ``C[i][i] = a^(2^i - 1)``.  The
    multiplier of ``y_i^2 - y_(i+1)`` (and of ``y_n^2``) is ``-a^(2^i - 1)``.
    """
    sys = chain(n, eps)
    eps = Fraction(eps)
    a = Fraction(n) / (4 * eps)
    basis = monomial_basis(n, 1)
    C = linalg.zeros(n + 1)
    C[0][0] = eps
    for i in range(1, n + 1):
        C[0][i] = C[i][0] = -a ** ((1 << (i - 1)) - 1) / 2
        C[i][i] = a ** ((1 << i) - 1)
    lam = [Polynomial.const(n, -a ** ((1 << i) - 1)) for i in range(1, n + 1)]
    target = Polynomial.const(n, eps) - Polynomial.var(n, 0)
    return SoSCertificate.create(n, 2, C, lam, target, basis=basis)


def chain_max_coefficient(n: int, eps: Rational) -> Fraction:
    return (Fraction(n) / (4 * Fraction(eps))) ** ((1 << n) - 1)


def boolean_chain_certificate(n: int, k: int, eps: Rational) -> SoSCertificate:
    """The chain certificate with ``y_i -> sum_j w_ij - k`` substituted.

    The Gram matrix becomes ``T C T^T`` where column ``i`` of ``T`` holds the
    coefficients of the image of ``(1, y_1, ..., y_n)[i]`` in the degree-1
    monomial basis of the ``2kn`` Boolean variables.
    """
    sys = boolean_chain(n, k, eps)
    base = chain_certificate(n, eps)
    nv = sys.nvars
    basis = monomial_basis(nv, 1)
    images = [Polynomial.const(nv, 1)] + [block_sum(n, k, i) for i in range(n)]
    T = linalg.transpose([img.to_vector(basis) for img in images])
    C = linalg.matmul(T, linalg.matmul(base.gram_C, linalg.transpose(T)))
    lam = [Polynomial.const(nv, q.coeff((0,) * n)) for q in base.eq_multipliers]
    lam += [Polynomial.zero(nv)] * nv
    target = Polynomial.const(nv, Fraction(eps)) - images[1]
    return SoSCertificate.create(nv, 2, C, lam, target, basis=basis)


# -- audits and bounds ------------------------------------------------------------

class AuditError(AssertionError):
    """A property the dual construction relies on failed."""


@dataclass
class PhiAudit:
    n: int
    eps: Fraction
    d: int
    value_eps_minus_y1: Fraction
    psd: bool
    annihilation: bool
    monomial_bound: bool
    sharp_bound: Fraction
    bullet_bound: Fraction
    worst_ratio: Fraction
    sharp_aggregate_holds: bool
    bullet_aggregate_holds: bool

    @property
    def ok(self) -> bool:
        return self.psd and self.annihilation and self.monomial_bound and self.value_eps_minus_y1 == -self.eps


def phi_audit(n: int, eps: Rational, d: int) -> PhiAudit:
    """Exact audit of ``phi`` up to degree ``d``.

    Hard checks (raising :class:`AuditError`): ``phi[eps - y_1] = -eps``; PSD
    pseudo-moment matrix; ``phi[m (y_i^2 - y_(i+1))] = 0`` for ``deg m <= d - 2``;
    ``|phi[m y_n^2]| <= (2eps)^(2^n)`` for the same ``m``.  Reported: the
    worst-case ``sup |phi[lam y_n^2]| / ||lam||`` in units of ``(2eps)^(2^n)``,
    against ``n^d`` (sharp exponent) and against ``n^d (2eps)^(2^(n-1))``.
    """
    eps = _check_eps(eps)
    if d < 2:
        raise ParameterError("audit needs d >= 2")
    sys = chain(n, eps)
    P = phi(n, eps, d)
    y1 = Polynomial.var(n, 0)
    val = P.apply(Polynomial.const(n, eps) - y1)
    psd = P.is_psd()
    annih = all(P.annihilates(p) for p in sys.equalities[:-1])
    last = sys.equalities[-1]
    sharp = (2 * eps) ** (1 << n)
    bullet = (2 * eps) ** (1 << (n - 1))
    mults = monomial_basis(n, d - 2)
    vals = [abs(P.apply(Polynomial.monomial(m) * last)) for m in mults]
    mono_ok = all(v <= sharp for v in vals)
    worst = sum(vals, Fraction(0))
    report = PhiAudit(
        n, eps, d, val, psd, annih, mono_ok, sharp, bullet, worst / sharp,
        worst <= n ** d * sharp, worst <= n ** d * bullet,
    )
    if not report.ok:
        raise AuditError(f"phi audit failed: {report}")
    return report


def monomial_count_factor(base: int, nvars: int, d: int) -> int:
    """``max(base^d, #monomials of degree <= d-2)``: bounds the number of terms of a multiplier of a quadratic."""
    return max(base ** d, math.comb(nvars + d - 2, d - 2) if d >= 2 else 1)


def coefficient_lower_bound(n: int, k: Optional[int], eps: Rational, d: int) -> Fraction:
    """Lower bound on the largest coefficient of the ``y_n^2`` multiplier in any degree-``d`` proof.

    Plain chain (``k`` is ``None``): ``eps / (N (2eps)^(2^n))`` with ``N`` from
    :func:`monomial_count_factor` with base ``n``, which equals ``n^d`` except
    for ``n = 1``.  Boolean chain: the same with base ``nk`` over ``2kn``
    variables; the product functional is verified PSD at degree ``d``
    first, and a failure raises :class:`ParameterError`.
    """
    eps = _check_eps(eps)
    if d < 2:
        raise ParameterError("degree must be at least 2")
    sharp = (2 * eps) ** (1 << n)
    if k is None:
        return eps / (monomial_count_factor(n, n, d) * sharp)
    product_functional(n, k, eps, d, check=True)
    return eps / (monomial_count_factor(n * k, 2 * k * n, d) * sharp)


@dataclass
class DualAudit:
    target_value: Fraction
    gram_value: Fraction
    inequality_values: List[Fraction]
    equality_values: List[Fraction]
    active_index: Optional[int]
    implied_bound: Fraction
    actual_norm: Fraction
    holds: bool
    notes: List[str] = field(default_factory=list)


def audit_certificate_against_dual(cert: SoSCertificate, E: PseudoExpectation,
                                   sys: ConstraintSystem) -> DualAudit:
    """Apply ``E`` to every piece of ``cert`` and bound the one multiplier it cannot annihilate.

    ``E[target - shift] = E[<C, vv^T>] + sum E[D-terms] + sum E[lam_j p_j]`` with
    the Gram term nonnegative.  If exactly one equality ``p_j`` is not
    annihilated, ``|E[lam_j p_j]| >= -E[target - shift]`` and
    ``|E[lam_j p_j]| <= ||lam_j|| N sup_m |E[m p_j]|`` give the implied bound.
    """
    if E.degree < cert.degree:
        raise ValueError(f"functional degree {E.degree} below certificate degree {cert.degree}")
    if E.nvars != cert.nvars:
        raise ValueError("variable count mismatch")
    notes = []
    T = E.apply(cert.target - cert.objective_shift)
    G = E.apply(gram_polynomial(cert.gram_C, cert.basis, cert.nvars))
    if G < 0:
        raise AuditError(f"functional is negative ({G}) on the Gram term")
    ineq = [E.apply(gram_polynomial(D, cert.basis, cert.nvars) * q) for D, q in zip(cert.gram_D, sys.inequalities)]
    eqv = [E.apply(lam * p) if lam else Fraction(0) for lam, p in zip(cert.eq_multipliers, sys.equalities)]
    if T != G + sum(ineq) + sum(eqv):
        raise AuditError("functional values do not add up; certificate identity broken")
    active = [j for j, p in enumerate(sys.equalities) if not E.annihilates(p, extra=E.degree - cert.degree)]
    if len(active) > 1:
        raise AuditError(f"functional annihilates all but {len(active)} equalities; need at most one")
    d = cert.degree
    if T >= 0 or not active:
        if T < 0:
            notes.append("negative target value with every equality annihilated")
        implied = Fraction(0)
        j = active[0] if active else None
        actual = norm(cert.eq_multipliers[j]) if j is not None else Fraction(0)
        return DualAudit(T, G, ineq, eqv, j, implied, actual, actual >= implied, notes)
    j = active[0]
    p = sys.equalities[j]
    mults = monomial_basis(cert.nvars, d - _deg(p))
    sup = max(abs(E.apply(Polynomial.monomial(m) * p)) for m in mults)
    count = max(E.count_base ** d, len(mults))
    implied = -T / (count * sup)
    actual = norm(cert.eq_multipliers[j])
    if sum(ineq):
        notes.append("inequality terms are nonzero; bound uses target value only")
    return DualAudit(T, G, ineq, eqv, j, implied, actual, actual >= implied, notes)


@dataclass
class ProductAudit:
    boolean_annihilation: bool
    chain_annihilation: bool
    last_scaling: bool
    psd: bool
    values_in_unit_interval: bool
    values_bounded_by_one: bool
    negative_monomials: List[Tuple[Monomial, Fraction]]


def product_audit(n: int, k: int, eps: Rational, d: int) -> ProductAudit:
    """Exact checks of the product functional's properties up to degree ``d``."""
    eps = _check_eps(eps)
    sys = boolean_chain(n, k, eps)
    Phi = product_functional(n, k, eps, d, check=False)
    nv = sys.nvars
    bools = sys.equalities[n:]
    chain_eqs = sys.equalities[:n - 1]
    last = sys.equalities[n - 1]
    bool_ok = all(Phi.annihilates(p) for p in bools)
    chain_ok = all(Phi.annihilates(p) for p in chain_eqs)
    sharp = (2 * eps) ** (1 << n)
    scaling = all(
        Phi.apply(Polynomial.monomial(m) * last) == sharp * Phi.value(m)
        for m in monomial_basis(nv, d - 2)
    )
    vals = Phi.values
    negative = [(m, v) for m, v in vals.items() if v < 0]
    return ProductAudit(
        bool_ok, chain_ok, scaling, Phi.is_psd(),
        all(0 <= v <= 1 for v in vals.values()),
        all(abs(v) <= 1 for v in vals.values()),
        negative,
    )


# -- growth table -----------------------------------------------------------------

@dataclass(frozen=True)
class GrowthRow:
    n: int
    eps: Fraction
    degree: int
    upper_bits: int
    lower_bits: int


def growth_row(n: int, eps: Rational, degree: int = 2) -> GrowthRow:
    from .certificate import cert_stats, verify
    from .poly import rational_bits

    eps = _check_eps(eps)
    cert = chain_certificate(n, eps)
    if not verify(cert, chain(n, eps)):
        raise AuditError(f"chain certificate for n={n} does not verify")
    upper = rational_bits(cert_stats(cert).max_abs_coeff)
    lower = rational_bits(coefficient_lower_bound(n, None, eps, degree))
    return GrowthRow(n, eps, degree, upper, lower)
