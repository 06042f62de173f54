"""Shared constructions for the rewrite and acceptance tests."""

from fractions import Fraction

from sosbits.certificate import random_certificate
from sosbits.moment import kernel, moment_matrix
from sosbits.poly import Polynomial
from sosbits.richness import Derivation, derive_in_degree, richness_report
from sosbits.rewrite import inflate_certificate
from sosbits.systems import enumerate_solutions


def inflated_instance(sys, degree, rng, t=10 ** 6):
    """A clean random certificate plus ``t u u^T`` for a random kernel vector ``u``.

    Returns ``(clean, inflated, S, report)``; the inflated certificate proves the
    same target with coefficients of size about ``t``.
    """
    S = enumerate_solutions(sys)
    h = degree // 2
    clean = random_certificate(sys, degree, rng)
    K = kernel(moment_matrix(S, h))
    polys = K.polynomials(sys.nvars)
    wits = derive_in_degree(sys, polys, 2 * h)
    u = [Fraction(0)] * len(K.basis)
    lam = {}
    for vec, w in zip(K.vectors, wits):
        c = rng.randint(-3, 3) or 1
        u = [a + c * b for a, b in zip(u, vec)]
        for i, q in w.multipliers:
            lam[i] = lam.get(i, Polynomial.zero(sys.nvars)) + c * q
    target = Polynomial.from_vector(sys.nvars, K.basis, u)
    witness = Derivation.build(target, lam, sys.equalities)
    inflated = inflate_certificate(clean, sys, u, witness, t)
    report = richness_report(sys, S, degree, degree)
    return clean, inflated, S, report
