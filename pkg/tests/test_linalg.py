import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from sosbits import linalg


def rand_matrix(rng, m, n, lo=-3, hi=3, rank=None):
    if rank is None:
        return [[Fraction(rng.randint(lo, hi)) for _ in range(n)] for _ in range(m)]
    a = [[Fraction(rng.randint(lo, hi)) for _ in range(rank)] for _ in range(m)]
    b = [[Fraction(rng.randint(lo, hi)) for _ in range(n)] for _ in range(rank)]
    return linalg.matmul(a, b)


def test_nullspace_against_sympy():
    rng = random.Random(7)
    for _ in range(60):
        m, n = rng.randint(1, 6), rng.randint(1, 7)
        a = rand_matrix(rng, m, n, rank=rng.randint(0, min(m, n)))
        basis = linalg.nullspace(a, n)
        assert len(basis) == n - sympy.Matrix(a).rank()
        for vec in basis:
            assert all(x == 0 for x in linalg.matvec(a, vec))
        if basis:
            assert linalg.rank(basis) == len(basis)


def test_nullspace_canonical_example():
    a = [[1, Fraction(1, 2), Fraction(1, 2)], [Fraction(1, 2), Fraction(1, 2), 0], [Fraction(1, 2), 0, Fraction(1, 2)]]
    assert linalg.nullspace(a) == [[-1, 1, 1]]
    assert linalg.nullspace(linalg.identity(3)) == []


def test_solve_against_sympy():
    rng = random.Random(11)
    for _ in range(60):
        m, n = rng.randint(1, 5), rng.randint(1, 6)
        a = rand_matrix(rng, m, n, rank=rng.randint(1, min(m, n)))
        if rng.random() < 0.5:
            x = [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(n)]
            b = linalg.matvec(a, x)
        else:
            b = [Fraction(rng.randint(-3, 3)) for _ in range(m)]
        (sol,) = linalg.solve(a, [b])
        aug_rank = sympy.Matrix([list(r) + [bi] for r, bi in zip(a, b)]).rank()
        consistent = aug_rank == sympy.Matrix(a).rank()
        assert (sol is not None) == consistent
        if sol is not None:
            assert linalg.matvec(a, sol) == b
            assert sum(1 for s in sol if s) <= sympy.Matrix(a).rank()


def test_charpoly_against_sympy():
    rng = random.Random(3)
    t = sympy.Symbol("t")
    for _ in range(40):
        n = rng.randint(1, 6)
        a = rand_matrix(rng, n, n)
        c = linalg.charpoly(a)
        expected = sympy.Poly(sympy.Matrix(a).charpoly(t).as_expr(), t).all_coeffs()[::-1]
        assert [sympy.Rational(x.numerator, x.denominator) for x in c] == expected


@pytest.mark.parametrize("seed", range(5))
def test_ldlt_matches_eigenvalue_sign(seed):
    rng = random.Random(seed)
    for _ in range(20):
        n = rng.randint(1, 5)
        b = rand_matrix(rng, n, rng.randint(1, n))
        psd = linalg.matmul(b, linalg.transpose(b))
        assert linalg.is_psd(psd)
        shift = [[psd[i][j] - (Fraction(1, 10) if i == j else 0) for j in range(n)] for i in range(n)]
        eigs = sympy.Matrix(shift).eigenvals()
        truly_psd = all(sympy.re(sympy.N(e, 50)) >= -1e-40 for e in eigs)
        assert linalg.is_psd(shift) == truly_psd


def test_ldlt_hand_built_cases():
    assert not linalg.is_psd([[1, 2], [2, 1]])
    assert not linalg.is_psd([[0, 1], [1, 0]])
    assert not linalg.is_psd([[-1]])
    assert linalg.is_psd([[0, 0], [0, 0]])
    assert linalg.is_psd([[1, 1], [1, 1]])
    with pytest.raises(ValueError):
        linalg.ldlt([[1, 2], [0, 1]])


def test_orthogonal_projector():
    vecs = [[1, 1, 0], [1, 0, 1]]
    P = linalg.orthogonal_projector(vecs, 3)
    assert linalg.matmul(P, P) == P
    assert linalg.is_symmetric(P)
    for vec in vecs:
        assert linalg.matvec(P, vec) == [Fraction(x) for x in vec]
    assert linalg.matvec(P, [1, -1, -1]) == [0, 0, 0]


def test_inverse():
    a = linalg.to_fractions([[2, 1], [1, 1]])
    assert linalg.matmul(a, linalg.inverse(a)) == linalg.identity(2)
    with pytest.raises(ValueError):
        linalg.inverse(linalg.to_fractions([[1, 1], [1, 1]]))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-4, 4), min_size=4, max_size=4), min_size=1, max_size=4))
def test_rank_nullity(rows):
    assert linalg.rank(rows) + len(linalg.nullspace(rows, 4)) == 4
