import random
from fractions import Fraction

import mpmath
import pytest
import sympy

from sosbits import linalg
from sosbits.moment import (
    EmptySolutionSetError,
    NonBooleanError,
    charpoly_eig_bound,
    integer_eig_lower_bound,
    kernel,
    moment_matrix,
    spectral_bounds,
    spectral_richness,
    sphere_average,
    sphere_moment_matrix,
    sphere_scale,
)
from sosbits.poly import Polynomial, monomial_basis, variables
from sosbits.systems import SolutionSet, enumerate_solutions, max_bisection, max_csp

F = Fraction
half = F(1, 2)


def test_moment_matrix_bisection_example():
    M = moment_matrix(enumerate_solutions(max_bisection(1)), 1)
    assert M.entries == [[1, half, half], [half, half, 0], [half, 0, half]]
    assert kernel(M).vectors == ((-1, 1, 1),)
    assert M.scale == 2


def test_max_csp_example_spectrum():
    M = moment_matrix(enumerate_solutions(max_csp(1)), 1)
    assert M.entries == [[1, half], [half, half]]
    assert len(kernel(M)) == 0
    sr = spectral_bounds(M)
    assert sr.delta == F(1, 32)
    assert sr.sharp_bound == F(1, 6)
    # exact smallest eigenvalue is (3 - sqrt 5)/4 ~ 0.19
    assert sr.sharp_bound <= (3 - 5 ** 0.5) / 4


def test_sphere_average_examples():
    assert sphere_average(3, (2, 2, 0)) == F(1, 15)
    assert sphere_average(3, (1, 1, 0)) == 0
    assert sphere_average(2, (2, 0)) == half
    assert sphere_average(4, (0, 0, 0, 0)) == 1
    assert sphere_average(1, (4,)) == 1


def _sphere_quadrature(n, m):
    if n == 2:
        f = lambda t: mpmath.cos(t) ** m[0] * mpmath.sin(t) ** m[1]
        return mpmath.quad(f, [0, 2 * mpmath.pi]) / (2 * mpmath.pi)
    f = lambda t, p: ((mpmath.sin(t) * mpmath.cos(p)) ** m[0] * (mpmath.sin(t) * mpmath.sin(p)) ** m[1]
                      * mpmath.cos(t) ** m[2] * mpmath.sin(t))
    return mpmath.quad(f, [0, mpmath.pi], [0, 2 * mpmath.pi]) / (4 * mpmath.pi)


@pytest.mark.parametrize("n,m", [
    ((2, (2, 0))), (2, (4, 2)), (2, (3, 1)), (2, (6, 0)),
    (3, (2, 2, 0)), (3, (2, 2, 2)), (3, (4, 0, 2)), (3, (0, 0, 6)), (3, (1, 2, 0)),
])
def test_sphere_average_against_quadrature(n, m):
    mpmath.mp.dps = 30
    assert abs(float(sphere_average(n, m)) - float(_sphere_quadrature(n, m))) < 1e-9


@pytest.mark.parametrize("n,d", [(2, 2), (3, 2), (3, 4), (2, 3)])
def test_sphere_moment_matrix_scale_and_psd(n, d):
    M = sphere_moment_matrix(n, d)
    assert M.scale == sphere_scale(n, d)
    M.scaled()  # integral after scaling
    assert linalg.is_psd(M.entries)


@pytest.mark.parametrize("n,d", [(2, 3), (3, 2), (3, 4)])
def test_sphere_kernel_is_multiples_of_norm_constraint(n, d):
    M = sphere_moment_matrix(n, d)
    K = kernel(M)
    xs = variables(n)
    g = sum((x * x for x in xs), Polynomial.zero(n)) - 1
    mults = [Polynomial.monomial(m) * g for m in monomial_basis(n, d - 2)]
    expected = [p.to_vector(list(M.basis)) for p in mults]
    assert len(K) == linalg.rank(expected)
    combined = [list(v) for v in K.vectors] + expected
    assert linalg.rank(combined) == len(K)


@pytest.mark.parametrize("sys,d", [(max_csp(3), 2), (max_bisection(2), 2), (max_bisection(3), 2)])
def test_moment_matrix_psd_and_kernel_vanishes(sys, d):
    S = enumerate_solutions(sys)
    M = moment_matrix(S, d)
    assert linalg.is_psd(M.entries)
    for p in kernel(M).polynomials(sys.nvars):
        assert all(p.evaluate(pt) == 0 for pt in S.points)
    # kernel dimension = basis size - rank of the evaluation map
    assert len(kernel(M)) == M.size - linalg.rank(M.entries)


def test_kernel_dimension_examples():
    assert len(kernel(moment_matrix(enumerate_solutions(max_bisection(4)), 3))) == 109
    assert len(kernel(sphere_moment_matrix(3, 4))) == 10


def test_moment_matrix_errors():
    with pytest.raises(EmptySolutionSetError):
        moment_matrix(SolutionSet.from_points([]), 1)
    with pytest.raises(NonBooleanError):
        spectral_richness(SolutionSet.from_points([(F(1, 2), 0)]), 1)


def test_integer_bound_guards():
    with pytest.raises(ValueError):
        integer_eig_lower_bound([[1, 2], [3, 1]], 3, 2)
    with pytest.raises(ValueError):
        integer_eig_lower_bound([[5]], 4, 1)
    with pytest.raises(ValueError):
        integer_eig_lower_bound([[1, 0], [0, 1]], 1, 1)
    assert integer_eig_lower_bound([[2, 1], [1, 2]], 2, 2) == F(1, 16)


def test_bounds_against_exact_smallest_eigenvalue():
    rng = random.Random(5)
    for _ in range(30):
        n = rng.randint(1, 5)
        b = [[rng.randint(-2, 2) for _ in range(rng.randint(1, n))] for _ in range(n)]
        a = [[sum(x * y for x, y in zip(r1, r2)) for r2 in b] for r1 in b]
        eigs = [e for e in sympy.Matrix(a).eigenvals(multiple=True)]
        nonzero = [sympy.N(e, 40) for e in eigs if abs(sympy.N(e, 40)) > 1e-30]
        if not nonzero:
            continue
        lo = min(abs(e) for e in nonzero)
        B = max(1, max(abs(v) for row in a for v in row))
        assert integer_eig_lower_bound(a, B, n) <= lo
        sharp = charpoly_eig_bound(a)
        assert sharp is not None and sharp <= lo + sympy.Float(1e-30)
