import random
from fractions import Fraction

import pytest
from helpers import inflated_instance

from sosbits import linalg
from sosbits.certificate import cert_stats, random_certificate, verify
from sosbits.moment import kernel, moment_matrix
from sosbits.poly import Polynomial
from sosbits.richness import richness_report
from sosbits.rewrite import (
    RewriteError,
    basis_kernel,
    inflate_certificate,
    rewrite_bounded,
    theoretical_bound,
)
from sosbits.systems import chain, enumerate_solutions, max_bisection, max_csp

F = Fraction


@pytest.mark.parametrize("sys,degree", [(max_csp(3), 4), (max_bisection(2), 2), (max_bisection(3), 2)])
def test_inflated_certificate_is_brought_back(sys, degree):
    rng = random.Random(17)
    for _ in range(3):
        clean, big, S, report = inflated_instance(sys, degree, rng)
        assert verify(big, sys).ok
        assert cert_stats(big).max_abs_coeff >= 10 ** 5
        out = rewrite_bounded(big, sys, S, report)
        assert verify(out.cert_out, sys).ok
        assert out.cert_out.target == big.target
        assert out.stats_after.bit_size <= out.theoretical_bound_bits
        assert out.stats_after.max_abs_coeff < 10 ** 3
        assert out.trace_ok and out.averaging_ok
        assert [p.name for p in out.phases] == ["input", "absorbed", "output"]


def test_projected_gram_kills_kernel():
    rng = random.Random(3)
    sys = max_bisection(2)
    _, big, S, report = inflated_instance(sys, 2, rng)
    out = rewrite_bounded(big, sys, S, report)
    for vec in basis_kernel(out.cert_out.basis, S):
        assert all(x == 0 for x in linalg.matvec(out.cert_out.gram_C, vec))


def test_clean_certificate_stays_small():
    rng = random.Random(8)
    sys = max_csp(2)
    S = enumerate_solutions(sys)
    report = richness_report(sys, S, 2, 2)
    cert = random_certificate(sys, 2, rng)
    out = rewrite_bounded(cert, sys, S, report)
    assert verify(out.cert_out, sys).ok
    # max_csp(2) at degree 1 has a trivial kernel, so the Gram matrix is untouched
    assert out.kernel_rank == 0
    assert out.cert_out.gram_C == cert.gram_C


def test_rewrite_refuses_non_rich_system():
    sys = chain(3, F(1, 4))
    S = enumerate_solutions(sys)
    report = richness_report(sys, S, 2, 2)
    cert = random_certificate(sys, 2, random.Random(0))
    with pytest.raises(RewriteError):
        rewrite_bounded(cert, sys, S, report)
    with pytest.raises(RewriteError):
        theoretical_bound(report, sys, cert.target)


def test_rewrite_refuses_stale_report_and_bad_certificate():
    sys = max_bisection(2)
    S = enumerate_solutions(sys)
    report = richness_report(sys, S, 2, 2)
    cert = random_certificate(sys, 2, random.Random(1))
    low = richness_report(sys, S, 1, 2)
    with pytest.raises(RewriteError):
        rewrite_bounded(cert, sys, S, low)
    broken = cert.replace(target=cert.target + 1)
    with pytest.raises(RewriteError):
        rewrite_bounded(broken, sys, S, report)


def test_theoretical_bound_monotone():
    sys = max_csp(2)
    S = enumerate_solutions(sys)
    report = richness_report(sys, S, 2, 2)
    x = Polynomial.var(2, 0)
    small = theoretical_bound(report, sys, x)
    assert theoretical_bound(report, sys, 1000 * x) > small
    assert theoretical_bound(report, sys, x, s_norm=F(10 ** 6)) > small
    assert theoretical_bound(report, sys, x, c0=64) == 2 * small
    report.delta = report.delta / 2 ** 20
    assert theoretical_bound(report, sys, x) > small


def test_inflate_requires_matching_witness():
    rng = random.Random(0)
    sys = max_bisection(1)
    cert = random_certificate(sys, 2, rng)
    S = enumerate_solutions(sys)
    K = kernel(moment_matrix(S, 1))
    _, _, _, report = inflated_instance(sys, 2, rng)
    wrong = report.witnesses[0]
    with pytest.raises(ValueError):
        inflate_certificate(cert, sys, [2 * v for v in K.vectors[0]], wrong, 10)
