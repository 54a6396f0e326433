import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from sumphase.enumeration import count_expressions, expression_array
from sumphase.errors import EpsilonNonpositive
from sumphase.forms import new_linear_form
from sumphase.poisson import (EmpiricalPmf, certificate_from_moments, empirical_count_law, exhaustive_law,
                              lower_bound_certificate, mean_count, stein_chen_bounds, tv_standard_error,
                              tv_to_poisson, zero_probability_exact)
from sumphase.seeding import derive_seed
from sumphase.sets import evaluate_image, representation_count, sample_subset

F = new_linear_form
HALF = Fraction(1, 2)


def pairwise_oracle(form, N, k, p):
    """mu, b1, b2, Var(W) by looping over all ordered pairs of classes."""
    ground = [frozenset(r) for r in expression_array(form, N, k).tolist()]
    mu = sum(p ** len(s) for s in ground)
    b1 = b2 = var = 0
    for i, a in enumerate(ground):
        for j, b in enumerate(ground):
            joint, prod = p ** len(a | b), p ** len(a) * p ** len(b)
            var += joint - prod
            if a & b:
                b1 += prod
                if i != j:
                    b2 += joint
    return mu, b1, b2, var


def test_worked_example():
    f = F([1, 1])
    acc = stein_chen_bounds(f, 2, 2, HALF)
    assert (acc.mu, acc.b1, acc.b2, acc.b3) == (Fraction(3, 4), Fraction(5, 16), 0, 0)
    assert mean_count(f, 2, 2, HALF) == Fraction(3, 4)
    assert mean_count(f, 2, 2, 0.5) == pytest.approx(0.75)
    assert zero_probability_exact(f, 2, 2, HALF) == Fraction(3, 8)
    assert exhaustive_law(f, 2, 2, HALF)[0] == Fraction(3, 8)


@pytest.mark.parametrize("raw", [[1, 1], [1, -1], [1, 1, 1], [2, 1, -1]])
def test_single_class_offset(raw):
    f = F(raw)
    p = Fraction(1, 3)
    # the only class at k = 0 puts 0 on positive and N on negative coefficients
    q = p if f.d == 0 else p * p
    assert count_expressions(f, 5, 0) == 1
    assert mean_count(f, 5, 0, p) == q
    acc = stein_chen_bounds(f, 5, 0, p)
    assert acc.b1 == q * q and acc.b2 == 0
    assert mean_count(f, 5, 7, 1) == count_expressions(f, 5, 7)


@pytest.mark.parametrize("raw", [[1, 1], [1, -1], [2, -1], [1, 1, 1], [1, 1, -1], [2, 1, -1], [1, 1, -1, -1]])
def test_bucket_sums_match_pairwise_oracle(raw):
    f = F(raw)
    p = Fraction(2, 7)
    for N in (3, 6):
        for k in range(0, f.m * N + 1, 2):
            acc = stein_chen_bounds(f, N, k, p)
            assert (acc.mu, acc.b1, acc.b2, acc.variance) == pairwise_oracle(f, N, k, p)
            assert acc.b1 >= acc.sum_p_squared and acc.b2 >= 0
            fl = stein_chen_bounds(f, N, k, float(p))
            assert fl.mu == pytest.approx(float(acc.mu)) and fl.b2 == pytest.approx(float(acc.b2), abs=1e-12)


def test_counting_dp_fallback():
    f = F([1, 1, -1])
    for k in (0, 9, 15, 30):
        assert mean_count(f, 10, k, Fraction(1, 4), cap=0) == mean_count(f, 10, k, Fraction(1, 4))


def test_b_sums_shrink_with_p():
    f = F([1, 1, 1])
    accs = [stein_chen_bounds(f, 30, 45, p) for p in (0.2, 0.1, 0.05)]
    assert accs[0].b1 > accs[1].b1 > accs[2].b1
    assert accs[0].b2 > accs[1].b2 > accs[2].b2


@pytest.mark.parametrize("raw", [[1, 1], [1, -1], [1, 1, -1]])
def test_exhaustive_law_matches_exact_moments(raw):
    f = F(raw)
    p = Fraction(1, 3)
    N = 5
    for k in range(f.m * N + 1):
        law = exhaustive_law(f, N, k, p)
        assert sum(law.values()) == 1
        mean = sum(w * q for w, q in law.items())
        var = sum(w * w * q for w, q in law.items()) - mean**2
        acc = stein_chen_bounds(f, N, k, p)
        assert mean == acc.mu and var == acc.variance
        if acc.n_classes <= 40:
            assert law.get(0, 0) == zero_probability_exact(f, N, k, p, cap=40)
        # mirror law
        assert law == exhaustive_law(f, N, f.m * N - k, p)


def test_zero_probability_matches_image_membership():
    f = F([2, 1, -1])
    N, p = 40, 0.15
    for i in range(30):
        A = sample_subset(N, p, derive_seed(5, 0, i))
        img = evaluate_image(f, A)
        for k in range(0, f.m * N + 1, 7):
            assert (representation_count(f, A, k) == 0) == (f.target(N, k) not in img)


def test_empirical_law_determinism_and_mean():
    f = F([1, 1, -1])
    N, k, p = 30, 40, 0.2
    a = empirical_count_law(f, N, k, p, 2000, 77)
    b = empirical_count_law(f, N, k, p, 2000, 77)
    assert a.counts == b.counts and sum(a.probabilities.values()) == pytest.approx(1)
    mu = mean_count(f, N, k, p)
    se = math.sqrt(a.variance / a.trials)
    assert abs(a.mean - mu) < 3 * se


def test_empirical_law_small_example():
    pmf = empirical_count_law(F([1, 1]), 2, 2, 0.5, 10**4, 3)
    assert abs(pmf.prob(0) - 3 / 8) < 0.02
    high = empirical_count_law(F([1, 1, 1]), 5, 0, 0.99, 10**4, 3)
    assert high.prob(1) > 0.98


def test_empirical_mirror_law():
    f = F([2, 1, -1])
    N, p = 12, 0.3
    lo = empirical_count_law(f, N, 10, p, 4000, 11)
    hi = empirical_count_law(f, N, f.m * N - 10, p, 4000, 11)
    assert abs(lo.mean - hi.mean) < 4 * math.sqrt((lo.variance + hi.variance) / 4000)


def test_pmf_merge_is_order_free():
    a, b = EmpiricalPmf(), EmpiricalPmf()
    for v in (0, 1, 1, 3):
        a.add(v)
    for v in (2, 0):
        b.add(v)
    assert a.merge(b).counts == b.merge(a).counts and a.merge(b).trials == 6
    assert a.to_json() == {"trials": 4, "counts": {"0": 1, "1": 2, "3": 1}}


def test_tv_examples():
    mu = 1.7
    js = np.arange(200)
    exact = {int(j): float(stats.poisson.pmf(j, mu)) for j in js}
    assert tv_to_poisson(exact, mu) < 1e-12
    assert tv_to_poisson({0: 1.0}, mu) == pytest.approx(1 - math.exp(-mu), abs=1e-12)
    e = math.exp(-0.5)
    want = 0.5 * (abs(0.5 - e) + abs(0.5 - 0.5 * e) + e * (math.exp(0.5) - 1 - 0.5))
    assert tv_to_poisson({0: 0.5, 1: 0.5}, 0.5) == pytest.approx(want, abs=1e-12)
    assert tv_to_poisson({0: 1.0}, 0.0) == 0.0


def test_tv_standard_error():
    pmf = EmpiricalPmf()
    for v in [0] * 50 + [1] * 50:
        pmf.add(v)
    assert tv_standard_error(pmf) == pytest.approx(0.05)


def test_certificate_formula():
    cert = certificate_from_moments(mu=2.0, variance=3.0, fourth_central=20.0, sum_p_squared=0.1, max_p=0.2)
    eps = 0.5
    gamma = 9.0
    psi = gamma / (2 * eps) + 3 * eps + 0.1 / (4 * eps) + 3 * 3 * 0.2 / (2 * eps)
    assert (cert.epsilon, cert.gamma) == (eps, gamma)
    assert cert.psi == pytest.approx(psi) and cert.bound == pytest.approx(eps / (11 + 3 * psi))
    assert cert.bound <= 1
    with pytest.raises(EpsilonNonpositive):
        certificate_from_moments(2.0, 1.5, 5.0, 0.1, 0.2)


def test_certificate_tiny_case_moments():
    f, N, p = F([1, 1, -1]), 7, 0.4
    k = 10
    law = exhaustive_law(f, N, k, p)
    mean = sum(w * q for w, q in law.items())
    var = sum((w - mean) ** 2 * q for w, q in law.items())
    pmf = empirical_count_law(f, N, k, p, 20000, 8)
    assert abs(pmf.mean - mean) < 3 * math.sqrt(var / pmf.trials)
    cert = lower_bound_certificate(f, N, k, p, 0, 0, pmf=pmf)
    acc = stein_chen_bounds(f, N, k, p)
    assert cert.epsilon == pytest.approx(acc.variance / acc.mu - 1)
    assert cert.moments == "exact"


def test_certificate_rejects_poisson_like_case():
    with pytest.raises(EpsilonNonpositive):
        lower_bound_certificate(F([1, 1]), 4, 0, 0.3, 100, 1)
