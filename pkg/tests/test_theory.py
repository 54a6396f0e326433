import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from sumphase.errors import ArityMismatch, PreconditionViolated, WrongRegime
from sumphase.forms import new_linear_form
from sumphase.theory import (RegimeSpec, generalized_ratio, generalized_sumset_critical, hm_identity_residual,
                             hm_identity_sides, predict, predict_critical, predict_subcritical,
                             predict_supercritical_complement)

F = new_linear_form


def test_regime_classification():
    assert RegimeSpec(1, Fraction(1, 2), 2).classification == "critical"
    assert RegimeSpec(1, 0.75, 2).classification == "subcritical"
    assert RegimeSpec(1, 0.4, 2).classification == "supercritical"
    assert RegimeSpec(1, Fraction(2, 3), 3).classification == "critical"
    assert RegimeSpec(1, 0.8, 3).local_classification == "poisson"
    assert RegimeSpec(1, 0.4, 3).local_classification == "non_poisson"
    with pytest.warns(UserWarning):
        assert RegimeSpec(1, 2 / 3 + 1e-15, 3).classification == "critical"
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert RegimeSpec(1, 0.5, 2).classification == "critical"
    for bad in ((0, 0.5, 2), (1, 1.0, 2), (1, 0.0, 2), (1, 0.5, 1)):
        with pytest.raises(ValueError):
            RegimeSpec(*bad)


def test_subcritical_examples():
    assert predict_subcritical(F([1, 1]), 1000, 0.1).value == pytest.approx(5000)
    assert predict_subcritical(F([1, 1, -1]), 100, 0.1).value == pytest.approx(500)
    r = predict_subcritical(F([1, 1, 1]), 100, 0.1).value / predict_subcritical(F([1, 1, -1]), 100, 0.1).value
    assert r == pytest.approx(1 / 3)
    with pytest.raises(WrongRegime):
        predict_subcritical(F([1, 1]), 100, 0.1, RegimeSpec(1, 0.4, 2))


def test_critical_examples():
    img, comp = predict_critical(F([1, -1]), 1.0)
    assert comp == pytest.approx(2 * (1 - math.exp(-1)), abs=1e-9)
    assert img + comp == pytest.approx(2, abs=1e-12)
    assert predict_critical(F([1, 1, -1]), 1e-4)[1] == pytest.approx(3, abs=1e-6)
    u1, u2, c = 2, -1, 1.0
    closed = 2 * 2 * (1 - math.exp(-c * c / 2)) / c**2 + (2 - 1) * math.exp(-c * c / 2)
    assert predict_critical(F([u1, u2]), c)[1] == pytest.approx(closed, abs=1e-6)


@pytest.mark.parametrize("raw", [[1, 1], [1, -1], [2, 1, -1], [1, 1, 1], [3, -2], [1, 1, -1, -1]])
def test_critical_coefficients_sum_and_monotonicity(raw):
    f = F(raw)
    comps = []
    for c in np.linspace(0.2, 3, 8):
        img, comp = predict_critical(f, float(c))
        assert img + comp == pytest.approx(f.m, abs=1e-9)
        comps.append(comp)
    assert all(a > b for a, b in zip(comps, comps[1:]))


@pytest.mark.parametrize("s, d", [(2, 0), (1, 1), (3, 0), (2, 1), (2, 2), (4, 1)])
def test_generalized_sumset_path_agrees(s, d):
    f = F([1] * s + [-1] * d)
    for c in (0.5, 1.0, 1.7):
        assert generalized_sumset_critical(s, d, c)[1] == pytest.approx(predict_critical(f, c)[1], abs=1e-9)


def test_supercritical_examples():
    p = 0.01
    assert predict_supercritical_complement(F([1, -1]), p).value == pytest.approx(2 / p**2)
    a = predict_supercritical_complement(F([1, 1]), p).value
    assert a == pytest.approx(4 / p**2)
    assert a / predict_supercritical_complement(F([1, -1]), p).value == pytest.approx(2)
    v = predict_supercritical_complement(F([1, 1, 1]), p).value
    assert v == pytest.approx(math.sqrt(math.pi) * math.sqrt(12) / p**1.5)
    with pytest.raises(WrongRegime):
        predict_supercritical_complement(F([1, 1]), p, RegimeSpec(1, 0.75, 2))


@pytest.mark.parametrize("raw", [[1, -1], [1, 1, 1], [2, 1, -1, -1]])
def test_supercritical_scaling_in_c(raw):
    f = F(raw)
    h = f.h
    alpha = Fraction(1, 2 * h)
    N = 10**5
    one = predict(f, N, RegimeSpec(1.0, alpha, h))["complement_size"].value
    two = predict(f, N, RegimeSpec(2.0, alpha, h))["complement_size"].value
    assert two / one == pytest.approx(2 ** (-h / (h - 1)), rel=1e-12)


def test_predict_dispatch():
    f = F([1, 1])
    sub = predict(f, 10**4, RegimeSpec(1, 0.75, 2))
    assert sub["complement_size"] is None and sub["image_size"].tag == "subcritical.image"
    sup = predict(f, 10**4, RegimeSpec(1, 0.4, 2))
    assert sup["image_size"] is None and sup["complement_size"].tag == "supercritical.complement"
    crit = predict(f, 10**4, RegimeSpec(1, Fraction(1, 2), 2))
    assert crit["image_size"].value + crit["complement_size"].value == pytest.approx(2 * 10**4)
    assert crit["image_size"].to_json()["regime"]["classification"] == "critical"
    with pytest.raises(ArityMismatch):
        predict(f, 100, RegimeSpec(1, 0.5, 3))


def test_generalized_ratio():
    assert generalized_ratio(3, 0, 2, 1, "subcritical_image") == pytest.approx(1 / 3)
    assert generalized_ratio(3, 0, 2, 1, "supercritical_complement") == pytest.approx(math.sqrt(3))
    for regime in ("subcritical_image", "subcritical_complement", "supercritical_image", "supercritical_complement"):
        assert generalized_ratio(2, 2, 2, 2, regime) == 1
    with pytest.raises(ArityMismatch):
        generalized_ratio(3, 0, 1, 1, "subcritical_image")
    with pytest.raises(ValueError):
        generalized_ratio(2, 0, 1, 1, "critical")


@pytest.mark.parametrize("u1, u2", [(1, -1), (2, 1), (3, -2), (2, -1), (5, 3)])
@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_identity_residual(u1, u2, c):
    assert hm_identity_residual(u1, u2, c) < 1e-6


def test_identity_preconditions():
    for bad in ((1, 1), (-1, -1), (1, 2), (2, 2), (0, 1), (4, 2)):
        with pytest.raises(PreconditionViolated):
            hm_identity_sides(*bad, 1.0)
    with pytest.raises(PreconditionViolated):
        hm_identity_sides(2, 1, 0.0)
