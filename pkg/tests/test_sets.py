import numpy as np
import pytest
from hypothesis import given, strategies as st

from sumphase.errors import BadProbability, OffsetOutOfRange
from sumphase.forms import new_linear_form
from sumphase.sets import (SubsetBitVector, complement_size, evaluate_image, representation_count,
                           sample_subset)

from conftest import brute_classes, brute_image, brute_image_distinct

MSTD = [0, 2, 3, 4, 7, 11, 12, 14]


@st.composite
def instances(draw, max_h=4, max_u=3, max_n=30):
    h = draw(st.integers(2, max_h))
    raw = draw(st.lists(st.integers(-max_u, max_u).filter(bool), min_size=h, max_size=h))
    N = draw(st.integers(1, max_n))
    bits = draw(st.lists(st.booleans(), min_size=N + 1, max_size=N + 1))
    return new_linear_form(raw), SubsetBitVector.from_bits(bits)


def test_sampling_is_deterministic():
    a, b = sample_subset(1000, 0.2, 99), sample_subset(1000, 0.2, 99)
    assert a == b and hash(a) == hash(b)
    assert sample_subset(1000, 0.2, 100) != a


def test_sampling_frequency():
    s = sample_subset(10**6 - 1, 0.3, 12345)
    assert abs(s.cardinality / 10**6 - 0.3) < 0.002


def test_sampling_edge_cases():
    s = sample_subset(0, 0.5, 1)
    assert s.n_max == 0 and s.bits.size == 1
    for p in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(BadProbability):
            sample_subset(10, p, 1)


def test_subset_vector_basics():
    s = SubsetBitVector.from_elements(5, [0, 3, 5])
    assert s.cardinality == 3 and s.elements.tolist() == [0, 3, 5]
    assert s.reflect().elements.tolist() == [0, 2, 5]
    assert SubsetBitVector.from_elements(5, [3]).issubset(s)
    assert s.to_json() == {"N": 5, "elements": [0, 3, 5]}
    with pytest.raises(ValueError):
        SubsetBitVector.from_elements(5, [6])
    with pytest.raises(ValueError):
        s.bits[0] = False


def test_classic_mstd_set():
    A = SubsetBitVector.from_elements(14, MSTD)
    plus = evaluate_image(new_linear_form([1, 1]), A).size
    minus = evaluate_image(new_linear_form([1, -1]), A).size
    assert (plus, minus) == (26, 25)
    assert plus == len(brute_image([1, 1], MSTD)) and minus == len(brute_image([1, -1], MSTD))


def test_singleton_and_extremes():
    for raw in ([1, 1], [2, -1], [1, 1, -1, -1]):
        f = new_linear_form(raw)
        img = evaluate_image(f, SubsetBitVector.from_elements(4, [0]))
        assert img.values.tolist() == [0]
    f = new_linear_form([1, 1])
    assert complement_size(evaluate_image(f, SubsetBitVector.from_bits(np.ones(9, bool)))) == 0
    assert complement_size(evaluate_image(f, SubsetBitVector.from_bits(np.zeros(9, bool)))) == 2 * 8 + 1
    img = evaluate_image(new_linear_form([1, -1]), SubsetBitVector.from_elements(2, [0, 1]))
    assert img.values.tolist() == [-1, 0, 1] and complement_size(img) == 2


def test_image_csv():
    img = evaluate_image(new_linear_form([1, -1]), SubsetBitVector.from_elements(1, [1]))
    assert img.to_csv() == "value,present\n-1,0\n0,1\n1,0\n"
    assert 0 in img and 1 not in img and 5 not in img


@given(instances())
def test_image_matches_brute_force(inst):
    f, A = inst
    truth = brute_image(f.coeffs, A.elements.tolist())
    for method in ("sparse", "bitset", "auto"):
        img = evaluate_image(f, A, method=method)
        assert set(img.values.tolist()) == truth
        assert img.size + complement_size(img) == f.m * A.n_max + 1


@given(instances(max_h=3, max_n=12))
def test_distinct_image_matches_brute_force(inst):
    f, A = inst
    img = evaluate_image(f, A, distinct=True)
    assert set(img.values.tolist()) == brute_image_distinct(f.coeffs, A.elements.tolist())


@given(instances())
def test_mirror_symmetry(inst):
    f, A = inst
    img = evaluate_image(f, A).bits
    mirrored = evaluate_image(f, A.reflect()).bits
    assert np.array_equal(img, mirrored[::-1])


@given(instances(), st.data())
def test_monotone_in_subset(inst, data):
    f, B = inst
    keep = data.draw(st.lists(st.booleans(), min_size=B.n_max + 1, max_size=B.n_max + 1))
    A = SubsetBitVector.from_bits(B.bits & np.array(keep))
    assert not np.any(evaluate_image(f, A).bits & ~evaluate_image(f, B).bits)


def test_representation_count_examples():
    f = new_linear_form([1, 1])
    assert representation_count(f, SubsetBitVector.from_elements(2, [0, 1, 2]), 2) == 2
    assert representation_count(f, SubsetBitVector.from_elements(2, [0]), 0) == 1
    g = new_linear_form([1, -1])
    assert representation_count(g, SubsetBitVector.from_elements(1, [0, 1]), 1) == 2
    with pytest.raises(OffsetOutOfRange):
        representation_count(f, SubsetBitVector.from_elements(2, [0]), 5)


@given(instances(max_h=4, max_n=7))
def test_representation_count_matches_brute_force(inst):
    f, A = inst
    N = A.n_max
    elems = A.elements.tolist()
    img = evaluate_image(f, A)
    for k in range(f.m * N + 1):
        v = f.target(N, k)
        w = representation_count(f, A, k)
        assert w == len(brute_classes(f.coeffs, N, v, elems))
        assert (w >= 1) == (v in img)


@given(instances(max_h=3, max_n=8))
def test_distinct_representation_count(inst):
    f, A = inst
    N = A.n_max
    elems = A.elements.tolist()
    for k in range(f.m * N + 1):
        v = f.target(N, k)
        want = sum(len(set(r)) == f.h for r in brute_classes(f.coeffs, N, v, elems))
        assert representation_count(f, A, k, distinct=True) == want
