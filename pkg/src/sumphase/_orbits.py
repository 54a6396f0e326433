"""Orbit counting for solutions of sum_i u_i a_i = v.

Every count in the package reduces to one primitive: the number of
tuples with entries in an allowed set (all of [0, N], or a subset A of
it) solving a linear equation. Burnside's lemma turns such counts into
counts of classes modulo the coefficient-stabilizer group, and Mobius
inversion over set partitions of cycles splits them by the number of
distinct entries (the ground-set size).
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .forms import LinearForm, group_cycle_classes

_INT64_SAFE = 2**62
LOOP_CAP = 4_000_000


class Allowed:
    """Entries allowed in a tuple: the interval [0, N] or a subset of it."""

    __slots__ = ("N", "elements", "mask")

    def __init__(self, N: int, elements: np.ndarray | None = None):
        self.N = N
        if elements is None:
            self.elements = None
            self.mask = None
        else:
            self.elements = np.asarray(elements, dtype=np.int64)
            self.mask = np.zeros(N + 1, dtype=bool)
            self.mask[self.elements] = True

    @property
    def size(self) -> int:
        return self.N + 1 if self.elements is None else len(self.elements)

    @property
    def is_interval(self) -> bool:
        return self.elements is None


def _dtype_for(bound: int):
    return np.int64 if bound < _INT64_SAFE else object


def solution_poly(coeffs: Sequence[int], allowed: Allowed) -> tuple[np.ndarray, int]:
    """Counts of allowed tuples by L-value, for nonzero coefficients.

    Returns ``(poly, shift)`` where ``poly[v + shift]`` is the number of
    tuples with value v. Negative coefficients act on reflected entries
    N - a, which keeps every index nonnegative.
    """
    N = allowed.N
    bound = allowed.size ** len(coeffs)
    dt = _dtype_for(bound)
    poly = np.ones(1, dtype=dt)
    shift = 0
    if not allowed.is_interval:
        pos_elems = allowed.elements
        neg_elems = np.sort(N - allowed.elements)
    for c in coeffs:
        if c == 0:
            raise ValueError("zero coefficients are handled by the caller")
        w = abs(c)
        if c < 0:
            shift += w * N
        new = np.zeros(len(poly) + w * N, dtype=dt)
        if allowed.is_interval:
            new[: len(poly)] = poly
            for r in range(w):
                sub = new[r::w]
                cs = np.cumsum(sub)
                out = cs.copy()
                if len(cs) > N + 1:
                    out[N + 1 :] = cs[N + 1 :] - cs[: len(cs) - N - 1]
                new[r::w] = out
        else:
            elems = pos_elems if c > 0 else neg_elems
            nz = np.flatnonzero(poly)
            if len(elems) <= len(nz):
                for a in elems:
                    o = w * int(a)
                    new[o : o + len(poly)] += poly
            else:
                spread = np.zeros(w * N + 1, dtype=dt)
                spread[w * elems] = 1
                for j in nz:
                    new[j : j + len(spread)] += poly[j] * spread
        poly = new
    return poly, shift


def _split_zero(coeffs: Sequence[int]) -> tuple[list[int], int]:
    nonzero = [c for c in coeffs if c != 0]
    return nonzero, len(coeffs) - len(nonzero)


def count_solutions(coeffs: Sequence[int], allowed: Allowed, value: int) -> int:
    """Number of tuples over ``allowed`` with sum_i coeffs[i] * a_i == value.

    Zero coefficients leave their entry free.
    """
    nonzero, zeros = _split_zero(coeffs)
    free = allowed.size**zeros
    if not nonzero:
        return free if value == 0 else 0
    N = allowed.N
    lo = sum(min(0, c * N) for c in nonzero)
    hi = sum(max(0, c * N) for c in nonzero)
    if not lo <= value <= hi or allowed.size == 0:
        return 0
    if not allowed.is_interval and len(allowed.elements) ** (len(nonzero) - 1) <= LOOP_CAP:
        return free * _count_by_loop(nonzero, allowed, value)
    poly, shift = solution_poly(nonzero, allowed)
    return free * int(poly[value + shift])


def _count_by_loop(coeffs: list[int], allowed: Allowed, value: int) -> int:
    # partial sums of the first r-1 terms, deduplicated with multiplicities
    elems = allowed.elements
    vals = np.zeros(1, dtype=np.int64)
    mult = np.ones(1, dtype=np.int64)
    for c in coeffs[:-1]:
        vals = (vals[:, None] + c * elems[None, :]).ravel()
        mult = np.repeat(mult, len(elems))
        vals, inv = np.unique(vals, return_inverse=True)
        mult = np.bincount(inv.ravel(), weights=mult, minlength=len(vals)).astype(np.int64)
    last = coeffs[-1]
    resid = value - vals
    ok = resid % last == 0
    q = resid[ok] // last
    mult = mult[ok]
    inside = (q >= 0) & (q <= allowed.N)
    q, mult = q[inside], mult[inside]
    hit = allowed.mask[q]
    return int(mult[hit].sum())


# -- set partitions and Mobius weights ------------------------------------


def set_partitions(n: int):
    """Yield set partitions of range(n) as lists of blocks."""
    if n == 0:
        yield []
        return
    for part in set_partitions(n - 1):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [n - 1]] + part[i + 1 :]
        yield part + [[n - 1]]


@lru_cache(maxsize=None)
def _stirling2(n: int, j: int) -> int:
    if n == j:
        return 1
    if j == 0 or j > n:
        return 0
    return j * _stirling2(n - 1, j) + _stirling2(n - 1, j - 1)


@lru_cache(maxsize=None)
def _block_weight(n: int) -> tuple[int, ...]:
    # coefficients in y of sum over partitions pi of an n-set of mu(pi, top) y^{|pi|}
    return tuple(
        0 if j == 0 else _stirling2(n, j) * (-1) ** (j - 1) * math.factorial(j - 1) for j in range(n + 1)
    )


def _poly_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def distinct_value_profile(coeffs: Sequence[int], allowed: Allowed, value: int) -> list[int]:
    """Solutions of the equation split by number of distinct entries.

    Entry j of the result counts solutions with exactly j distinct
    entries. Uses Mobius inversion on the lattice of set partitions:
    the solutions constant on the blocks of sigma are counted directly,
    and the weight of sigma factorizes over its blocks.
    """
    r = len(coeffs)
    out = [0] * (r + 1)
    for sigma in set_partitions(r):
        merged = [sum(coeffs[i] for i in block) for block in sigma]
        f = count_solutions(merged, allowed, value)
        if not f:
            continue
        weight = [1]
        for block in sigma:
            weight = _poly_mul(weight, _block_weight(len(block)))
        for j, w in enumerate(weight):
            out[j] += w * f
    return out


# -- Burnside -------------------------------------------------------------


@lru_cache(maxsize=512)
def cycle_classes(form: LinearForm, with_reversal: bool) -> tuple[tuple[int, tuple[int, ...]], ...]:
    return tuple(group_cycle_classes(form, with_reversal=with_reversal))


def _group(form: LinearForm, N: int, k: int):
    classes = cycle_classes(form, form.is_midpoint(N, k))
    return classes, sum(m for m, _ in classes)


def orbit_count(form: LinearForm, allowed: Allowed, k: int) -> int:
    """Number of classes at offset k whose entries all lie in ``allowed``."""
    N = allowed.N
    value = form.target(N, k)
    classes, order = _group(form, N, k)
    total = sum(mult * count_solutions(sums, allowed, value) for mult, sums in classes)
    q, r = divmod(total, order)
    assert r == 0, "Burnside sum not divisible by the group order"
    return q


def orbit_profile(form: LinearForm, allowed: Allowed, k: int) -> list[int]:
    """Classes at offset k split by ground-set size (index = |S|)."""
    N = allowed.N
    value = form.target(N, k)
    classes, order = _group(form, N, k)
    acc = [0] * (form.h + 1)
    for mult, sums in classes:
        prof = distinct_value_profile(sums, allowed, value)
        for j, x in enumerate(prof):
            acc[j] += mult * x
    out = []
    for x in acc:
        q, r = divmod(x, order)
        assert r == 0, "Burnside sum not divisible by the group order"
        out.append(q)
    return out


def injective_count(form: LinearForm, allowed: Allowed, k: int) -> int:
    """Classes at offset k whose representative has pairwise distinct entries."""
    # only the identity fixes a tuple with distinct entries
    N = allowed.N
    value = form.target(N, k)
    order = 2 * form.theta if form.is_midpoint(N, k) else form.theta
    prof = distinct_value_profile(form.coeffs, allowed, value)
    q, r = divmod(prof[form.h], order)
    assert r == 0
    return q


def orbit_count_table(form: LinearForm, N: int) -> list[int]:
    """|classes| at every offset k in [0, mN] over the full interval."""
    allowed = Allowed(N)
    size = form.m * N + 1
    acc = [0] * size
    for mult, sums in cycle_classes(form, False):
        nonzero, zeros = _split_zero(sums)
        poly, shift = solution_poly(nonzero, allowed)
        free = allowed.size**zeros
        # base-group elements keep the negative mass d, so index == offset k
        assert shift == form.d * N and len(poly) == size
        for k in range(size):
            acc[k] += mult * free * int(poly[k])
    out = []
    for x in acc:
        q, r = divmod(x, form.theta)
        assert r == 0
        out.append(q)
    if form.balanced and (form.m * N) % 2 == 0:
        mid = form.m * N // 2
        out[mid] = orbit_count(form, allowed, mid)
    return out
