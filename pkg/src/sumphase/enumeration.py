"""Enumeration and exact counting of L-expressions, plus their asymptotic density.

An L-expression at offset k is a class of h-tuples in [0, N]^h with
L-value -dN + k, modulo permutations fixing the coefficient vector
(and, for balanced forms at k = mN/2, also modulo reversal).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from ._orbits import Allowed, orbit_count, orbit_count_table, orbit_profile
from .errors import TooLarge
from .forms import LinearForm

__all__ = [
    "ExpressionClass",
    "CountTable",
    "FitRow",
    "irwin_hall_density",
    "irwin_hall_array",
    "shift_weights",
    "lambda_k",
    "enumerate_expressions",
    "expression_array",
    "count_expressions",
    "count_by_ground_size",
    "count_table",
    "gaussian_binomial",
    "partition_count",
    "weak_composition_count",
    "asymptotic_fit_report",
]

ENUMERATION_CAP = 10**6
IH_MAX_ORDER = 30
_ROW_CHUNK = 1 << 22


# -- Irwin-Hall ------------------------------------------------------------


def _check_order(h: int) -> None:
    if h < 1:
        raise ValueError("Irwin-Hall order must be at least 1")
    if h > IH_MAX_ORDER:
        raise ValueError(f"Irwin-Hall order {h} > {IH_MAX_ORDER} is not supported (cancellation)")


def irwin_hall_density(h: int, x: float) -> float:
    """Density of the sum of h independent Uniform[0, 1] variables at x."""
    _check_order(h)
    if x < 0 or x > h:
        return 0.0
    if h == 1:
        return 1.0
    terms = [(-1) ** j * math.comb(h, j) * (x - j) ** (h - 1) for j in range(0, min(h, math.floor(x)) + 1)]
    return max(0.0, math.fsum(terms) / math.factorial(h - 1))


def irwin_hall_array(h: int, x) -> np.ndarray:
    """Vectorized Irwin-Hall density (plain summation, for quadrature)."""
    _check_order(h)
    x = np.asarray(x, dtype=float)
    if h == 1:
        return np.where((x >= 0) & (x <= 1), 1.0, 0.0)
    out = np.zeros_like(x)
    for j in range(h + 1):
        out += (-1) ** j * math.comb(h, j) * np.clip(x - j, 0.0, None) ** (h - 1)
    out /= math.factorial(h - 1)
    out[(x < 0) | (x > h)] = 0.0
    return np.clip(out, 0.0, None)


@lru_cache(maxsize=256)
def shift_weights(form: LinearForm) -> tuple[tuple[int, int], ...]:
    """Pairs (s, count): how many t with 0 <= t_i < |u_i| have sum s."""
    poly = [1]
    for w in form.abs_coeffs:
        new = [0] * (len(poly) + w - 1)
        for i, c in enumerate(poly):
            for t in range(w):
                new[i + t] += c
        poly = new
    return tuple((s, c) for s, c in enumerate(poly) if c)


def lambda_k(form: LinearForm, N: int, k: int) -> float:
    """Leading coefficient of |D_k| / N^(h-1)."""
    form.check_offset(N, k)
    x = k / N
    num = math.fsum(c * irwin_hall_density(form.h, x - s) for s, c in shift_weights(form))
    denom = (2 if form.is_midpoint(N, k) else 1) * form.theta * math.prod(form.abs_coeffs)
    return num / denom


# -- expression classes ------------------------------------------------------


@dataclass(frozen=True)
class ExpressionClass:
    """Canonical representative of one L-expression."""

    rep: tuple[int, ...]
    target: int

    @property
    def ground_set(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.rep)))


def _block_sort_rows(form: LinearForm, rows: np.ndarray) -> np.ndarray:
    out = rows.copy()
    for lo, hi in form.blocks:
        if hi - lo > 1:
            out[:, lo:hi] = np.sort(out[:, lo:hi], axis=1)
    return out


def _lex_le(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise a <= b in lexicographic order."""
    diff = a != b
    first = np.argmax(diff, axis=1)
    rows = np.arange(a.shape[0])
    same = ~diff.any(axis=1)
    return same | (a[rows, first] < b[rows, first])


def _extend(form: LinearForm, N: int, value: int, rows: np.ndarray, sums: np.ndarray, i: int,
            lo_rest: list[int], hi_rest: list[int]) -> Iterator[np.ndarray]:
    u = form.coeffs
    h = form.h
    if rows.shape[0] == 0:
        return
    if rows.shape[0] * (N + 1) > _ROW_CHUNK and rows.shape[0] > 1:
        half = rows.shape[0] // 2
        yield from _extend(form, N, value, rows[:half], sums[:half], i, lo_rest, hi_rest)
        yield from _extend(form, N, value, rows[half:], sums[half:], i, lo_rest, hi_rest)
        return
    same_block = i > 0 and u[i] == u[i - 1]
    if i == h - 1:
        resid = value - sums
        ok = resid % u[i] == 0
        x = resid // u[i]
        ok &= (x >= 0) & (x <= N)
        if same_block:
            ok &= x >= rows[:, i - 1]
        yield np.column_stack([rows[ok], x[ok]])
        return
    xs = np.arange(N + 1, dtype=np.int64)
    new_sums = sums[:, None] + u[i] * xs[None, :]
    resid = value - new_sums
    ok = (resid >= lo_rest[i + 1]) & (resid <= hi_rest[i + 1])
    if same_block:
        ok &= xs[None, :] >= rows[:, i - 1][:, None]
    r_idx, x_idx = np.nonzero(ok)
    new_rows = np.column_stack([rows[r_idx], xs[x_idx]])
    yield from _extend(form, N, value, new_rows, new_sums[r_idx, x_idx], i + 1, lo_rest, hi_rest)


def expression_array(form: LinearForm, N: int, k: int, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Canonical representatives at offset k as an (count, h) integer array.

    Rows are sorted lexicographically. Entries are nondecreasing within
    each block of equal coefficients; at the balanced midpoint a row is
    also no larger than the block-sorted image of its reversal.
    """
    if not 0 <= k <= form.m * N:
        return np.zeros((0, form.h), dtype=np.int64)
    total = count_expressions(form, N, k)
    if total > cap:
        raise TooLarge(f"|D_k| = {total} exceeds the enumeration cap {cap}; use count_expressions")
    value = form.target(N, k)
    h = form.h
    lo_rest = [0] * (h + 1)
    hi_rest = [0] * (h + 1)
    for i in range(h - 1, -1, -1):
        lo_rest[i] = lo_rest[i + 1] + min(0, form.coeffs[i] * N)
        hi_rest[i] = hi_rest[i + 1] + max(0, form.coeffs[i] * N)
    start = np.zeros((1, 0), dtype=np.int64)
    parts = list(_extend(form, N, value, start, np.zeros(1, dtype=np.int64), 0, lo_rest, hi_rest))
    reps = np.concatenate(parts, axis=0) if parts else np.zeros((0, h), dtype=np.int64)
    if form.is_midpoint(N, k) and reps.shape[0]:
        mirrored = _block_sort_rows(form, reps[:, ::-1])
        reps = reps[_lex_le(reps, mirrored)]
    if reps.shape[0]:
        reps = reps[np.lexsort(reps.T[::-1])]
    assert reps.shape[0] == total, "enumeration disagrees with the orbit count"
    return reps


def enumerate_expressions(form: LinearForm, N: int, k: int, cap: int = ENUMERATION_CAP) -> list[ExpressionClass]:
    """One canonical representative per L-expression at offset k."""
    value = form.target(N, k)
    return [ExpressionClass(tuple(int(x) for x in row), value) for row in expression_array(form, N, k, cap)]


def count_expressions(form: LinearForm, N: int, k: int) -> int:
    """|D_k| exactly, by Burnside's lemma. Offsets outside [0, mN] give 0."""
    if not 0 <= k <= form.m * N:
        return 0
    return orbit_count(form, Allowed(N), k)


def count_by_ground_size(form: LinearForm, N: int, k: int) -> list[int]:
    """|D_k| split by ground-set size: entry j counts classes with |S| = j."""
    if not 0 <= k <= form.m * N:
        return [0] * (form.h + 1)
    return orbit_profile(form, Allowed(N), k)


@dataclass(frozen=True)
class CountTable:
    form: LinearForm
    N: int
    counts: tuple[int, ...]

    def is_symmetric(self) -> bool:
        return self.counts == self.counts[::-1]

    def rows(self):
        N, h = self.N, self.form.h
        for k, c in enumerate(self.counts):
            scaled = lambda_k(self.form, N, k) * N ** (h - 1)
            rel = c / scaled - 1.0 if scaled > 0 else float("nan")
            yield k, c, scaled, rel

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "exact_count", "lambda_k_scaled", "rel_error"])
        for k, c, scaled, rel in self.rows():
            w.writerow([k, c, repr(scaled), repr(rel)])
        return buf.getvalue()


def count_table(form: LinearForm, N: int) -> CountTable:
    return CountTable(form, N, tuple(orbit_count_table(form, N)))


# -- partitions and compositions ------------------------------------------


@lru_cache(maxsize=4096)
def gaussian_binomial(n: int, j: int) -> tuple[int, ...]:
    """Coefficients of the q-binomial [n choose j]_q, lowest degree first."""
    if j < 0 or j > n:
        return (0,)
    if j == 0 or j == n:
        return (1,)
    # [n, j] = [n-1, j-1] + q^j [n-1, j]
    a = gaussian_binomial(n - 1, j - 1)
    b = gaussian_binomial(n - 1, j)
    out = [0] * (j * (n - j) + 1)
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i + j] += c
    return tuple(out)


def partition_count(h: int, k: int, N: int) -> int:
    """Partitions of k into at most h parts, each at most N.

    Read off as the q^k coefficient of [N+h choose h]_q. Targets outside
    [0, hN] give 0.
    """
    if h < 1 or N < 0:
        raise ValueError("need h >= 1 and N >= 0")
    if not 0 <= k <= h * N:
        return 0
    return gaussian_binomial(N + h, h)[k]


def weak_composition_count(u: Sequence[int], b: Sequence[int], k: int, N: int) -> int:
    """h-tuples in [0, N]^h summing to k with a_i = b_i (mod u_i)."""
    if len(u) != len(b):
        raise ValueError("u and b must have the same length")
    if any(x == 0 for x in u):
        raise ValueError("moduli must be nonzero")
    if not 0 <= k <= len(u) * N:
        return 0
    poly = np.ones(1, dtype=object)
    for ui, bi in zip(u, b):
        w = abs(ui)
        vals = range(bi % w, N + 1, w)
        new = np.zeros(min(len(poly) + N, k + 1), dtype=object)
        for a in vals:
            if a >= len(new):
                break
            span = min(len(poly), len(new) - a)
            new[a : a + span] += poly[:span]
        poly = new
    return int(poly[k]) if k < len(poly) else 0


# -- asymptotic fit ----------------------------------------------------------


@dataclass(frozen=True)
class FitRow:
    N: int
    max_rel_error: float
    worst_k: int | None
    empty_window: bool


def asymptotic_fit_report(form: LinearForm, N_list: Sequence[int]) -> list[FitRow]:
    """Worst |count / (lambda_k N^(h-1)) - 1| over k in [N/10, mN/2], per N."""
    if list(N_list) != sorted(set(N_list)):
        raise ValueError("N_list must be strictly increasing")
    out = []
    for N in N_list:
        lo = math.ceil(N / 10)
        hi = form.m * N // 2
        if N < 10 or lo > hi:
            out.append(FitRow(N, 0.0, None, True))
            continue
        table = orbit_count_table(form, N)
        worst, worst_k = -1.0, None
        for k in range(lo, hi + 1):
            scaled = lambda_k(form, N, k) * N ** (form.h - 1)
            err = abs(table[k] / scaled - 1.0)
            if err > worst:
                worst, worst_k = err, k
        out.append(FitRow(N, worst, worst_k, False))
    return out
