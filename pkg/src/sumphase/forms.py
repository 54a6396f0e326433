"""Z-linear forms u_1 x_1 + ... + u_h x_h and their structural constants."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable, Sequence

from .errors import ArityTooSmall, OffsetOutOfRange, ZeroCoefficient

__all__ = [
    "LinearForm",
    "new_linear_form",
    "parse_form",
    "symmetry_order",
    "redundancy_order",
    "complement_adjustment",
    "group_cycle_classes",
]


@dataclass(frozen=True)
class LinearForm:
    """A gcd-normalized linear form with nonzero integer coefficients.

    Coefficients are stored positives first, each sign group in
    nonincreasing order, so ``coeffs`` is sorted nonincreasing overall.
    ``gcd_factor`` keeps the gcd that was divided out at construction.
    Build instances with :func:`new_linear_form`.
    """

    coeffs: tuple[int, ...]
    gcd_factor: int = 1
    h: int = field(init=False)
    n: int = field(init=False)
    s: int = field(init=False)
    d: int = field(init=False)
    m: int = field(init=False)
    theta: int = field(init=False)
    balanced: bool = field(init=False)

    def __post_init__(self):
        cs = self.coeffs
        if len(cs) < 2:
            raise ArityTooSmall(f"a linear form needs at least 2 coefficients, got {len(cs)}")
        if any(c == 0 for c in cs):
            raise ZeroCoefficient(f"coefficient list {list(cs)} contains 0")
        if list(cs) != sorted(cs, reverse=True):
            raise ValueError("coefficients must be sorted nonincreasing; use new_linear_form")
        if reduce(math.gcd, cs) != 1:
            raise ValueError("coefficients must be coprime; use new_linear_form")
        pos = [c for c in cs if c > 0]
        neg = [-c for c in cs if c < 0]
        set_ = object.__setattr__
        set_(self, "h", len(cs))
        set_(self, "n", len(pos))
        set_(self, "s", sum(pos))
        set_(self, "d", sum(neg))
        set_(self, "m", sum(pos) + sum(neg))
        set_(self, "theta", math.prod(math.factorial(r) for r in Counter(cs).values()))
        set_(self, "balanced", Counter(cs) == Counter(-c for c in cs))

    # -- derived structure -------------------------------------------------

    @cached_property
    def blocks(self) -> tuple[tuple[int, int], ...]:
        """Half-open index ranges of maximal runs of equal coefficients."""
        out = []
        start = 0
        for i in range(1, self.h + 1):
            if i == self.h or self.coeffs[i] != self.coeffs[start]:
                out.append((start, i))
                start = i
        return tuple(out)

    @property
    def abs_coeffs(self) -> tuple[int, ...]:
        return tuple(abs(c) for c in self.coeffs)

    @property
    def raw_coeffs(self) -> tuple[int, ...]:
        return tuple(self.gcd_factor * c for c in self.coeffs)

    def value(self, xs: Sequence[int]) -> int:
        return sum(u * x for u, x in zip(self.coeffs, xs))

    def target(self, N: int, k: int) -> int:
        """The L-value -dN + k addressed by offset k."""
        return -self.d * N + k

    def is_midpoint(self, N: int, k: int) -> bool:
        """True when the reversal symmetry applies (balanced form, k = mN/2)."""
        return self.balanced and 2 * k == self.m * N

    def check_offset(self, N: int, k: int) -> None:
        if not 0 <= k <= self.m * N:
            raise OffsetOutOfRange(f"offset k={k} outside [0, {self.m * N}]")

    def to_json(self) -> dict:
        return {"coeffs": list(self.coeffs), "gcd_factor": self.gcd_factor}

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.coeffs)


def new_linear_form(raw_coeffs: Iterable[int]) -> LinearForm:
    """Validate, sort and gcd-normalize a coefficient list.

    >>> f = new_linear_form([2, -2])
    >>> f.coeffs, f.gcd_factor, f.balanced
    ((1, -1), 2, True)
    """
    raw = [int(c) for c in raw_coeffs]
    if len(raw) < 2:
        raise ArityTooSmall(f"a linear form needs at least 2 coefficients, got {len(raw)}")
    if any(c == 0 for c in raw):
        raise ZeroCoefficient(f"coefficient list {raw} contains 0")
    g = reduce(math.gcd, (abs(c) for c in raw))
    coeffs = tuple(sorted((c // g for c in raw), reverse=True))
    return LinearForm(coeffs, gcd_factor=g)


def parse_form(text: str) -> LinearForm:
    """Parse a comma-separated coefficient list such as ``"1,1,-1"``."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        raw = [int(p) for p in parts]
    except ValueError as exc:
        raise ValueError(f"cannot parse form {text!r}: {exc}") from None
    return new_linear_form(raw)


def symmetry_order(form: LinearForm) -> int:
    """Order of the group of coordinate permutations fixing the coefficient vector."""
    return form.theta


def redundancy_order(form: LinearForm, N: int, k: int) -> int:
    """Size of the symmetry group used to identify tuples at offset k."""
    form.check_offset(N, k)
    return 2 * form.theta if form.is_midpoint(N, k) else form.theta


def complement_adjustment(form: LinearForm) -> int:
    """(g - 1) * sum(|v_i|) for gcd factor g and normalized coefficients v.

    This is only the constant correction term. To convert a complement
    size between the raw and normalized forms exactly, use
    :func:`sumphase.sets.raw_complement_size`.
    """
    return (form.gcd_factor - 1) * sum(form.abs_coeffs)


# -- group machinery for orbit counting -----------------------------------


def _int_partitions(r: int, max_part: int | None = None):
    if max_part is None:
        max_part = r
    if r == 0:
        yield ()
        return
    for first in range(min(r, max_part), 0, -1):
        for rest in _int_partitions(r - first, first):
            yield (first,) + rest


def _class_size(parts: tuple[int, ...]) -> int:
    r = sum(parts)
    z = 1
    for j, mult in Counter(parts).items():
        z *= j**mult * math.factorial(mult)
    return math.factorial(r) // z


def _cycle_coeff_sums(perm: Sequence[int], coeffs: Sequence[int]) -> tuple[int, ...]:
    seen = [False] * len(perm)
    sums = []
    for i in range(len(perm)):
        if seen[i]:
            continue
        total = 0
        j = i
        while not seen[j]:
            seen[j] = True
            total += coeffs[j]
            j = perm[j]
        sums.append(total)
    return tuple(sorted(sums, reverse=True))


def group_cycle_classes(form: LinearForm, with_reversal: bool = False) -> list[tuple[int, tuple[int, ...]]]:
    """Group elements bucketed by the coefficient sums over their cycles.

    Returns ``(multiplicity, cycle_coefficient_sums)`` pairs whose
    multiplicities add up to the group order. A tuple is fixed by a
    permutation exactly when it is constant on the permutation's cycles,
    so its L-value is the sum over cycles of (cycle sum) * (cycle value).
    With ``with_reversal`` the group is extended by index reversal,
    which is only meaningful for balanced forms.
    """
    per_block = []
    for lo, hi in form.blocks:
        v = form.coeffs[lo]
        per_block.append([(_class_size(lam), tuple(v * part for part in lam)) for lam in _int_partitions(hi - lo)])
    acc: Counter = Counter()
    for combo in itertools.product(*per_block):
        mult = math.prod(c for c, _ in combo)
        sums = tuple(sorted((s for _, ss in combo for s in ss), reverse=True))
        acc[sums] += mult
    if with_reversal:
        if not form.balanced:
            raise ValueError("reversal symmetry only applies to balanced forms")
        h = form.h
        block_perms = [list(itertools.permutations(range(lo, hi))) for lo, hi in form.blocks]
        for pieces in itertools.product(*block_perms):
            rho = [i for piece in pieces for i in piece]
            tau = [rho[h - 1 - i] for i in range(h)]
            acc[_cycle_coeff_sums(tau, form.coeffs)] += 1
    return sorted(((mult, sums) for sums, mult in acc.items()), key=lambda t: (-len(t[1]), t[1]))
