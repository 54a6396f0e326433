"""Random subsets of {0..N}, their images L(A), and representation counts."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from ._orbits import Allowed, injective_count, orbit_count
from .errors import BadProbability, TooLarge
from .forms import LinearForm

__all__ = [
    "SubsetBitVector",
    "ImageSet",
    "sample_subset",
    "evaluate_image",
    "complement_size",
    "raw_complement_size",
    "representation_count",
]

# |A|^h above CROSSOVER * m * N * |A| switches evaluate_image to bitset shifts
CROSSOVER = 8
_CHUNK = 1 << 22
_DISTINCT_CAP = 20_000_000


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SubsetBitVector:
    """Membership vector of a subset of {0, ..., n_max}."""

    n_max: int
    bits: np.ndarray
    cardinality: int

    @classmethod
    def from_bits(cls, bits) -> "SubsetBitVector":
        b = np.array(bits, dtype=bool)
        if b.ndim != 1 or b.size == 0:
            raise ValueError("bits must be a nonempty 1-d vector")
        return cls(b.size - 1, _readonly(b), int(b.sum()))

    @classmethod
    def from_elements(cls, N: int, elements) -> "SubsetBitVector":
        b = np.zeros(N + 1, dtype=bool)
        el = np.asarray(list(elements), dtype=np.int64)
        if el.size and (el.min() < 0 or el.max() > N):
            raise ValueError(f"elements must lie in [0, {N}]")
        b[el] = True
        return cls.from_bits(b)

    @property
    def elements(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def reflect(self) -> "SubsetBitVector":
        """The subset {N - a : a in A}."""
        return SubsetBitVector.from_bits(self.bits[::-1])

    def issubset(self, other: "SubsetBitVector") -> bool:
        return self.n_max == other.n_max and not np.any(self.bits & ~other.bits)

    def to_json(self) -> dict:
        return {"N": self.n_max, "elements": self.elements.tolist()}

    def __eq__(self, other):
        if not isinstance(other, SubsetBitVector):
            return NotImplemented
        return self.n_max == other.n_max and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.n_max, self.bits.tobytes()))


@dataclass(frozen=True, eq=False)
class ImageSet:
    """L(A) as a membership vector over the range [-dN, sN].

    Position j of ``bits`` stands for the value j - offset.
    """

    form: LinearForm
    n_max: int
    offset: int
    bits: np.ndarray

    @property
    def size(self) -> int:
        return int(self.bits.sum())

    @property
    def values(self) -> np.ndarray:
        return np.flatnonzero(self.bits) - self.offset

    def __contains__(self, value: int) -> bool:
        j = value + self.offset
        return 0 <= j < self.bits.size and bool(self.bits[j])

    def __eq__(self, other):
        if not isinstance(other, ImageSet):
            return NotImplemented
        return self.form == other.form and self.n_max == other.n_max and np.array_equal(self.bits, other.bits)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["value", "present"])
        for j, bit in enumerate(self.bits):
            w.writerow([j - self.offset, int(bit)])
        return buf.getvalue()


def sample_subset(N: int, p: float, seed: int) -> SubsetBitVector:
    """Binomial-model subset: each of 0..N kept independently with probability p.

    The generator is numpy's PCG64 seeded with ``seed``; position i is
    kept when the i-th draw of ``Generator.random`` is below p.
    """
    if not 0.0 < p < 1.0:
        raise BadProbability(f"p must lie in (0, 1), got {p}")
    if N < 0:
        raise ValueError("N must be nonnegative")
    rng = np.random.Generator(np.random.PCG64(seed))
    return SubsetBitVector.from_bits(rng.random(N + 1) < p)


# -- image kernels ---------------------------------------------------------


def _summand_elements(form: LinearForm, A: np.ndarray, N: int):
    # position of a value v is v + dN = sum_{u>0} u a + sum_{u<0} |u| (N - a)
    pos = A
    neg = np.sort(N - A)
    return [(abs(u), pos if u > 0 else neg) for u in form.coeffs]


def _image_sparse(steps, size: int) -> np.ndarray:
    vals = np.zeros(1, dtype=np.int64)
    for w, el in steps:
        top = int(vals[-1]) + w * (int(el[-1]) if el.size else 0)
        mark = np.zeros(top + 1, dtype=bool)
        step = max(1, _CHUNK // max(1, el.size))
        for i in range(0, vals.size, step):
            mark[(vals[i : i + step, None] + w * el[None, :]).ravel()] = True
        vals = np.flatnonzero(mark)
    out = np.zeros(size, dtype=bool)
    out[vals] = True
    return out


def _to_int(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def _from_int(x: int, size: int) -> np.ndarray:
    nbytes = (size + 7) // 8
    raw = np.frombuffer(x.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:size].astype(bool)


def _positions(x: int) -> np.ndarray:
    return np.flatnonzero(_from_int(x, x.bit_length()))


def _image_bitset(steps, size: int) -> np.ndarray:
    # Python ints serve as word-level bitsets; each pass is one shifted union
    acc = 1
    for w, el in steps:
        if el.size == 0:
            acc = 0
            break
        dil = np.zeros(w * int(el[-1]) + 1, dtype=bool)
        dil[w * el] = True
        dil_int = _to_int(dil)
        new = 0
        if acc.bit_count() <= el.size:
            for x in _positions(acc).tolist():
                new |= dil_int << x
        else:
            for a in el.tolist():
                new |= acc << (w * a)
        acc = new
    return _from_int(acc, size)


def _image_distinct(form: LinearForm, A: np.ndarray, N: int, size: int) -> np.ndarray:
    h = form.h
    if A.size**h > _DISTINCT_CAP:
        raise TooLarge(f"distinct-summand image needs |A|^h = {A.size ** h} tuples")
    out = np.zeros(size, dtype=bool)
    if A.size < h:
        return out
    idx = np.stack(np.meshgrid(*[np.arange(A.size)] * h, indexing="ij"), axis=-1).reshape(-1, h)
    s = np.sort(idx, axis=1)
    idx = idx[np.all(s[:, 1:] != s[:, :-1], axis=1)]
    vals = A[idx] @ np.asarray(form.coeffs, dtype=np.int64) + form.d * N
    out[vals] = True
    return out


def evaluate_image(form: LinearForm, subset: SubsetBitVector, distinct: bool = False,
                   method: str = "auto") -> ImageSet:
    """Exact L(A).

    ``method`` is ``"sparse"`` (accumulate value arrays term by term),
    ``"bitset"`` (shifted unions of dilated copies of A) or ``"auto"``.
    With ``distinct=True`` only tuples of pairwise distinct elements count.
    """
    N = subset.n_max
    size = form.m * N + 1
    A = subset.elements
    if distinct:
        bits = _image_distinct(form, A, N, size)
    else:
        steps = _summand_elements(form, A, N)
        if method == "auto":
            a = max(A.size, 1)
            method = "bitset" if a ** form.h > CROSSOVER * form.m * N * a else "sparse"
        if A.size == 0:
            bits = np.zeros(size, dtype=bool)
        elif method == "sparse":
            bits = _image_sparse(steps, size)
        elif method == "bitset":
            bits = _image_bitset(steps, size)
        else:
            raise ValueError(f"unknown method {method!r}")
    return ImageSet(form, N, form.d * N, _readonly(bits))


def complement_size(image: ImageSet) -> int:
    """Number of values in [-dN, sN] missed by the image."""
    return image.form.m * image.n_max + 1 - image.size


def raw_complement_size(image: ImageSet) -> int:
    """Complement size for the form before gcd normalization.

    The raw image is g times the normalized one, inside a range of
    g*m*N + 1 integers.
    """
    g = image.form.gcd_factor
    return g * image.form.m * image.n_max + 1 - image.size


def representation_count(form: LinearForm, subset: SubsetBitVector, k: int, distinct: bool = False) -> int:
    """W_k: number of classes at offset k whose ground set lies inside A."""
    N = subset.n_max
    form.check_offset(N, k)
    allowed = Allowed(N, subset.elements)
    if distinct:
        return injective_count(form, allowed, k)
    return orbit_count(form, allowed, k)
