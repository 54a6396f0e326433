"""Poisson approximation of the representation count W_k.

Each class Lambda at offset k contributes the indicator X of its ground
set S landing inside A, with E[X] = p^|S|. Two indicators are dependent
exactly when their ground sets meet, which fixes the Stein-Chen
neighbourhoods used below.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from .enumeration import ENUMERATION_CAP, count_by_ground_size, count_expressions, expression_array
from .errors import EpsilonNonpositive, TooLarge
from .forms import LinearForm
from .seeding import derive_seed
from .sets import SubsetBitVector, representation_count, sample_subset

__all__ = [
    "DependencyAccounting",
    "EmpiricalPmf",
    "LowerBoundCertificate",
    "mean_count",
    "stein_chen_bounds",
    "empirical_count_law",
    "tv_to_poisson",
    "tv_standard_error",
    "lower_bound_certificate",
    "exhaustive_law",
    "zero_probability_exact",
]

# counting-DP fallback for mean_count is refused above this range length
DP_RANGE_CAP = 10**7
TAIL_EPS = 1e-12


def _ground_sets(reps: np.ndarray) -> np.ndarray:
    """Sorted rows with repeated entries replaced by -1."""
    g = np.sort(reps, axis=1)
    if g.shape[1] > 1:
        dup = np.zeros_like(g, dtype=bool)
        dup[:, 1:] = g[:, 1:] == g[:, :-1]
        g = np.where(dup, -1, g)
    return g


def _ground_sizes(g: np.ndarray) -> np.ndarray:
    return (g >= 0).sum(axis=1)


def _subset_buckets(g: np.ndarray, weights) -> dict[int, list]:
    """For each size t, the sums B_T = sum of weights over classes with T inside S.

    Returns {t: [B_T for every distinct T of size t]}.
    """
    h = g.shape[1]
    exact = not isinstance(weights, np.ndarray)
    out = {}
    for t in range(1, h + 1):
        keys, owners = [], []
        for cols in itertools.combinations(range(h), t):
            sub = g[:, cols]
            ok = np.all(sub >= 0, axis=1)
            if ok.any():
                keys.append(sub[ok])
                owners.append(np.flatnonzero(ok))
        if not keys:
            continue
        keys = np.concatenate(keys)
        owners = np.concatenate(owners)
        _, inv = np.unique(keys, axis=0, return_inverse=True)
        inv = inv.ravel()
        if exact:
            acc = [0] * (int(inv.max()) + 1)
            for slot, o in zip(inv.tolist(), owners.tolist()):
                acc[slot] += weights[o]
            out[t] = acc
        else:
            out[t] = np.bincount(inv, weights=weights[owners])
    return out


@dataclass(frozen=True)
class DependencyAccounting:
    """Exact Stein-Chen quantities for W_k.

    ``b1`` includes self-pairs; ``b2`` sums P[X X' = 1] over distinct
    dependent pairs; ``b3`` vanishes because neighbourhoods are exactly
    the dependency sets.
    """

    mu: float
    b1: float
    b2: float
    b3: float
    variance: float
    sum_p_squared: float
    max_p: float
    n_classes: int

    @property
    def upper_bound(self) -> float:
        """min(1, 1/mu) (b1 + b2), a bound on the TV distance to Po(mu)."""
        if self.mu == 0:
            return 0.0
        return min(1, 1 / self.mu) * (self.b1 + self.b2)

    def to_json(self) -> dict:
        out = {k: float(v) for k, v in self.__dict__.items() if k != "n_classes"}
        out["n_classes"] = self.n_classes
        out["upper_bound"] = float(self.upper_bound)
        return out


def _check_p(p) -> None:
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")


def _class_weights(sizes: np.ndarray, p):
    if isinstance(p, Fraction):
        return [p**int(s) for s in sizes]
    return float(p) ** sizes.astype(float)


def mean_count(form: LinearForm, N: int, k: int, p, cap: int = ENUMERATION_CAP):
    """mu_k = E[W_k] = sum over classes of p^|S|.

    Enumerates classes when there are at most ``cap`` of them, otherwise
    uses class counts grouped by ground-set size. Exact for Fraction p.
    """
    _check_p(p)
    if not 0 <= k <= form.m * N:
        return 0
    if count_expressions(form, N, k) <= cap:
        sizes = _ground_sizes(_ground_sets(expression_array(form, N, k, cap)))
        by_size = Counter(sizes.tolist())
    elif form.m * N <= DP_RANGE_CAP:
        by_size = dict(enumerate(count_by_ground_size(form, N, k)))
    else:
        raise TooLarge("neither enumeration nor the counting DP is feasible at this size")
    if isinstance(p, Fraction):
        return sum((n * p**j for j, n in by_size.items()), Fraction(0))
    return math.fsum(n * float(p) ** j for j, n in by_size.items())


def stein_chen_bounds(form: LinearForm, N: int, k: int, p, cap: int = ENUMERATION_CAP) -> DependencyAccounting:
    """Exact mu, Var(W), b1, b2 for W_k by enumerating the classes.

    Uses subset buckets B_T = sum_{Lambda : T in S} p^|S| over nonempty T:
    inclusion-exclusion over the shared elements gives
    b1 = sum_T (-1)^(|T|+1) B_T^2, and p^|S u S'| = p^|S| p^|S'| (1/p)^|S n S'|
    gives Var(W) = sum_T (1/p - 1)^|T| B_T^2. Then b2 = Var + b1 - mu.
    """
    _check_p(p)
    reps = expression_array(form, N, k, cap)
    if reps.shape[0] == 0:
        zero = Fraction(0) if isinstance(p, Fraction) else 0.0
        return DependencyAccounting(zero, zero, zero, zero, zero, zero, zero, 0)
    g = _ground_sets(reps)
    sizes = _ground_sizes(g)
    w = _class_weights(sizes, p)
    buckets = _subset_buckets(g, w)
    q = 1 / p - 1
    if isinstance(p, Fraction):
        mu = sum(w, Fraction(0))
        sum_p2 = sum((x * x for x in w), Fraction(0))
        max_p = max(w)
        b1 = sum(((-1) ** (t + 1) * sum(x * x for x in bt) for t, bt in buckets.items()), Fraction(0))
        var = sum((q**t * sum(x * x for x in bt) for t, bt in buckets.items()), Fraction(0))
        zero = Fraction(0)
    else:
        mu = math.fsum(w)
        sum_p2 = math.fsum(w * w)
        max_p = float(w.max())
        b1 = math.fsum((-1) ** (t + 1) * math.fsum(bt * bt) for t, bt in buckets.items())
        var = math.fsum(q**t * math.fsum(bt * bt) for t, bt in buckets.items())
        zero = 0.0
    b2 = var + b1 - mu
    if not isinstance(p, Fraction):
        b2 = max(b2, 0.0)
    return DependencyAccounting(mu, b1, b2, zero, var, sum_p2, max_p, int(reps.shape[0]))


@dataclass
class EmpiricalPmf:
    """Histogram of observed W values."""

    trials: int = 0
    counts: Counter = field(default_factory=Counter)

    def add(self, value: int) -> None:
        self.counts[int(value)] += 1
        self.trials += 1

    def merge(self, other: "EmpiricalPmf") -> "EmpiricalPmf":
        return EmpiricalPmf(self.trials + other.trials, self.counts + other.counts)

    @property
    def probabilities(self) -> dict[int, float]:
        return {v: c / self.trials for v, c in sorted(self.counts.items())}

    def prob(self, value: int) -> float:
        return self.counts.get(value, 0) / self.trials

    @property
    def mean(self) -> float:
        return math.fsum(v * c for v, c in self.counts.items()) / self.trials

    def central_moment(self, order: int, center: float | None = None) -> float:
        c0 = self.mean if center is None else center
        return math.fsum(c * (v - c0) ** order for v, c in self.counts.items()) / self.trials

    @property
    def variance(self) -> float:
        """Unbiased sample variance."""
        if self.trials < 2:
            return float("nan")
        return self.central_moment(2) * self.trials / (self.trials - 1)

    def to_json(self) -> dict:
        return {"trials": self.trials, "counts": {str(v): c for v, c in sorted(self.counts.items())}}


def empirical_count_law(form: LinearForm, N: int, k: int, p: float, trials: int, master_seed: int,
                        cell_id: int = 0) -> EmpiricalPmf:
    """Monte-Carlo law of W_k; trial i uses derive_seed(master_seed, cell_id, i)."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    form.check_offset(N, k)
    pmf = EmpiricalPmf()
    for i in range(trials):
        subset = sample_subset(N, p, derive_seed(master_seed, cell_id, i))
        pmf.add(representation_count(form, subset, k))
    return pmf


def tv_to_poisson(pmf: EmpiricalPmf | dict, mu: float) -> float:
    """Total variation distance between a pmf on {0, 1, ...} and Po(mu).

    The Poisson side is summed up to where its remaining tail is below
    1e-12; that tail is added as one residual term.
    """
    probs = pmf.probabilities if isinstance(pmf, EmpiricalPmf) else dict(pmf)
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    top = max(probs) if probs else 0
    if mu > 0:
        top = max(top, int(stats.poisson.isf(TAIL_EPS, mu)) + 1)
    js = np.arange(top + 1)
    po = stats.poisson.pmf(js, mu) if mu > 0 else (js == 0).astype(float)
    emp = np.array([probs.get(int(j), 0.0) for j in js])
    tail = float(stats.poisson.sf(top, mu)) if mu > 0 else 0.0
    return 0.5 * (math.fsum(np.abs(emp - po)) + tail)


def tv_standard_error(pmf: EmpiricalPmf) -> float:
    """Conservative Monte-Carlo standard error of the empirical TV distance.

    Each |pmf(j) - Po(j)| moves by at most the sampling error of pmf(j), so
    half the sum of the per-value binomial standard errors bounds it.
    """
    n = pmf.trials
    return 0.5 * math.fsum(math.sqrt(q * (1 - q) / n) for q in pmf.probabilities.values())


@dataclass(frozen=True)
class LowerBoundCertificate:
    """Lower bound eps / (11 + 3 psi) on the TV distance to Po(mu)."""

    epsilon: float
    gamma: float
    psi: float
    bound: float
    moments: str

    def to_json(self) -> dict:
        return dict(self.__dict__)


def certificate_from_moments(mu: float, variance: float, fourth_central: float, sum_p_squared: float,
                             max_p: float, moments: str = "given") -> LowerBoundCertificate:
    eps = variance / mu - 1
    if not eps > 0:
        raise EpsilonNonpositive(f"Var/mu - 1 = {eps:.3g} is not positive")
    gamma = fourth_central / mu - 1
    psi = max(0.0, gamma / (mu * eps)) + 3 * eps + sum_p_squared / (mu * mu * eps) + 3 * variance * max_p / (mu * eps)
    return LowerBoundCertificate(eps, gamma, psi, eps / (11 + 3 * psi), moments)


def lower_bound_certificate(form: LinearForm, N: int, k: int, p: float, trials: int, master_seed: int,
                            pmf: EmpiricalPmf | None = None) -> LowerBoundCertificate:
    """Positive-relation lower bound on d_TV(W_k, Po(mu_k)).

    mu, Var, sum p^2 and max p are exact when the classes can be
    enumerated; the fourth central moment is always taken from the
    Monte-Carlo law. Without enumeration, everything comes from the
    sample and sum p^2, max p are replaced by the upper bounds p*mu and p.
    """
    if pmf is None:
        pmf = empirical_count_law(form, N, k, p, trials, master_seed)
    try:
        acc = stein_chen_bounds(form, N, k, p)
        mu, var, sp2, mp, src = acc.mu, acc.variance, acc.sum_p_squared, acc.max_p, "exact"
    except TooLarge:
        mu, var, src = pmf.mean, pmf.variance, "empirical"
        sp2, mp = p * mu, p
    if mu <= 0:
        raise EpsilonNonpositive("mu is zero")
    return certificate_from_moments(mu, var, pmf.central_moment(4, center=mu), sp2, mp, src)


# -- exhaustive oracles for tiny N ---------------------------------------------


def exhaustive_law(form: LinearForm, N: int, k: int, p) -> dict[int, object]:
    """Exact law of W_k by summing over all 2^(N+1) subsets (N <= 20)."""
    if N > 20:
        raise TooLarge("exhaustive enumeration is limited to N <= 20")
    one = Fraction(1) if isinstance(p, Fraction) else 1.0
    law: dict[int, object] = {}
    for mask in range(1 << (N + 1)):
        bits = [(mask >> i) & 1 for i in range(N + 1)]
        size = sum(bits)
        weight = p**size * (one - p) ** (N + 1 - size)
        w = representation_count(form, SubsetBitVector.from_bits(np.array(bits, dtype=bool)), k)
        law[w] = law.get(w, 0) + weight
    return dict(sorted(law.items()))


def zero_probability_exact(form: LinearForm, N: int, k: int, p, cap: int = 64):
    """P(W_k = 0) by inclusion-exclusion over the classes' ground sets."""
    reps = expression_array(form, N, k)
    if reps.shape[0] > cap:
        raise TooLarge(f"{reps.shape[0]} classes exceed the inclusion-exclusion cap {cap}")
    coeff: dict[int, int] = {0: 1}
    for row in reps:
        s = 0
        for x in set(row.tolist()):
            s |= 1 << x
        for union, c in list(coeff.items()):
            coeff[union | s] = coeff.get(union | s, 0) - c
    zero = Fraction(0) if isinstance(p, Fraction) else 0.0
    return sum((c * p ** bin(u).count("1") for u, c in coeff.items() if c), zero)
