import itertools
from collections import Counter

import numpy as np
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# -- brute-force oracles shared by the test modules --------------------------


def brute_image(coeffs, elements):
    """Set of values sum u_i a_i over all h-tuples from elements."""
    return {sum(u * a for u, a in zip(coeffs, t)) for t in itertools.product(elements, repeat=len(coeffs))}


def brute_image_distinct(coeffs, elements):
    return {sum(u * a for u, a in zip(coeffs, t)) for t in itertools.permutations(elements, len(coeffs))}


def stabilizer(coeffs, sign=1):
    """Permutations sigma with coeffs[sigma[i]] == sign * coeffs[i]."""
    h = len(coeffs)
    return [s for s in itertools.permutations(range(h)) if all(coeffs[s[i]] == sign * coeffs[i] for i in range(h))]


def brute_classes(coeffs, N, value, elements=None):
    """Orbit representatives of tuples with the given value.

    The group is every permutation preserving the coefficient vector; when
    the form is balanced and value is 0 it also includes permutations that
    negate it. Orbits are keyed by their lexicographically smallest member.
    """
    elements = range(N + 1) if elements is None else elements
    group = stabilizer(coeffs)
    balanced = sorted(coeffs) == sorted(-u for u in coeffs)
    if balanced and value == 0:
        group = group + stabilizer(coeffs, -1)
    reps = set()
    for t in itertools.product(elements, repeat=len(coeffs)):
        if sum(u * a for u, a in zip(coeffs, t)) == value:
            reps.add(min(tuple(t[s[i]] for i in range(len(t))) for s in group))
    return reps


def brute_counts_all_k(form, N):
    """|D_k| for every k by vectorized orbit-minimum over all (N+1)^h tuples."""
    h, coeffs = form.h, np.array(form.coeffs)
    grid = np.stack(np.meshgrid(*[np.arange(N + 1)] * h, indexing="ij"), -1).reshape(-1, h)
    ks = grid @ coeffs + form.d * N
    weights = (N + 1) ** np.arange(h - 1, -1, -1)

    def orbit_min(rows, group):
        return np.min([rows[:, list(s)] @ weights for s in group], axis=0)

    base = stabilizer(form.coeffs)
    codes = orbit_min(grid, base)
    out = Counter()
    for k, code in set(zip(ks.tolist(), codes.tolist())):
        out[k] += 1
    if form.balanced:
        mid = form.m * N // 2
        rows = grid[ks == mid]
        full = base + stabilizer(form.coeffs, -1)
        out[mid] = len(set(orbit_min(rows, full).tolist()))
    return [out.get(k, 0) for k in range(form.m * N + 1)]
