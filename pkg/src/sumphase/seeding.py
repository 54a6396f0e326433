"""Deterministic 64-bit seed derivation for trial streams."""

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a bijective avalanche permutation of 64-bit words."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, cell_id: int, trial_index: int) -> int:
    """Seed for one trial, folded from (master_seed, cell_id, trial_index).

    Each input is absorbed by adding it (plus the golden-ratio increment)
    to the running state and applying two rounds of :func:`mix64`.
    """
    state = 0
    for word in (master_seed, cell_id, trial_index):
        state = mix64(mix64((state + (word & MASK64) + _GAMMA) & MASK64))
    return state
