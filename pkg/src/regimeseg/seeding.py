"""Deterministic RNG derivation.

Every source of randomness in the package flows from one user seed through
``numpy.random.SeedSequence`` keyed by ``(seed, stage tag, replication
index)``. Two stages never share a stream even when invoked with the same
seed, and replication ``i`` of any experiment is reproducible in isolation.
"""

from __future__ import annotations

import numpy as np

# Fixed stage tags; appending is fine, renumbering is a breaking change.
STAGES = {
    "simulate": 1,
    "permute": 2,
    "balls": 3,
    "decode": 4,
    "replicate": 5,
    "toy": 6,
}


def stage_rng(seed: int, stage: str, rep: int = 0) -> np.random.Generator:
    """Generator for one pipeline stage of one replication."""
    if stage not in STAGES:
        raise KeyError(f"unknown RNG stage {stage!r}")
    ss = np.random.SeedSequence((int(seed), STAGES[stage], int(rep)))
    return np.random.default_rng(ss)


def replication_seed(seed: int, rep: int) -> int:
    """Derived integer seed handed to the full pipeline of replication `rep`."""
    ss = np.random.SeedSequence((int(seed), STAGES["replicate"], int(rep)))
    return int(ss.generate_state(1, np.uint32)[0])
