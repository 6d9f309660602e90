from typing import Optional

import numpy as np

from utils.exceptions import DomainError


def make_generator(seed: int, stream: Optional[int] = None) -> np.random.Generator:
    """
    Philox counter-based generator seeded through SeedSequence.

    ``stream`` selects the child sequence with spawn key ``(stream,)``, the
    same child ``SeedSequence(seed).spawn(n)[stream]`` would return, so a given
    block of work always sees the same draws no matter which worker runs it.
    """
    if seed < 0:
        raise DomainError(f"seed must be nonnegative, got {seed}")
    if stream is None:
        sequence = np.random.SeedSequence(seed)
    else:
        sequence = np.random.SeedSequence(seed, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(sequence))
