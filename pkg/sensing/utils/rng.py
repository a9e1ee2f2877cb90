"""
Named, seeded random streams.

Each consumer of randomness draws from its own stream derived from the run
seed, so adding draws to one consumer never shifts the numbers another sees.
"""
import numpy as np

# Fixed stream identifiers; append only, never renumber
STREAMS = {
    "dictionary": 1,
    "design": 2,
    "randn": 3,
    "bispar": 4,
    "signals": 5,
    "noise": 6,
}


def stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for ``name`` under ``seed``"""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.default_rng([int(seed), STREAMS[name]])
