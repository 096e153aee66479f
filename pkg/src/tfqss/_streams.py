"""Counter-based RNG streams shared by the simulator and optimizer.

Philox is keyed with (seed, stream index), giving every chunk, generation,
or repeat an independent stream that does not depend on execution order or
thread count.
"""

import numpy as np


def stream(seed: int, index: int) -> np.random.Generator:
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))
