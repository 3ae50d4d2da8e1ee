"""Seeded random streams.

Every consumer derives its generator from a key path such as
``(seed, replicate, batch_index)`` so that streams are independent of the
order in which they are created and can be reproduced from the key alone.
Philox is a counter-based bit generator with a fixed, documented algorithm,
so the draws are identical across platforms.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, *keys: int) -> np.random.Generator:
    entropy = [int(seed) & _MASK64] + [int(k) & _MASK64 for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
