"""Standard MLM masking: select positions at the configured rate, then
replace 80% with the mask piece, 10% with a random piece, 10% unchanged.
Labels hold the original ids at selected positions and -100 elsewhere.
Padding (and the other special ids) is never selected.  Deterministic for a
given seed.
"""

from __future__ import annotations

import numpy as np

from .data import DOC_SEP_ID, MASK_ID, PAD_ID, UNK_ID

IGNORE_INDEX = -100
_NEVER_MASK = (PAD_ID, UNK_ID, MASK_ID, DOC_SEP_ID)


def mask_batch(
    batch: np.ndarray,
    vocab_size: int,
    rate: float = 0.15,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Return (masked inputs, labels) for one (B, T) batch of piece ids."""
    if not 0.0 < rate < 1.0:
        raise ValueError(f"masking rate must be in (0, 1), got {rate}")
    batch = np.asarray(batch, dtype=np.int64)
    rng = np.random.default_rng(seed)

    maskable = ~np.isin(batch, _NEVER_MASK)
    selected = (rng.random(batch.shape) < rate) & maskable

    labels = np.where(selected, batch, IGNORE_INDEX)
    inputs = batch.copy()

    action = rng.random(batch.shape)
    to_mask = selected & (action < 0.8)
    to_random = selected & (action >= 0.8) & (action < 0.9)
    inputs[to_mask] = MASK_ID
    if to_random.any():
        lo = len(_NEVER_MASK)
        randoms = rng.integers(lo, vocab_size, size=int(to_random.sum()))
        inputs[to_random] = randoms
    return inputs, labels
