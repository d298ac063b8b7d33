"""Deterministic random-number plumbing.

Mode coefficients come from the counter-based Philox generator: the normal
for mode (j, k) is read at a fixed counter position given by a square-shell
pairing, so enlarging the cutoff extends the draw sequence instead of
reshuffling it.  Uniforms are turned into normals by the inverse CDF, which
keeps each draw a pure function of (seed, j, k).
"""

import numpy as np
from scipy.special import ndtri

__all__ = ["mode_normals", "derive_seed"]

_U64_11 = np.uint64(11)


def _shell_index(j: np.ndarray, k: np.ndarray) -> np.ndarray:
    # Shell s = max(j, k) occupies counter slots (s-1)^2 .. s^2 - 1:
    # first (j, s) for j = 1..s, then (s, k) for k = 1..s-1.
    s = np.maximum(j, k)
    base = (s - 1) ** 2
    return np.where(k == s, base + (j - 1), base + s + (k - 1))


def mode_normals(seed: int, cutoff: int) -> np.ndarray:
    """Standard normals alpha[j-1, k-1] for 1 <= j, k <= cutoff."""
    raw = np.random.Philox(key=int(seed) & (2**64 - 1)).random_raw(cutoff * cutoff)
    j = np.arange(1, cutoff + 1)
    jj, kk = np.meshgrid(j, j, indexing="ij")
    u = (raw[_shell_index(jj, kk)] >> _U64_11) * 2.0**-53 + 2.0**-54
    return ndtri(u)


def derive_seed(base: int, *key: int) -> int:
    """Stable 64-bit child seed for (base, key); used for per-trial streams."""
    ss = np.random.SeedSequence(entropy=int(base) & (2**64 - 1), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
