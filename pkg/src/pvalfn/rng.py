"""Counter-based random numbers keyed by (seed, replicate index).

Each replicate gets its own SplitMix64 stream whose key is a hash of the base
seed and the replicate index, so replicate ``m`` is the same no matter how
the replicates are chunked or in what order they are generated. This is what
makes common random numbers across parameter values and parallel evaluation
deterministic.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO53 = 2.0**-53


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _as_u64(x: int) -> np.ndarray:
    return np.array([int(x) & _MASK], dtype=np.uint64)


def derive_seed(seed: int, *labels: int) -> int:
    """Hash ``seed`` together with integer labels into a new 64-bit seed.

    Used to carve independent sub-streams (e.g. datasets vs. Monte Carlo
    replicates in a coverage study) out of one user seed.
    """
    z = _mix64(_as_u64(seed) + _GAMMA)
    for lab in labels:
        z = _mix64(z ^ _mix64(_as_u64(lab) + _GAMMA))
    return int(z[0])


def replicate_keys(seed: int, start: int, count: int) -> np.ndarray:
    idx = np.arange(start, start + count, dtype=np.uint64)
    base = _mix64(_as_u64(seed) + _GAMMA)
    with np.errstate(over="ignore"):
        return _mix64(base ^ _mix64((idx + np.uint64(1)) * _GAMMA))


def uniforms(seed: int, count: int, width: int, start: int = 0) -> np.ndarray:
    """Array of shape ``(count, width)`` of uniforms on the open interval (0, 1).

    Row ``i`` holds the first ``width`` draws of replicate ``start + i``.
    """
    keys = replicate_keys(seed, start, count)[:, None]
    ctr = (np.arange(1, width + 1, dtype=np.uint64) * _GAMMA)[None, :]
    bits = _mix64(keys + ctr)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO53


def normals(seed: int, count: int, width: int, start: int = 0) -> np.ndarray:
    """Standard normals by Box-Muller; each pair consumes two uniforms."""
    half = (width + 1) // 2
    u = uniforms(seed, count, 2 * half, start)
    r = np.sqrt(-2.0 * np.log(u[:, :half]))
    ang = 2.0 * np.pi * u[:, half:]
    z = np.concatenate([r * np.cos(ang), r * np.sin(ang)], axis=1)
    return z[:, :width]
