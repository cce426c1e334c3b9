"""Numerical tolerances and small shared helpers.

Every tolerance used by the simulator, the membership checker and the games
lives here so that tests and reports quote the same numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    prune: float = 1e-12
    norm: float = 1e-9
    hermitian: float = 1e-9
    trace: float = 1e-9
    psd: float = 1e-8
    membership: float = 1e-9
    dense_max_width: int = 12


TOL = Tolerances()

# Normalisation is re-checked after every public qsim operation when set.
DEBUG_CHECKS = True


def make_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    """Return a numpy Generator; existing generators pass through untouched."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def split_rng(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    return list(rng.spawn(n))


def rand_bits(rng: np.random.Generator, nbits: int) -> int:
    """Uniform integer in [0, 2**nbits)."""
    if nbits <= 0:
        return 0
    nbytes = (nbits + 7) // 8
    raw = int.from_bytes(rng.bytes(nbytes), "big")
    return raw >> (8 * nbytes - nbits)


def rand_bit(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2))


def parity(x: int) -> int:
    return bin(x).count("1") & 1


def inner_product(a: int, b: int) -> int:
    """GF(2) inner product of two bit vectors packed as integers."""
    return parity(a & b)
