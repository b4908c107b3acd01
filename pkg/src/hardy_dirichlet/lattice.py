"""Rank-1 lattice rules built component by component.

The generating vector minimises the shift-averaged worst-case error in a
weighted Korobov space of smoothness 2, using the fast (FFT) form of the
component-by-component search for a prime number of points.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from sympy import nextprime, primitive_root


def _omega(x: np.ndarray) -> np.ndarray:
    # 2 pi^2 B_2(x)
    return 2.0 * np.pi**2 * (x * x - x + 1.0 / 6.0)


def lattice_size(points: int) -> int:
    """Smallest prime >= max(points, 5)."""
    return int(nextprime(max(int(points), 5) - 1))


@lru_cache(maxsize=32)
def cbc_generating_vector(n: int, weights: tuple[float, ...]) -> np.ndarray:
    """Generating vector z (length len(weights)) for an n-point lattice, n prime."""
    g = int(primitive_root(n))
    perm = np.empty(n - 1, dtype=np.int64)
    perm[0] = 1
    for a in range(1, n - 1):
        perm[a] = perm[a - 1] * g % n
    fft_w = np.fft.fft(_omega(perm / n))
    k = np.arange(n, dtype=np.int64)
    prod = np.ones(n)
    z = np.empty(len(weights), dtype=np.int64)
    for j, gamma in enumerate(weights):
        corr = np.fft.ifft(np.conj(np.fft.fft(prod[perm])) * fft_w).real
        zj = int(perm[int(np.argmin(corr))])
        z[j] = zj
        prod *= 1.0 + gamma * _omega((k * zj % n) / n)
        prod /= prod.max()
    z.setflags(write=False)
    return z


def lattice_points(n: int, z: np.ndarray, shift: np.ndarray, start: int, stop: int) -> np.ndarray:
    """Rows start..stop-1 of the shifted lattice frac(k z / n + shift)."""
    k = np.arange(start, stop, dtype=np.int64)
    x = (np.multiply.outer(k, z) % n) / n + shift
    return x - np.floor(x)
