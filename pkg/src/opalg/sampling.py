"""Seeded random generators and random matrix ensembles.

Every check draws from its own counter-based stream keyed by ``(seed, check_id)``
so results do not depend on the order in which checks run.
"""

from __future__ import annotations

import zlib

import numpy as np


def rng_for(seed: int, check_id: str = "") -> np.random.Generator:
    key = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, zlib.crc32(check_id.encode("utf-8"))])
    return np.random.Generator(np.random.Philox(key))


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return rng_for(0 if rng is None else int(rng))


def ginibre(rng: np.random.Generator, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    g = ginibre(rng, n)
    return (g + g.conj().T) / 2


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary via QR with the phase correction of Mezzadri."""
    q, r = np.linalg.qr(ginibre(rng, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pd(rng: np.random.Generator, n: int, cond: float = 10.0) -> np.ndarray:
    u = random_unitary(rng, n)
    lam = np.exp(rng.uniform(0.0, np.log(cond), n))
    return (u * lam) @ u.conj().T


def random_invertible(rng: np.random.Generator, n: int, cond: float = 100.0) -> np.ndarray:
    """Random matrix whose singular values lie in ``[1, cond]`` (log-uniform)."""
    u = random_unitary(rng, n)
    v = random_unitary(rng, n)
    s = np.exp(rng.uniform(0.0, np.log(cond), n))
    s[0], s[-1] = 1.0, cond
    return (u * s) @ v.conj().T


def random_kraus(rng: np.random.Generator, n_in: int, n_out: int, count: int, unital: bool = False) -> list[np.ndarray]:
    """Random Kraus family ``K_j: C^n_in -> C^n_out``.

    ``unital=True`` normalizes so that ``sum K_j K_j^* = I``, which needs
    ``count * n_in >= n_out``.
    """
    if unital and count * n_in < n_out:
        raise ValueError(f"{count} Kraus operators from C^{n_in} cannot sum to the identity on C^{n_out}")
    ks = [ginibre(rng, n_out, n_in) for _ in range(count)]
    if unital:
        s = sum(k @ k.conj().T for k in ks)
        w, u = np.linalg.eigh(s)
        inv_sqrt = (u / np.sqrt(w)) @ u.conj().T
        ks = [inv_sqrt @ k for k in ks]
    return ks
