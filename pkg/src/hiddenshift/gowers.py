"""Gowers uniformity norms of +-1 functions on GF(2)^n.

For sign tables the derivative is multiplicative, ``D_h f(x) = f(x+h) f(x)``,
and ``||f||_{U^k}^{2^k} = E_{x,h_1..h_k} D_{h_1}...D_{h_k} f(x)``. Every
method accumulates the exact integer ``raw_sum = 2^{n(k+1)} ||f||^{2^k}`` and
takes a single floating root at the end.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from .boolfn import TruthTable, fwht
from .gf2 import BitVector

__all__ = [
    "GowersResult",
    "CostGuardError",
    "derivative",
    "gowers_brute",
    "gowers_u2_fourier",
    "gowers_recursive",
    "gowers_norm",
]

BRUTE_EXPONENT_LIMIT = 32


class CostGuardError(ValueError):
    """Brute-force evaluation would exceed the 2^32-term budget."""


@dataclass(frozen=True)
class GowersResult:
    k: int
    value: float
    method: Literal["brute", "recursive", "fourier"]
    raw_sum: int
    n: int

    @property
    def power(self) -> Fraction:
        """Exact ``||f||^{2^k}``."""
        return Fraction(self.raw_sum, 1 << (self.n * (self.k + 1)))


def _result(raw: int, n: int, k: int, method) -> GowersResult:
    if raw < 0:
        raise ArithmeticError(f"negative Gowers sum {raw}")
    value = float(Fraction(raw, 1 << (n * (k + 1)))) ** (1.0 / (1 << k))
    return GowersResult(k, min(value, 1.0) if raw else 0.0, method, raw, n)


def derivative(t: TruthTable, h: BitVector | int) -> TruthTable:
    """``x -> t[x+h] t[x]``."""
    if isinstance(h, BitVector):
        if h.n != t.n:
            raise ValueError(f"dimension mismatch: {h.n} vs {t.n}")
        h = h.value
    idx = np.arange(1 << t.n, dtype=np.int64)
    return TruthTable(t.n, t.signs[idx ^ h] * t.signs)


def _all_derivatives(block: np.ndarray, xor_table: np.ndarray) -> np.ndarray:
    """``(..., N) -> (..., N_h, N)`` with ``out[..., h, x] = a[x^h] a[x]``."""
    return block[..., xor_table] * block[..., None, :]


def gowers_brute(t: TruthTable, k: int) -> GowersResult:
    """Average of the k-fold iterated derivative over every (x, h_1..h_k)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    n = t.n
    if n * (k + 1) > BRUTE_EXPONENT_LIMIT:
        raise CostGuardError(f"2^{n * (k + 1)} terms exceed the brute-force budget")
    size = 1 << n
    idx = np.arange(size, dtype=np.int64)
    xor_table = idx[:, None] ^ idx[None, :]
    base = t.signs.astype(np.int8)
    if k == 1:
        return _result(int(_all_derivatives(base, xor_table).sum(dtype=np.int64)), n, 1, "brute")
    # Partition over h_1 to bound the working set to 2^{n k} entries.
    total = 0
    for h1 in range(size):
        block = base[idx ^ h1] * base
        for _ in range(k - 1):
            block = _all_derivatives(block, xor_table)
        total += int(block.sum(dtype=np.int64))
    return _result(total, n, k, "brute")


def _u2_raw(blocks: np.ndarray, n: int) -> np.ndarray:
    """Per-table ``2^{3n} ||f||_{U^2}^4 = 2^{-n} sum_w W(w)^4`` for a stack of tables."""
    walsh = fwht(blocks.astype(np.int64), axis=-1)
    sq = walsh * walsh
    # W^4 can exceed int64 for n > 15; fold through Python ints there.
    if n <= 12:
        fourth = (sq * sq).sum(axis=-1)
        return fourth >> n
    flat = sq.reshape(-1, sq.shape[-1])
    out = [sum(int(v) * int(v) for v in row) >> n for row in flat]
    return np.array(out, dtype=object).reshape(sq.shape[:-1])


def gowers_u2_fourier(t: TruthTable) -> GowersResult:
    """``||f||_{U^2}^4 = sum_w fhat(w)^4``."""
    raw = _u2_raw(t.signs[None, :], t.n)[0]
    return _result(int(raw), t.n, 2, "fourier")


def gowers_recursive(t: TruthTable, k: int) -> GowersResult:
    """Unfold ``||f||_{U^k}^{2^k} = E_h ||D_h f||_{U^{k-1}}^{2^{k-1}}`` down to U^2.

    The U^2 leaves are evaluated through the Fourier identity, so k=3 costs
    ``O(n 2^{2n})``.
    """
    if k < 2:
        raise ValueError("recursive evaluation needs k >= 2")
    n = t.n
    idx = np.arange(1 << n, dtype=np.int64)
    xor_table = idx[:, None] ^ idx[None, :]
    block = t.signs.astype(np.int8)
    for _ in range(k - 2):
        block = _all_derivatives(block, xor_table)
    raw = _u2_raw(block, n)
    total = int(raw.sum()) if raw.dtype != object else sum(int(v) for v in raw.ravel())
    return _result(total, n, k, "recursive")


def gowers_norm(t: TruthTable, k: int) -> GowersResult:
    """Cheapest exact method for the requested order."""
    if k == 2:
        return gowers_u2_fourier(t)
    if k >= 3:
        return gowers_recursive(t, k)
    return gowers_brute(t, k)
