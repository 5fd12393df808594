"""Boolean functions as +-1 sign tables and their Walsh-Hadamard spectra.

A table on ``n`` variables holds ``(-1)^f(x)`` at index ``x``, where bit 0 of
the index is ``x_1``. All spectral work is done on exact integer sums
``W(w) = sum_x (-1)^(w.x) t[x]``; the expectation (``2^-n``) and unitary
(``2^-n/2``) normalisations are applied only when values are read out.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .gf2 import BitMatrix, BitVector, Singular, rank

__all__ = [
    "TruthTable",
    "QuadraticForm",
    "Spectrum",
    "NotBent",
    "fwht",
    "evaluate",
    "to_table",
    "wht",
    "is_bent",
    "dual_bent",
    "ip",
    "apply_affine",
    "linear_image",
    "shift",
    "convolve",
    "correlation",
    "flip_noise",
    "fit_quadratic",
    "index_bits",
]

Normalization = Literal["integer", "expectation", "unitary"]


class NotBent(ValueError):
    """The table's Walsh spectrum is not flat."""


def fwht(values, axis: int = -1) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along ``axis`` (returns a new array).

    In-place butterfly on a contiguous copy, ``O(N log N)`` for axis length N.
    """
    a = np.array(values, copy=True, order="C")
    _butterfly(a, axis)
    return a


def _butterfly(a: np.ndarray, axis: int) -> None:
    """In-place Walsh-Hadamard butterfly on a C-contiguous array."""
    axis %= a.ndim
    size = a.shape[axis]
    if size & (size - 1):
        raise ValueError(f"axis length {size} is not a power of two")
    before = a.shape[:axis]
    after = a.shape[axis + 1:]
    h = 1
    while h < size:
        v = a.reshape(before + (size // (2 * h), 2, h) + after)
        lead = (slice(None),) * (len(before) + 1)
        lo = v[lead + (0,)]
        hi = v[lead + (1,)]
        tmp = lo - hi
        lo += hi
        hi[...] = tmp
        h *= 2


def index_bits(n: int) -> np.ndarray:
    """``(n, 2^n)`` array whose row ``i`` is bit ``i`` of every index."""
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[None, :] >> np.arange(n, dtype=np.int64)[:, None]) & 1).astype(np.uint8)


def _parity_array(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    shift_ = 32
    while shift_:
        x ^= x >> np.uint64(shift_)
        shift_ //= 2
    return (x & np.uint64(1)).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class TruthTable:
    """Sign table of a Boolean function on ``n`` variables."""

    n: int
    signs: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.signs)
        if s.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} entries, got shape {s.shape}")
        if not np.all(np.abs(s) == 1):
            raise ValueError("table entries must be +1 or -1")
        s = s.astype(np.int8)
        s.flags.writeable = False
        object.__setattr__(self, "signs", s)

    @classmethod
    def from_bits(cls, bits) -> TruthTable:
        b = np.asarray(bits, dtype=np.int64) & 1
        n = int(b.size).bit_length() - 1
        return cls(n, 1 - 2 * b)

    @classmethod
    def constant(cls, n: int, value: int = 0) -> TruthTable:
        return cls(n, np.full(1 << n, -1 if value & 1 else 1, dtype=np.int8))

    @classmethod
    def linear(cls, l: BitVector, b: int = 0) -> TruthTable:
        idx = np.arange(1 << l.n, dtype=np.int64)
        return cls.from_bits(_parity_array(idx & l.value) ^ (b & 1))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> TruthTable:
        return cls.from_bits(rng.integers(0, 2, size=1 << n))

    def bits(self) -> np.ndarray:
        """GF(2) view: 1 where the sign is -1."""
        return ((1 - self.signs.astype(np.int64)) // 2).astype(np.uint8)

    def value(self, x: int | BitVector) -> int:
        """f(x) in GF(2)."""
        return int(self.signs[_index(x, self.n)] < 0)

    def __getitem__(self, x: int | BitVector) -> int:
        return int(self.signs[_index(x, self.n)])

    def __len__(self) -> int:
        return 1 << self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruthTable):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.signs, other.signs))

    def __hash__(self) -> int:
        return hash((self.n, self.signs.tobytes()))

    def __neg__(self) -> TruthTable:
        return TruthTable(self.n, -self.signs)

    def __mul__(self, other: TruthTable) -> TruthTable:
        _same_n(self, other)
        return TruthTable(self.n, self.signs * other.signs)

    def to_hex(self) -> str:
        """Hex bitstring of the table; bit x is 1 iff ``t[x] == -1``."""
        packed = np.packbits(self.bits(), bitorder="little")
        value = int.from_bytes(packed.tobytes(), "little")
        return format(value, "0{}x".format(max(1, (1 << self.n) // 4)))

    @classmethod
    def from_hex(cls, text: str, n: int) -> TruthTable:
        value = int(text, 16)
        if value >> (1 << n):
            raise ValueError("hex string longer than the table")
        raw = value.to_bytes(max(1, (1 << n) // 8 + 1), "little")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        return cls.from_bits(bits[: 1 << n])

    def to_dict(self) -> dict:
        return {"n": self.n, "signs": self.signs.astype(int).tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> TruthTable:
        return cls(int(data["n"]), np.asarray(data["signs"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> TruthTable:
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        return f"TruthTable(n={self.n}, hex={self.to_hex()})"


def _index(x: int | BitVector, n: int) -> int:
    if isinstance(x, BitVector):
        if x.n != n:
            raise ValueError(f"dimension mismatch: {x.n} vs {n}")
        return x.value
    return int(x)


def _same_n(t1: TruthTable, t2: TruthTable) -> None:
    if t1.n != t2.n:
        raise ValueError(f"dimension mismatch: {t1.n} vs {t2.n}")


@dataclass(frozen=True)
class QuadraticForm:
    """``f(x) = x q x^t + l x^t + b`` with ``q`` strictly upper triangular."""

    q: BitMatrix
    l: BitVector
    b: int = 0

    def __post_init__(self):
        if not self.q.is_square() or self.q.nrows != self.l.n:
            raise ValueError(f"shape mismatch: q {self.q.shape}, l {self.l.n}")
        if self.q.upper_triangle() != self.q:
            raise ValueError("q must be strictly upper triangular")
        if self.b not in (0, 1):
            raise ValueError("b must be 0 or 1")

    @property
    def n(self) -> int:
        return self.l.n

    @classmethod
    def zero(cls, n: int) -> QuadraticForm:
        return cls(BitMatrix.zeros(n), BitVector.zeros(n), 0)

    @classmethod
    def from_matrix(cls, m: BitMatrix, l: BitVector | None = None, b: int = 0) -> QuadraticForm:
        """Normalise ``x m x^t + l x^t + b`` for an arbitrary square ``m``.

        Pairs ``(i, j)`` and ``(j, i)`` merge into the upper triangle and the
        diagonal folds into the linear part since ``x_i^2 = x_i``.
        """
        n = m.nrows
        l = BitVector.zeros(n) if l is None else l
        sym = m + m.transpose()
        return cls(sym.upper_triangle(), l + m.diagonal(), b & 1)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> QuadraticForm:
        q = BitMatrix.random(n, n, rng).upper_triangle()
        return cls(q, BitVector.random(n, rng), int(rng.integers(0, 2)))

    def symplectic(self) -> BitMatrix:
        """``q + q^t``."""
        return self.q + self.q.transpose()

    def rank(self) -> int:
        return rank(self.symplectic())

    def quadratic_part(self) -> QuadraticForm:
        return QuadraticForm(self.q, BitVector.zeros(self.n), 0)

    def to_dict(self) -> dict:
        return {"n": self.n, "q_rows": self.q.hex_rows(), "l": self.l.hex(), "b": self.b}

    @classmethod
    def from_dict(cls, data: dict) -> QuadraticForm:
        n = int(data["n"])
        return cls(
            BitMatrix.from_hex_rows(data["q_rows"], n),
            BitVector.from_hex(data["l"], n),
            int(data["b"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> QuadraticForm:
        return cls.from_dict(json.loads(text))


def evaluate(qf: QuadraticForm, x: BitVector) -> int:
    """``x q x^t + l x^t + b`` over GF(2)."""
    if x.n != qf.n:
        raise ValueError(f"dimension mismatch: {x.n} vs {qf.n}")
    return (x @ qf.q).dot(x) ^ qf.l.dot(x) ^ qf.b


def to_table(qf: QuadraticForm) -> TruthTable:
    n = qf.n
    bits = index_bits(n)
    acc = np.full(1 << n, qf.b, dtype=np.uint8)
    for i in range(n):
        row = qf.q.rows[i]
        if (qf.l.value >> i) & 1:
            acc ^= bits[i]
        if row:
            partner = np.zeros(1 << n, dtype=np.uint8)
            for j in range(i + 1, n):
                if (row >> j) & 1:
                    partner ^= bits[j]
            acc ^= bits[i] & partner
    return TruthTable.from_bits(acc)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Walsh spectrum kept as exact integer sums plus a normalisation tag."""

    n: int
    raw: np.ndarray
    normalization: Normalization = "integer"

    @property
    def coefficients(self) -> np.ndarray:
        if self.normalization == "integer":
            return self.raw.copy()
        if self.normalization == "expectation":
            return self.raw / float(1 << self.n)
        if self.normalization == "unitary":
            return self.raw / 2.0 ** (self.n / 2)
        raise ValueError(f"unknown normalization {self.normalization!r}")

    def normalized(self, normalization: Normalization) -> Spectrum:
        return Spectrum(self.n, self.raw, normalization)

    def __len__(self) -> int:
        return len(self.raw)

    def __getitem__(self, w):
        return self.coefficients[_index(w, self.n)]


def wht(t: TruthTable) -> Spectrum:
    """Integer Walsh-Hadamard spectrum ``W(w) = sum_x (-1)^(w.x) t[x]``."""
    return Spectrum(t.n, fwht(t.signs.astype(np.int64)))


def is_bent(t: TruthTable) -> bool:
    if t.n % 2:
        return False
    w = wht(t).raw
    return bool(np.all(w * w == (1 << t.n)))


def dual_bent(t: TruthTable) -> TruthTable:
    """The dual bent function, ``(-1)^dual(w) = 2^(-n/2) W(w)``."""
    if not is_bent(t):
        raise NotBent("dual is only defined for bent functions")
    return TruthTable(t.n, np.sign(wht(t).raw))


def ip(h: int, n: int) -> QuadraticForm:
    """Inner product ``x_1 x_2 + x_3 x_4 + ... + x_{2h-1} x_{2h}`` on n variables."""
    if h < 0 or 2 * h > n:
        raise ValueError(f"ip({h}) needs 2h <= n, got n={n}")
    rows = [0] * n
    for i in range(h):
        rows[2 * i] = 1 << (2 * i + 1)
    return QuadraticForm(BitMatrix(tuple(rows), n), BitVector.zeros(n), 0)


def linear_image(a: BitMatrix) -> np.ndarray:
    """Index table of ``x -> x a`` for every x (``a`` has 2^rows inputs)."""
    img = np.zeros(1 << a.nrows, dtype=np.int64)
    for i, r in enumerate(a.rows):
        half = 1 << i
        img[half: 2 * half] = img[:half] ^ r
    return img


def apply_affine(t: TruthTable, a: BitMatrix, b: BitVector) -> TruthTable:
    """``x -> t[x a + b]`` for invertible ``a``."""
    if a.shape != (t.n, t.n) or b.n != t.n:
        raise ValueError("dimension mismatch")
    if rank(a) != t.n:
        raise Singular("affine map must be invertible")
    return TruthTable(t.n, t.signs[linear_image(a) ^ b.value])


def shift(t: TruthTable, s: BitVector | int) -> TruthTable:
    """``x -> t[x + s]``."""
    s = _index(s, t.n)
    return TruthTable(t.n, t.signs[np.arange(1 << t.n, dtype=np.int64) ^ s])


def convolve(t1: TruthTable, t2: TruthTable) -> np.ndarray:
    """``(f*g)(x) = 2^-n sum_y f(x+y) g(y)``, computed through the spectra."""
    _same_n(t1, t2)
    n = t1.n
    prod = wht(t1).raw * wht(t2).raw
    return fwht(prod) / float(1 << (2 * n))


def correlation(t1: TruthTable, t2: TruthTable) -> float:
    """``E_x[t1(x) t2(x)]``."""
    _same_n(t1, t2)
    return float(np.dot(t1.signs.astype(np.int64), t2.signs.astype(np.int64))) / (1 << t1.n)


def flip_noise(t: TruthTable, delta: float, rng: np.random.Generator) -> TruthTable:
    """Negate exactly ``round(delta * 2^n)`` entries at distinct random positions."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    size = 1 << t.n
    count = int(np.floor(delta * size + 0.5))
    signs = t.signs.copy()
    if count:
        signs[rng.choice(size, size=count, replace=False)] *= -1
    return TruthTable(t.n, signs)


def fit_quadratic(t: TruthTable) -> tuple[QuadraticForm, bool]:
    """Interpolate a quadratic from the values at 0, e_i and e_i + e_j.

    The flag is true iff the fitted form reproduces ``t`` everywhere.
    """
    n = t.n
    f = t.value
    b = f(0)
    single = [f(1 << i) for i in range(n)]
    l = BitVector(sum((single[i] ^ b) << i for i in range(n)), n)
    rows = []
    for i in range(n):
        row = 0
        for j in range(i + 1, n):
            if f((1 << i) | (1 << j)) ^ single[i] ^ single[j] ^ b:
                row |= 1 << j
        rows.append(row)
    qf = QuadraticForm(BitMatrix(tuple(rows), n), l, b)
    return qf, to_table(qf) == t
