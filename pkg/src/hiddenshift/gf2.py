"""Bit-packed linear algebra over GF(2).

Vectors and matrix rows are packed into Python integers, bit ``i`` holding
coordinate ``i`` (little-endian, shared with the truth-table index
convention). Row XOR is the elimination primitive, so every elimination step
is word-parallel regardless of the width.

Vectors are row vectors: ``x @ A`` is the vector-matrix product ``xA`` and
``A @ x`` is ``A x^t`` returned as a vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BitVector",
    "BitMatrix",
    "Solution",
    "DicksonDecomposition",
    "Inconsistent",
    "Singular",
    "NotSymplectic",
    "rank",
    "solve",
    "invert",
    "kernel_basis",
    "dickson_decompose",
    "dickson_normal_form",
    "random_bits",
    "random_invertible",
    "random_symplectic",
]


class Inconsistent(ArithmeticError):
    """The linear system has no solution."""


class Singular(ArithmeticError):
    """The matrix is not invertible."""


class NotSymplectic(ValueError):
    """The matrix is not symmetric with zero diagonal."""


def _parity(x: int) -> int:
    return x.bit_count() & 1


def _iter_bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def random_bits(rng: np.random.Generator, n: int) -> int:
    """Uniformly random ``n``-bit integer drawn from ``rng``."""
    if n <= 0:
        return 0
    raw = int.from_bytes(rng.bytes((n + 7) // 8), "little")
    return raw & ((1 << n) - 1)


@dataclass(frozen=True)
class BitVector:
    """Element of GF(2)^n, packed into ``value`` (bit i = coordinate i)."""

    value: int
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("dimension must be non-negative")
        if self.value < 0 or self.value >> self.n:
            raise ValueError(f"value {self.value:#x} does not fit in {self.n} bits")

    @classmethod
    def zeros(cls, n: int) -> BitVector:
        return cls(0, n)

    @classmethod
    def unit(cls, i: int, n: int) -> BitVector:
        if not 0 <= i < n:
            raise IndexError(i)
        return cls(1 << i, n)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BitVector:
        value = 0
        n = 0
        for i, b in enumerate(bits):
            if int(b) & 1:
                value |= 1 << i
            n = i + 1
        return cls(value, n)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> BitVector:
        return cls(random_bits(rng, n), n)

    @classmethod
    def from_hex(cls, text: str, n: int) -> BitVector:
        return cls(int(text, 16), n)

    def hex(self) -> str:
        return format(self.value, "0{}x".format(max(1, (self.n + 3) // 4)))

    def bits(self) -> list[int]:
        return [(self.value >> i) & 1 for i in range(self.n)]

    def to_array(self) -> np.ndarray:
        return np.array(self.bits(), dtype=np.uint8)

    def weight(self) -> int:
        return self.value.bit_count()

    def dot(self, other: BitVector) -> int:
        self._check(other)
        return _parity(self.value & other.value)

    def _check(self, other: BitVector) -> None:
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not -self.n <= i < self.n:
            raise IndexError(i)
        return (self.value >> (i % self.n)) & 1

    def __iter__(self):
        return iter(self.bits())

    def __add__(self, other: BitVector) -> BitVector:
        self._check(other)
        return BitVector(self.value ^ other.value, self.n)

    __xor__ = __add__
    __sub__ = __add__

    def __bool__(self) -> bool:
        return self.value != 0

    def __matmul__(self, other: BitMatrix) -> BitVector:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        if other.nrows != self.n:
            raise ValueError(f"cannot multiply 1x{self.n} by {other.shape}")
        acc = 0
        for i in _iter_bits(self.value):
            acc ^= other.rows[i]
        return BitVector(acc, other.ncols)

    def __repr__(self) -> str:
        return "BitVector({})".format("".join(map(str, self.bits())) or "-")


@dataclass(frozen=True)
class BitMatrix:
    """Dense GF(2) matrix with rows packed into integers."""

    rows: tuple[int, ...]
    ncols: int

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        limit = 1 << self.ncols
        for r in self.rows:
            if r < 0 or r >= limit:
                raise ValueError(f"row {r:#x} does not fit in {self.ncols} columns")

    # -- construction -----------------------------------------------------

    @classmethod
    def zeros(cls, nrows: int, ncols: int | None = None) -> BitMatrix:
        return cls((0,) * nrows, nrows if ncols is None else ncols)

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls(tuple(1 << i for i in range(n)), n)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> BitMatrix:
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        packed = []
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged rows")
            packed.append(BitVector.from_bits(r).value if r else 0)
        return cls(tuple(packed), ncols)

    @classmethod
    def from_array(cls, array) -> BitMatrix:
        a = np.asarray(array)
        if a.ndim != 2:
            raise ValueError("expected a 2-d array")
        return cls.from_rows((a.astype(np.int64) & 1).tolist()) if a.shape[0] else cls((), a.shape[1])

    @classmethod
    def from_vectors(cls, vectors: Sequence[BitVector], ncols: int | None = None) -> BitMatrix:
        if ncols is None:
            if not vectors:
                raise ValueError("ncols required for an empty vector list")
            ncols = vectors[0].n
        return cls(tuple(v.value for v in vectors), ncols)

    @classmethod
    def random(cls, nrows: int, ncols: int, rng: np.random.Generator) -> BitMatrix:
        return cls(tuple(random_bits(rng, ncols) for _ in range(nrows)), ncols)

    @classmethod
    def block_diag(cls, *blocks: BitMatrix) -> BitMatrix:
        rows: list[int] = []
        offset = 0
        for blk in blocks:
            rows.extend(r << offset for r in blk.rows)
            offset += blk.ncols
        return cls(tuple(rows), offset)

    # -- access -----------------------------------------------------------

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, key: tuple[int, int]) -> int:
        i, j = key
        if not 0 <= j < self.ncols:
            raise IndexError(j)
        return (self.rows[i] >> j) & 1

    def row(self, i: int) -> BitVector:
        return BitVector(self.rows[i], self.ncols)

    def column(self, j: int) -> BitVector:
        return BitVector(sum(((r >> j) & 1) << i for i, r in enumerate(self.rows)), self.nrows)

    def row_vectors(self) -> list[BitVector]:
        return [BitVector(r, self.ncols) for r in self.rows]

    def column_vectors(self) -> list[BitVector]:
        return self.transpose().row_vectors()

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.uint8)
        for i, r in enumerate(self.rows):
            for j in _iter_bits(r):
                out[i, j] = 1
        return out

    def tolist(self) -> list[list[int]]:
        return self.to_array().tolist()

    def hex_rows(self) -> list[str]:
        return [BitVector(r, self.ncols).hex() for r in self.rows]

    @classmethod
    def from_hex_rows(cls, rows: Sequence[str], ncols: int) -> BitMatrix:
        return cls(tuple(int(r, 16) for r in rows), ncols)

    # -- algebra ----------------------------------------------------------

    def transpose(self) -> BitMatrix:
        cols = [0] * self.ncols
        for i, r in enumerate(self.rows):
            bit = 1 << i
            for j in _iter_bits(r):
                cols[j] |= bit
        return BitMatrix(tuple(cols), self.nrows)

    @property
    def T(self) -> BitMatrix:
        return self.transpose()

    def __add__(self, other: BitMatrix) -> BitMatrix:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")
        return BitMatrix(tuple(a ^ b for a, b in zip(self.rows, other.rows)), self.ncols)

    __xor__ = __add__
    __sub__ = __add__

    def __matmul__(self, other):
        if isinstance(other, BitMatrix):
            if self.ncols != other.nrows:
                raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
            out = []
            for r in self.rows:
                acc = 0
                for j in _iter_bits(r):
                    acc ^= other.rows[j]
                out.append(acc)
            return BitMatrix(tuple(out), other.ncols)
        if isinstance(other, BitVector):
            if self.ncols != other.n:
                raise ValueError(f"cannot multiply {self.shape} by {other.n}x1")
            return BitVector(
                sum(_parity(r & other.value) << i for i, r in enumerate(self.rows)), self.nrows
            )
        return NotImplemented

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def is_symmetric(self) -> bool:
        return self.is_square() and self == self.transpose()

    def is_symplectic(self) -> bool:
        """Symmetric with zero diagonal."""
        return self.is_symmetric() and all(not (r >> i) & 1 for i, r in enumerate(self.rows))

    def upper_triangle(self) -> BitMatrix:
        """Strictly upper-triangular part (entries with i < j)."""
        return BitMatrix(
            tuple((r >> (i + 1)) << (i + 1) for i, r in enumerate(self.rows)), self.ncols
        )

    def diagonal(self) -> BitVector:
        n = min(self.shape)
        return BitVector(sum(((self.rows[i] >> i) & 1) << i for i in range(n)), n)

    def __repr__(self) -> str:
        body = "; ".join(
            "".join(str((r >> j) & 1) for j in range(self.ncols)) for r in self.rows
        )
        return f"BitMatrix[{self.nrows}x{self.ncols}]({body})"


def rank(m: BitMatrix) -> int:
    """GF(2) rank."""
    basis: dict[int, int] = {}
    for r in m.rows:
        while r:
            top = r.bit_length() - 1
            pivot = basis.get(top)
            if pivot is None:
                basis[top] = r
                break
            r ^= pivot
    return len(basis)


def _rref(rows: list[int], pivot_cols: int) -> tuple[list[int], list[int]]:
    """Gauss-Jordan elimination; pivots are searched in the low ``pivot_cols`` bits.

    Returns the reduced rows (pivot rows first) and the pivot column of each.
    """
    rows = list(rows)
    pivots: list[int] = []
    top = 0
    for col in range(pivot_cols):
        bit = 1 << col
        found = next((i for i in range(top, len(rows)) if rows[i] & bit), None)
        if found is None:
            continue
        rows[top], rows[found] = rows[found], rows[top]
        pivot = rows[top]
        for i in range(len(rows)):
            if i != top and rows[i] & bit:
                rows[i] ^= pivot
        pivots.append(col)
        top += 1
        if top == len(rows):
            break
    return rows, pivots


def _kernel_from_rref(rows: list[int], pivots: list[int], ncols: int) -> list[BitVector]:
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = 1 << free
        for row, pc in zip(rows, pivots):
            if (row >> free) & 1:
                v |= 1 << pc
        basis.append(BitVector(v, ncols))
    return basis


@dataclass(frozen=True)
class Solution:
    """A particular solution of ``a X = b`` plus a basis of the kernel of ``a``.

    Every solution is ``particular + sum(c_i k_i)`` with each ``k_i`` added
    to a column of ``particular``.
    """

    particular: BitMatrix
    kernel: list[BitVector]

    @property
    def unique(self) -> bool:
        return not self.kernel

    @property
    def nullity(self) -> int:
        return len(self.kernel)


def solve(a: BitMatrix, b: BitMatrix) -> Solution:
    """Solve ``a X = b`` over GF(2).

    Raises :class:`Inconsistent` when no solution exists. An underdetermined
    system is reported through a non-empty ``Solution.kernel``.
    """
    if a.nrows != b.nrows:
        raise ValueError(f"row mismatch: {a.shape} vs {b.shape}")
    c = a.ncols
    aug = [ra | (rb << c) for ra, rb in zip(a.rows, b.rows)]
    rows, pivots = _rref(aug, c)
    amask = (1 << c) - 1
    for r in rows[len(pivots):]:
        if r >> c:
            raise Inconsistent("system has no solution")
    x = [0] * c
    for r, pc in zip(rows, pivots):
        x[pc] = r >> c
    kernel = _kernel_from_rref([r & amask for r in rows[: len(pivots)]], pivots, c)
    return Solution(BitMatrix(tuple(x), b.ncols), kernel)


def invert(m: BitMatrix) -> BitMatrix:
    if not m.is_square():
        raise ValueError(f"matrix must be square, got {m.shape}")
    try:
        sol = solve(m, BitMatrix.identity(m.nrows))
    except Inconsistent:
        raise Singular("matrix is singular") from None
    if not sol.unique:
        raise Singular("matrix is singular")
    return sol.particular


def kernel_basis(m: BitMatrix) -> list[BitVector]:
    """Basis of ``{v : m v^t = 0}``; its size is ``cols - rank``."""
    rows, pivots = _rref(list(m.rows), m.ncols)
    return _kernel_from_rref(rows[: len(pivots)], pivots, m.ncols)


@dataclass(frozen=True)
class DicksonDecomposition:
    r_matrix: BitMatrix
    half_rank: int

    @property
    def normal_form(self) -> BitMatrix:
        return dickson_normal_form(self.half_rank, self.r_matrix.nrows)


def dickson_normal_form(h: int, n: int) -> BitMatrix:
    """``(1_h (x) sigma_x) (+) 0_{n-2h}``."""
    if 2 * h > n:
        raise ValueError(f"2h={2 * h} exceeds n={n}")
    rows = [0] * n
    for i in range(h):
        rows[2 * i] = 1 << (2 * i + 1)
        rows[2 * i + 1] = 1 << (2 * i)
    return BitMatrix(tuple(rows), n)


def dickson_decompose(b: BitMatrix) -> DicksonDecomposition:
    """Find invertible R with ``R b R^t`` in Dickson normal form.

    Symplectic Gram-Schmidt over the rows of the identity: take the first
    vector that pairs non-trivially with a later one, normalise that
    hyperbolic pair, project it out of every remaining vector, repeat.
    Vectors that pair with nothing remaining span the radical and go last.
    """
    if not b.is_symplectic():
        raise NotSymplectic("matrix must be symmetric with zero diagonal")
    n = b.nrows

    def form(u: int, v: int) -> int:
        acc = 0
        for i in _iter_bits(u):
            acc ^= b.rows[i]
        return _parity(acc & v)

    remaining = [1 << i for i in range(n)]
    pairs: list[int] = []
    radical: list[int] = []
    while remaining:
        head = remaining[0]
        partner = next((j for j in range(1, len(remaining)) if form(head, remaining[j])), None)
        if partner is None:
            radical.append(remaining.pop(0))
            continue
        e = head
        f = remaining.pop(partner)
        remaining.pop(0)
        pairs.extend((e, f))
        projected = []
        for c in remaining:
            if form(c, f):
                c ^= e
            if form(c, e):
                c ^= f
            projected.append(c)
        remaining = projected
    r = BitMatrix(tuple(pairs + radical), n)
    return DicksonDecomposition(r, len(pairs) // 2)


def random_invertible(n: int, rng: np.random.Generator) -> BitMatrix:
    """Rejection-sample a uniformly random element of GL(n, 2)."""
    while True:
        m = BitMatrix.random(n, n, rng)
        if rank(m) == n:
            return m


def random_symplectic(n: int, rng: np.random.Generator) -> BitMatrix:
    """Uniformly random symmetric zero-diagonal ``n x n`` matrix."""
    upper = BitMatrix.random(n, n, rng).upper_triangle()
    return upper + upper.transpose()
