"""Real-amplitude statevector simulator with named qubit registers.

Registers are contiguous qubit ranges; the first register in a layout holds
the least significant bits of the global basis index, so a register's value
is ``(index >> offset) & (2^width - 1)`` and its bit 0 is its first variable,
matching the truth-table convention in :mod:`hiddenshift.boolfn`.

Gate functions update the state in place and return it for chaining.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np

from .boolfn import TruthTable, _butterfly
from .gf2 import BitVector

__all__ = [
    "MAX_QUBITS",
    "SimulatorCapExceeded",
    "StateVector",
    "MeasurementOutcome",
    "uniform_state",
    "basis_state",
    "phase_state",
    "hadamard_register",
    "phase_oracle",
    "cnot_register",
    "controlled_swap",
    "t_transform",
    "measure_register",
    "sample_indices",
    "register_values",
    "swap_test",
    "swap_test_bits",
    "save_state",
    "load_state",
]

MAX_QUBITS = 26
_MAGIC = b"QSV1"


class SimulatorCapExceeded(ValueError):
    """Requested more qubits than the simulator allows."""


Layout = Mapping[str, int] | Sequence[tuple[str, int]]


class StateVector:
    """Amplitudes over ``num_qubits`` qubits partitioned into named registers."""

    def __init__(self, amplitudes: np.ndarray, layout: Layout):
        items = list(layout.items()) if isinstance(layout, Mapping) else list(layout)
        self.registers: dict[str, tuple[int, int]] = {}
        offset = 0
        for name, width in items:
            if name in self.registers:
                raise ValueError(f"duplicate register {name!r}")
            if width < 1:
                raise ValueError(f"register {name!r} must have positive width")
            self.registers[name] = (offset, int(width))
            offset += int(width)
        self.num_qubits = offset
        if offset > MAX_QUBITS:
            raise SimulatorCapExceeded(f"{offset} qubits exceeds the cap of {MAX_QUBITS}")
        amps = np.ascontiguousarray(amplitudes, dtype=np.float64)
        if amps.shape != (1 << offset,):
            raise ValueError(f"expected {1 << offset} amplitudes, got {amps.shape}")
        self.amplitudes = amps

    @property
    def layout(self) -> list[tuple[str, int]]:
        return [(name, w) for name, (_, w) in self.registers.items()]

    def copy(self) -> StateVector:
        return StateVector(self.amplitudes.copy(), self.layout)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.amplitudes, self.amplitudes)))

    def inner(self, other: StateVector) -> float:
        if self.amplitudes.shape != other.amplitudes.shape:
            raise ValueError("dimension mismatch")
        return float(np.dot(self.amplitudes, other.amplitudes))

    def probabilities(self) -> np.ndarray:
        return self.amplitudes * self.amplitudes

    def register(self, name: str) -> tuple[int, int]:
        try:
            return self.registers[name]
        except KeyError:
            raise KeyError(f"unknown register {name!r}") from None

    def _split(self, name: str) -> np.ndarray:
        """View with axes (higher qubits, register, lower qubits)."""
        offset, width = self.register(name)
        high = self.num_qubits - offset - width
        return self.amplitudes.reshape(1 << high, 1 << width, 1 << offset)

    def __repr__(self) -> str:
        return f"StateVector(layout={self.layout})"


@dataclass
class MeasurementOutcome:
    register: str
    observed: BitVector
    posterior: StateVector | None


def _layout_items(layout: Layout) -> list[tuple[str, int]]:
    return list(layout.items()) if isinstance(layout, Mapping) else list(layout)


def _check_cap(layout: Layout) -> int:
    m = sum(w for _, w in _layout_items(layout))
    if m > MAX_QUBITS:
        raise SimulatorCapExceeded(f"{m} qubits exceeds the cap of {MAX_QUBITS}")
    return m


def uniform_state(layout: Layout) -> StateVector:
    m = _check_cap(layout)
    return StateVector(np.full(1 << m, 2.0 ** (-m / 2)), layout)


def basis_state(layout: Layout, values: Mapping[str, int] | None = None) -> StateVector:
    m = _check_cap(layout)
    state = StateVector(np.zeros(1 << m), layout)
    index = 0
    for name, v in (values or {}).items():
        offset, width = state.register(name)
        if v >> width:
            raise ValueError(f"value {v} does not fit register {name!r}")
        index |= int(v) << offset
    state.amplitudes[index] = 1.0
    return state


def phase_state(t: TruthTable, name: str = "x") -> StateVector:
    """``2^{-n/2} sum_x t[x] |x>``."""
    return phase_oracle(uniform_state({name: t.n}), name, t)


def hadamard_register(state: StateVector, reg: str) -> StateVector:
    """``H^{(x)w}`` on every qubit of ``reg``."""
    _, width = state.register(reg)
    view = state._split(reg)
    _butterfly(view, 1)
    state.amplitudes *= 2.0 ** (-width / 2)
    return state


def phase_oracle(state: StateVector, reg: str, t: TruthTable) -> StateVector:
    """Multiply each amplitude by ``t`` evaluated on the register's value."""
    _, width = state.register(reg)
    if width != t.n:
        raise ValueError(f"register {reg!r} has width {width}, table has n={t.n}")
    state._split(reg)[...] *= t.signs.astype(np.float64)[None, :, None]
    return state


def _permute(state: StateVector, perm: np.ndarray) -> None:
    state.amplitudes = np.ascontiguousarray(state.amplitudes[perm])


def _register_field(state: StateVector, idx: np.ndarray, reg: str) -> np.ndarray:
    offset, width = state.register(reg)
    return (idx >> offset) & ((1 << width) - 1)


def cnot_register(state: StateVector, src: str, dst: str) -> StateVector:
    """``|x, y> -> |x xor y, y>`` with ``y`` in ``src`` and ``x`` in ``dst``."""
    if state.register(src)[1] != state.register(dst)[1]:
        raise ValueError("registers must have equal width")
    if src == dst:
        raise ValueError("source and target must differ")
    idx = np.arange(1 << state.num_qubits, dtype=np.int64)
    perm = idx ^ (_register_field(state, idx, src) << state.register(dst)[0])
    _permute(state, perm)
    return state


def controlled_swap(state: StateVector, control: str, reg_a: str, reg_b: str) -> StateVector:
    """Swap ``reg_a`` and ``reg_b`` on the branch where ``control`` (one qubit) is 1."""
    if state.register(control)[1] != 1:
        raise ValueError("control register must be a single qubit")
    (oa, wa), (ob, wb) = state.register(reg_a), state.register(reg_b)
    if wa != wb:
        raise ValueError("swapped registers must have equal width")
    idx = np.arange(1 << state.num_qubits, dtype=np.int64)
    a = _register_field(state, idx, reg_a)
    b = _register_field(state, idx, reg_b)
    on = _register_field(state, idx, control).astype(bool)
    swapped = idx ^ ((a ^ b) << oa) ^ ((a ^ b) << ob)
    _permute(state, np.where(on, swapped, idx))
    return state


def t_transform(state: StateVector, reg_x: str, reg_y: str) -> StateVector:
    """``|x, y> -> 2^{-n/2} sum_z (-1)^{z.y} |x+y, z>``: CNOTs from y onto x, then H on y."""
    cnot_register(state, src=reg_y, dst=reg_x)
    return hadamard_register(state, reg_y)


def sample_indices(state: StateVector, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Global basis indices drawn from the Born distribution (state untouched)."""
    p = state.probabilities()
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    out = np.searchsorted(cdf, rng.random(shots), side="right")
    return np.minimum(out, len(p) - 1)


def register_values(state: StateVector, reg: str, indices: np.ndarray) -> np.ndarray:
    return _register_field(state, np.asarray(indices, dtype=np.int64), reg)


def measure_register(state: StateVector, reg: str, rng: np.random.Generator) -> MeasurementOutcome:
    """Projective measurement of ``reg``; the posterior is ``None`` if nothing is left."""
    _, width = state.register(reg)
    view = state._split(reg)
    marginal = np.einsum("hrl,hrl->r", view, view)
    cdf = np.cumsum(marginal)
    value = int(min(np.searchsorted(cdf / cdf[-1], rng.random(), side="right"), len(cdf) - 1))
    observed = BitVector(value, width)
    if width == state.num_qubits:
        return MeasurementOutcome(reg, observed, None)
    rest = view[:, value, :].reshape(-1)
    rest = rest / np.sqrt(marginal[value])
    layout = [(name, w) for name, w in state.layout if name != reg]
    return MeasurementOutcome(reg, observed, StateVector(rest, layout))


def _swap_circuit_p1(a: StateVector, b: StateVector) -> float:
    """Build ancilla (x) a (x) b, run H, controlled-SWAP, H; return Pr(ancilla=1)."""
    m = a.num_qubits
    _check_cap([("anc", 1), ("a", m), ("b", m)])
    amps = np.kron(b.amplitudes, np.kron(a.amplitudes, np.array([1.0, 0.0])))
    state = StateVector(amps, [("anc", 1), ("a", m), ("b", m)])
    hadamard_register(state, "anc")
    controlled_swap(state, "anc", "a", "b")
    hadamard_register(state, "anc")
    odd = state.amplitudes[1::2]
    return float(np.dot(odd, odd))


def swap_test_bits(
    a: StateVector,
    b: StateVector,
    shots: int,
    rng: np.random.Generator,
    mode: Literal["circuit", "analytic"] = "circuit",
) -> np.ndarray:
    """Outcomes of ``shots`` SWAP tests on fresh copies of ``a`` and ``b``.

    Each shot is an independent run on identical inputs, so the circuit is
    simulated once and its ancilla distribution sampled ``shots`` times.
    """
    if a.amplitudes.shape != b.amplitudes.shape:
        raise ValueError("dimension mismatch")
    if mode == "circuit":
        p1 = _swap_circuit_p1(a, b)
    elif mode == "analytic":
        p1 = 0.5 - 0.5 * a.inner(b) ** 2
    else:
        raise ValueError(f"unknown mode {mode!r}")
    p1 = min(max(p1, 0.0), 1.0)
    if p1 < 1e-15:
        return np.zeros(shots, dtype=np.uint8)
    return (rng.random(shots) < p1).astype(np.uint8)


def swap_test(
    a: StateVector,
    b: StateVector,
    rng: np.random.Generator,
    mode: Literal["circuit", "analytic"] = "circuit",
) -> int:
    """One SWAP test; 1 signals that the states differ."""
    return int(swap_test_bits(a, b, 1, rng, mode)[0])


def save_state(path: str | Path, state: StateVector) -> None:
    """Raw dump: ``QSV1``, u32 qubits, two reserved u32, then float64 LE amplitudes."""
    header = _MAGIC + struct.pack("<III", state.num_qubits, 0, 0)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(state.amplitudes.astype("<f8").tobytes())


def load_state(path: str | Path, layout: Iterable[tuple[str, int]] | None = None) -> StateVector:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError("not a QSV1 state dump")
    (m, _, _) = struct.unpack("<III", raw[4:16])
    amps = np.frombuffer(raw[16:], dtype="<f8").astype(np.float64)
    if amps.shape != (1 << m,):
        raise ValueError("truncated state dump")
    return StateVector(amps, list(layout) if layout is not None else [("q", m)])
