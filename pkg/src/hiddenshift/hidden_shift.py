"""Hidden shift solvers for quadratic and near-quadratic Boolean functions.

Quantum routines run on :mod:`hiddenshift.qsim`; every oracle access goes
through an :class:`Oracle`, which counts queries. A phase-oracle application
over a register is one query; a classical point evaluation is one query.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import qsim
from .boolfn import (
    QuadraticForm,
    TruthTable,
    correlation,
    dual_bent,
    fit_quadratic,
    is_bent,
    linear_image,
    shift,
    to_table,
    NotBent,
)
from .gf2 import (
    BitMatrix,
    BitVector,
    Inconsistent,
    dickson_decompose,
    kernel_basis,
    rank,
    solve,
)

__all__ = [
    "Oracle",
    "ShiftInstance",
    "ShiftResult",
    "QuadRecovery",
    "RecoveryFailed",
    "NoSolution",
    "FullRank",
    "alg1_bent_shift",
    "reversible_gauss",
    "find_close_quadratic",
    "spectral_phase",
    "rank_deficient_shift",
    "verify_shift",
    "shifted_large_u3",
    "classical_shift_solver",
    "classical_quadratic_learner",
    "brute_force_shift",
    "false_accept_bound",
    "pair_distribution",
    "coset_equal",
    "overlap",
]


class RecoveryFailed(RuntimeError):
    """Find-Close-Quadratic exhausted its attempts."""


class NoSolution(ArithmeticError):
    """The classical shift equations are inconsistent."""


class FullRank(ValueError):
    """The form is non-degenerate; use :func:`alg1_bent_shift`."""


class Oracle:
    """Query-counting access to a sign table."""

    def __init__(self, table: TruthTable):
        self.table = table
        self.queries = 0

    @property
    def n(self) -> int:
        return self.table.n

    def phase(self, state: qsim.StateVector, reg: str, copies: int = 1) -> qsim.StateVector:
        """Phase query on ``reg``; ``copies`` charges for identical copies prepared alongside."""
        self.queries += copies
        return qsim.phase_oracle(state, reg, self.table)

    def __call__(self, x: BitVector | int) -> int:
        self.queries += 1
        return self.table.value(x)


def _as_oracle(f: Oracle | TruthTable) -> Oracle:
    return f if isinstance(f, Oracle) else Oracle(f)


@dataclass
class ShiftInstance:
    """Oracle pair with ``g(x) = base(x + shift)`` before independent noise."""

    base: TruthTable
    shift: BitVector
    f: Oracle
    g: Oracle
    noise_f: float = 0.0
    noise_g: float = 0.0
    form: QuadraticForm | None = None

    @classmethod
    def plant(
        cls,
        base: TruthTable,
        s: BitVector,
        noise_f: float = 0.0,
        noise_g: float = 0.0,
        rng: np.random.Generator | None = None,
        form: QuadraticForm | None = None,
    ) -> ShiftInstance:
        from .boolfn import flip_noise

        if (noise_f or noise_g) and rng is None:
            raise ValueError("rng required for noisy instances")
        f_table = flip_noise(base, noise_f, rng) if noise_f else base
        g_clean = shift(base, s)
        g_table = flip_noise(g_clean, noise_g, rng) if noise_g else g_clean
        return cls(base, s, Oracle(f_table), Oracle(g_table), noise_f, noise_g, form)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def f_table(self) -> TruthTable:
        return self.f.table

    @property
    def g_table(self) -> TruthTable:
        return self.g.table

    @property
    def query_counter_f(self) -> int:
        return self.f.queries

    @property
    def query_counter_g(self) -> int:
        return self.g.queries

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "base": self.base.to_hex(),
            "shift": self.shift.hex(),
            "noise_f": self.noise_f,
            "noise_g": self.noise_g,
            "f_table": self.f_table.to_hex(),
            "g_table": self.g_table.to_hex(),
            "query_counter_f": self.query_counter_f,
            "query_counter_g": self.query_counter_g,
            "form": self.form.to_dict() if self.form is not None else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ShiftInstance:
        n = int(data["n"])
        inst = cls(
            TruthTable.from_hex(data["base"], n),
            BitVector.from_hex(data["shift"], n),
            Oracle(TruthTable.from_hex(data["f_table"], n)),
            Oracle(TruthTable.from_hex(data["g_table"], n)),
            float(data["noise_f"]),
            float(data["noise_g"]),
            QuadraticForm.from_dict(data["form"]) if data.get("form") else None,
        )
        inst.f.queries = int(data.get("query_counter_f", 0))
        inst.g.queries = int(data.get("query_counter_g", 0))
        return inst

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> ShiftInstance:
        return cls.from_dict(json.loads(text))


@dataclass
class ShiftResult:
    candidate: BitVector
    coset_basis: list[BitVector] = field(default_factory=list)
    verified: bool = False
    swap_rejections: int = 0
    queries_used: tuple[int, int] = (0, 0)
    form: QuadraticForm | None = None

    def coset(self) -> list[BitVector]:
        """Every element of ``candidate + span(coset_basis)``."""
        points = {self.candidate.value}
        for v in self.coset_basis:
            points |= {p ^ v.value for p in points}
        return [BitVector(p, self.candidate.n) for p in sorted(points)]

    def to_dict(self) -> dict:
        return {
            "candidate": self.candidate.hex(),
            "coset_basis": [v.hex() for v in self.coset_basis],
            "verified": self.verified,
            "swap_rejections": self.swap_rejections,
            "queries_used": {"f": self.queries_used[0], "g": self.queries_used[1]},
        }

    @classmethod
    def from_dict(cls, data: dict, n: int) -> ShiftResult:
        return cls(
            BitVector.from_hex(data["candidate"], n),
            [BitVector.from_hex(v, n) for v in data["coset_basis"]],
            bool(data["verified"]),
            int(data["swap_rejections"]),
            (int(data["queries_used"]["f"]), int(data["queries_used"]["g"])),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class QuadRecovery:
    m_matrix: BitMatrix
    form: QuadraticForm
    samples_used: int
    attempts: int


def alg1_bent_shift(
    inst: ShiftInstance, dual: Oracle | TruthTable, rng: np.random.Generator
) -> BitVector:
    """Standard Fourier-correlation algorithm for bent ``f``.

    H, phase ``g``, H, phase of the dual, H, measure. One query to ``g`` and
    one to the dual; on a noiseless instance the outcome is ``s`` with
    certainty.
    """
    dual = _as_oracle(dual)
    if dual.n != inst.n or not is_bent(dual.table):
        raise NotBent("the Fourier-correlation circuit needs the dual of a bent function")
    state = qsim.uniform_state({"x": inst.n})
    inst.g.phase(state, "x")
    qsim.hadamard_register(state, "x")
    dual.phase(state, "x")
    qsim.hadamard_register(state, "x")
    return qsim.measure_register(state, "x", rng).observed


def reversible_gauss(u: BitMatrix, v: BitMatrix) -> BitMatrix | None:
    """Solve ``U^t M = V^t`` for a symplectic ``M``; ``None`` plays the role of bottom.

    ``u`` and ``v`` are ``n x k`` with the samples as columns. Bottom is
    returned when ``U`` has rank below ``n``, when the system is
    inconsistent, or when the solution is not symmetric with zero diagonal.
    """
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    n = u.nrows
    if rank(u) < n:
        return None
    try:
        sol = solve(u.transpose(), v.transpose())
    except Inconsistent:
        return None
    m = sol.particular
    if not m.is_symplectic():
        return None
    return m


JOINT_PAIR_QUBITS = 20


def pair_distribution(table: TruthTable, joint: bool = True) -> np.ndarray:
    """Exact ``P(u, v)`` (index ``u + 2^n v``) of measuring ``T |psi_f>|psi_f>``."""
    n = table.n
    if joint:
        state = qsim.uniform_state({"x": n, "y": n})
        qsim.phase_oracle(state, "x", table)
        qsim.phase_oracle(state, "y", table)
        qsim.t_transform(state, "x", "y")
        return state.probabilities()
    out = np.empty((1 << n, 1 << n))
    for u in range(1 << n):
        out[:, u] = _conditional_pair_state(table, u).probabilities() / (1 << n)
    return out.reshape(-1)


def _conditional_pair_state(table: TruthTable, u: int) -> qsim.StateVector:
    """y register after the x register of ``T |psi_f>|psi_f>`` read ``u``.

    Before the final Hadamard the pair holds ``2^-n f(u+y) f(y) |u, y>``.
    """
    state = qsim.phase_state(table, "y")
    qsim.phase_oracle(state, "y", shift(table, u))
    return qsim.hadamard_register(state, "y")


def _pair_samples(
    oracle: Oracle, k: int, rng: np.random.Generator, joint: bool | None = None
) -> tuple[BitMatrix, BitMatrix]:
    """Measure ``T |psi_f> |psi_f>`` on k pairs; returns U, V with samples as columns.

    The k pairs are identical product states. In joint mode one 2n-qubit
    pair is simulated and sampled k times. Above ``JOINT_PAIR_QUBITS`` the x
    register is measured first: its marginal is uniform for every +-1 table
    (each column of the pre-Hadamard amplitudes has squared norm 2^-n), and
    the y register is then the n-qubit state of :func:`_conditional_pair_state`.
    Either way the oracle is charged for all 2k copies.
    """
    n = oracle.n
    joint = 2 * n <= JOINT_PAIR_QUBITS if joint is None else joint
    if joint:
        state = qsim.uniform_state({"x": n, "y": n})
        oracle.phase(state, "x", copies=k)
        oracle.phase(state, "y", copies=k)
        qsim.t_transform(state, "x", "y")
        idx = qsim.sample_indices(state, k, rng)
        us = qsim.register_values(state, "x", idx)
        vs = qsim.register_values(state, "y", idx)
    else:
        us = rng.integers(0, 1 << n, size=k)
        vs = np.empty(k, dtype=np.int64)
        oracle.queries += 2 * k
        for u in np.unique(us):
            hits = np.nonzero(us == u)[0]
            state = _conditional_pair_state(oracle.table, int(u))
            vs[hits] = qsim.sample_indices(state, len(hits), rng)
    u = BitMatrix.from_vectors([BitVector(int(x), n) for x in us]).transpose()
    v = BitMatrix.from_vectors([BitVector(int(y), n) for y in vs]).transpose()
    return u, v


def _extract_linear(
    oracle: Oracle, q: BitMatrix, samples: int, rng: np.random.Generator
) -> BitVector:
    """Cancel the quadratic phase, Fourier-sample, majority vote."""
    n = oracle.n
    quad = to_table(QuadraticForm(q, BitVector.zeros(n), 0))
    state = qsim.uniform_state({"x": n})
    oracle.phase(state, "x", copies=samples)
    qsim.phase_oracle(state, "x", quad)
    qsim.hadamard_register(state, "x")
    outcomes = qsim.sample_indices(state, samples, rng)
    values, counts = np.unique(outcomes, return_counts=True)
    return BitVector(int(values[np.argmax(counts)]), n)


def find_close_quadratic(
    f: Oracle | TruthTable,
    k: int | None = None,
    max_attempts: int = 5,
    rng: np.random.Generator | None = None,
    *,
    linear_samples: int = 15,
    joint: bool | None = None,
) -> QuadRecovery:
    """Recover the quadratic form closest to ``f`` from O(n) phase-state copies.

    Each attempt draws k pairs ``(u, u M)`` from two-copy T-transformed phase
    states, solves for ``M`` classically, then uncomputes ``x q x^t`` and
    Fourier-samples the linear part. The constant comes from one classical
    query at 0. Cost per attempt: 2k queries for pairs, plus
    ``linear_samples + 1`` once ``M`` is found. ``joint`` picks the pair
    simulation (see :func:`_pair_samples`); ``None`` chooses by size.
    """
    oracle = _as_oracle(f)
    n = oracle.n
    k = n + 20 if k is None else k
    if k < n:
        raise ValueError(f"need k >= n samples, got k={k}, n={n}")
    rng = np.random.default_rng() if rng is None else rng
    for attempt in range(1, max_attempts + 1):
        u, v = _pair_samples(oracle, k, rng, joint)
        m = reversible_gauss(u, v)
        if m is None:
            continue
        q = m.upper_triangle()
        l = _extract_linear(oracle, q, linear_samples, rng)
        b = oracle(0)
        return QuadRecovery(m, QuadraticForm(q, l, b), k, attempt)
    raise RecoveryFailed(f"no consistent symplectic M in {max_attempts} attempts")


def spectral_phase(form: QuadraticForm) -> TruthTable:
    """Sign pattern of the form's Walsh spectrum, built from its Dickson basis.

    With ``R B R^t = D`` the substitution ``x = y R`` turns the form into
    ``ip_h(y) + L' y + b``, ``L' = diag(R q R^t) + l R^t``. Its spectrum
    is ``2^{-h} (-1)^{b + ip_h(top(w R^t + L'))}`` on the affine support
    ``bottom(w R^t) = bottom(L')`` and zero elsewhere. The returned table is
    that sign on all w; for full rank it is the dual bent function.
    """
    n = form.n
    dec = dickson_decompose(form.symplectic())
    r, h = dec.r_matrix, dec.half_rank
    rq = r @ form.q @ r.transpose()
    l_prime = rq.diagonal() + (form.l @ r.transpose())
    coords = linear_image(r.transpose()) ^ l_prime.value
    acc = np.full(1 << n, form.b, dtype=np.int64)
    for i in range(h):
        acc ^= ((coords >> (2 * i)) & 1) & ((coords >> (2 * i + 1)) & 1)
    return TruthTable.from_bits(acc)


def _fourier_correlate(
    inst: ShiftInstance, phase: Oracle | TruthTable, rng: np.random.Generator
) -> BitVector:
    """Fourier-correlation circuit without the bentness precondition."""
    phase = _as_oracle(phase)
    state = qsim.uniform_state({"x": inst.n})
    inst.g.phase(state, "x")
    qsim.hadamard_register(state, "x")
    phase.phase(state, "x")
    qsim.hadamard_register(state, "x")
    return qsim.measure_register(state, "x", rng).observed


def rank_deficient_shift(
    inst: ShiftInstance,
    form: QuadraticForm,
    rng: np.random.Generator,
    *,
    check_points: int = 16,
) -> ShiftResult:
    """Shift coset ``s + ker(q + q^t)`` for a form with ``rank(q + q^t) < n``.

    The Fourier-correlation circuit with :func:`spectral_phase` in place of the dual
    lands uniformly on the coset. Shifts in the coset agree with ``g`` up to a
    global sign, which phase states cannot see. ``verified`` records a
    classical spot check on ``check_points`` random inputs that
    ``f'(x + candidate)`` tracks ``g'(x)`` up to that sign.
    """
    n = inst.n
    b = form.symplectic()
    if rank(b) == n:
        raise FullRank("form is non-degenerate")
    f0, g0 = inst.f.queries, inst.g.queries
    candidate = _fourier_correlate(inst, spectral_phase(form), rng)
    basis = kernel_basis(b)
    xs = rng.integers(0, 1 << n, size=check_points)
    agree = sum(inst.f(int(x) ^ candidate.value) == inst.g(int(x)) for x in xs)
    bias = abs(2 * agree - check_points) / check_points
    return ShiftResult(
        candidate,
        basis,
        verified=bias >= 0.5,
        queries_used=(inst.f.queries - f0, inst.g.queries - g0),
        form=form,
    )


def verify_shift(
    inst: ShiftInstance,
    candidate: BitVector,
    r: int,
    rng: np.random.Generator,
    mode: str = "circuit",
) -> tuple[bool, int]:
    """SWAP-test ``|psi_{f'(. + candidate)}>`` against ``|psi_{g'}>`` for r rounds.

    Accepts only when every round returns 0. Each round uses one fresh copy
    of each state, i.e. one query to each oracle.
    """
    n = inst.n
    phi = qsim.uniform_state({"x": n})
    inst.f.queries += r
    qsim.phase_oracle(phi, "x", shift(inst.f_table, candidate))
    psi = qsim.uniform_state({"x": n})
    inst.g.phase(psi, "x", copies=r)
    bits = qsim.swap_test_bits(phi, psi, r, rng, mode)
    rejections = int(bits.sum())
    return rejections == 0, rejections


def false_accept_bound(overlap: float, r: int) -> float:
    """Probability that r SWAP rounds all return 0 for states of given overlap."""
    return ((1.0 + overlap * overlap) / 2.0) ** r


def shifted_large_u3(
    inst: ShiftInstance,
    rng: np.random.Generator,
    *,
    k: int | None = None,
    swap_rounds: int = 20,
    max_attempts: int = 5,
    linear_samples: int = 15,
) -> ShiftResult:
    """Find the shift of a function close to a quadratic, then SWAP-verify it.

    Raises :class:`RecoveryFailed` when no quadratic is found. A candidate
    that fails verification comes back with ``verified=False``.
    """
    f0, g0 = inst.f.queries, inst.g.queries
    rec = find_close_quadratic(
        inst.f, k, max_attempts, rng, linear_samples=linear_samples
    )
    form = rec.form
    if rank(rec.m_matrix) == inst.n:
        dual_form, _ = fit_quadratic(dual_bent(to_table(form)))
        candidate = alg1_bent_shift(inst, to_table(dual_form), rng)
        result = ShiftResult(candidate, [], form=form)
    else:
        result = rank_deficient_shift(inst, form, rng)
    accepted, rejections = verify_shift(inst, result.candidate, swap_rounds, rng)
    result.verified = accepted
    result.swap_rejections = rejections
    result.queries_used = (inst.f.queries - f0, inst.g.queries - g0)
    return result


def classical_shift_solver(f_form: QuadraticForm, g_oracle) -> BitVector:
    """Recover s from ``g(0)`` and ``g(e_i)`` given the quadratic ``f``.

    ``g(e_i) + g(0) + f(e_i) + f(0) = e_i B s^t``, so n+1 queries give the
    linear system ``B s^t = c``. When ``B`` is singular the coset is fixed
    by ``f(s) = g(0)``, which is linear on the kernel.
    """
    n = f_form.n
    f = to_table(f_form)
    b = f_form.symplectic()
    g_zero = g_oracle(BitVector.zeros(n))
    rhs = []
    for i in range(n):
        e = BitVector.unit(i, n)
        rhs.append(g_oracle(e) ^ g_zero ^ f.value(e) ^ f_form.b)
    col = BitMatrix(tuple(rhs), 1)
    try:
        sol = solve(b, col)
    except Inconsistent:
        raise NoSolution("shift equations are inconsistent") from None
    s = sol.particular.column(0)
    if f.value(s) != g_zero:
        fix = next((v for v in sol.kernel if f.value(v) ^ f_form.b), None)
        if fix is None:
            raise NoSolution("no shift matches g(0)")
        s = s + fix
    return s


def classical_quadratic_learner(f_oracle) -> QuadraticForm:
    """Learn a quadratic from its values at 0, every e_i and every e_i + e_j."""
    n = f_oracle.n
    b = f_oracle(0)
    single = [f_oracle(1 << i) for i in range(n)]
    l = BitVector(sum((single[i] ^ b) << i for i in range(n)), n)
    rows = []
    for i in range(n):
        row = 0
        for j in range(i + 1, n):
            if f_oracle((1 << i) | (1 << j)) ^ single[i] ^ single[j] ^ b:
                row |= 1 << j
        rows.append(row)
    return QuadraticForm(BitMatrix(tuple(rows), n), l, b)


def brute_force_shift(
    f: TruthTable, g: TruthTable, *, up_to_sign: bool = False
) -> list[BitVector]:
    """Every s with ``g(x) = f(x + s)`` for all x (or ``= -f(x + s)`` too, if asked)."""
    if f.n != g.n:
        raise ValueError("dimension mismatch")
    n = f.n
    idx = np.arange(1 << n, dtype=np.int64)
    out = []
    for s in range(1 << n):
        prod = f.signs[idx ^ s] * g.signs
        if np.all(prod == 1) or (up_to_sign and np.all(prod == -1)):
            out.append(BitVector(s, n))
    return out


def coset_equal(a: list[BitVector], b: list[BitVector]) -> bool:
    return sorted(v.value for v in a) == sorted(v.value for v in b)


def overlap(t1: TruthTable, t2: TruthTable) -> float:
    """``<psi_t1|psi_t2>`` of the two phase states."""
    return correlation(t1, t2)


def binomial_sigma(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / trials)

