"""Density-matrix simulation of small qubit circuits with depolarizing noise.

Qubit 0 is the most significant tensor factor. A state on ``n`` qubits is kept
as a tensor of shape ``batch + (2,) * 2n`` so several input states can be pushed
through one circuit at once.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .. import operators as ops
from ..errors import DimensionError

_CSWAP = np.eye(8, dtype=complex)
_CSWAP[[5, 6], :] = _CSWAP[[6, 5], :]

_FIXED_GATES = {
    "I": (ops.I2, 1),
    "H": (ops.H, 1),
    "X": (ops.X, 1),
    "Y": (ops.Y, 1),
    "Z": (ops.Z, 1),
    "S": (ops.S, 1),
    "SX": (ops.SX, 1),
    "CNOT": (ops.CNOT, 2),
    "SWAP": (ops.SWAP, 2),
    "CSWAP": (_CSWAP, 3),
}
_ROTATIONS = {"RY": ops.ry, "RZ": ops.rz}


@dataclass(frozen=True)
class Op:
    """One gate application.

    ``label`` names the op for noise lookup (e.g. ``"clifford"``); it defaults to
    the gate name.
    """

    name: str
    qubits: tuple
    params: tuple = ()
    matrix: np.ndarray | None = field(default=None, compare=False)
    label: str | None = None

    @property
    def noise_key(self) -> str:
        return self.label or self.name

    def unitary(self) -> np.ndarray:
        if self.name in _FIXED_GATES:
            return _FIXED_GATES[self.name][0]
        if self.name in _ROTATIONS:
            return _ROTATIONS[self.name](self.params[0])
        if self.name == "UNITARY":
            return np.asarray(self.matrix, dtype=complex)
        raise ValueError(f"op {self.name} has no unitary")


def gate(name: str, *qubits: int, label: str | None = None) -> Op:
    return Op(name, tuple(qubits), label=label)


def rotation(name: str, theta: float, qubit: int, label: str | None = None) -> Op:
    return Op(name, (qubit,), (float(theta),), label=label)


def unitary_op(matrix: np.ndarray, qubits: Sequence[int], label: str | None = None) -> Op:
    return Op("UNITARY", tuple(qubits), matrix=np.asarray(matrix, dtype=complex), label=label)


def reset(qubit: int, label: str | None = None) -> Op:
    return Op("RESET", (qubit,), label=label)


@dataclass
class CircuitSpec:
    n_qubits: int
    ops: list = field(default_factory=list)
    measure: tuple = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DimensionError("a circuit needs at least one qubit")
        for op in self.ops:
            self._check(op)
        for q in self.measure:
            if not 0 <= q < self.n_qubits:
                raise DimensionError(f"measured qubit {q} out of range")

    def _check(self, op: Op) -> None:
        if any(not 0 <= q < self.n_qubits for q in op.qubits) or len(set(op.qubits)) != len(op.qubits):
            raise DimensionError(f"{op.name} acts on invalid qubits {op.qubits}")
        if not all(np.isfinite(p) for p in op.params):
            raise ValueError(f"{op.name} has non-finite parameters")
        if op.name in _FIXED_GATES and len(op.qubits) != _FIXED_GATES[op.name][1]:
            raise DimensionError(f"{op.name} expects {_FIXED_GATES[op.name][1]} qubits")
        if op.name in _ROTATIONS and (len(op.qubits) != 1 or len(op.params) != 1):
            raise DimensionError(f"{op.name} takes one qubit and one angle")
        if op.name == "RESET" and len(op.qubits) != 1:
            raise DimensionError("RESET acts on one qubit")
        if op.name == "UNITARY":
            m = ops.require_unitary(op.matrix, atol=1e-9)
            if m.shape[0] != 2 ** len(op.qubits):
                raise DimensionError("unitary size does not match its qubits")
        if op.name not in _FIXED_GATES and op.name not in _ROTATIONS and op.name not in ("RESET", "UNITARY"):
            raise ValueError(f"unknown op {op.name}")

    def append(self, op: Op) -> "CircuitSpec":
        self._check(op)
        self.ops.append(op)
        return self

    def extend(self, more: Sequence[Op]) -> "CircuitSpec":
        for op in more:
            self.append(op)
        return self


@dataclass
class NoiseModel:
    gate_depolarizing: dict = field(default_factory=dict)
    reset_incoherent: bool = True
    spam_prep_error: float = 0.0
    spam_meas_error: float = 0.0
    shots: int = 200
    seed: int = 0

    def __post_init__(self):
        self.gate_depolarizing = {str(k): float(v) for k, v in dict(self.gate_depolarizing).items()}
        for p in [*self.gate_depolarizing.values(), self.spam_prep_error, self.spam_meas_error]:
            if not 0.0 <= p <= 1.0:
                raise ValueError("noise probabilities must lie in [0, 1]")
        if not self.reset_incoherent:
            raise ValueError("only incoherent resets are modelled")
        if int(self.shots) < 1:
            raise ValueError("shots must be positive")
        self.shots = int(self.shots)
        self.seed = int(self.seed)

    def strength(self, op: Op) -> float:
        if op.label is not None and op.label in self.gate_depolarizing:
            return self.gate_depolarizing[op.label]
        return self.gate_depolarizing.get(op.name, 0.0)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "NoiseModel":
        allowed = {"gate_depolarizing", "reset_incoherent", "spam_prep_error", "spam_meas_error", "shots", "seed"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown noise keys: {sorted(unknown)}")
        return cls(**dict(data))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NoiseModel":
        return cls.from_dict(json.loads(text))

    def with_(self, **changes) -> "NoiseModel":
        data = self.to_dict()
        data.update(changes)
        return NoiseModel.from_dict(data)


NOISELESS = NoiseModel()


# -- state evolution ------------------------------------------------------------------


def _to_tensor(rho: np.ndarray, n: int) -> np.ndarray:
    batch = rho.shape[:-2]
    return rho.reshape(batch + (2,) * (2 * n))


def _from_tensor(t: np.ndarray, n: int) -> np.ndarray:
    batch = t.shape[: t.ndim - 2 * n]
    return t.reshape(batch + (2**n, 2**n))


def apply_unitary(t: np.ndarray, u: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """``U rho U^dag`` with ``U`` on ``qubits`` of an ``n``-qubit state tensor."""
    m = len(qubits)
    b = t.ndim - 2 * n
    ut = u.reshape((2,) * (2 * m))
    row_axes = [b + q for q in qubits]
    col_axes = [b + n + q for q in qubits]
    # rows: contract U's input indices with the row indices, result axes go first
    t = np.tensordot(ut, t, axes=(list(range(m, 2 * m)), row_axes))
    t = np.moveaxis(t, list(range(m)), row_axes)
    t = np.tensordot(t, ut.conj(), axes=(col_axes, list(range(m, 2 * m))))
    return np.moveaxis(t, list(range(t.ndim - m, t.ndim)), col_axes)


def _trace_out(t: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    b = t.ndim - 2 * n
    # highest qubit first so the lower axis positions stay valid
    for q in sorted(qubits, reverse=True):
        t = np.trace(t, axis1=b + q, axis2=b + n + q)
        n -= 1
    return t


def _insert(t: np.ndarray, sigma: np.ndarray, qubits: Sequence[int], n_after: int) -> np.ndarray:
    """Tensor ``sigma`` (on ``qubits``, sorted) back into a state with those qubits removed."""
    m = len(qubits)
    n_before = n_after - m
    b = t.ndim - 2 * n_before
    st = sigma.reshape((2,) * (2 * m))
    out = np.multiply.outer(t, st)
    # out axes: batch, rows_rest, cols_rest, rows_sig, cols_sig
    rest = [q for q in range(n_after) if q not in qubits]
    src_rows = list(range(b, b + n_before)) + list(range(b + 2 * n_before, b + 2 * n_before + m))
    src_cols = list(range(b + n_before, b + 2 * n_before)) + list(
        range(b + 2 * n_before + m, b + 2 * n_before + 2 * m)
    )
    order = rest + list(qubits)
    dest_rows = [b + q for q in order]
    dest_cols = [b + n_after + q for q in order]
    return np.moveaxis(out, src_rows + src_cols, dest_rows + dest_cols)


def depolarize_qubits(t: np.ndarray, p: float, qubits: Sequence[int], n: int) -> np.ndarray:
    """``(1-p) rho + p (1/2^m) (x) tr_S rho`` on the support ``S`` of ``m`` qubits."""
    if p == 0.0:
        return t
    qubits = sorted(qubits)
    reduced = _trace_out(t, qubits, n)
    mixed = _insert(reduced, ops.maximally_mixed(2 ** len(qubits)), qubits, n)
    return (1 - p) * t + p * mixed


def reset_qubit(t: np.ndarray, q: int, n: int) -> np.ndarray:
    """Incoherent reset: discard qubit ``q`` and prepare ``|0>``."""
    reduced = _trace_out(t, [q], n)
    return _insert(reduced, ops.projector(ops.ket(0)), [q], n)


def evolve(spec: CircuitSpec, noise: NoiseModel, rho: np.ndarray) -> np.ndarray:
    """Noisy evolution of a (possibly batched) density matrix; no measurement."""
    n = spec.n_qubits
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (2**n, 2**n):
        raise DimensionError(f"input of shape {rho.shape} does not fit {n} qubits")
    t = _to_tensor(rho, n)
    if noise.spam_prep_error:
        for q in range(n):
            t = depolarize_qubits(t, noise.spam_prep_error, [q], n)
    for op in spec.ops:
        if op.name == "RESET":
            t = reset_qubit(t, op.qubits[0], n)
        else:
            t = apply_unitary(t, op.unitary(), op.qubits, n)
        p = noise.strength(op)
        if p:
            t = depolarize_qubits(t, p, op.qubits, n)
    return _from_tensor(t, n)


def z_probabilities(rho: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Joint computational-basis distribution of ``qubits`` (in the given order)."""
    diag = np.real(np.diagonal(rho, axis1=-2, axis2=-1)).reshape(rho.shape[:-2] + (2,) * n)
    b = diag.ndim - n
    others = tuple(b + q for q in range(n) if q not in qubits)
    marg = diag.sum(axis=others) if others else diag
    kept = sorted(qubits)
    perm = [kept.index(q) for q in qubits]
    marg = np.moveaxis(marg, [b + i for i in range(len(kept))], [b + p for p in perm])
    probs = np.clip(marg.reshape(rho.shape[:-2] + (2 ** len(qubits),)), 0.0, None)
    return probs / probs.sum(axis=-1, keepdims=True)


def sample_outcomes(probs: np.ndarray, n_bits: int, shots: int, flip: float, rng: np.random.Generator) -> np.ndarray:
    """Draw ``shots`` bit strings from ``probs`` then flip each bit with probability ``flip``."""
    idx = rng.choice(probs.shape[-1], size=shots, p=probs)
    bits = (idx[:, None] >> np.arange(n_bits - 1, -1, -1)) & 1
    if flip:
        bits ^= (rng.random(bits.shape) < flip).astype(bits.dtype)
    return bits


def z_expectation_estimate(z_mean: float, shots: int, flip: float, rng: np.random.Generator) -> float:
    """Shot estimate of a single-qubit ``<Z>`` including readout flips.

    Equivalent to sampling shots one by one: the count of ``+1`` outcomes is
    binomial with the flip-adjusted probability.
    """
    p0 = (1 + np.clip(z_mean, -1.0, 1.0)) / 2
    p0 = p0 * (1 - flip) + (1 - p0) * flip
    k = rng.binomial(shots, p0)
    return 2 * k / shots - 1


@dataclass
class CircuitResult:
    rho: np.ndarray
    outcomes: np.ndarray

    def z_expectation(self, index: int = 0) -> float:
        return float(np.mean(1 - 2 * self.outcomes[:, index]))


def run_circuit(
    spec: CircuitSpec,
    noise: NoiseModel = NOISELESS,
    input_state: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
) -> CircuitResult:
    """Evolve ``input_state`` (default ``|0...0>``) and sample Z outcomes on ``spec.measure``."""
    n = spec.n_qubits
    if input_state is None:
        input_state = ops.projector(ops.ket(0, 2**n))
    rho = evolve(spec, noise, input_state)
    if rho.ndim != 2:
        raise DimensionError("run_circuit takes a single input state")
    if rng is None:
        rng = ops.make_rng(noise.seed)
    if spec.measure:
        probs = z_probabilities(rho, list(spec.measure), n)
        outcomes = sample_outcomes(probs, len(spec.measure), noise.shots, noise.spam_meas_error, rng)
    else:
        outcomes = np.zeros((0, 0), dtype=int)
    return CircuitResult(rho, outcomes)
