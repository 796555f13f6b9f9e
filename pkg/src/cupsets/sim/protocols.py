"""Estimation pipelines for CUP points: SWAP-test purity methods and interleaved
unitarity randomized benchmarking.

Qubit layouts
-------------
Marginal-channel circuits put the system on qubit 0 and the ancilla on qubit 1.
A mixed ancilla ``1/2`` is made as half of a Bell pair with a purifying qubit 2
that is never touched again.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import operators as ops
from ..cups import CupSample, Family, Variant
from ..errors import DimensionError
from .circuit import (
    NOISELESS,
    CircuitSpec,
    NoiseModel,
    Op,
    evolve,
    gate,
    reset,
    unitary_op,
    z_expectation_estimate,
)
from .clifford import random_cliffords
from .fitting import DecayFit, fit_decay

TARGETS = ("E", "Ebar")
ANCILLAS = ("pure", "mixed")
INPUT_MODES = ("zero", "six")

_PAULI_XYZ = (ops.X, ops.Y, ops.Z)


def _check_choice(value, allowed, what):
    if value not in allowed:
        raise ValueError(f"{what} must be one of {allowed}, got {value!r}")


def _unbiased_square(x: np.ndarray, shots: int) -> np.ndarray:
    """Unbiased estimate of ``m**2`` from a shot average ``x`` of +-1 outcomes."""
    if shots < 2:
        return x**2
    return (shots * x**2 - 1) / (shots - 1)


# -- SWAP tests -----------------------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float


def _shift(op: Op, offset: int) -> Op:
    return Op(op.name, tuple(q + offset for q in op.qubits), op.params, op.matrix, op.label)


def _swap_test_stats(
    preps: Sequence[tuple[CircuitSpec, Sequence[int]]],
    others: Sequence[tuple[CircuitSpec, Sequence[int]]],
    noise: NoiseModel,
    rng: np.random.Generator,
) -> Estimate:
    """SWAP test between every prep pair, averaged; each pair gets ``noise.shots`` shots."""
    values, variances = [], []
    for prep_a, reg_a in preps:
        for prep_b, reg_b in others:
            if len(reg_a) != len(reg_b):
                raise DimensionError("SWAP test registers differ in size")
            n_a, n_b = prep_a.n_qubits, prep_b.n_qubits
            spec = CircuitSpec(1 + n_a + n_b, measure=(0,))
            spec.extend([_shift(op, 1) for op in prep_a.ops])
            spec.extend([_shift(op, 1 + n_a) for op in prep_b.ops])
            spec.append(gate("H", 0))
            for qa, qb in zip(reg_a, reg_b):
                spec.append(gate("CSWAP", 0, 1 + qa, 1 + n_a + qb))
            spec.append(gate("H", 0))
            rho = evolve(spec, noise, ops.projector(ops.ket(0, 2**spec.n_qubits)))
            z = _z_of_qubit(rho, 0, spec.n_qubits)
            est = z_expectation_estimate(z, noise.shots, noise.spam_meas_error, rng)
            values.append(est)
            variances.append(max(1 - est**2, 0.0) / noise.shots)
    n = len(values)
    return Estimate(float(np.mean(values)), float(np.sqrt(np.sum(variances)) / n))


def _z_of_qubit(rho: np.ndarray, q: int, n: int) -> np.ndarray:
    diag = np.real(np.diagonal(rho, axis1=-2, axis2=-1)).reshape(rho.shape[:-2] + (2,) * n)
    b = diag.ndim - n
    sign = np.array([1.0, -1.0]).reshape((2,) + (1,) * (n - q - 1))
    return np.sum(diag * sign, axis=tuple(range(b, b + n)))


def _as_preps(prep) -> list:
    if isinstance(prep, CircuitSpec):
        prep = [prep]
    return [(p, tuple(range(p.n_qubits))) for p in prep]


def swap_test(rho_prep, sigma_prep, noise: NoiseModel = NOISELESS, rng: np.random.Generator | None = None) -> float:
    """Shot estimate of ``tr[rho sigma]``.

    Each argument is a preparation circuit acting on ``|0...0>`` or a list of
    them, read as a uniform statistical mixture.
    """
    rng = rng if rng is not None else ops.make_rng(noise.seed)
    return _swap_test_stats(_as_preps(rho_prep), _as_preps(sigma_prep), noise, rng).value


def _marginal_prep(u_ab: np.ndarray, x_bit: int, trailing_swap: bool = False) -> CircuitSpec:
    spec = CircuitSpec(2)
    if x_bit:
        spec.append(gate("X", 0))
    spec.append(unitary_op(u_ab, (0, 1), label="U_AB"))
    if trailing_swap:
        spec.append(gate("SWAP", 0, 1))
    return spec


def _complementarity_formula(d: int, gamma_comp: float, gamma_own: float) -> float:
    return d / (d * d - 1) * (d * gamma_comp - gamma_own)


def estimate_cup_direct_complementarity(
    u_ab: np.ndarray, noise: NoiseModel = NOISELESS, rng: np.random.Generator | None = None
) -> CupSample:
    """Isometric CUP point from output purities on ``1/2`` of both marginals.

    Each purity averages SWAP tests over the four basis-input settings; the
    unitarities then follow from the complementarity relation in both directions.
    """
    u_ab = ops.require_unitary(u_ab, atol=1e-9)
    if u_ab.shape != (4, 4):
        raise DimensionError("expected a two-qubit unitary")
    rng = rng if rng is not None else ops.make_rng(noise.seed)
    gammas = []
    for qubit in (0, 1):
        preps = [(_marginal_prep(u_ab, i), (qubit,)) for i in (0, 1)]
        gammas.append(_swap_test_stats(preps, preps, noise, rng))
    g_a, g_b = gammas
    u = _complementarity_formula(2, g_b.value, g_a.value)
    ubar = _complementarity_formula(2, g_a.value, g_b.value)
    u_err = 2 / 3 * np.hypot(2 * g_b.stderr, g_a.stderr)
    ubar_err = 2 / 3 * np.hypot(2 * g_a.stderr, g_b.stderr)
    return CupSample(u, ubar, Variant.ISOMETRIC, Family.CUSTOM, u_stderr=float(u_err), ubar_stderr=float(ubar_err))


def _choi_copy(u_ab: np.ndarray, ancilla: str, trailing_swap: bool, bell_input: bool, x_bit: int = 0):
    """Preparation for one copy: qubits (X, B, R[, C]); returns (spec, register)."""
    n = 4 if ancilla == "mixed" else 3
    x, b, r, c = 0, 1, 2, 3
    spec = CircuitSpec(n)
    if bell_input:
        spec.extend([gate("H", r), gate("CNOT", r, x)])
    elif x_bit:
        spec.append(gate("X", x))
    if ancilla == "mixed":
        spec.extend([gate("H", c), gate("CNOT", c, b)])
    spec.append(unitary_op(u_ab, (x, b), label="U_AB"))
    if trailing_swap:
        spec.append(gate("SWAP", x, b))
    return spec, ((x, r) if bell_input else (x,))


def estimate_cup_direct_choi(
    u_ab: np.ndarray,
    ancilla: str = "pure",
    noise: NoiseModel = NOISELESS,
    rng: np.random.Generator | None = None,
) -> CupSample:
    """CUP point from Choi-state purity and output purity on ``1/2``, per marginal.

    ``ancilla="mixed"`` feeds ``1/2`` into the ancilla as half of a Bell pair, so
    the pair is reversible rather than isometric. The second marginal reuses the
    same circuits with a trailing SWAP.
    """
    _check_choice(ancilla, ANCILLAS, "ancilla")
    u_ab = ops.require_unitary(u_ab, atol=1e-9)
    if u_ab.shape != (4, 4):
        raise DimensionError("expected a two-qubit unitary")
    rng = rng if rng is not None else ops.make_rng(noise.seed)
    values, errors = [], []
    for trailing_swap in (False, True):
        choi = [_choi_copy(u_ab, ancilla, trailing_swap, True)]
        gamma_j = _swap_test_stats(choi, choi, noise, rng)
        mm = [_choi_copy(u_ab, ancilla, trailing_swap, False, i) for i in (0, 1)]
        gamma_e = _swap_test_stats(mm, mm, noise, rng)
        values.append(_complementarity_formula(2, gamma_j.value, gamma_e.value))
        errors.append(2 / 3 * np.hypot(2 * gamma_j.stderr, gamma_e.stderr))
    variant = Variant.ISOMETRIC if ancilla == "pure" else Variant.REVERSIBLE
    return CupSample(
        values[0], values[1], variant, Family.CUSTOM, u_stderr=float(errors[0]), ubar_stderr=float(errors[1])
    )


# -- interleaved unitarity RB -----------------------------------------------------------


def marginal_channel_ops(u_ab: np.ndarray, target: str = "E", ancilla: str = "pure") -> list:
    """Ops realizing a marginal of ``u_ab`` on qubit 0, whatever the other qubits hold.

    The ancilla is reset (and for ``mixed`` entangled with qubit 2) before the
    unitary; ``Ebar`` appends a SWAP so that the B output lands on qubit 0.
    """
    _check_choice(target, TARGETS, "target")
    _check_choice(ancilla, ANCILLAS, "ancilla")
    out = [reset(1)]
    if ancilla == "mixed":
        out += [reset(2), gate("H", 2), gate("CNOT", 2, 1)]
    out.append(unitary_op(u_ab, (0, 1), label="U_AB"))
    if target == "Ebar":
        out.append(gate("SWAP", 0, 1))
    return out


def marginal_channel_circuit(u_ab: np.ndarray, target: str = "E", ancilla: str = "pure") -> CircuitSpec:
    u_ab = ops.require_unitary(u_ab, atol=1e-9)
    if u_ab.shape != (4, 4):
        raise DimensionError("expected a two-qubit unitary")
    return CircuitSpec(3 if ancilla == "mixed" else 2, marginal_channel_ops(u_ab, target, ancilla))


def _six_states() -> np.ndarray:
    """``(I + s P)/2`` for P in X, Y, Z and s in +, -; shape ``(3, 2, 2, 2)``."""
    return np.array([[(ops.I2 + sign * p) / 2 for sign in (1, -1)] for p in _PAULI_XYZ])


def _sequence_spec(n_qubits: int, cliffords: np.ndarray, channel_ops: Sequence[Op]) -> CircuitSpec:
    spec = CircuitSpec(n_qubits)
    for i, c in enumerate(cliffords):
        if i:
            spec.extend(channel_ops)
        spec.append(unitary_op(c, (0,), label="clifford"))
    return spec


def _embed_inputs(states_a: np.ndarray, n_qubits: int) -> np.ndarray:
    rest = ops.projector(ops.ket(0, 2 ** (n_qubits - 1)))
    return np.einsum("...ab,cd->...acbd", states_a, rest).reshape(
        states_a.shape[:-2] + (2**n_qubits, 2**n_qubits)
    )


def _pauli_expectations(rho: np.ndarray, n_qubits: int) -> np.ndarray:
    """Exact ``<X>, <Y>, <Z>`` of qubit 0; trailing axis of length 3."""
    d_rest = 2 ** (n_qubits - 1)
    t = rho.reshape(rho.shape[:-2] + (2, d_rest, 2, d_rest))
    red = np.einsum("...ajbj->...ab", t)
    return np.real(np.stack([np.einsum("ab,...ba->...", p, red) for p in _PAULI_XYZ], axis=-1))


def _shot_estimates(exact: np.ndarray, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    """Binomial shot noise and readout flips applied to exact expectations.

    Measuring X or Y means rotating into Z before readout. Depolarizing noise on
    the last Clifford commutes with that rotation, so folding it into the final
    gate and sampling from the exact expectation is the same experiment.
    """
    flat = exact.ravel()
    out = np.array([z_expectation_estimate(z, noise.shots, noise.spam_meas_error, rng) for z in flat])
    return out.reshape(exact.shape)


def _check_lengths(lengths: Sequence[int], n_sequences: int) -> np.ndarray:
    lengths = np.asarray(list(lengths), dtype=int)
    if lengths.ndim != 1 or len(lengths) == 0 or lengths.min() < 1 or np.any(np.diff(lengths) <= 0):
        raise ValueError("lengths must be strictly increasing positive integers")
    if n_sequences < 2:
        raise ValueError("n_sequences must be >= 2")
    return lengths


def run_interleaved_urb(
    u_ab: np.ndarray,
    target: str = "E",
    lengths: Sequence[int] = tuple(range(1, 11)),
    n_sequences: int = 10,
    noise: NoiseModel = NOISELESS,
    input_states: str = "six",
    ancilla: str = "pure",
    rng: np.random.Generator | None = None,
) -> DecayFit:
    """Interleaved unitarity RB for one marginal, fitted to ``c0 + c1 s**(k-1)``.

    A length-``k`` sequence holds ``k`` random Cliffords on qubit 0 with the
    marginal channel (ancilla reset, ``u_ab``, optional SWAP) between neighbours.
    The squared expectation of the measured observable is averaged over the
    sequences and, with ``input_states="six"``, over the six Pauli eigenstates
    as inputs and X, Y, Z as observables. ``"zero"`` uses ``|0>`` and Z only.
    """
    _check_choice(input_states, INPUT_MODES, "input_states")
    lengths = _check_lengths(lengths, n_sequences)
    channel = marginal_channel_ops(u_ab, target, ancilla)
    n_qubits = 3 if ancilla == "mixed" else 2
    rng = rng if rng is not None else ops.make_rng(noise.seed)
    if input_states == "six":
        inputs = _six_states().reshape(6, 2, 2)
    else:
        inputs = ops.projector(ops.ket(0))[None]
    batch = _embed_inputs(inputs, n_qubits)

    ys = []
    for k in lengths:
        acc = []
        for _ in range(n_sequences):
            spec = _sequence_spec(n_qubits, random_cliffords(int(k), rng), channel)
            exact = _pauli_expectations(evolve(spec, noise, batch), n_qubits)
            if input_states == "zero":
                exact = exact[..., 2:]
            acc.append(np.mean(_unbiased_square(_shot_estimates(exact, noise, rng), noise.shots)))
        ys.append(float(np.mean(acc)))
    return fit_decay(lengths, ys, with_offset=True)


def run_efficient_urb(
    channel_circuit: CircuitSpec,
    lengths: Sequence[int] = tuple(range(1, 11)),
    n_sequences: int = 10,
    noise: NoiseModel = NOISELESS,
    rng: np.random.Generator | None = None,
) -> DecayFit:
    """Efficient interleaved unitarity RB for the qubit-0 channel of ``channel_circuit``.

    For every sequence the six Pauli eigenstates are prepared and X, Y, Z
    measured; the sequence purity is the mean over input and output Paulis of
    the squared half-difference between antipodal inputs, which is 1 for a
    perfect unitary sequence. Sequence averages are fitted to ``c1 s**(k-1)``.
    """
    lengths = _check_lengths(lengths, n_sequences)
    n_qubits = channel_circuit.n_qubits
    rng = rng if rng is not None else ops.make_rng(noise.seed)
    batch = _embed_inputs(_six_states(), n_qubits)
    shots = noise.shots

    ys = []
    for k in lengths:
        acc = []
        for _ in range(n_sequences):
            spec = _sequence_spec(n_qubits, random_cliffords(int(k), rng), channel_circuit.ops)
            est = _shot_estimates(_pauli_expectations(evolve(spec, noise, batch), n_qubits), noise, rng)
            plus, minus = est[:, 0, :], est[:, 1, :]
            # unbiased estimate of ((x+ - x-)/2)^2 from independent shot averages
            sq = _unbiased_square(plus, shots) + _unbiased_square(minus, shots) - 2 * plus * minus
            acc.append(float(np.sum(sq) / 4 / 3))
        ys.append(float(np.mean(acc)))
    return fit_decay(lengths, ys, with_offset=False)


def identity_channel_circuit(n_qubits: int = 1) -> CircuitSpec:
    return CircuitSpec(n_qubits)


# -- extremal points ----------------------------------------------------------------


EXTREMAL_UNITARIES = {
    "identity": (np.eye(4, dtype=complex), (1.0, 0.0)),
    "swap": (ops.SWAP, (0.0, 1.0)),
    "cnot": (ops.CNOT, (1 / 3, 1 / 3)),
}


@dataclass(frozen=True)
class ExtremalRun:
    name: str
    target: str
    ideal: float
    fit: DecayFit


def run_extremal_set(
    method: str = "irb-efficient",
    lengths: Sequence[int] = tuple(range(1, 11)),
    n_sequences: int = 10,
    noise: NoiseModel = NOISELESS,
    rng: np.random.Generator | None = None,
) -> list[ExtremalRun]:
    """The six experiments (three extremal unitaries, both marginals) fixing the qubit set's corners."""
    _check_choice(method, ("irb", "irb-efficient"), "method")
    rng = rng if rng is not None else ops.make_rng(noise.seed)
    runs = []
    for name, (u_ab, ideal) in EXTREMAL_UNITARIES.items():
        for target, value in zip(TARGETS, ideal):
            if method == "irb":
                fit = run_interleaved_urb(u_ab, target, lengths, n_sequences, noise, rng=rng)
            else:
                fit = run_efficient_urb(marginal_channel_circuit(u_ab, target), lengths, n_sequences, noise, rng=rng)
            runs.append(ExtremalRun(name, target, value, fit))
    return runs
