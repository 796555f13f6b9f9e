"""Classical stochastic channels on bits and their marginal unitarities.

A channel is a column-stochastic matrix ``P[y, x] = Pr(y | x)``. Multi-bit
registers index states as ``2*a + b`` with A the most significant bit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .unitarity import Route, UnitarityEstimate

# permutation matrices on two bits, A most significant
CNOT_AB_PERM = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=float)
CNOT_BA_PERM = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=float)
SWAP_PERM = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=float)


@dataclass(frozen=True)
class ClassicalChannel:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2:
            raise DimensionError("stochastic matrix must be 2-D")
        if np.any(m < -1e-12) or np.max(np.abs(m.sum(axis=0) - 1)) > 1e-9:
            raise ValueError("matrix is not column-stochastic")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def d_in(self) -> int:
        return self.matrix.shape[1]

    @property
    def d_out(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)

    def then(self, other: "ClassicalChannel") -> "ClassicalChannel":
        return ClassicalChannel(other.matrix @ self.matrix)


def classical_identity(d: int = 2) -> ClassicalChannel:
    return ClassicalChannel(np.eye(d))


def classical_constant(dist, d_in: int = 2) -> ClassicalChannel:
    dist = np.asarray(dist, dtype=float)
    return ClassicalChannel(np.tile(dist[:, None], (1, d_in)))


def classical_mix(channels, probs) -> ClassicalChannel:
    probs = np.asarray(probs, dtype=float)
    return ClassicalChannel(sum(p * c.matrix for p, c in zip(probs, channels)))


def classical_marginals(ch: ClassicalChannel, d_a: int = 2, d_b: int = 2):
    """Marginal channels onto A and B of a channel with output register AB."""
    if ch.d_out != d_a * d_b:
        raise DimensionError("output dimension does not factor as d_a * d_b")
    t = ch.matrix.reshape(d_a, d_b, ch.d_in)
    return ClassicalChannel(t.sum(axis=1)), ClassicalChannel(t.sum(axis=0))


def unitarity_classical(ch: ClassicalChannel) -> UnitarityEstimate:
    """``(1/(d-1)) sum_i gamma(E(x_i - eta))`` over the point-mass inputs ``x_i``.

    With this normalization the identity and every permutation have unitarity 1.
    """
    d = ch.d_in
    if d < 2:
        raise DimensionError("unitarity needs an input dimension of at least 2")
    diffs = np.eye(d) - 1.0 / d
    out = ch.matrix @ diffs
    return UnitarityEstimate(float(np.sum(out**2) / (d - 1)), Route.CLASSICAL_SUM)


def classical_cup(ch: ClassicalChannel, d_a: int = 2, d_b: int = 2) -> tuple[float, float]:
    e, ebar = classical_marginals(ch, d_a, d_b)
    return unitarity_classical(e).value, unitarity_classical(ebar).value


def _embed_with_ancilla(ancilla) -> np.ndarray:
    """Matrix of ``x -> x (x) ancilla`` from one bit to two."""
    ancilla = np.asarray(ancilla, dtype=float)
    return np.kron(np.eye(2), ancilla[:, None])


def classical_isometries_1to2() -> list[ClassicalChannel]:
    """All ``pi o (x (x) x_0)`` over the 24 permutations of two bits (duplicates kept)."""
    embed = _embed_with_ancilla([1.0, 0.0])
    out = []
    for perm in itertools.permutations(range(4)):
        pm = np.eye(4)[list(perm)].T
        out.append(ClassicalChannel(pm @ embed))
    return out


def classical_reversible_family(kind: str, p: float, swap_outputs: bool = False) -> ClassicalChannel:
    """Reversible 1-to-2-bit maps ``pi o R_p`` with ``R_p(x) = x (x) (p, 1-p)``.

    ``kind`` is ``"hide"`` (pi = CNOT with control A) or ``"broad"`` (control B),
    optionally followed by a swap of the output bits. ``broad`` at ``p = 1/2`` is
    the one-time pad: both marginals are uniform yet the bit is recoverable.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    perms = {"hide": CNOT_AB_PERM, "broad": CNOT_BA_PERM, "local": np.eye(4)}
    if kind not in perms:
        raise ValueError(f"unknown family {kind!r}")
    m = perms[kind] @ _embed_with_ancilla([p, 1.0 - p])
    if swap_outputs:
        m = SWAP_PERM @ m
    return ClassicalChannel(m)
