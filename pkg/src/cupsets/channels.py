"""Quantum channels: Kraus form, derived representations and the concrete families.

A :class:`QuantumChannel` stores its Kraus operators; Liouville, Pauli-transfer
and Choi views are computed on demand. Bipartite outputs follow the ordering
convention of :mod:`cupsets.operators` (A is the left factor).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import operators as ops
from .errors import DimensionError

TP_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """CPTP map given by Kraus operators of shape ``(d_out, d_in)``."""

    kraus: tuple
    d_in: int
    d_out: int

    def __post_init__(self):
        if not self.kraus:
            raise DimensionError("a channel needs at least one Kraus operator")
        for k in self.kraus:
            if k.shape != (self.d_out, self.d_in):
                raise DimensionError(
                    f"Kraus operator of shape {k.shape}, expected {(self.d_out, self.d_in)}"
                )
        gram = sum(ops.dagger(k) @ k for k in self.kraus)
        if np.max(np.abs(gram - np.eye(self.d_in))) > TP_ATOL:
            raise ValueError("Kraus operators are not trace preserving")

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray]) -> "QuantumChannel":
        kraus = tuple(np.asarray(k, dtype=complex) for k in kraus)
        # drop numerically vanishing operators, keep at least one
        norms = [np.linalg.norm(k) for k in kraus]
        kept = tuple(k for k, n in zip(kraus, norms) if n > 1e-14) or kraus[:1]
        d_out, d_in = kept[0].shape
        return cls(kept, d_in, d_out)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply(self, rho)

    @property
    def kraus_array(self) -> np.ndarray:
        return np.array(self.kraus)

    def superoperator(self) -> np.ndarray:
        """Liouville matrix acting on row-major vectorized operators."""
        return sum(np.kron(k, k.conj()) for k in self.kraus)

    def then(self, other: "QuantumChannel") -> "QuantumChannel":
        """``other o self``: apply this channel first."""
        return compose(other, self)


def apply(ch: QuantumChannel, rho: np.ndarray) -> np.ndarray:
    """``sum_i K_i rho K_i^dag``; also accepts a stack of inputs ``(n, d_in, d_in)``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (ch.d_in, ch.d_in):
        raise DimensionError(f"input of shape {rho.shape[-2:]}, channel expects d_in={ch.d_in}")
    k = ch.kraus_array
    return np.einsum("kab,...bc,kdc->...ad", k, rho, k.conj())


def compose(second: QuantumChannel, first: QuantumChannel) -> QuantumChannel:
    """``second o first``."""
    if second.d_in != first.d_out:
        raise DimensionError("cannot compose: dimension mismatch")
    return QuantumChannel.from_kraus([b @ a for b in second.kraus for a in first.kraus])


def mix(channels: Sequence[QuantumChannel], probs: Sequence[float]) -> QuantumChannel:
    """Convex combination ``sum_i p_i E_i``."""
    probs = np.asarray(probs, dtype=float)
    if len(channels) != len(probs):
        raise ValueError("channels and probs differ in length")
    if np.any(probs < 0) or abs(probs.sum() - 1) > 1e-12:
        raise ValueError("probs must be a probability vector")
    kraus = [np.sqrt(p) * k for ch, p in zip(channels, probs) if p > 0 for k in ch.kraus]
    return QuantumChannel.from_kraus(kraus)


def identity_channel(d: int) -> QuantumChannel:
    return QuantumChannel.from_kraus([np.eye(d, dtype=complex)])


def unitary_channel(u: np.ndarray) -> QuantumChannel:
    return QuantumChannel.from_kraus([np.asarray(u, dtype=complex)])


def isometry_channel(v: np.ndarray) -> QuantumChannel:
    return QuantumChannel.from_kraus([np.asarray(v, dtype=complex)])


def constant_channel(sigma: np.ndarray, d_in: int) -> QuantumChannel:
    """Completely depolarizing channel ``rho -> tr(rho) sigma``."""
    sigma = np.asarray(sigma, dtype=complex)
    w, v = np.linalg.eigh((sigma + ops.dagger(sigma)) / 2)
    kraus = []
    for p, vec in zip(w, v.T):
        if p <= 1e-15:
            continue
        for i in range(d_in):
            kraus.append(np.sqrt(p) * np.outer(vec, ops.ket(i, d_in).conj()))
    return QuantumChannel.from_kraus(kraus)


def depolarize(ch: QuantumChannel, p: float, sigma: np.ndarray | None = None) -> QuantumChannel:
    """``(1-p) ch + p D`` with ``D`` the constant channel onto ``sigma`` (default 1/d)."""
    if sigma is None:
        sigma = ops.maximally_mixed(ch.d_out)
    return mix([ch, constant_channel(sigma, ch.d_in)], [1 - p, p])


def partial_trace_channel(dims: Sequence[int], keep: Sequence[int]) -> QuantumChannel:
    """The discarding map as a channel (tr_A, tr_B, ...)."""
    dims = list(dims)
    keep = sorted(keep)
    discard = [k for k in range(len(dims)) if k not in keep]
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    d_disc = int(np.prod([dims[k] for k in discard])) if discard else 1
    total = int(np.prod(dims))
    # permute so kept subsystems come first, then drop the discarded index
    perm = keep + discard
    p = np.zeros((total, total), dtype=complex)
    for idx in range(total):
        digits = np.unravel_index(idx, dims)
        new = np.ravel_multi_index([digits[k] for k in perm], [dims[k] for k in perm])
        p[new, idx] = 1
    kraus = []
    for j in range(d_disc):
        bra = np.kron(np.eye(d_keep), ops.ket(j, d_disc).conj()[None, :])
        kraus.append(bra @ p)
    return QuantumChannel.from_kraus(kraus)


def complementary_channel(ch: QuantumChannel) -> QuantumChannel:
    """Complement w.r.t. the canonical Stinespring dilation of ``ch``'s Kraus set."""
    k = ch.kraus_array  # (r, d_out, d_in)
    # F_a = sum_i |i><a| K_i, i.e. F_a[i, :] = K_i[a, :]
    f = np.transpose(k, (1, 0, 2))
    return QuantumChannel.from_kraus(list(f))


def marginal_channels(
    u_ab: np.ndarray, d_a: int, d_b: int, ancilla: np.ndarray
) -> tuple[QuantumChannel, QuantumChannel]:
    """Marginals ``(tr_B o G, tr_A o G)`` of ``G(rho) = U (rho x ancilla) U^dag``.

    The ancilla occupies the least significant factor of the input. A pure
    ancilla gives a complementary (isometric) pair; a mixed one a reversible pair.
    """
    u = ops.require_unitary(u_ab, atol=1e-9)
    ancilla = np.asarray(ancilla, dtype=complex)
    if u.shape[0] != d_a * d_b:
        raise DimensionError("unitary does not act on d_a * d_b")
    d_anc = ancilla.shape[0]
    if (d_a * d_b) % d_anc:
        raise DimensionError("ancilla dimension does not divide d_a * d_b")
    d_in = d_a * d_b // d_anc

    w, vecs = np.linalg.eigh((ancilla + ops.dagger(ancilla)) / 2)
    ut = u.reshape(d_a, d_b, d_in, d_anc)
    kraus_a, kraus_b = [], []
    for p, vec in zip(w, vecs.T):
        if p <= 1e-14:
            continue
        # isometry V = U (I x |anc>) as a (d_a, d_b, d_in) tensor
        v = np.sqrt(p) * np.einsum("abxc,c->abx", ut, vec)
        kraus_a.extend(v[:, j, :] for j in range(d_b))
        kraus_b.extend(v[i, :, :] for i in range(d_a))
    return QuantumChannel.from_kraus(kraus_a), QuantumChannel.from_kraus(kraus_b)


@dataclass(frozen=True)
class PauliTransferBlock:
    """Unital block ``t`` and affine column of a channel in an orthonormal traceless basis."""

    d_in: int
    d_out: int
    t: np.ndarray
    affine: np.ndarray
    trace_row_preserved: bool


def to_ptm(ch: QuantumChannel) -> PauliTransferBlock:
    basis_in = ops.traceless_basis(ch.d_in)
    basis_out = ops.traceless_basis(ch.d_out)
    images = apply(ch, basis_in) if len(basis_in) else np.zeros((0, ch.d_out, ch.d_out))
    t = np.real(np.einsum("kab,jba->kj", basis_out, images))
    centre = apply(ch, ops.maximally_mixed(ch.d_in))
    affine = np.real(np.einsum("kab,ba->k", basis_out, centre))
    traces = np.real(np.einsum("jaa->j", images)) if len(images) else np.zeros(0)
    tp = bool(np.all(np.abs(traces) <= 1e-9) and abs(np.trace(centre) - 1) <= 1e-9)
    return PauliTransferBlock(ch.d_in, ch.d_out, t, affine, tp)


def choi_state(ch: QuantumChannel) -> np.ndarray:
    """``(E x id)(|psi><psi|)`` with the normalized maximally entangled input.

    The output factor is the left (most significant) one.
    """
    d = ch.d_in
    # |psi><psi| = (1/d) sum_ij |i><j| x |i><j|
    out = np.zeros((ch.d_out * d, ch.d_out * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            eij = np.zeros((d, d), dtype=complex)
            eij[i, j] = 1
            out += np.kron(apply(ch, eij), eij) / d
    return out


# -- 2-qubit unitary families --------------------------------------------------------


def isometry_family_figure3(alpha: float, beta: float) -> np.ndarray:
    """Two-parameter circuit: RY on the ancilla, CNOT(A->B), RY on B, CNOT(B->A)."""
    u = np.kron(ops.I2, ops.ry(np.pi / 2 - 2 * alpha))
    u = ops.CNOT @ u
    u = np.kron(ops.I2, ops.ry(2 * beta - np.pi / 2)) @ u
    return ops.CNOT_BA @ u


def isometry_family_generic(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Three-parameter circuit covering all 1->2 qubit isometries up to local unitaries."""
    u = np.kron(ops.I2, ops.rz(np.pi / 2))
    u = ops.CNOT_BA @ u
    u = np.kron(ops.rz(2 * gamma - np.pi / 2), ops.ry(np.pi / 2 - 2 * alpha)) @ u
    u = ops.CNOT @ u
    u = np.kron(ops.I2, ops.ry(2 * beta - np.pi / 2)) @ u
    u = ops.CNOT_BA @ u
    return np.kron(ops.rz(-np.pi / 2), ops.I2) @ u


def family_swap_alpha(alpha: float) -> np.ndarray:
    return ops.unitary_fractional_power(ops.SWAP, alpha)


def family_cnot_ab_alpha(alpha: float) -> np.ndarray:
    return ops.unitary_fractional_power(ops.CNOT, alpha)


def family_cnotba_cnotab(alpha: float) -> np.ndarray:
    """``CNOT_BA**alpha o CNOT_AB``."""
    return ops.unitary_fractional_power(ops.CNOT_BA, alpha) @ ops.CNOT


def family_cnotab_alpha_swap(alpha: float) -> np.ndarray:
    """``CNOT_AB**alpha o CNOT_BA o CNOT_AB`` (left face of the reversible set)."""
    return ops.unitary_fractional_power(ops.CNOT, alpha) @ ops.CNOT_BA @ ops.CNOT


# -- Pauli hiding ---------------------------------------------------------------------


def pauli_hiding_isometry() -> np.ndarray:
    """``V = 1/2 sum_i P_i x |i>_B x |i>_C`` from one qubit to A(2) B(4) C(4)."""
    v = np.zeros((2 * 4 * 4, 2), dtype=complex)
    for i, p in enumerate(ops.PAULIS):
        tag = np.kron(ops.ket(i, 4), ops.ket(i, 4))[:, None]
        v += 0.5 * np.kron(p, tag)
    return v


def pauli_hiding_channel() -> QuantumChannel:
    """``R(rho) = 1/4 sum_i P_i rho P_i x |i><i|`` with output A(2) x B(4)."""
    kraus = [0.5 * np.kron(p, ops.ket(i, 4)[:, None]) for i, p in enumerate(ops.PAULIS)]
    return QuantumChannel.from_kraus(kraus)


def pauli_recovery_channel() -> QuantumChannel:
    """Read the register B and undo the recorded Pauli: Kraus ``P_i x <i|``."""
    kraus = [np.kron(p, ops.ket(i, 4).conj()[None, :]) for i, p in enumerate(ops.PAULIS)]
    return QuantumChannel.from_kraus(kraus)
