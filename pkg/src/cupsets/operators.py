"""Dense complex linear algebra primitives.

Operators are plain ``numpy`` arrays of complex dtype. Multi-party operators
follow one global ordering convention: the left tensor factor is the most
significant subsystem (subsystem A, the top wire of a circuit diagram).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError, NotUnitaryError

ATOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
SX = np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex) / 2
PAULIS = (I2, X, Y, Z)

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
# control on the second (B) factor, target on the first (A)
CNOT_BA = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def ket(index: int, d: int = 2) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def maximally_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex) / d


def bell_state(d: int = 2) -> np.ndarray:
    """Normalized maximally entangled vector ``sum_i |i>|i> / sqrt(d)``."""
    return np.eye(d, dtype=complex).reshape(d * d) / np.sqrt(d)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product; the leftmost factor is the most significant index."""
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduce ``m`` onto the subsystems listed in ``keep``.

    The kept subsystems stay in their original relative order.
    """
    m = np.asarray(m)
    dims = [int(d) for d in dims]
    n = len(dims)
    total = int(np.prod(dims))
    if m.ndim != 2 or m.shape != (total, total):
        raise DimensionError(f"operator of shape {m.shape} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep={keep} out of range for {n} subsystems")
    if len(keep) == n:
        return m.copy()

    t = m.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for k in range(n):
        if k not in keep:
            col[k] = row[k]
    out_row = "".join(row[k] for k in keep)
    out_col = "".join(col[k] for k in keep)
    expr = f"{''.join(row)}{''.join(col)}->{out_row}{out_col}"
    kept = int(np.prod([dims[k] for k in keep])) if keep else 1
    return np.einsum(expr, t).reshape(kept, kept)


def is_hermitian(m: np.ndarray, atol: float = ATOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - dagger(m))) <= atol


def is_unitary(u: np.ndarray, atol: float = ATOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))) <= atol


def is_density_matrix(rho: np.ndarray, atol: float = ATOL) -> bool:
    rho = np.asarray(rho)
    if not is_hermitian(rho, atol):
        return False
    if abs(np.trace(rho) - 1) > atol:
        return False
    return np.linalg.eigvalsh((rho + dagger(rho)) / 2).min() >= -atol


def require_unitary(u: np.ndarray, atol: float = ATOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u, atol):
        raise NotUnitaryError("operator is not unitary")
    return u


def make_rng(seed: int | np.random.SeedSequence | None = None) -> np.random.Generator:
    """Seeded PCG64 generator; identical seeds give identical streams."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    """Independent child seeds, stable for a fixed master seed."""
    return np.random.SeedSequence(seed).spawn(n)


def haar_random_unitary(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix.

    The phases of diag(R) are absorbed into Q so the result is exactly Haar
    rather than biased by the QR sign convention. With ``size`` a stack of
    shape ``(size, d, d)`` is returned.
    """
    if d < 1:
        raise DimensionError("d must be >= 1")
    shape = (d, d) if size is None else (size, d, d)
    g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    return q * phases[..., None, :]


def haar_random_state(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-random pure state vector(s): the first column of a Haar unitary."""
    return haar_random_unitary(d, rng, size)[..., :, 0]


def unitary_fractional_power(u: np.ndarray, alpha: float) -> np.ndarray:
    """``u**alpha`` on the principal branch, eigenphases taken in (-pi, pi]."""
    u = require_unitary(u, atol=1e-9)
    # complex Schur form of a normal matrix is diagonal with a unitary basis,
    # which stays orthonormal inside degenerate eigenspaces (np.linalg.eig does not)
    t, z = scipy.linalg.schur(u, output="complex")
    lam = np.diag(t)
    theta = np.angle(lam)
    theta = np.where(theta <= -np.pi + 1e-12, np.pi, theta)
    return (z * np.exp(1j * alpha * theta)) @ dagger(z)


def eigenvalues(m: np.ndarray) -> np.ndarray:
    """Eigenvalues ordered by modulus, then real part, then imaginary part (all descending)."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError("eigenvalues() needs a square matrix")
    lam = np.linalg.eigvals(m)
    key = lambda v: np.round(v, 12)  # noqa: E731
    order = np.lexsort((-key(lam.imag), -key(lam.real), -key(np.abs(lam))))
    return lam[order]


@lru_cache(maxsize=None)
def _traceless_basis(d: int) -> tuple[np.ndarray, ...]:
    if d == 2:
        return tuple(p / np.sqrt(2) for p in (X, Y, Z))
    basis = []
    for j in range(d):
        for k in range(j + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, k] = sym[k, j] = 1 / np.sqrt(2)
            anti = np.zeros((d, d), dtype=complex)
            anti[j, k] = -1j / np.sqrt(2)
            anti[k, j] = 1j / np.sqrt(2)
            basis.extend([sym, anti])
    for l in range(1, d):
        diag = np.zeros(d, dtype=complex)
        diag[:l] = 1
        diag[l] = -l
        basis.append(np.diag(diag) / np.sqrt(l * (l + 1)))
    return tuple(basis)


def traceless_basis(d: int) -> np.ndarray:
    """Orthonormal traceless Hermitian basis, shape ``(d*d - 1, d, d)``.

    Pauli/sqrt(2) for a qubit; normalized generalized Gell-Mann matrices otherwise.
    """
    if d < 2:
        return np.zeros((0, d, d), dtype=complex)
    return np.array(_traceless_basis(d))
