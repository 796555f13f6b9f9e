"""Unitarity of quantum and classical channels, computed along independent routes.

Deterministic routes:

* ``PtmNorm`` -- squared Frobenius norm of the unital block over ``d_in**2 - 1``.
* ``ComplementaryPurity`` -- output purities of the channel and a complement on 1/d.
* ``ChoiPurity`` -- purity of the Choi state and of the channel output on 1/d.
* ``ClassicalSum`` -- average over the pure (point-mass) inputs of a stochastic map.

``HaarMonteCarlo`` estimates the defining Haar integral by sampling.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.optimize
from scipy.spatial.transform import Rotation

from . import operators as ops
from .channels import QuantumChannel, apply, choi_state, compose, to_ptm, unitary_channel
from .errors import DimensionError, UnsupportedDimensionError


class Route(enum.Enum):
    HAAR_MONTE_CARLO = "HaarMonteCarlo"
    PTM_NORM = "PtmNorm"
    COMPLEMENTARY_PURITY = "ComplementaryPurity"
    CHOI_PURITY = "ChoiPurity"
    CLASSICAL_SUM = "ClassicalSum"


@dataclass(frozen=True)
class UnitarityEstimate:
    value: float
    route: Route
    stderr: float = 0.0
    samples: int = 0

    def __float__(self) -> float:
        return self.value


def purity(rho: np.ndarray) -> float:
    """``tr(rho^dag rho)``; for traceless differences this is the squared HS norm."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError("purity() needs a square matrix")
    return float(np.real(np.vdot(rho, rho)))


def _require_nontrivial_input(d_in: int) -> None:
    if d_in < 2:
        raise UnsupportedDimensionError("unitarity needs an input dimension of at least 2")


def unitarity_ptm(ch: QuantumChannel) -> UnitarityEstimate:
    _require_nontrivial_input(ch.d_in)
    t = to_ptm(ch).t
    return UnitarityEstimate(float(np.sum(t * t) / (ch.d_in**2 - 1)), Route.PTM_NORM)


def unitarity_haar_mc(ch: QuantumChannel, n_samples: int, rng: np.random.Generator) -> UnitarityEstimate:
    """Monte-Carlo estimate of ``d/(d-1) E_psi tr[E(psi - 1/d)^2]`` over Haar-random psi."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    d = ch.d_in
    _require_nontrivial_input(d)
    psi = ops.haar_random_state(d, rng, size=n_samples)
    states = np.einsum("na,nb->nab", psi, psi.conj()) - np.eye(d) / d
    out = apply(ch, states)
    summand = d / (d - 1) * np.real(np.einsum("nab,nab->n", out.conj(), out))
    return UnitarityEstimate(
        float(summand.mean()),
        Route.HAAR_MONTE_CARLO,
        float(summand.std(ddof=1) / np.sqrt(n_samples)),
        n_samples,
    )


def _purity_formula(d: int, gamma_global: float, gamma_output: float) -> float:
    return d / (d * d - 1) * (d * gamma_global - gamma_output)


def unitarity_complementary(ch: QuantumChannel, comp: QuantumChannel) -> UnitarityEstimate:
    """Unitarity of ``ch`` from its own and its complement's output purity on 1/d.

    ``comp`` must be complementary to ``ch``; this is not checked.
    """
    d = ch.d_in
    _require_nontrivial_input(d)
    if comp.d_in != d:
        raise DimensionError("complementary channel has a different input dimension")
    mm = ops.maximally_mixed(d)
    value = _purity_formula(d, purity(apply(comp, mm)), purity(apply(ch, mm)))
    return UnitarityEstimate(value, Route.COMPLEMENTARY_PURITY)


def unitarity_choi(ch: QuantumChannel) -> UnitarityEstimate:
    d = ch.d_in
    _require_nontrivial_input(d)
    value = _purity_formula(d, purity(choi_state(ch)), purity(apply(ch, ops.maximally_mixed(d))))
    return UnitarityEstimate(value, Route.CHOI_PURITY)


def unitarity(ch: QuantumChannel) -> float:
    """Default deterministic unitarity (PTM route)."""
    return unitarity_ptm(ch).value


def measured_purity(rho: np.ndarray, basis: np.ndarray) -> float:
    """``sum_k <b_k|rho|b_k>^2`` for the projective measurement on the columns of ``basis``."""
    probs = np.real(np.einsum("ak,ab,bk->k", basis.conj(), rho, basis))
    return float(np.sum(probs**2))


def eigenbasis_measured_purity(rho: np.ndarray) -> float:
    """Sharp measurement in the eigenbasis: attains ``tr(rho^2)``."""
    _, vecs = np.linalg.eigh(rho)
    return measured_purity(rho, vecs)


# -- spectral routes ------------------------------------------------------------------


def _unital_spectrum_sum(t: np.ndarray) -> float:
    lam = ops.eigenvalues(t)
    return float(np.sum(np.abs(lam) ** 2))


def _rotated_block(t: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    return to_ptm(unitary_channel(left)).t @ t @ to_ptm(unitary_channel(right)).t


def _settings(d: int, n_settings: int, rng: np.random.Generator):
    lefts = ops.haar_random_unitary(d, rng, size=n_settings)
    rights = ops.haar_random_unitary(d, rng, size=n_settings)
    return zip(lefts, rights)


def spectral_bound_for_setting(ch: QuantumChannel, left: np.ndarray, right: np.ndarray) -> float:
    """Eigenvalue sum of the unital block of ``U_left o ch o U_right`` over ``d**2 - 1``."""
    d = ch.d_in
    t = to_ptm(compose(unitary_channel(left), compose(ch, unitary_channel(right)))).t
    return _unital_spectrum_sum(t) / (d * d - 1)


def spectral_lower_bound(ch: QuantumChannel, n_settings: int, rng: np.random.Generator) -> float:
    """Best eigenvalue lower bound on the unitarity over random unitary sandwiches."""
    if ch.d_in != ch.d_out:
        raise DimensionError("spectral bounds need d_in == d_out")
    if n_settings < 1:
        raise ValueError("n_settings must be >= 1")
    d = ch.d_in
    _require_nontrivial_input(d)
    t = to_ptm(ch).t
    best = 0.0
    for left, right in _settings(d, n_settings, rng):
        best = max(best, _unital_spectrum_sum(_rotated_block(t, left, right)) / (d * d - 1))
    return best


@dataclass(frozen=True)
class VariationalEstimate:
    value: float
    gap: float
    settings: int
    rotation: np.ndarray


def _neg_spectrum(t: np.ndarray, rotvec: np.ndarray) -> float:
    r = Rotation.from_rotvec(rotvec).as_matrix()
    return -float(np.sum(np.abs(np.linalg.eigvals(t @ r)) ** 2))


def spectral_variational(
    ch: QuantumChannel, n_settings: int, rng: np.random.Generator, refine: int = 5
) -> VariationalEstimate:
    """Maximize the qubit eigenvalue bound over unitary sandwiches.

    A sandwich ``U_i o ch o U_j`` acts on the unital block as ``R_i T R_j``, whose
    spectrum equals that of ``T R_j R_i``, so the search runs over one rotation.
    ``n_settings`` uniformly random rotations (the image of Haar pairs) are
    scored, and the ``refine`` best are polished by a local simplex search.
    Every evaluated point is an admissible sandwich, so the value stays a lower
    bound; its maximum over all sandwiches equals the unitarity.
    """
    if ch.d_in != 2 or ch.d_out != 2:
        raise UnsupportedDimensionError("the variational formulation is for single qubits only")
    if n_settings < 1:
        raise ValueError("n_settings must be >= 1")
    t = to_ptm(ch).t
    starts = Rotation.random(n_settings, random_state=rng).as_rotvec()
    scores = np.array([_neg_spectrum(t, r) for r in starts])
    best_val, best_rot = scores.min(), starts[int(np.argmin(scores))]
    for i in np.argsort(scores, kind="stable")[: max(refine, 0)]:
        res = scipy.optimize.minimize(
            lambda r: _neg_spectrum(t, r),
            starts[i],
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000},
        )
        if res.fun < best_val:
            best_val, best_rot = res.fun, res.x
    value = -best_val / 3
    return VariationalEstimate(
        value, unitarity_ptm(ch).value - value, n_settings, Rotation.from_rotvec(best_rot).as_matrix()
    )
