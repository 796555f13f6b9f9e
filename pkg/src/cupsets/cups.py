"""Compatible unitarity pairs: closed-form boundaries, sampled point clouds, bounds
and the depolarizing deformation model.

A pair ``(u, ubar)`` holds the unitarities of the two marginals of one global
channel from ``X`` to ``AB``. ``Isometric`` samples come from isometries (pure
ancilla), ``Reversible`` ones from unitaries on a mixed ancilla and ``Full`` ones
from arbitrary channels.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import operators as ops
from .channels import (
    QuantumChannel,
    compose,
    constant_channel,
    family_cnot_ab_alpha,
    family_cnotab_alpha_swap,
    family_cnotba_cnotab,
    family_swap_alpha,
    isometry_channel,
    isometry_family_figure3,
    isometry_family_generic,
    marginal_channels,
    mix,
    partial_trace_channel,
    pauli_hiding_channel,
    pauli_hiding_isometry,
)
from .classical import (
    classical_cup,
    classical_isometries_1to2,
    classical_mix,
    classical_constant,
    classical_reversible_family,
)
from .errors import EmptyDataError, UnsupportedDimensionError
from .unitarity import unitarity_ptm

BAND_TOL = 1e-9


class Variant(enum.Enum):
    ISOMETRIC = "Isometric"
    REVERSIBLE = "Reversible"
    FULL = "Full"


class Family(enum.Enum):
    SWAP_ALPHA = "SwapAlpha"
    CNOT_ALPHA = "CnotAlpha"
    CNOT_BA_CNOT_AB = "CnotBaCnotAb"
    CNOT_ALPHA_REV = "CnotAlphaRev"
    FIG3_GRID = "Fig3Grid"
    FIG8_GRID = "Fig8Grid"
    HAAR_RANDOM = "HaarRandom"
    CLASSICAL_ENUM = "ClassicalEnum"
    PAULI_HIDING = "PauliHiding"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class CupSample:
    u: float
    ubar: float
    variant: Variant = Variant.ISOMETRIC
    family: Family = Family.CUSTOM
    params: tuple = ()
    dims: tuple = (2, 2, 2)
    u_stderr: float = 0.0
    ubar_stderr: float = 0.0
    label: str = field(default="", compare=False)

    @property
    def point(self) -> tuple[float, float]:
        return (self.u, self.ubar)


@dataclass(frozen=True)
class DepolarFit:
    p_A: float
    p_B: float
    residual: float


# -- closed-form boundaries ---------------------------------------------------------


def _s(alpha: float) -> float:
    return float(np.sin(np.pi * alpha / 2) ** 2)


def boundary_swap_alpha(alpha: float) -> CupSample:
    s = _s(alpha)
    return CupSample((1 - s) * (3 - s) / 3, 1 - (1 - s) * (3 + s) / 3, family=Family.SWAP_ALPHA, params=(alpha,))


def boundary_cnot_ab(alpha: float) -> CupSample:
    s = _s(alpha)
    return CupSample(1 - 2 * s / 3, s / 3, family=Family.CNOT_ALPHA, params=(alpha,))


def boundary_cnotba_cnotab(alpha: float) -> CupSample:
    s = _s(alpha)
    return CupSample((1 - s) / 3, 1 - 2 * (1 - s) / 3, family=Family.CNOT_BA_CNOT_AB, params=(alpha,))


def upper_boundary_relation(u: float) -> float:
    """Upper edge of the qubit set: ``ubar = 3 + u - 2 sqrt(1 + 3u)``."""
    if not -BAND_TOL <= u <= 1 + BAND_TOL:
        raise ValueError("u must lie in [0, 1]")
    return 3 + u - 2 * np.sqrt(1 + 3 * max(u, 0.0))


def band_limits(dims: Sequence[int]) -> tuple[float, float]:
    d_x, d_a, d_b = dims
    return d_x / (d_x + 1) * (1 / d_a + 1 / d_b), 1.0


def verify_band(sample: CupSample) -> bool:
    """Whether an isometric pair lies in the band allowed for its dimensions."""
    if sample.variant is not Variant.ISOMETRIC:
        raise ValueError("the band bound holds for isometric samples only")
    lo, hi = band_limits(sample.dims)
    total = sample.u + sample.ubar
    return bool(lo - BAND_TOL <= total <= hi + BAND_TOL)


@dataclass(frozen=True)
class NoHidingReport:
    eps: float
    near_zero: list
    violations: list

    @property
    def passed(self) -> bool:
        return not self.violations


def no_hiding_check(samples: Sequence[CupSample], eps: float) -> NoHidingReport:
    """Flag samples with ``u <= eps`` whose partner falls below ``1 - 2 eps``.

    The frontier ``ubar = 1 - 2u`` is traced exactly by the ``CNOT_BA**a o CNOT_AB``
    family near ``u = 0``, so a pair there must carry essentially all the input
    information in the other marginal.
    """
    near = [s for s in samples if s.u <= eps]
    bad = [s for s in near if s.ubar < 1 - 2 * eps - BAND_TOL]
    return NoHidingReport(eps, near, bad)


# -- numeric pipeline ---------------------------------------------------------------


PURE_ANCILLA = ops.projector(ops.ket(0))
MIXED_ANCILLA = ops.maximally_mixed(2)


def cup_from_channels(e: QuantumChannel, ebar: QuantumChannel) -> tuple[float, float]:
    return unitarity_ptm(e).value, unitarity_ptm(ebar).value


def cup_from_unitary(u_ab: np.ndarray, ancilla: np.ndarray = PURE_ANCILLA) -> tuple[float, float]:
    return cup_from_channels(*marginal_channels(u_ab, 2, 2, ancilla))


def channel_marginals(ch: QuantumChannel, d_a: int, d_b: int) -> tuple[QuantumChannel, QuantumChannel]:
    """Marginals of a channel whose output is ``A (x) B``."""
    return (
        compose(partial_trace_channel([d_a, d_b], [0]), ch),
        compose(partial_trace_channel([d_a, d_b], [1]), ch),
    )


_PARAMETRIC = {
    Family.SWAP_ALPHA: family_swap_alpha,
    Family.CNOT_ALPHA: family_cnot_ab_alpha,
    Family.CNOT_BA_CNOT_AB: family_cnotba_cnotab,
    Family.CNOT_ALPHA_REV: family_cnotab_alpha_swap,
}


def parameter_grid(n_points: int, stop: float = 1.0) -> np.ndarray:
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    return np.linspace(0.0, stop, n_points)


def _random_mixed_qubit(rng: np.random.Generator) -> tuple[np.ndarray, float]:
    p = rng.uniform()
    basis = ops.haar_random_unitary(2, rng)
    return basis @ np.diag([p, 1 - p]).astype(complex) @ ops.dagger(basis), p


def _sample(u, ubar, variant, family, params, dims=(2, 2, 2)) -> CupSample:
    return CupSample(float(u), float(ubar), variant, family, tuple(float(p) for p in params), tuple(dims))


def generate_cupset(
    variant: Variant,
    family: Family,
    n_points: int = 50,
    dims: Sequence[int] = (2, 2, 2),
    rng: np.random.Generator | None = None,
) -> list[CupSample]:
    """Sample the CUP-set of ``variant`` along ``family``.

    Parametric families use ``n_points`` evenly spaced values of ``alpha`` in
    [0, 1]; grid families use ``n_points`` values per angle in [0, pi]. Haar
    samples draw ``n_points`` random two-qubit unitaries. Reversible samples put
    the ancilla in ``1/2`` for the parametric families and in a random mixed
    state (uniform eigenvalue, Haar eigenbasis) for Haar samples. Full samples
    additionally mix the global channel with a completely depolarizing one.
    """
    variant, family = Variant(variant), Family(family)
    dims = tuple(int(d) for d in dims)
    if family is Family.PAULI_HIDING:
        return pauli_hiding_samples()
    if family is Family.CLASSICAL_ENUM:
        return classical_cupset(variant, n_points)
    if dims != (2, 2, 2):
        raise UnsupportedDimensionError(f"family {family.value} supports dims (2, 2, 2) only")
    rng = rng if rng is not None else ops.make_rng(0)
    ancilla = PURE_ANCILLA if variant is Variant.ISOMETRIC else MIXED_ANCILLA

    points: list[tuple[np.ndarray, np.ndarray, tuple]] = []
    if family in _PARAMETRIC:
        for a in parameter_grid(n_points):
            points.append((_PARAMETRIC[family](a), ancilla, (a,)))
    elif family is Family.FIG3_GRID:
        grid = parameter_grid(n_points, np.pi)
        for a in grid:
            for b in grid:
                points.append((isometry_family_figure3(a, b), ancilla, (a, b)))
    elif family is Family.FIG8_GRID:
        grid = parameter_grid(n_points, np.pi)
        for a in grid:
            for b in grid:
                for g in grid:
                    points.append((isometry_family_generic(a, b, g), ancilla, (a, b, g)))
    elif family is Family.HAAR_RANDOM:
        for _ in range(n_points):
            u_ab = ops.haar_random_unitary(4, rng)
            if variant is Variant.ISOMETRIC:
                points.append((u_ab, PURE_ANCILLA, ()))
            else:
                anc, p = _random_mixed_qubit(rng)
                points.append((u_ab, anc, (p,)))
    else:
        raise UnsupportedDimensionError(f"family {family.value} cannot be generated")

    out = []
    for u_ab, anc, params in points:
        e, ebar = marginal_channels(u_ab, 2, 2, anc)
        if variant is Variant.FULL:
            q = rng.uniform()
            e = mix([e, constant_channel(ops.maximally_mixed(2), 2)], [q, 1 - q])
            ebar = mix([ebar, constant_channel(ops.maximally_mixed(2), 2)], [q, 1 - q])
            params = params + (q,)
        out.append(_sample(*cup_from_channels(e, ebar), variant, family, params, dims))
    return out


# -- classical and Pauli hiding -----------------------------------------------------


def classical_cupset(variant: Variant, n_points: int = 50) -> list[CupSample]:
    """Classical one-bit to two-bit CUP samples.

    Isometric: all permutation embeddings (three distinct points). Reversible:
    the ``hide`` and ``broad`` families with and without an output swap over a
    p-grid. Full: the reversible samples mixed with the uniform constant map.
    """
    variant = Variant(variant)
    fam = Family.CLASSICAL_ENUM
    if variant is Variant.ISOMETRIC:
        return [_sample(*classical_cup(c), variant, fam, ()) for c in classical_isometries_1to2()]
    out = []
    for kind in ("hide", "broad"):
        for swap in (False, True):
            for p in parameter_grid(n_points):
                ch = classical_reversible_family(kind, p, swap)
                out.append(_sample(*classical_cup(ch), Variant.REVERSIBLE, fam, (p,)))
    if variant is Variant.REVERSIBLE:
        return out
    full = []
    uniform = classical_constant(np.full(4, 0.25))
    for kind in ("hide", "broad"):
        for swap in (False, True):
            for p in parameter_grid(n_points):
                for q in parameter_grid(n_points):
                    ch = classical_mix([classical_reversible_family(kind, p, swap), uniform], [q, 1 - q])
                    full.append(_sample(*classical_cup(ch), Variant.FULL, fam, (p, q)))
    return full


def pauli_hiding_samples() -> list[CupSample]:
    """The Pauli hiding channel and the three bipartitions of its isometric dilation.

    The reversible channel keeps the Pauli label in a 4-level register and has
    both marginals completely depolarizing. Its dilation ``X -> A B C`` split as
    A|BC, B|AC and C|AB gives isometric pairs.
    """
    out = [
        _sample(
            *cup_from_channels(*channel_marginals(pauli_hiding_channel(), 2, 4)),
            Variant.REVERSIBLE,
            Family.PAULI_HIDING,
            (),
            (2, 2, 4),
        )
    ]
    v = isometry_channel(pauli_hiding_isometry())
    sub = [2, 4, 4]
    for k, name in enumerate(("A|BC", "B|AC", "C|AB")):
        rest = [j for j in range(3) if j != k]
        e = compose(partial_trace_channel(sub, [k]), v)
        ebar = compose(partial_trace_channel(sub, rest), v)
        dims = (2, sub[k], int(np.prod([sub[j] for j in rest])))
        s = _sample(*cup_from_channels(e, ebar), Variant.ISOMETRIC, Family.PAULI_HIDING, (k,), dims)
        out.append(replace(s, label=name))
    return out


# -- depolarizing deformation -------------------------------------------------------


def apply_depolarizing(sample: CupSample, p_A: float, p_B: float) -> CupSample:
    """Local depolarizing noise on each marginal scales its unitarity by ``(1-p)**2``."""
    for p in (p_A, p_B):
        if not 0.0 <= p <= 1.0:
            raise ValueError("depolarizing strengths must lie in [0, 1]")
    return replace(
        sample,
        u=(1 - p_A) ** 2 * sample.u,
        ubar=(1 - p_B) ** 2 * sample.ubar,
        u_stderr=(1 - p_A) ** 2 * sample.u_stderr,
        ubar_stderr=(1 - p_B) ** 2 * sample.ubar_stderr,
        variant=Variant.FULL,
    )


def _fit_axis(ideal: np.ndarray, noisy: np.ndarray) -> float:
    """Least-squares scale ``a`` in ``noisy ~ a * ideal`` restricted to [0, 1]."""
    norm = float(ideal @ ideal)
    if norm == 0.0:
        return 1.0
    return float(np.clip(ideal @ noisy / norm, 0.0, 1.0))


def fit_depolarizing(noisy: Sequence[CupSample], ideal: Sequence[CupSample]) -> DepolarFit:
    """Best-fit ``(p_A, p_B)`` mapping the ideal points onto the noisy ones."""
    if not noisy or not ideal:
        raise EmptyDataError("fit_depolarizing needs at least one sample")
    if len(noisy) != len(ideal):
        raise ValueError("noisy and ideal samples are not aligned")
    u_i = np.array([s.u for s in ideal])
    b_i = np.array([s.ubar for s in ideal])
    u_n = np.array([s.u for s in noisy])
    b_n = np.array([s.ubar for s in noisy])
    a, b = _fit_axis(u_i, u_n), _fit_axis(b_i, b_n)
    residual = float(np.sum((a * u_i - u_n) ** 2) + np.sum((b * b_i - b_n) ** 2))
    return DepolarFit(1 - np.sqrt(a), 1 - np.sqrt(b), residual)
