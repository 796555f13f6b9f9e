"""The 24-element single-qubit Clifford group (modulo global phase)."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .. import operators as ops


def _phase_key(u: np.ndarray) -> tuple:
    # fix the global phase by making the first sizeable entry real positive
    flat = u.ravel()
    k = int(np.argmax(np.abs(flat) > 1e-9))
    v = flat * np.exp(-1j * np.angle(flat[k]))
    return tuple(np.round(v, 8))


@lru_cache(maxsize=None)
def _group() -> tuple:
    found = {_phase_key(ops.I2): ops.I2}
    frontier = [ops.I2]
    while frontier:
        nxt = []
        for g in frontier:
            for gen in (ops.H, ops.S):
                h = gen @ g
                key = _phase_key(h)
                if key not in found:
                    found[key] = h
                    nxt.append(h)
        frontier = nxt
    return tuple(sorted(found.values(), key=_phase_key))


def single_qubit_cliffords() -> np.ndarray:
    """All 24 Cliffords as a ``(24, 2, 2)`` array in a fixed order."""
    return np.array(_group())


def random_cliffords(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent uniform draws from the group."""
    group = single_qubit_cliffords()
    return group[rng.integers(len(group), size=n)]
