"""Exponential decay fits ``y_k = c0 + c1 s**(k-1)`` for RB-style data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from ..errors import FitError

S_MAX = 1.05
_EPS = 1e-12


@dataclass(frozen=True)
class DecayFit:
    c0: float
    c1: float
    s: float
    residual: float
    s_stderr: float
    with_offset: bool = True
    xs: tuple = ()
    ys: tuple = ()

    def predict(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return self.c0 + self.c1 * self.s ** (xs - 1)

    @property
    def degenerate(self) -> bool:
        return not np.isfinite(self.s_stderr)


def _model(theta, xs, with_offset):
    if with_offset:
        c0, c1, s = theta
    else:
        (c1, s), c0 = theta, 0.0
    return c0 + c1 * s ** (xs - 1)


def _jacobian(theta, xs, with_offset):
    if with_offset:
        _, c1, s = theta
    else:
        c1, s = theta
    pw = s ** (xs - 1)
    ds = c1 * (xs - 1) * np.where(xs > 1, s ** np.maximum(xs - 2, 0), 0.0)
    cols = [pw, ds]
    if with_offset:
        cols.insert(0, np.ones_like(xs))
    return np.stack(cols, axis=1)


def _initial_guess(xs, ys, with_offset):
    base = ys - ys.min() if with_offset else ys
    logs = np.log(np.maximum(base, _EPS))
    slope, intercept = np.polyfit(xs - 1, logs, 1)
    s0 = float(np.clip(np.exp(slope), 1e-3, 1.0))
    c1 = float(np.exp(intercept))
    return ([float(ys.min()), c1, s0] if with_offset else [c1, s0])


def fit_decay(xs, ys, with_offset: bool = True) -> DecayFit:
    """Least-squares fit of ``c0 + c1 s**(k-1)`` (``c0 = 0`` unless ``with_offset``).

    ``s`` is confined to ``[0, 1.05]``. The standard error of ``s`` comes from
    the Jacobian at the optimum, scaled by the residual variance. Data without
    any variation cannot fix ``s``; those fits are flagged by an infinite
    ``s_stderr``.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise FitError("xs and ys must be 1-D and of equal length", xs, ys)
    if len(xs) < 3:
        raise FitError("at least three points are needed", xs, ys)
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise FitError("data contains non-finite values", xs, ys)

    scale = max(float(np.max(np.abs(ys))), _EPS)
    if np.ptp(ys) <= 1e-12 * scale and (with_offset or scale <= _EPS):
        # flat data: no decay is visible, so s is not identifiable
        level = float(np.mean(ys))
        if with_offset or level != 0.0:
            return DecayFit(0.0, level, 1.0, 0.0, float("inf"), with_offset, tuple(xs), tuple(ys))
        return DecayFit(0.0, 0.0, 0.0, 0.0, float("inf"), with_offset, tuple(xs), tuple(ys))

    lo = [-np.inf, -np.inf, 0.0] if with_offset else [-np.inf, 0.0]
    hi = [np.inf, np.inf, S_MAX] if with_offset else [np.inf, S_MAX]
    starts = [_initial_guess(xs, ys, with_offset)]
    for s0 in (0.05, 0.5, 0.9, 0.99):
        starts.append([float(ys[-1]), float(ys[0] - ys[-1]), s0] if with_offset else [float(ys[0]), s0])

    best = None
    for x0 in starts:
        x0 = np.clip(x0, np.array(lo) + 1e-12, np.array(hi) - 1e-12)
        try:
            res = scipy.optimize.least_squares(
                lambda th: _model(th, xs, with_offset) - ys,
                x0,
                jac=lambda th: _jacobian(th, xs, with_offset),
                bounds=(lo, hi),
                method="trf",
                x_scale="jac",
                xtol=1e-15,
                ftol=1e-15,
                gtol=1e-15,
                max_nfev=5000,
            )
        except (ValueError, np.linalg.LinAlgError):
            continue
        if np.all(np.isfinite(res.x)) and (best is None or res.cost < best.cost):
            best = res
    if best is None:
        raise FitError("decay fit did not converge", xs, ys)

    theta = best.x
    resid = _model(theta, xs, with_offset) - ys
    rss = float(resid @ resid)
    dof = len(xs) - len(theta)
    jac = _jacobian(theta, xs, with_offset)
    s_stderr = float("inf")
    if dof > 0:
        try:
            cov = np.linalg.inv(jac.T @ jac) * (rss / dof)
            var = cov[-1, -1]
            if np.isfinite(var) and var >= 0:
                s_stderr = float(np.sqrt(var))
        except np.linalg.LinAlgError:
            pass
    if with_offset:
        c0, c1, s = theta
    else:
        (c1, s), c0 = theta, 0.0
    return DecayFit(float(c0), float(c1), float(s), rss, s_stderr, with_offset, tuple(xs), tuple(ys))
