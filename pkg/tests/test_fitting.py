import numpy as np
import pytest

from cupsets.errors import FitError
from cupsets.sim.fitting import fit_decay

ks = np.arange(1, 11)


def test_exact_no_offset():
    fit = fit_decay(ks, 0.9 * 0.5 ** (ks - 1), with_offset=False)
    assert fit.s == pytest.approx(0.5, abs=1e-9)
    assert fit.c1 == pytest.approx(0.9, abs=1e-9)
    assert fit.c0 == 0.0


def test_exact_with_offset():
    fit = fit_decay(ks, 0.1 + 0.8 * 0.33 ** (ks - 1))
    assert fit.s == pytest.approx(0.33, abs=1e-6)
    assert fit.c0 == pytest.approx(0.1, abs=1e-6)


def test_residual_matches_prediction():
    rng = np.random.default_rng(0)
    ys = 0.2 + 0.6 * 0.8 ** (ks - 1) + rng.normal(0, 0.01, len(ks))
    fit = fit_decay(ks, ys)
    assert fit.residual == pytest.approx(np.sum((fit.predict(ks) - ys) ** 2))
    assert 0 <= fit.s <= 1.05


def test_stderr_calibration():
    rng = np.random.default_rng(1)
    hits = 0
    for _ in range(500):
        ys = 0.1 + 0.8 * 0.7 ** (ks - 1) + rng.normal(0, 0.005, len(ks))
        fit = fit_decay(ks, ys)
        hits += abs(fit.s - 0.7) <= 3 * fit.s_stderr
    assert hits / 500 >= 0.95


def test_flat_data_is_flagged():
    fit = fit_decay(ks, np.full(10, 1 / 3))
    assert fit.degenerate and fit.s == 1.0
    fit = fit_decay(ks, np.zeros(10), with_offset=False)
    assert fit.degenerate and fit.s == 0.0


def test_fit_errors():
    with pytest.raises(FitError):
        fit_decay([1, 2], [1.0, 0.5])
    with pytest.raises(FitError):
        fit_decay([1, 2, 3], [1.0, np.nan, 0.5])
    with pytest.raises(FitError) as info:
        fit_decay([1, 2, 3], [1.0, 0.5])
    assert info.value.ys == [1.0, 0.5]


def test_growth_clamped_at_upper_bound():
    fit = fit_decay(ks, 0.5 * 1.2 ** (ks - 1), with_offset=False)
    assert fit.s == pytest.approx(1.05)
