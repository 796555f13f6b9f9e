import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cupsets import operators as ops
from cupsets.channels import family_cnot_ab_alpha, family_cnotba_cnotab, family_swap_alpha
from cupsets.cups import (
    MIXED_ANCILLA,
    CupSample,
    Family,
    Variant,
    apply_depolarizing,
    band_limits,
    boundary_cnot_ab,
    boundary_cnotba_cnotab,
    boundary_swap_alpha,
    classical_cupset,
    cup_from_unitary,
    fit_depolarizing,
    generate_cupset,
    no_hiding_check,
    pauli_hiding_samples,
    upper_boundary_relation,
    verify_band,
)
from cupsets.errors import EmptyDataError, UnsupportedDimensionError

alphas = np.linspace(0, 1, 200)


def test_boundary_examples():
    assert np.allclose(boundary_swap_alpha(0).point, (1, 0))
    assert np.allclose(boundary_cnot_ab(1).point, (1 / 3, 1 / 3))
    assert np.allclose(boundary_cnotba_cnotab(1).point, (0, 1))


@pytest.mark.parametrize(
    "family,closed",
    [
        (family_swap_alpha, boundary_swap_alpha),
        (family_cnot_ab_alpha, boundary_cnot_ab),
        (family_cnotba_cnotab, boundary_cnotba_cnotab),
    ],
)
def test_boundary_closed_forms_match_pipeline(family, closed):
    for a in alphas:
        assert np.allclose(cup_from_unitary(family(a)), closed(a).point, atol=1e-9, rtol=0)


def test_upper_boundary_relation():
    assert upper_boundary_relation(1) == pytest.approx(0)
    assert upper_boundary_relation(0) == pytest.approx(1)
    assert upper_boundary_relation(5 / 12) == pytest.approx(5 / 12)
    assert boundary_swap_alpha(0.5).ubar == pytest.approx(5 / 12)
    for a in alphas:
        u, ubar = cup_from_unitary(family_swap_alpha(a))
        assert abs(upper_boundary_relation(u) - ubar) <= 1e-9
    with pytest.raises(ValueError):
        upper_boundary_relation(1.5)


def test_verify_band_examples():
    assert verify_band(CupSample(1, 0))
    assert verify_band(CupSample(1 / 3, 1 / 3))
    assert not verify_band(CupSample(0.2, 0.2))
    with pytest.raises(ValueError):
        verify_band(CupSample(0.2, 0.2, variant=Variant.FULL))
    assert band_limits((2, 2, 2)) == pytest.approx((2 / 3, 1))
    assert band_limits((2, 4, 8))[0] == pytest.approx(0.25)


def test_haar_isometric_cloud_in_band():
    samples = generate_cupset(Variant.ISOMETRIC, Family.HAAR_RANDOM, 2000, rng=ops.make_rng(5))
    assert len(samples) == 2000
    assert all(verify_band(s) for s in samples)
    assert all(-1e-9 <= s.u <= 1 + 1e-9 and -1e-9 <= s.ubar <= 1 + 1e-9 for s in samples)


def test_haar_is_seed_deterministic():
    a = generate_cupset(Variant.REVERSIBLE, Family.HAAR_RANDOM, 20, rng=ops.make_rng(3))
    b = generate_cupset(Variant.REVERSIBLE, Family.HAAR_RANDOM, 20, rng=ops.make_rng(3))
    assert a == b


def test_reversible_haar_below_unit_line():
    samples = generate_cupset(Variant.REVERSIBLE, Family.HAAR_RANDOM, 500, rng=ops.make_rng(6))
    assert all(s.u + s.ubar <= 1 + 1e-9 for s in samples)
    assert all(len(s.params) == 1 and 0 <= s.params[0] <= 1 for s in samples)


def test_reversible_left_face_has_zero_u():
    samples = generate_cupset(Variant.REVERSIBLE, Family.CNOT_ALPHA_REV, 50)
    assert all(abs(s.u) <= 1e-9 for s in samples)
    assert all(1 / 3 - 1e-9 <= s.u + s.ubar <= 1 + 1e-9 for s in samples)
    assert samples[0].point == pytest.approx((0, 1 / 3))
    assert samples[-1].point == pytest.approx((0, 1))


def test_reversible_parametric_endpoints():
    cnot = generate_cupset(Variant.REVERSIBLE, Family.CNOT_ALPHA, 3)
    assert [s.point for s in cnot] == [pytest.approx(p) for p in [(1, 0), (2 / 3, 0), (1 / 3, 0)]]
    assert cup_from_unitary(ops.CNOT, MIXED_ANCILLA) == pytest.approx((1 / 3, 0))
    mid = generate_cupset(Variant.REVERSIBLE, Family.CNOT_BA_CNOT_AB, 3)
    assert [s.point for s in mid] == [pytest.approx(p) for p in [(1 / 3, 0), (1 / 6, 1 / 6), (0, 1 / 3)]]
    swap = generate_cupset(Variant.REVERSIBLE, Family.SWAP_ALPHA, 3)
    assert [s.point for s in swap] == [pytest.approx(p) for p in [(1, 0), (0.25, 0.25), (0, 1)]]


def test_full_variant_squashes_reversible():
    rev = generate_cupset(Variant.REVERSIBLE, Family.SWAP_ALPHA, 20)
    full = generate_cupset(Variant.FULL, Family.SWAP_ALPHA, 20, rng=ops.make_rng(1))
    for a, b in zip(rev, full):
        q = b.params[-1]
        assert b.variant is Variant.FULL
        assert b.point == pytest.approx((q * q * a.u, q * q * a.ubar))


def test_figure3_grid_in_band_and_reaches_corners():
    samples = generate_cupset(Variant.ISOMETRIC, Family.FIG3_GRID, 49)
    assert len(samples) == 49 * 49
    assert all(verify_band(s) for s in samples)
    pts = np.array([s.point for s in samples])
    for target in [(1, 0), (0, 1), (1 / 3, 1 / 3)]:
        assert np.min(np.linalg.norm(pts - target, axis=1)) <= 1e-6


def test_figure8_grid_in_band():
    samples = generate_cupset(Variant.ISOMETRIC, Family.FIG8_GRID, 9)
    assert len(samples) == 9**3
    assert all(verify_band(s) for s in samples)


def test_unsupported_dims():
    with pytest.raises(UnsupportedDimensionError):
        generate_cupset(Variant.ISOMETRIC, Family.SWAP_ALPHA, 5, dims=(2, 2, 4))
    with pytest.raises(UnsupportedDimensionError):
        generate_cupset(Variant.ISOMETRIC, Family.CUSTOM, 5)


def test_no_hiding_examples():
    report = no_hiding_check([boundary_cnotba_cnotab(1)], 1e-6)
    assert report.passed and len(report.near_zero) == 1
    bad = no_hiding_check([CupSample(0, 0.5)], 1e-6)
    assert not bad.passed and bad.violations == [CupSample(0, 0.5)]


def test_no_hiding_on_haar_cloud():
    samples = generate_cupset(Variant.ISOMETRIC, Family.HAAR_RANDOM, 2000, rng=ops.make_rng(8))
    assert no_hiding_check(samples, 0.01).passed


def test_lower_frontier_is_exact_near_zero():
    for a in np.linspace(0.9, 1, 11):
        s = boundary_cnotba_cnotab(a)
        assert s.ubar == pytest.approx(1 - 2 * s.u)


def test_classical_cupsets():
    iso = classical_cupset(Variant.ISOMETRIC)
    assert {s.point for s in iso} == {(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)}
    rev = classical_cupset(Variant.REVERSIBLE, 11)
    assert all(min(s.u, s.ubar, 1 - s.u, 1 - s.ubar) <= 1e-12 for s in rev)
    assert any(s.point == (0.0, 0.0) for s in rev)
    full = classical_cupset(Variant.FULL, 6)
    pts = np.array([s.point for s in full])
    assert pts.min() >= 0 and pts.max() <= 1
    assert len(full) == 4 * 36


def test_pauli_hiding_samples():
    rev, *bipartitions = pauli_hiding_samples()
    assert rev.variant is Variant.REVERSIBLE and rev.dims == (2, 2, 4)
    assert rev.point == pytest.approx((0, 0), abs=1e-12)
    assert [s.label for s in bipartitions] == ["A|BC", "B|AC", "C|AB"]
    assert [s.dims for s in bipartitions] == [(2, 2, 16), (2, 4, 8), (2, 4, 8)]
    assert all(verify_band(s) for s in bipartitions)
    assert [s.point for s in bipartitions] == [pytest.approx(p, abs=1e-12) for p in [(0, 0.5), (0, 0.25), (0, 0.25)]]


def test_apply_depolarizing():
    s = CupSample(1, 0)
    assert apply_depolarizing(s, 0, 0).point == s.point
    out = apply_depolarizing(s, 0.5, 0.3)
    assert out.point == pytest.approx((0.25, 0))
    assert out.variant is Variant.FULL
    with pytest.raises(ValueError):
        apply_depolarizing(s, -0.1, 0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_depolarized_boundary_stays_below_unit_line(alpha, pa, pb):
    for s in (boundary_swap_alpha(alpha), boundary_cnot_ab(alpha), boundary_cnotba_cnotab(alpha)):
        out = apply_depolarizing(s, pa, pb)
        assert out.u + out.ubar <= 1 + 1e-9


def test_fit_identity_and_errors():
    ideal = [boundary_swap_alpha(a) for a in np.linspace(0, 1, 9)]
    fit = fit_depolarizing(ideal, ideal)
    assert fit.p_A == pytest.approx(0, abs=1e-12)
    assert fit.p_B == pytest.approx(0, abs=1e-12)
    assert fit.residual == pytest.approx(0, abs=1e-24)
    with pytest.raises(EmptyDataError):
        fit_depolarizing([], [])
    with pytest.raises(ValueError):
        fit_depolarizing(ideal[:3], ideal)


def test_fit_recovers_noiseless_parameters():
    ideal = [boundary_swap_alpha(a) for a in np.linspace(0, 1, 9)]
    noisy = [apply_depolarizing(s, 0.063, 0.137) for s in ideal]
    fit = fit_depolarizing(noisy, ideal)
    assert abs(fit.p_A - 0.063) <= 1e-6 and abs(fit.p_B - 0.137) <= 1e-6


def test_fit_residual_matches_definition():
    rng = ops.make_rng(4)
    ideal = [boundary_cnot_ab(a) for a in np.linspace(0, 1, 9)]
    noisy = [
        CupSample(s.u * 0.8 + rng.normal(0, 0.01), s.ubar * 0.7 + rng.normal(0, 0.01)) for s in ideal
    ]
    fit = fit_depolarizing(noisy, ideal)
    a, b = (1 - fit.p_A) ** 2, (1 - fit.p_B) ** 2
    resid = sum((a * i.u - n.u) ** 2 + (b * i.ubar - n.ubar) ** 2 for i, n in zip(ideal, noisy))
    assert fit.residual == pytest.approx(resid)
    assert fit.residual > 0


def test_fit_with_zero_axis_reports_no_noise():
    ideal = [CupSample(0.5, 0.0), CupSample(0.3, 0.0)]
    noisy = [apply_depolarizing(s, 0.2, 0.4) for s in ideal]
    fit = fit_depolarizing(noisy, ideal)
    assert fit.p_A == pytest.approx(0.2)
    assert fit.p_B == 0.0
