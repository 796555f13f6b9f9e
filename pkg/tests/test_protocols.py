import numpy as np
import pytest

from cupsets import operators as ops
from cupsets.channels import apply, family_swap_alpha, marginal_channels
from cupsets.cups import PURE_ANCILLA, Variant, boundary_swap_alpha
from cupsets.sim.circuit import NOISELESS, CircuitSpec, NoiseModel, evolve, gate, unitary_op
from cupsets.sim.clifford import random_cliffords
from cupsets.sim.protocols import (
    EXTREMAL_UNITARIES,
    estimate_cup_direct_choi,
    estimate_cup_direct_complementarity,
    identity_channel_circuit,
    marginal_channel_circuit,
    marginal_channel_ops,
    run_efficient_urb,
    run_extremal_set,
    run_interleaved_urb,
    swap_test,
)

SPAM = dict(spam_prep_error=0.05, spam_meas_error=0.05)


def prep(*gates):
    return CircuitSpec(1, list(gates))


def test_swap_test_pure_and_orthogonal(rng):
    assert swap_test(prep(), prep(), NOISELESS, rng) == 1.0
    noise = NOISELESS.with_(shots=10_000)
    assert abs(swap_test(prep(), prep(gate("X", 0)), noise, rng)) <= 4 / np.sqrt(10_000)


def test_swap_test_mixture(rng):
    mixed = [prep(), prep(gate("X", 0))]
    noise = NOISELESS.with_(shots=20_000)
    assert swap_test(mixed, mixed, noise, rng) == pytest.approx(0.5, abs=0.02)


def test_direct_complementarity_identity_and_cnot(rng):
    noise = NOISELESS.with_(shots=20_000)
    s = estimate_cup_direct_complementarity(np.eye(4), noise, rng)
    assert abs(s.u - 1) <= 4 * s.u_stderr and abs(s.ubar) <= 4 * s.ubar_stderr
    s = estimate_cup_direct_complementarity(ops.CNOT, noise, rng)
    assert abs(s.u - 1 / 3) <= 4 * s.u_stderr and abs(s.ubar - 1 / 3) <= 4 * s.ubar_stderr


def test_direct_complementarity_swap_half(rng):
    s = estimate_cup_direct_complementarity(family_swap_alpha(0.5), NOISELESS.with_(shots=20_000), rng)
    ideal = boundary_swap_alpha(0.5)
    assert abs(s.u - ideal.u) <= 4 * s.u_stderr
    assert abs(s.ubar - ideal.ubar) <= 4 * s.ubar_stderr


def test_direct_choi(rng):
    noise = NOISELESS.with_(shots=20_000)
    s = estimate_cup_direct_choi(np.eye(4), "pure", noise, rng)
    assert s.variant is Variant.ISOMETRIC
    assert abs(s.u - 1) <= 4 * s.u_stderr
    # SWAP with a pure ancilla makes the first marginal a constant channel
    s = estimate_cup_direct_choi(ops.SWAP, "pure", noise, rng)
    assert abs(s.u) <= 4 * s.u_stderr and abs(s.ubar - 1) <= 4 * s.ubar_stderr
    # CNOT with ancilla 1/2: the target marginal is constant
    s = estimate_cup_direct_choi(ops.CNOT, "mixed", noise, rng)
    assert s.variant is Variant.REVERSIBLE
    assert abs(s.u - 1 / 3) <= 4 * s.u_stderr and abs(s.ubar) <= 4 * s.ubar_stderr


def test_direct_methods_reject_bad_input(rng):
    with pytest.raises(ValueError):
        estimate_cup_direct_choi(np.eye(4), "thermal", NOISELESS, rng)
    with pytest.raises(ValueError):
        estimate_cup_direct_complementarity(np.diag([1, 1, 1, 0.5]), NOISELESS, rng)


def test_direct_estimates_converge_as_inverse_sqrt_shots():
    u_ab = family_swap_alpha(0.5)
    ideal = np.array(boundary_swap_alpha(0.5).point)
    rng = ops.make_rng(31)
    shots = [200, 2000, 20_000]
    rms = []
    for n in shots:
        errs = [estimate_cup_direct_complementarity(u_ab, NOISELESS.with_(shots=n), rng).point - ideal for _ in range(30)]
        rms.append(np.sqrt(np.mean(np.square(errs))))
    slope = np.polyfit(np.log(shots), np.log(rms), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.15)


def test_spam_shifts_direct_estimates(rng):
    clean = NOISELESS.with_(shots=20_000)
    a = estimate_cup_direct_complementarity(ops.CNOT, clean, rng)
    b = estimate_cup_direct_complementarity(ops.CNOT, clean.with_(**SPAM), rng)
    shift = np.hypot(a.u - b.u, a.ubar - b.ubar)
    noise_err = np.sqrt(a.u_stderr**2 + a.ubar_stderr**2 + b.u_stderr**2 + b.ubar_stderr**2)
    assert shift > 3 * noise_err


def test_marginal_circuit_ops():
    names = [op.name for op in marginal_channel_ops(ops.CNOT, "Ebar", "mixed")]
    assert names == ["RESET", "RESET", "H", "CNOT", "UNITARY", "SWAP"]
    assert marginal_channel_circuit(ops.CNOT, "E", "mixed").n_qubits == 3
    with pytest.raises(ValueError):
        marginal_channel_ops(ops.CNOT, "C")


@pytest.mark.parametrize("target", ["E", "Ebar"])
@pytest.mark.parametrize("ancilla", ["pure", "mixed"])
def test_sequence_reduces_to_abstract_channel(rng, target, ancilla):
    """Full circuit with resets equals alternating Cliffords and the marginal channel."""
    u_ab = ops.haar_random_unitary(4, rng)
    anc = PURE_ANCILLA if ancilla == "pure" else ops.maximally_mixed(2)
    e, ebar = marginal_channels(u_ab, 2, 2, anc)
    channel = e if target == "E" else ebar
    circ_ops = marginal_channel_ops(u_ab, target, ancilla)
    n = 3 if ancilla == "mixed" else 2
    for k in (1, 2, 5):
        cliffords = random_cliffords(k, rng)
        spec = CircuitSpec(n)
        for i, c in enumerate(cliffords):
            if i:
                spec.extend(circ_ops)
            spec.append(unitary_op(c, (0,), label="clifford"))
        rho = ops.projector(ops.haar_random_state(2, rng))
        full_in = np.kron(rho, ops.projector(ops.ket(0, 2 ** (n - 1))))
        out = ops.partial_trace(evolve(spec, NOISELESS, full_in), [2] * n, (0,))
        ref = cliffords[0] @ rho @ cliffords[0].conj().T
        for c in cliffords[1:]:
            ref = apply(channel, ref)
            ref = c @ ref @ c.conj().T
        assert np.max(np.abs(out - ref)) <= 1e-10


def test_interleaved_cnot_marginal():
    fit = run_interleaved_urb(ops.CNOT, "E", n_sequences=30, rng=ops.make_rng(41))
    assert fit.s == pytest.approx(1 / 3, abs=0.05)


def test_interleaved_swap_half():
    fit = run_interleaved_urb(family_swap_alpha(0.5), "E", n_sequences=100, rng=ops.make_rng(42))
    assert fit.s == pytest.approx(5 / 12, abs=0.05)


def test_interleaved_identity_has_no_visible_decay():
    """For a unitary marginal the offset model cannot separate c0 from c1."""
    fit = run_interleaved_urb(np.eye(4), "E", rng=ops.make_rng(43))
    assert np.ptp(fit.ys) <= 0.01
    assert np.mean(fit.ys) == pytest.approx(1 / 3, abs=0.005)
    assert fit.s_stderr > 0.05


def test_interleaved_zero_input_mode():
    fit = run_interleaved_urb(ops.CNOT, "E", n_sequences=100, input_states="zero", rng=ops.make_rng(44))
    assert 0 <= fit.s <= 1.05
    with pytest.raises(ValueError):
        run_interleaved_urb(ops.CNOT, input_states="magic")


def test_lengths_validation():
    with pytest.raises(ValueError):
        run_efficient_urb(identity_channel_circuit(), lengths=[1, 3, 2])
    with pytest.raises(ValueError):
        run_efficient_urb(identity_channel_circuit(), n_sequences=1)


def test_efficient_identity_and_cnot():
    fit = run_efficient_urb(identity_channel_circuit(), rng=ops.make_rng(45))
    assert fit.s == pytest.approx(1, abs=0.02)
    fit = run_efficient_urb(marginal_channel_circuit(ops.CNOT, "E"), rng=ops.make_rng(46))
    assert fit.s == pytest.approx(1 / 3, abs=0.05)


def test_efficient_mean_purity_is_one_for_identity():
    rng = ops.make_rng(47)
    rows = [run_efficient_urb(identity_channel_circuit(), lengths=(1, 2, 3), n_sequences=2, rng=rng).ys for _ in range(50)]
    rows = np.array(rows)
    mean = rows.mean(axis=0)
    err = rows.std(axis=0, ddof=1) / np.sqrt(len(rows))
    assert np.all(np.abs(mean - 1) <= 4 * err)


def test_efficient_with_clifford_noise():
    p = 0.01
    fit = run_efficient_urb(identity_channel_circuit(), noise=NoiseModel({"clifford": p}), rng=ops.make_rng(48))
    assert fit.s < 1
    assert fit.s >= (1 - p) ** 2 - 0.02
    assert fit.s == pytest.approx((1 - p) ** 2, abs=0.01)


@pytest.mark.parametrize("circ", [identity_channel_circuit(), marginal_channel_circuit(family_swap_alpha(0.5), "E")])
def test_efficient_spam_robust(circ):
    """SPAM rescales c1 but leaves s alone; both runs share their Clifford draws."""
    clean = run_efficient_urb(circ, rng=ops.make_rng(49))
    spam = run_efficient_urb(circ, noise=NOISELESS.with_(**SPAM), rng=ops.make_rng(49))
    assert abs(clean.s - spam.s) < 3 * np.hypot(clean.s_stderr, spam.s_stderr)
    assert spam.c1 < 0.85 * clean.c1


def test_extremal_set_runs_six_experiments():
    runs = run_extremal_set(rng=ops.make_rng(50))
    assert len(runs) == 6
    assert {(r.name, r.target) for r in runs} == {(n, t) for n in EXTREMAL_UNITARIES for t in ("E", "Ebar")}
    # about 4 sigma of the sequence sampling spread at u = 1/3
    for r in runs:
        assert r.fit.s == pytest.approx(r.ideal, abs=0.1)
