import numpy as np
import pytest

from cupsets import operators as ops
from cupsets.channels import QuantumChannel


@pytest.fixture
def rng():
    return ops.make_rng(12345)


def random_channel(d_in, d_out, rank, rng):
    """Kraus operators cut from the first ``d_in`` columns of a Haar unitary.

    The rank is raised when needed so that the columns fit.
    """
    rank = max(rank, -(-d_in // d_out))
    u = ops.haar_random_unitary(d_out * rank, rng)
    v = u[:, :d_in].reshape(rank, d_out, d_in)
    return QuantumChannel.from_kraus(list(v))


def haar_oracle_unitarity(ch):
    """Exact Haar integral through the second moment of a random pure state.

    E[psi (x) psi] = (1 + F)/(d(d+1)), so E tr[E(psi)^2] = tr[(E x E)(1 + F) F]/(d(d+1)),
    and the centred integrand subtracts tr[E(1/d)^2].
    """
    d, do = ch.d_in, ch.d_out
    flip_in = np.eye(d * d).reshape(d, d, d, d).transpose(0, 1, 3, 2).reshape(d * d, d * d)
    flip_out = np.eye(do * do).reshape(do, do, do, do).transpose(0, 1, 3, 2).reshape(do * do, do * do)
    sym = (np.eye(d * d) + flip_in) / (d * (d + 1))
    out = sum(np.kron(a, b) @ sym @ np.kron(a, b).conj().T for a in ch.kraus for b in ch.kraus)
    second = np.real(np.trace(out @ flip_out))
    centre = sum(k @ k.conj().T for k in ch.kraus) / d
    return d / (d - 1) * (second - np.real(np.trace(centre @ centre)))


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
