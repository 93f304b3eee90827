import math

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import random_density
from qdcemu.catcomm import LinkEndpoints, build_bell_link
from qdcemu.circuit import COMMUNICATION, ENVIRONMENT, PROCESSING, Circuit, CircuitError
from qdcemu.execute import execute_exact
from qdcemu.noise import (
    NoiseError,
    NoiseParams,
    effective_damping_channel,
    exchange_unitary,
    insert_channel_traversal,
    theta_from_attenuation,
)
from qdcemu.states import MixedState, PureState, apply_kraus, fidelity_with_pure

SP = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
SM = SP.conj().T


def hamiltonian(kappa):
    # system is qubit 0 (least significant), so it is the right kron factor
    return kappa * (np.kron(SM, SP) + np.kron(SP, SM))


def collide_and_trace(rho_sys, theta):
    """Exact 2-qubit evolution with a fresh env, then sum over env basis."""
    u = expm(-1j * hamiltonian(1.0) * theta)
    joint = np.kron(np.diag([1, 0]), rho_sys)
    out = (u @ joint @ u.conj().T).reshape(2, 2, 2, 2)
    return np.einsum("aiaj->ij", out)


@pytest.mark.parametrize("theta", np.linspace(0, math.pi / 2, 9))
def test_exchange_unitary_matches_expm(theta):
    assert np.allclose(exchange_unitary(theta, 1.0).matrix, expm(-1j * hamiltonian(theta)), atol=1e-10)


def test_exchange_unitary_examples():
    assert np.allclose(exchange_unitary(0.0).matrix, np.eye(4))
    u = exchange_unitary(0.5, 1.0).matrix
    out = u @ np.array([0, 1, 0, 0])  # sys=1, env=0
    assert out[1] == pytest.approx(0.87758256189, abs=1e-10)
    assert out[2] == pytest.approx(-0.4794255386j, abs=1e-10)
    full = exchange_unitary(math.pi / 2).matrix @ np.array([0, 1, 0, 0])
    assert np.allclose(full, [0, 0, -1j, 0])


def test_exchange_unitary_range():
    with pytest.raises(NoiseError):
        exchange_unitary(2.0, 1.0)
    with pytest.raises(NoiseError):
        effective_damping_channel(-0.1)


def test_damping_channel_limits():
    one = PureState.from_label("1").to_density()
    assert np.allclose(apply_kraus(one, effective_damping_channel(0.0), [0]).rho, one.rho)
    assert np.allclose(apply_kraus(one, effective_damping_channel(math.pi / 2), [0]).rho, np.diag([1, 0]))


def test_channel_equals_collide_and_trace(rng):
    for theta in np.linspace(0, math.pi / 2, 20):
        ch = effective_damping_channel(theta)
        for _ in range(5):
            rho = random_density(1, rng)
            got = apply_kraus(MixedState(rho), ch, [0]).rho
            assert np.allclose(got, collide_and_trace(rho, theta), atol=1e-10)


def test_theta_from_attenuation_default_fiber():
    theta = theta_from_attenuation(0.0392, 0.01, 1)
    assert math.sin(theta) ** 2 == pytest.approx(1 - math.exp(-3.92e-4), abs=1e-15)
    assert math.sin(theta) ** 2 == pytest.approx(3.9192e-4, abs=1e-8)
    assert theta_from_attenuation(0.0, 0.01, 3) == 0.0
    with pytest.raises(NoiseError):
        theta_from_attenuation(0.0392, 0.01, 0)


@pytest.mark.parametrize("m", [1, 2, 4, 8])
def test_calibration_composes_to_total_loss(m):
    theta = theta_from_attenuation(0.0392, 0.01, m)
    rho = PureState.from_label("1").to_density()
    ch = effective_damping_channel(theta)
    for _ in range(m):
        rho = apply_kraus(rho, ch, [0])
    assert rho.rho[0, 0].real == pytest.approx(-math.expm1(-3.92e-4), abs=1e-12)


def traversal_circuit(params, prep="1"):
    c = Circuit(2, 0, {0: COMMUNICATION, 1: ENVIRONMENT})
    if prep == "1":
        c.x(0)
    insert_channel_traversal(c, 0, 1, params)
    return c


def test_traversal_layout_has_reset_after_every_collision():
    p = NoiseParams(n_coll_T=2, n_coll_F=3)
    insts = traversal_circuit(p, prep="0").instructions
    assert len(insts) == 2 * (2 + 3 + 2)
    tags = [i.tag for i in insts[::2]]
    assert tags == ["transduction"] * 2 + ["fiber"] * 3 + ["transduction"] * 2
    assert all(type(i).__name__ == "Reset" and i.qubit == 1 for i in insts[1::2])


def test_traversal_requires_environment_role():
    c = Circuit(2, 0, {0: COMMUNICATION, 1: PROCESSING})
    with pytest.raises(CircuitError):
        insert_channel_traversal(c, 0, 1, NoiseParams())
    with pytest.raises(CircuitError):
        insert_channel_traversal(c, 1, 1, NoiseParams())


def test_zero_coupling_traversal_is_identity():
    rho = execute_exact(traversal_circuit(NoiseParams.noiseless())).merged([0])
    assert np.allclose(rho.rho, np.diag([0, 1]))


def test_two_transducer_collisions_survival():
    p = NoiseParams(kappa_T=0.5, kappa_F=0.0)
    rho = execute_exact(traversal_circuit(p)).merged([0])
    assert rho.rho[1, 1].real == pytest.approx(math.cos(0.5) ** 4, abs=1e-12)
    assert math.cos(0.5) ** 4 == pytest.approx(0.5932, abs=1e-4)


def test_ground_state_survives_traversal():
    rho = execute_exact(traversal_circuit(NoiseParams(), prep="0")).merged([0])
    assert np.allclose(rho.rho, np.diag([1, 0]), atol=1e-12)


def test_collisions_compose_markovian():
    p = NoiseParams(kappa_T=0.3, n_coll_T=3, n_coll_F=5, kappa_F=0.2)
    rho_in = PureState.from_label("+").to_density()
    expected = rho_in
    thetas = [0.3] * 3 + [0.2] * 5 + [0.3] * 3
    for th in thetas:
        expected = apply_kraus(expected, effective_damping_channel(th), [0])
    c = Circuit(2, 0, {0: COMMUNICATION, 1: ENVIRONMENT})
    c.h(0)
    insert_channel_traversal(c, 0, 1, p)
    got = execute_exact(c).merged([0])
    assert np.allclose(got.rho, expected.rho, atol=1e-10)
    survival = np.prod([math.cos(t) ** 2 for t in thetas])
    assert p.traversal_survival() == pytest.approx(survival, abs=1e-12)


def bell_fidelity(params):
    c = Circuit(3, 0, {0: COMMUNICATION, 1: COMMUNICATION, 2: ENVIRONMENT})
    build_bell_link(c, LinkEndpoints(1, 2, 0, 1, 2), params)
    bell = PureState(np.array([1, 0, 0, 1]) / np.sqrt(2))
    return fidelity_with_pure(execute_exact(c).merged([0, 1]), bell)


@pytest.mark.parametrize(
    "field,values",
    [("kappa_T", [0, 0.1, 0.3, 0.5, 1.0]), ("kappa_F", [0, 0.05, 0.2, 0.6]), ("n_coll_F", [0, 1, 4, 8])],
)
def test_bell_fidelity_monotone_in_noise(field, values):
    base = dict(kappa_T=0.2, kappa_F=0.1)
    fids = [bell_fidelity(NoiseParams(**{**base, field: v})) for v in values]
    assert all(b <= a + 1e-12 for a, b in zip(fids, fids[1:]))


def test_noise_params_validation_and_roundtrip():
    p = NoiseParams(kappa_T=0.4, n_coll_F=2)
    assert NoiseParams.from_dict(p.to_dict()) == p
    with pytest.raises(NoiseError):
        NoiseParams(kappa_T=-1)
    with pytest.raises(NoiseError):
        NoiseParams(kappa_T=2.0)
    with pytest.raises(NoiseError):
        NoiseParams(n_coll_F=-1)
    with pytest.raises(NoiseError):
        NoiseParams.from_dict({"kappa": 1})
    assert NoiseParams(kappa_F=0.25).theta_F == 0.25
