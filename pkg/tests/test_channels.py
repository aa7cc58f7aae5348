import numpy as np
import pytest

from gaterobust.channels import (Channel, HypothesisError, channel_action_matrix, classical_cnot, compose,
                                 depolarizing, identity_channel, mixture, noisy_gate_model,
                                 one_sided_depolarize, unitary_channel, weyl_operators, worst_noise)
from gaterobust.choi import choi_state
from gaterobust.linalg import CNOT, I2, SWAP, X, Y, Z, DimensionError, NotUnitaryError, haar_unitary, random_density
from gaterobust.separability import min_pt_eigenvalue


def _basis_inputs(d=4):
    out = []
    for i in range(d):
        for j in range(d):
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = 1
            out.append(m)
    return out


def test_weyl_twirl_is_depolarizing():
    rng = np.random.default_rng(21)
    for d in (2, 3, 4):
        rho = random_density(d, rng)
        avg = sum(w @ rho @ w.conj().T for w in weyl_operators(d)) / d ** 2
        assert np.allclose(avg, np.eye(d) / d)


def test_depolarizing_examples():
    rng = np.random.default_rng(22)
    D = depolarizing((2, 2))
    assert np.allclose(D(np.diag([1, 0, 0, 0]).astype(complex)), np.eye(4) / 4)
    assert np.allclose(D(random_density(4, rng)), np.eye(4) / 4)
    assert D.is_unital() and D.is_trace_preserving()
    assert np.allclose(depolarizing((2, 3))(random_density(6, rng)), np.eye(6) / 6)
    with pytest.raises(ValueError):
        depolarizing((2, 2), 1.5)


def test_compose_examples():
    rng = np.random.default_rng(23)
    e = noisy_gate_model(haar_unitary(4, rng), 0.2)
    rho = random_density(4, rng)
    assert np.allclose(compose(identity_channel((2, 2)), e)(rho), e(rho))
    assert np.allclose(compose(depolarizing((2, 2)), e)(rho), np.eye(4) / 4)
    assert np.allclose(compose(e, depolarizing((2, 2)))(rho), e(np.eye(4) / 4))
    u = haar_unitary(4, rng)
    assert np.allclose(compose(unitary_channel(u), unitary_channel(u.conj().T))(rho), rho)
    f = noisy_gate_model(haar_unitary(4, rng), 0.5)
    assert np.allclose(compose(e, f)(rho), e(f(rho)), atol=1e-10)
    with pytest.raises(DimensionError):
        compose(e, depolarizing((2, 3)))


def test_noisy_gate_model_examples():
    rng = np.random.default_rng(24)
    u = haar_unitary(4, rng)
    rho = random_density(4, rng)
    assert np.allclose(noisy_gate_model(u, 0)(rho), u @ rho @ u.conj().T)
    assert np.allclose(noisy_gate_model(u, 1)(rho), np.eye(4) / 4)
    out = noisy_gate_model(CNOT, 0.5)(np.diag([0, 0, 1, 0]).astype(complex))
    assert np.allclose(out, np.diag([1, 3, 3, 9]) / 16)
    for p in (0.1, 0.37, 0.9):
        assert noisy_gate_model(u, p).is_trace_preserving()
    with pytest.raises(ValueError):
        noisy_gate_model(u, -0.1)
    with pytest.raises(NotUnitaryError):
        noisy_gate_model(2 * u, 0.1)


def test_noisy_gate_model_linear_in_terms():
    rng = np.random.default_rng(25)
    u = haar_unitary(4, rng)
    rho = random_density(4, rng)
    p = 0.3
    expected = ((1 - p) ** 2 * u @ rho @ u.conj().T
                + p * (1 - p) * one_sided_depolarize(u, "A")(rho)
                + p * (1 - p) * one_sided_depolarize(u, "B")(rho)
                + p ** 2 * np.eye(4) / 4)
    assert np.allclose(noisy_gate_model(u, p)(rho), expected)


def test_classical_cnot_examples():
    F = classical_cnot()
    assert np.allclose(F(np.diag([0, 0, 1, 0]).astype(complex)), np.diag([0, 0, 0, 1]))
    plus0 = np.kron(np.array([1, 1]) / np.sqrt(2), [1, 0])
    assert np.allclose(F(np.outer(plus0, plus0)), np.diag([0.5, 0, 0, 0.5]))
    st = choi_state(F)
    assert min_pt_eigenvalue(st.rho, st.cut) > -1e-12


def test_one_sided_depolarize_examples():
    rng = np.random.default_rng(26)
    e = one_sided_depolarize(np.eye(4), "A")
    assert np.allclose(e(np.diag([1, 0, 0, 0]).astype(complex)), np.kron(I2 / 2, np.diag([1, 0])))
    plus0 = np.kron(np.array([1, 1]) / np.sqrt(2), [1, 0])
    assert np.allclose(one_sided_depolarize(CNOT, "A")(np.outer(plus0, plus0)), np.eye(4) / 4)
    for _ in range(50):
        u = haar_unitary(4, rng)
        side = "A" if rng.random() < 0.5 else "B"
        out = one_sided_depolarize(u, side)(random_density(4, rng))
        assert min_pt_eigenvalue(out, (2, 2)) > -1e-12


def test_worst_noise_swap_is_uniform_pauli_pairs():
    F = worst_noise(SWAP)
    assert len(F.kraus) == 12 and F.is_trace_preserving()
    paulis = [I2, X, Y, Z]
    expected = Channel([np.kron(paulis[k], paulis[l]) / np.sqrt(12)
                        for k in range(4) for l in range(4) if k != l], (2, 2))
    assert np.allclose(channel_action_matrix(F), channel_action_matrix(expected), atol=1e-8)


def test_worst_noise_matches_optimal_noise_state():
    # the optimal noise state of psi(U) is written in the Schmidt basis that the
    # unitary-proportional factors induce; degenerate coefficients make that basis non-unique
    from gaterobust.robustness import worst_noise_choi_matches
    rng = np.random.default_rng(27)
    local = np.kron(haar_unitary(2, rng), haar_unitary(2, rng))
    for u in (CNOT, SWAP, local @ CNOT):
        assert worst_noise_choi_matches(u) < 1e-8


def test_worst_noise_identity_raises():
    with pytest.raises(HypothesisError):
        worst_noise(np.eye(4))


def test_worst_noise_cnot_is_unital_and_tp():
    F = worst_noise(CNOT)
    assert F.is_trace_preserving() and F.is_unital()
    assert len(F.kraus) == 2


def test_unital_and_tp_flags():
    F = classical_cnot()
    assert F.is_trace_preserving() and F.is_unital()
    amp = Channel([np.kron(np.array([[1, 0], [0, np.sqrt(0.5)]]), I2),
                   np.kron(np.array([[0, np.sqrt(0.5)], [0, 0]]), I2)], (2, 2))
    assert amp.is_trace_preserving() and not amp.is_unital()
    with pytest.raises(DimensionError):
        Channel([np.eye(3)], (2, 2))
