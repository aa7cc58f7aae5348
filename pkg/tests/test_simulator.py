import time

import numpy as np
import pytest

from gaterobust.channels import (Channel, classical_cnot, depolarizing, identity_channel, mixture,
                                 noisy_gate_model, one_sided_depolarize, unitary_channel)
from gaterobust.linalg import CNOT, SWAP, DimensionError, haar_unitary
from gaterobust.robustness import threshold_bound_depolarizing
from gaterobust.separability import EntangledInputError
from gaterobust.simulator import (BlochState, BudgetError, Circuit, NonSPGateError, dense_oracle, init_state,
                                  l1_distance, measure, precision_for, run_circuit, screen_gate,
                                  simulate_gate)

from oracles import circuit_distribution


def random_sp_circuit(rng, qubits=3, gates=8):
    c = Circuit(qubits, "".join(rng.choice(["0", "1"], qubits)))
    for _ in range(gates):
        kind = rng.integers(3)
        if kind == 0:
            a, b = rng.choice(qubits, 2, replace=False)
            c.add(classical_cnot(), [a, b], "classical-cnot")
        elif kind == 1:
            a, b = rng.choice(qubits, 2, replace=False)
            side = "A" if rng.random() < 0.5 else "B"
            c.add(one_sided_depolarize(haar_unitary(4, rng), side), [a, b], "one-sided-depolarize")
        else:
            w = rng.random()
            ch = mixture([w, 1 - w], [unitary_channel(haar_unitary(2, rng), (2, 1)),
                                      unitary_channel(haar_unitary(2, rng), (2, 1))])
            c.add(ch, [int(rng.integers(qubits))], "unital-1q")
    return c


def _oracle_gates(c):
    return [(g.channel.kraus, list(g.targets)) for g in c.gates]


def test_init_state_examples():
    assert np.allclose(init_state("0", 8).vectors, [[0, 0, 1]])
    assert np.allclose(init_state("10", 8).vectors, [[0, 0, -1], [0, 0, 1]])
    assert init_state("", 8).qubits == 0
    assert init_state("0110", 5).is_valid()
    with pytest.raises(ValueError):
        init_state("012", 8)


def test_simulate_gate_examples():
    rng = np.random.default_rng(61)
    st = init_state("101", 12)
    out, res = simulate_gate(st, identity_channel((2, 2)), [0, 2], rng)
    assert np.allclose(out.vectors, st.vectors) and res <= 16 * 2.0 ** -12
    out, res = simulate_gate(init_state("10", 12), classical_cnot(), [0, 1], rng)
    assert np.allclose(out.vectors, [[0, 0, -1], [0, 0, -1]]) and res == 0
    seen = set()
    for _ in range(200):
        out, res = simulate_gate(BlochState([[1, 0, 0], [0, 0, 1]], 12), classical_cnot(), [0, 1], rng)
        seen.add(tuple(np.round(out.vectors.ravel(), 12)))
        assert res <= 16 * 2.0 ** -12
    assert seen == {(0, 0, 1, 0, 0, 1), (0, 0, -1, 0, 0, -1)}


def test_simulate_gate_branch_frequencies():
    rng = np.random.default_rng(62)
    n = 4000
    hits = sum(simulate_gate(BlochState([[1, 0, 0], [0, 0, 1]], 12), classical_cnot(), [0, 1], rng)[0].vectors[0, 2] > 0
               for _ in range(n))
    assert abs(hits / n - 0.5) < 3 * np.sqrt(0.25 / n)


def test_simulate_gate_refuses_entangling_output():
    rng = np.random.default_rng(63)
    with pytest.raises(EntangledInputError, match="gate output entangled"):
        simulate_gate(BlochState([[1, 0, 0], [0, 0, 1]], 12), unitary_channel(CNOT), [0, 1], rng)


def test_simulate_gate_single_qubit_and_validity():
    rng = np.random.default_rng(64)
    st = BlochState([[0, 0, 1], [0.5, 0.5, 0]], 10)
    u = haar_unitary(2, rng)
    out, res = simulate_gate(st, unitary_channel(u, (2, 1)), [1], rng)
    assert out.is_valid() and res <= 2.0 ** -10
    assert np.allclose(out.vectors[0], [0, 0, 1])


def test_measure_examples():
    rng = np.random.default_rng(65)
    assert all(measure(BlochState([[0, 0, 1]], 4), [0], rng) == "0" for _ in range(50))
    assert all(measure(BlochState([[0, 0, -1]], 4), [0], rng) == "1" for _ in range(50))
    n = 100_000
    zeros = sum(measure(BlochState([[1, 0, 0]], 4), [0], rng) == "0" for _ in range(n))
    assert abs(zeros / n - 0.5) <= 3 * np.sqrt(0.25 / n)
    with pytest.raises(IndexError):
        measure(BlochState([[1, 0, 0]], 4), [1], rng)


def test_l1_distance_examples():
    assert l1_distance({"0": 0.5, "1": 0.5}, {"0": 0.5, "1": 0.5}) == 0
    assert l1_distance({"0": 1.0}, {"1": 1.0}) == 1
    assert l1_distance([0.5, 0.5], [0.75, 0.25]) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        l1_distance([1.0], [0.5, 0.5])


def test_dense_oracle_examples():
    c = Circuit(3, "101")
    for q in range(3):
        c.add(identity_channel((2, 1)), [q], "identity")
    assert dense_oracle(c) == {"101": 1.0}
    c = Circuit(2, "10").add(classical_cnot(), [0, 1])
    assert dense_oracle(c) == pytest.approx({"11": 1.0})
    with pytest.raises(ValueError):
        dense_oracle(Circuit(11, "0" * 11))


def test_dense_oracle_matches_embedding_oracle():
    rng = np.random.default_rng(66)
    for _ in range(10):
        c = random_sp_circuit(rng, qubits=4, gates=6)
        c.measure = [2, 0, 3]
        ours = dense_oracle(c)
        ref = circuit_distribution(4, c.initial, _oracle_gates(c), c.measure)
        assert l1_distance(ours, ref) < 1e-12


def test_run_circuit_examples():
    c = Circuit(3, "101")
    for q in range(3):
        c.add(identity_channel((2, 1)), [q], "identity")
    r = run_circuit(c, 0.01, seed=1, shots=500)
    assert set(r.samples) == {"101"} and r.error_budget <= 0.01
    ladder = Circuit(5, "10000")
    for q in range(4):
        ladder.add(classical_cnot(), [q, q + 1], "classical-cnot")
    r = run_circuit(ladder, 0.01, seed=2, shots=200)
    assert set(r.samples) == {"11111"}


def test_run_circuit_budget_and_precision():
    rng = np.random.default_rng(67)
    c = random_sp_circuit(rng)
    r = run_circuit(c, 0.01, seed=3, shots=2000)
    assert r.error_budget == pytest.approx(sum(r.per_gate_residuals))
    assert r.error_budget <= 0.01
    assert r.precision_bits >= precision_for(len(c.gates), 0.01)
    assert all(x <= 16 * 2.0 ** -r.precision_bits for x in r.per_gate_residuals)
    assert r.measured_c <= 16


def test_run_circuit_determinism():
    rng = np.random.default_rng(68)
    c = random_sp_circuit(rng)
    a = run_circuit(c, 0.01, seed=42, shots=3000)
    b = run_circuit(c, 0.01, seed=42, shots=3000)
    assert a.samples == b.samples
    d = run_circuit(c, 0.01, seed=43, shots=3000)
    assert a.samples != d.samples


def test_run_circuit_matches_oracle_noisy_mix():
    rng = np.random.default_rng(69)
    c = Circuit(3, "100")
    for _ in range(8):
        if rng.random() < 0.5:
            a, b = rng.choice(3, 2, replace=False)
            c.add(classical_cnot(), [a, b], "classical-cnot")
        else:
            c.add(depolarizing((2, 1), float(rng.random())), [int(rng.integers(3))], "depolarize1")
    shots = 100_000
    r = run_circuit(c, 0.01, seed=5, shots=shots)
    assert l1_distance(r.distribution(), dense_oracle(c)) <= 0.01 + 3 * np.sqrt(0.25 / shots)


def test_run_circuit_generic_route():
    # a gate outside the builtin constructions, accepted by the Choi PPT screen
    raw = Channel(noisy_gate_model(CNOT, 0.8).kraus, (2, 2))
    assert screen_gate(raw) == "ppt"
    c = Circuit(2, "01").add(raw, [0, 1])
    c.add(unitary_channel(haar_unitary(2, np.random.default_rng(70)), (2, 1)), [0])
    c.add(raw, [1, 0])
    shots = 50_000
    r = run_circuit(c, 0.01, seed=6, shots=shots)
    assert l1_distance(r.distribution(), dense_oracle(c)) <= 0.01 + 3 * np.sqrt(0.25 / shots)


def test_screen_examples():
    assert screen_gate(classical_cnot()) == "classical-cnot"
    assert screen_gate(unitary_channel(SWAP)) == "local or swap-composed unitary"
    p = threshold_bound_depolarizing(CNOT)
    assert "threshold" in screen_gate(noisy_gate_model(CNOT, p + 1e-6))
    with pytest.raises(NonSPGateError, match="gate output entangled"):
        screen_gate(unitary_channel(CNOT))
    with pytest.raises(NonSPGateError):
        run_circuit(Circuit(2, "00").add(unitary_channel(CNOT), [0, 1]))


def test_swap_gate_simulates_exactly():
    rng = np.random.default_rng(71)
    u = haar_unitary(2, rng)
    c = Circuit(2, "01").add(unitary_channel(u, (2, 1)), [0]).add(unitary_channel(SWAP), [0, 1])
    r = run_circuit(c, 0.01, seed=1, shots=20_000)
    assert l1_distance(r.distribution(), dense_oracle(c)) <= 0.01 + 3 * np.sqrt(0.25 / 20_000)


def test_circuit_validation():
    with pytest.raises(ValueError):
        Circuit(2, "0")
    with pytest.raises(IndexError):
        Circuit(2, "00").add(classical_cnot(), [0, 2])
    with pytest.raises(ValueError):
        Circuit(2, "00").add(classical_cnot(), [1, 1])
    with pytest.raises(DimensionError):
        Circuit(2, "00").add(classical_cnot(), [0])
    with pytest.raises(ValueError):
        Circuit(2, "00").add(Channel([0.5 * np.eye(4)], (2, 2)), [0, 1])


def test_budget_unattainable(monkeypatch):
    from gaterobust import simulator
    orig = simulator._branches

    def inflated(e, inputs, l, c_hat):
        br = orig(e, inputs, l, c_hat)
        br.residual = 1.0
        return br

    monkeypatch.setattr(simulator, "_branches", inflated)
    c = Circuit(2, "00").add(identity_channel((2, 2)), [0, 1])
    with pytest.raises(BudgetError):
        run_circuit(c, 0.01, seed=0, shots=10)


def test_cost_grows_linearly_in_gate_count():
    rng = np.random.default_rng(72)
    times = []
    for n in (8, 32):
        c = Circuit(3, "000")
        for _ in range(n):
            c.add(depolarizing((2, 1), 0.3), [int(rng.integers(3))], "depolarize1")
        t = time.perf_counter()
        run_circuit(c, 0.01, seed=0, shots=2000)
        times.append(time.perf_counter() - t)
    assert times[1] < 12 * times[0] + 0.5
