"""Classical simulation of qubit circuits built from separability-preserving gates.

Each qubit carries a Bloch vector rounded to ``l`` fractional bits. A two-qubit
gate is simulated by computing its exact output on the current product input,
writing that output as a mixture of product states, and sampling one term.
Shots are simulated together: at every gate, shots that share the same target
input share one decomposition.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import Channel, HypothesisError
from .choi import choi_state
from .linalg import (SWAP, DimensionError, bloch_density, bloch_vector, operator_schmidt,
                     schmidt_coefficients)
from .robustness import threshold_bound_depolarizing
from .separability import (C_DECOMPOSE, EntangledInputError, ProductDecomposition, _finalize,
                           concurrence, decompose_separable_2q, min_pt_eigenvalue, round_bloch,
                           trace_distance)
from .tolerances import DEFAULT

MAX_ORACLE_QUBITS = 10
MAX_TERMS = 16

_SP_KINDS = {"identity", "depolarizing", "local-depolarizing", "one-sided-depolarize", "classical-cnot"}


class NonSPGateError(ValueError):
    """A gate could not be certified separability-preserving."""


class BudgetError(RuntimeError):
    """The error budget stayed above epsilon after every precision escalation."""


@dataclass
class BlochState:
    vectors: np.ndarray                # (q, 3)
    precision_bits: int

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float).reshape(-1, 3)

    @property
    def qubits(self) -> int:
        return len(self.vectors)

    def is_valid(self) -> bool:
        v = self.vectors
        scaled = v * 2.0 ** self.precision_bits
        return bool(np.all(np.abs(v) <= 1)
                    and np.allclose(scaled, np.round(scaled), atol=1e-9)
                    and np.all(np.linalg.norm(v, axis=1) <= 1 + 2.0 ** (2 - self.precision_bits)))

    def density(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for s in self.vectors:
            out = np.kron(out, bloch_density(s))
        return out


@dataclass
class Gate:
    channel: Channel
    targets: tuple[int, ...]
    name: str = "kraus"


@dataclass
class Circuit:
    qubits: int
    initial: str
    gates: list[Gate] = field(default_factory=list)
    measure: list[int] | None = None

    def __post_init__(self):
        if len(self.initial) != self.qubits or set(self.initial) - {"0", "1"}:
            raise ValueError(f"initial string {self.initial!r} does not describe {self.qubits} qubits")
        if self.measure is None:
            self.measure = list(range(self.qubits))
        for q in self.measure:
            if not 0 <= q < self.qubits:
                raise IndexError(f"measured qubit {q} out of range")
        for g in self.gates:
            g.targets = tuple(int(t) for t in g.targets)
            _check_gate(g, self.qubits)

    def add(self, channel: Channel, targets: Sequence[int], name: str = "kraus") -> "Circuit":
        g = Gate(channel, tuple(targets), name)
        _check_gate(g, self.qubits)
        self.gates.append(g)
        return self


def _check_gate(g: Gate, q: int) -> None:
    t = g.targets
    if len(t) not in (1, 2) or len(set(t)) != len(t):
        raise ValueError(f"gate {g.name} needs one or two distinct targets, got {t}")
    if any(not 0 <= x < q for x in t):
        raise IndexError(f"gate {g.name} targets {t} out of range for {q} qubits")
    if g.channel.dim != 2 ** len(t):
        raise DimensionError(f"gate {g.name} acts on dimension {g.channel.dim}, targets {t}")
    if not g.channel.is_trace_preserving():
        raise ValueError(f"gate {g.name} is not trace-preserving")


@dataclass
class SimulationResult:
    samples: list[str]
    error_budget: float
    per_gate_residuals: list[float]
    precision_bits: int
    epsilon: float
    measured_c: float = 0.0
    escalations: int = 0

    def histogram(self) -> dict[str, int]:
        return dict(sorted(Counter(self.samples).items()))

    def distribution(self) -> dict[str, float]:
        n = len(self.samples)
        return {k: v / n for k, v in self.histogram().items()}


def init_state(x: str, l: int) -> BlochState:
    v = np.zeros((len(x), 3))
    for k, bit in enumerate(x):
        if bit not in "01":
            raise ValueError(f"initial string contains {bit!r}")
        v[k, 2] = 1.0 if bit == "0" else -1.0
    return BlochState(v, l)


# ------------------------------------------------------------- gate screening

def _product_factors(e: Channel) -> list[tuple[np.ndarray, np.ndarray]] | None:
    """Kraus operators as (a, b) with K = a (x) b, or None if any has Schmidt rank > 1."""
    cached = e.params.get("_product_factors", False)
    if cached is not False:
        return cached
    out = []
    for K in e.kraus:
        dec = operator_schmidt(K, e.dims)
        if len(dec.coeffs) > 1 and dec.coeffs[1] > 1e-12 * max(1.0, dec.coeffs[0]):
            out = None
            break
        if len(dec.coeffs) == 0:
            continue
        out.append((dec.coeffs[0] * dec.basis_a[0], dec.basis_b[0]))
    e.params["_product_factors"] = out
    return out


def _is_local_or_swapped(u: np.ndarray) -> bool:
    for m in (u, u @ SWAP):
        s = schmidt_coefficients(m, (2, 2))
        if len(s) < 2 or s[1] < 1e-9:
            return True
    return False


def _probe_inputs() -> list[np.ndarray]:
    axes = [np.array(v, float) for v in
            ((0, 0, 1), (0, 0, -1), (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0))]
    return [np.kron(bloch_density(a), bloch_density(b)) for a in axes for b in axes]


def screen_gate(e: Channel) -> str:
    """Certify a gate as separability-preserving; returns the reason it was accepted."""
    if not e.is_trace_preserving():
        raise NonSPGateError("gate is not trace-preserving")
    if e.dim == 2:
        return "single-qubit"
    if e.dims != (2, 2):
        raise DimensionError(f"only qubit gates are simulated, got dims {e.dims}")
    if e.kind in _SP_KINDS:
        return e.kind
    if e.kind == "noisy-unitary":
        try:
            if e.params["p"] >= threshold_bound_depolarizing(e.params["u"]) - 1e-12:
                return "noisy-unitary above threshold"
        except ValueError:
            return "noisy non-entangling unitary"
    if _product_factors(e) is not None:
        return "product Kraus"
    if e.is_unitary() and _is_local_or_swapped(e.kraus[0]):
        return "local or swap-composed unitary"
    ch = choi_state(e)
    if min_pt_eigenvalue(ch.rho, ch.cut) >= -DEFAULT.predicate:
        return "ppt"
    for rho in _probe_inputs():
        c = concurrence(e(rho))
        if c > DEFAULT.entangled:
            raise NonSPGateError(f"gate output entangled (concurrence {c:.3e} on a product input)")
    raise NonSPGateError("gate could not be certified separability-preserving")


# ------------------------------------------------------------- gate simulation

@dataclass
class _Branches:
    probs: np.ndarray          # (n,)
    vectors: np.ndarray        # (n, k, 3)
    residual: float
    method: str

    def sample(self, u: np.ndarray) -> np.ndarray:
        j = np.searchsorted(np.cumsum(self.probs), u, side="right")
        return np.minimum(j, len(self.probs) - 1)


def _single_qubit_branch(e: Channel, s: np.ndarray, l: int) -> _Branches:
    exact = bloch_vector(e(bloch_density(s)))
    r = round_bloch(exact, l)
    return _Branches(np.ones(1), r.reshape(1, 1, 3), float(np.linalg.norm(exact - r)) / 2, "bloch-update")


def _kraus_product_terms(factors, sa, sb):
    ra, rb = bloch_density(sa), bloch_density(sb)
    terms = []
    for a, b in factors:
        ta = a @ ra @ a.conj().T
        tb = b @ rb @ b.conj().T
        pa, pb = np.trace(ta).real, np.trace(tb).real
        if pa * pb > 1e-15:
            terms.append((pa * pb, bloch_vector(ta / pa), bloch_vector(tb / pb)))
    return terms


def _two_qubit_branch(e: Channel, sa: np.ndarray, sb: np.ndarray, l: int, c_hat: float) -> _Branches:
    w = e(np.kron(bloch_density(sa), bloch_density(sb)))
    dec: ProductDecomposition | None = None
    factors = _product_factors(e)
    if factors is not None:
        terms = _kraus_product_terms(factors, sa, sb)
        if 0 < len(terms) <= MAX_TERMS:
            dec = _finalize(terms, w, l, "kraus-product")
    if dec is None or dec.residual > c_hat * 2.0 ** -l:
        try:
            generic = decompose_separable_2q(w, l, rng=np.random.default_rng(0), c=c_hat)
        except EntangledInputError:
            if dec is None:
                raise
        else:
            if dec is None or generic.residual < dec.residual:
                dec = generic
    vecs = np.stack([dec.bloch_a, dec.bloch_b], axis=1)
    return _Branches(dec.probs, vecs, dec.residual, dec.method)


def _branches(e: Channel, inputs: np.ndarray, l: int, c_hat: float) -> _Branches:
    if inputs.shape[0] == 1:
        return _single_qubit_branch(e, inputs[0], l)
    return _two_qubit_branch(e, inputs[0], inputs[1], l, c_hat)


def simulate_gate(state: BlochState, e: Channel, targets: Sequence[int], rng: np.random.Generator,
                  c_hat: float = C_DECOMPOSE) -> tuple[BlochState, float]:
    targets = list(targets)
    _check_gate(Gate(e, tuple(targets)), state.qubits)
    br = _branches(e, state.vectors[targets], state.precision_bits, c_hat)
    j = int(br.sample(np.array([rng.random()]))[0])
    v = state.vectors.copy()
    v[targets] = br.vectors[j]
    return BlochState(v, state.precision_bits), br.residual


def measure(state: BlochState, s: Sequence[int], rng: np.random.Generator) -> str:
    out = []
    for k in s:
        if not 0 <= k < state.qubits:
            raise IndexError(f"qubit {k} out of range")
        p0 = (1 + state.vectors[k, 2]) / 2
        out.append("0" if rng.random() < p0 else "1")
    return "".join(out)


# ------------------------------------------------------------- batched engine

def _stream(seed: int, counter: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(counter,)))


def _run_once(c: Circuit, l: int, seed: int, shots: int, c_hat: float):
    state = np.tile(init_state(c.initial, l).vectors, (shots, 1, 1))
    residuals = []
    for gi, g in enumerate(c.gates):
        t = list(g.targets)
        keys = state[:, t, :].reshape(shots, -1)
        uniq, inv = np.unique(keys, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        u = _stream(seed, gi).random(shots)
        order = np.argsort(inv, kind="stable")
        groups = np.split(order, np.cumsum(np.bincount(inv, minlength=len(uniq)))[:-1])
        worst = 0.0
        for row, idx in zip(uniq, groups):
            br = _branches(g.channel, row.reshape(len(t), 3), l, c_hat)
            worst = max(worst, br.residual)
            j = br.sample(u[idx])
            for pos, q in enumerate(t):
                state[idx, q] = br.vectors[j, pos]
        residuals.append(worst)
    return state, residuals


def _sample_bits(state: np.ndarray, measure_set: Sequence[int], rng: np.random.Generator) -> list[str]:
    shots, m = state.shape[0], len(measure_set)
    if m == 0:
        return [""] * shots
    p0 = (1 + state[:, list(measure_set), 2]) / 2
    bits = rng.random((shots, m)) >= p0
    chars = np.where(bits, ord("1"), ord("0")).astype(np.uint8)
    return [b.decode() for b in np.ascontiguousarray(chars).view(f"S{m}").ravel()]


def precision_for(gates: int, epsilon: float, c_hat: float = C_DECOMPOSE) -> int:
    return max(1, math.ceil(math.log2(c_hat * max(gates, 1) / epsilon)))


def run_circuit(c: Circuit, epsilon: float = 0.01, seed: int = 0, shots: int = 1,
                c_hat: float = C_DECOMPOSE, max_escalations: int = 3) -> SimulationResult:
    """Sample ``shots`` outcomes; each shot replays the stochastic gate procedure."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if shots < 1:
        raise ValueError("shots must be positive")
    for g in c.gates:
        screen_gate(g.channel)
    l = precision_for(len(c.gates), epsilon, c_hat)
    for attempt in range(max_escalations + 1):
        state, residuals = _run_once(c, l, seed, shots, c_hat)
        budget = float(sum(residuals))
        if budget <= epsilon:
            samples = _sample_bits(state, c.measure, _stream(seed, len(c.gates)))
            measured = max(residuals, default=0.0) * 2.0 ** l
            return SimulationResult(samples, budget, residuals, l, epsilon, measured, attempt)
        l += 2
    raise BudgetError(f"error budget {budget:.3e} exceeds epsilon {epsilon} at l = {l - 2}")


# ------------------------------------------------------------- oracle

def _apply_local(rho: np.ndarray, K: np.ndarray, targets: Sequence[int], q: int) -> np.ndarray:
    k = len(targets)
    T = rho.reshape([2] * (2 * q))
    Kt = K.reshape([2] * (2 * k))
    out = np.tensordot(Kt, T, axes=(list(range(k, 2 * k)), list(targets)))
    out = np.moveaxis(out, list(range(k)), list(targets))
    cols = [q + t for t in targets]
    out = np.tensordot(out, Kt.conj(), axes=(cols, list(range(k, 2 * k))))
    out = np.moveaxis(out, list(range(2 * q - k, 2 * q)), cols)
    return out.reshape(rho.shape)


def dense_oracle(c: Circuit) -> dict[str, float]:
    """Exact outcome distribution on the measured qubits from full density-matrix evolution."""
    q = c.qubits
    if q > MAX_ORACLE_QUBITS:
        raise ValueError(f"dense oracle limited to {MAX_ORACLE_QUBITS} qubits")
    rho = np.zeros((2 ** q, 2 ** q), dtype=complex)
    idx = int(c.initial, 2) if q else 0
    rho[idx, idx] = 1
    for g in c.gates:
        rho = sum(_apply_local(rho, K, g.targets, q) for K in g.channel.kraus)
    probs = np.clip(np.diag(rho).real, 0, None).reshape([2] * q) if q else np.ones(())
    drop = tuple(k for k in range(q) if k not in c.measure)
    marg = probs.sum(axis=drop) if drop else probs
    kept = sorted(c.measure)
    marg = np.transpose(marg, [kept.index(k) for k in c.measure]) if c.measure else marg
    m = len(c.measure)
    out = {}
    for i, p in enumerate(np.ravel(marg)):
        if p > 1e-15:
            out[format(i, f"0{m}b") if m else ""] = float(p)
    return out


def l1_distance(p, q) -> float:
    """Half the l1 norm of the difference; accepts dicts keyed by outcome or aligned arrays."""
    if isinstance(p, dict) or isinstance(q, dict):
        keys = set(p) | set(q)
        return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
    p, q = np.asarray(p, float), np.asarray(q, float)
    if p.shape != q.shape:
        raise ValueError("distributions live on different outcome spaces")
    return float(0.5 * np.abs(p - q).sum())


__all__ = [
    "BlochState", "Gate", "Circuit", "SimulationResult", "NonSPGateError", "BudgetError",
    "init_state", "screen_gate", "simulate_gate", "measure", "run_circuit", "precision_for",
    "dense_oracle", "l1_distance", "trace_distance", "HypothesisError",
]
