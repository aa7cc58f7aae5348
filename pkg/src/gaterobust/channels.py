"""Quantum channels as Kraus lists, plus the noise models used for robustness bounds."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (CNOT, I2, P0, P1, PAULIS, X, DimensionError, NotUnitaryError, as_operator,
                     is_unitary, unitary_schmidt_form)
from .tolerances import DEFAULT


class HypothesisError(ValueError):
    """A theorem's hypothesis does not hold for the given input."""


@dataclass
class Channel:
    kraus: list[np.ndarray]
    dims: tuple[int, int]
    kind: str = "kraus"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        d = self.dims[0] * self.dims[1]
        self.kraus = [np.asarray(k, dtype=complex) for k in self.kraus]
        for k in self.kraus:
            if k.shape != (d, d):
                raise DimensionError(f"Kraus operator shape {k.shape} does not match dims {self.dims}")

    @property
    def dim(self) -> int:
        return self.dims[0] * self.dims[1]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    apply = __call__

    def is_trace_preserving(self, tol: float = DEFAULT.predicate) -> bool:
        s = sum(k.conj().T @ k for k in self.kraus)
        return bool(np.abs(s - np.eye(self.dim)).max() <= tol)

    def is_unital(self, tol: float = DEFAULT.predicate) -> bool:
        s = sum(k @ k.conj().T for k in self.kraus)
        return bool(np.abs(s - np.eye(self.dim)).max() <= tol)

    def is_unitary(self) -> bool:
        return len(self.kraus) == 1 and is_unitary(self.kraus[0])


def weyl_operators(d: int) -> list[np.ndarray]:
    """d^2 unitaries whose uniform conjugation average is the completely depolarizing map."""
    if d == 1:
        return [np.eye(1, dtype=complex)]
    if d == 2:
        return list(PAULIS)
    shift = np.roll(np.eye(d), 1, axis=0).astype(complex)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            for a in range(d) for b in range(d)]


def _dims_of(dims) -> tuple[int, int]:
    dims = tuple(int(d) for d in dims)
    if len(dims) == 1:
        return dims[0], 1
    return dims


def identity_channel(dims) -> Channel:
    dims = _dims_of(dims)
    return Channel([np.eye(dims[0] * dims[1])], dims, kind="identity")


def unitary_channel(u, dims=None) -> Channel:
    op = as_operator(u, dims)
    if not op.is_unitary():
        raise NotUnitaryError("operator is not unitary")
    return Channel([op.entries], op.dims, kind="unitary")


def depolarizing(dims, p: float = 1.0) -> Channel:
    """rho -> (1-p) rho + p tr(rho) I/d, realized as a uniform Weyl/Pauli twirl."""
    dims = _dims_of(dims)
    if not 0 <= p <= 1:
        raise ValueError(f"depolarizing probability {p} outside [0, 1]")
    wa, wb = weyl_operators(dims[0]), weyl_operators(dims[1])
    d = dims[0] * dims[1]
    kraus = [np.sqrt(p) * np.kron(a, b) / d for a in wa for b in wb]
    if p < 1:
        kraus.insert(0, np.sqrt(1 - p) * np.eye(d))
    return Channel(kraus, dims, kind="depolarizing", params={"p": p})


def local_depolarizing(dims, side: int) -> Channel:
    """Completely depolarize subsystem ``side`` (0 = A, 1 = B), leave the other alone."""
    dims = _dims_of(dims)
    w = weyl_operators(dims[side])
    eye = np.eye(dims[1 - side])
    kraus = [np.kron(x, eye) / dims[0] if side == 0 else np.kron(eye, x) / dims[1] for x in w]
    return Channel(kraus, dims, kind="local-depolarizing", params={"side": side})


def compose(e1: Channel, e2: Channel) -> Channel:
    """The channel ``e1 o e2`` (apply e2 first)."""
    if e1.dims != e2.dims:
        raise DimensionError(f"cannot compose channels on {e1.dims} and {e2.dims}")
    kraus = [k1 @ k2 for k1 in e1.kraus for k2 in e2.kraus]
    return Channel(_prune(kraus), e1.dims)


def mixture(weights: Sequence[float], channels: Sequence[Channel]) -> Channel:
    dims = channels[0].dims
    kraus = []
    for w, c in zip(weights, channels):
        if c.dims != dims:
            raise DimensionError("mixture components act on different spaces")
        if w < 0:
            raise ValueError("negative mixture weight")
        if w > 0:
            kraus.extend(np.sqrt(w) * k for k in c.kraus)
    return Channel(kraus, dims)


def _prune(kraus: list[np.ndarray], tol: float = 1e-14) -> list[np.ndarray]:
    out = [k for k in kraus if np.abs(k).max() > tol]
    return out or kraus[:1]


def one_sided_depolarize(u, side: str = "A", dims=None) -> Channel:
    """(D (x) I) o U for side A, (I (x) D) o U for side B.

    The output is always I/d_A (x) tr_A(U rho U^dag) (resp. mirrored), so the
    channel is separability-preserving although not necessarily separable.
    """
    op = as_operator(u, dims)
    if not op.is_unitary():
        raise NotUnitaryError("one-sided depolarization needs a unitary gate")
    s = {"A": 0, "B": 1}[side.upper()]
    dep = local_depolarizing(op.dims, s)
    kraus = [k @ op.entries for k in dep.kraus]
    return Channel(kraus, op.dims, kind="one-sided-depolarize", params={"side": side.upper(), "u": op.entries})


def noisy_gate_model(u, p: float, dims=None) -> Channel:
    """U followed by independent complete depolarization of each qubit with probability p."""
    op = as_operator(u, dims)
    if not op.is_unitary():
        raise NotUnitaryError("noisy gate model needs a unitary gate")
    if not 0 <= p <= 1:
        raise ValueError(f"noise probability {p} outside [0, 1]")
    U = op.entries
    parts = [
        ((1 - p) ** 2, Channel([U], op.dims)),
        (p * (1 - p), one_sided_depolarize(U, "A", op.dims)),
        (p * (1 - p), one_sided_depolarize(U, "B", op.dims)),
        (p ** 2, depolarizing(op.dims)),   # (D (x) D) o U = D (x) D
    ]
    ch = mixture([w for w, _ in parts], [c for _, c in parts])
    ch.kind = "noisy-unitary"
    ch.params = {"u": U, "p": p}
    return ch


def classical_cnot() -> Channel:
    """Measure the control, then conditionally flip the target."""
    return Channel([np.kron(P0, I2), np.kron(P1, X)], (2, 2), kind="classical-cnot")


def worst_noise(u, dims=None, schmidt=None) -> Channel:
    """Noise channel against which a unital-Schmidt gate is least robust.

    Requires a Schmidt decomposition U = sum_j u_j A_j (x) B_j with every factor
    proportional to a unitary. The channel is

        F(rho) = dA dB sum_{k != l} u_k u_l (A_k (x) B_l) rho (A_k (x) B_l)^dag / sum_{k != l} u_k u_l

    The dA dB prefactor makes F trace-preserving for orthonormal factors.
    """
    op = as_operator(u, dims)
    if not op.is_unitary():
        raise NotUnitaryError("worst-case noise is defined for unitary gates")
    dec = schmidt if schmidt is not None else unitary_schmidt_form(op)
    if dec is None:
        raise HypothesisError("no Schmidt decomposition with factors proportional to unitaries")
    dA, dB = op.dims
    c = dec.coeffs
    n = len(c)
    if n < 2:
        raise HypothesisError("gate has a single Schmidt term; no off-diagonal noise exists")
    total = sum(c[k] * c[l] for k in range(n) for l in range(n) if k != l)
    kraus = [np.sqrt(dA * dB * c[k] * c[l] / total) * np.kron(dec.basis_a[k], dec.basis_b[l])
             for k in range(n) for l in range(n) if k != l]
    ch = Channel(kraus, op.dims, kind="worst-noise")
    if not ch.is_trace_preserving(DEFAULT.reconstruction):
        raise HypothesisError("Schmidt factors are not proportional to unitaries")
    return ch


def channel_action_matrix(e: Channel) -> np.ndarray:
    """Matrix of the linear map rho -> e(rho) on the matrix-unit basis (d^2 x d^2)."""
    d = e.dim
    cols = []
    for i in range(d):
        for j in range(d):
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = 1
            cols.append(e(m).reshape(-1))
    return np.array(cols).T


__all__ = [
    "Channel", "HypothesisError", "weyl_operators", "identity_channel", "unitary_channel",
    "depolarizing", "local_depolarizing", "compose", "mixture", "one_sided_depolarize",
    "noisy_gate_model", "classical_cnot", "worst_noise", "channel_action_matrix", "CNOT",
]
