"""Channel-state duality on the four-party space R_A A B R_B.

The state of a channel is produced by acting on A B of two maximally
entangled pairs (R_A A) and (B R_B). Subsystem order is always
R_A, A, B, R_B, so the bipartite cut R_A A : B R_B is contiguous.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .channels import Channel
from .linalg import NotUnitaryError, as_operator, partial_trace, schmidt_coefficients
from .separability import ppt_check
from .tolerances import DEFAULT


class NotCompletelyPositiveError(ValueError):
    pass


class MarginalError(ValueError):
    pass


@dataclass
class ChoiState:
    rho: np.ndarray
    dims: tuple[int, int]          # (dA, dB) of the channel
    source_tp: bool = True

    @property
    def four_dims(self) -> list[int]:
        dA, dB = self.dims
        return [dA, dA, dB, dB]

    @property
    def cut(self) -> tuple[int, int]:
        dA, dB = self.dims
        return dA * dA, dB * dB

    def reference_marginal(self) -> np.ndarray:
        return partial_trace(self.rho, self.four_dims, keep=[0, 3])


def max_entangled(d: int) -> np.ndarray:
    if d < 1:
        raise ValueError("dimension must be positive")
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1 / np.sqrt(d)
    return v


def _apply_local(kraus: np.ndarray, dA: int, dB: int) -> np.ndarray:
    """(I (x) K (x) I)|alpha>|beta> as a vector in R_A A B R_B order."""
    # |alpha>|beta> has amplitude delta(ra, a) delta(b, rb) / sqrt(dA dB), so the
    # result is K[(a, b), (ra, rb)] / sqrt(dA dB) rearranged.
    K = kraus.reshape(dA, dB, dA, dB)
    return (K.transpose(2, 0, 1, 3) / np.sqrt(dA * dB)).reshape(-1)


def choi_state(e: Channel, tol: float = DEFAULT.predicate) -> ChoiState:
    dA, dB = e.dims
    D = (dA * dB) ** 2
    rho = np.zeros((D, D), dtype=complex)
    for k in e.kraus:
        v = _apply_local(k, dA, dB)
        rho += np.outer(v, v.conj())
    return ChoiState(rho, (dA, dB), source_tp=e.is_trace_preserving(tol))


def psi_of_unitary(u, dims=None) -> np.ndarray:
    op = as_operator(u, dims)
    if not op.is_unitary():
        raise NotUnitaryError("psi(U) needs a unitary")
    return _apply_local(op.entries, *op.dims)


def choi_from_matrix(rho, dims) -> ChoiState:
    """Wrap a raw R_A A B R_B matrix; trace preservation is read off the marginal."""
    rho = np.asarray(rho, dtype=complex)
    dA, dB = (int(d) for d in dims)
    st = ChoiState(rho, (dA, dB), source_tp=False)
    st.source_tp = bool(np.abs(st.reference_marginal() - np.eye(dA * dB) / (dA * dB)).max()
                        <= DEFAULT.reconstruction)
    return st


def kraus_from_choi(rho: ChoiState, clamp: float = DEFAULT.clamp) -> list[np.ndarray]:
    dA, dB = rho.dims
    w, v = np.linalg.eigh((rho.rho + rho.rho.conj().T) / 2)
    if w.min() < -DEFAULT.predicate:
        raise NotCompletelyPositiveError(f"Choi state has eigenvalue {w.min():.3e}")
    kraus = []
    for lam, vec in zip(w[::-1], v.T[::-1]):
        if lam <= clamp:
            continue
        t = vec.reshape(dA, dA, dB, dB)               # ra, a, b, rb
        K = np.sqrt(lam * dA * dB) * t.transpose(1, 2, 0, 3).reshape(dA * dB, dA * dB)
        kraus.append(K)
    return kraus


def channel_from_choi(rho: ChoiState) -> Channel:
    dA, dB = rho.dims
    marg = rho.reference_marginal()
    if np.abs(marg - np.eye(dA * dB) / (dA * dB)).max() > DEFAULT.reconstruction:
        raise MarginalError("reference marginal is not maximally mixed; source is not trace-preserving")
    return Channel(kraus_from_choi(rho), (dA, dB))


def _product_defect(K: np.ndarray, dims) -> float:
    s = schmidt_coefficients(K, dims)
    return float(np.sum(s[1:] ** 2))


def _rotated(kraus: np.ndarray, params: np.ndarray) -> np.ndarray:
    from scipy.linalg import expm
    r = kraus.shape[0]
    H = np.zeros((r, r), dtype=complex)
    iu = np.triu_indices(r, 1)
    H[np.diag_indices(r)] = params[:r]
    n = len(iu[0])
    H[iu] = params[r:r + n] + 1j * params[r + n:]
    H = H + np.triu(H, 1).conj().T
    W = expm(1j * H)
    return np.tensordot(W, kraus, axes=1)


def certify_separable_kraus(kraus: list[np.ndarray], dims, max_rank: int = 6,
                            restarts: int = 6, rng: np.random.Generator | None = None) -> list[np.ndarray] | None:
    """Try to exhibit product Kraus operators for a channel.

    Product Kraus operators are an explicit separable decomposition of the
    channel's state. The Kraus set is unitarily remixed (which leaves the
    channel unchanged) to minimize operator-Schmidt rank. Returns the product
    Kraus list, or None if none was found.
    """
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    if all(_product_defect(k, dims) <= 1e-18 * max(1.0, np.abs(k).max()) for k in kraus):
        return kraus
    r = len(kraus)
    if r > max_rank:
        return None
    arr = np.array(kraus)
    rng = rng or np.random.default_rng(7)

    def f(p):
        return sum(_product_defect(k, dims) for k in _rotated(arr, p))

    for attempt in range(restarts):
        x0 = rng.normal(scale=1.0, size=r * r) if attempt else np.zeros(r * r)
        res = minimize(f, x0, method="BFGS", options={"gtol": 1e-14, "maxiter": 3000})
        if res.fun < 1e-20:
            return list(_rotated(arr, res.x))
    return None


@dataclass
class SepCharReport:
    marginal_ok: bool
    cut_status: str                # separable | entangled | undecided
    min_pt_eigenvalue: float


def sep_char_check(rho: ChoiState) -> SepCharReport:
    """Is this state the Choi state of a trace-preserving separable operation?

    Needs (a) separability across R_A A : B R_B and (b) a maximally mixed
    R_A R_B marginal.
    """
    dA, dB = rho.dims
    marg = rho.reference_marginal()
    marginal_ok = bool(np.abs(marg - np.eye(dA * dB) / (dA * dB)).max() <= DEFAULT.reconstruction)
    verdict = ppt_check(rho.rho, rho.cut)
    status = verdict.status
    if status == "undecided":
        try:
            if certify_separable_kraus(kraus_from_choi(rho), (dA, dB)) is not None:
                status = "separable"
        except NotCompletelyPositiveError:
            pass
    return SepCharReport(marginal_ok, status, verdict.min_pt_eigenvalue)
