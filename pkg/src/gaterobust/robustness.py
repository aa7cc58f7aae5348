"""Gate robustness measures, threshold upper bounds and mixing feasibility."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import Channel, HypothesisError, compose, depolarizing, weyl_operators, worst_noise
from .choi import (ChoiState, certify_separable_kraus, channel_from_choi, choi_from_matrix,
                   choi_state, psi_of_unitary)
from .linalg import (NotUnitaryError, as_operator, haar_unitary, operator_norm, schmidt_coefficients,
                     unitary_schmidt_form)
from .separability import min_pt_eigenvalue, relative_robustness_state, vt_optimal_noise_state
from .tolerances import DEFAULT


@dataclass
class RobustnessReport:
    value: float
    kind: str                          # random | separable | global | relative
    exact: bool
    noise_witness: Channel | None = None
    threshold_bound: float | None = None

    def as_dict(self) -> dict:
        out = {"value": self.value, "kind": self.kind, "exact": self.exact,
               "bound": self.threshold_bound}
        if self.noise_witness is not None:
            out["witness"] = {"dims": list(self.noise_witness.dims),
                              "kraus_count": len(self.noise_witness.kraus)}
        return out


def _unitary(u, dims=None):
    op = as_operator(u, dims)
    if not op.is_unitary():
        raise NotUnitaryError("operator is not unitary")
    return op


def relative_robustness_gate(e: Channel, f: Channel) -> RobustnessReport:
    """R(E||F): robustness of the Choi state of E against that of F across R_A A : B R_B."""
    if e.dims != f.dims:
        raise ValueError("channels act on different spaces")
    if certify_separable_kraus(e.kraus, e.dims, max_rank=0) is not None:
        return RobustnessReport(0.0, "relative", True)
    ce, cf = choi_state(e), choi_state(f)
    r = relative_robustness_state(ce.rho, cf.rho, ce.cut)
    return RobustnessReport(r.value, "relative", r.exact)


def random_robustness_unitary(u, dims=None) -> RobustnessReport:
    """dA dB u_1 u_2 from the two largest operator-Schmidt coefficients."""
    op = _unitary(u, dims)
    s = schmidt_coefficients(op)
    dA, dB = op.dims
    value = float(dA * dB * s[0] * (s[1] if len(s) > 1 else 0.0))
    if value < 1e-12:
        value = 0.0
    return RobustnessReport(value, "random", True, threshold_bound=value / (1 + value))


def random_robustness_channel(e: Channel) -> RobustnessReport:
    """Exact for unitary channels, PPT lower bound otherwise."""
    if e.is_unitary():
        return random_robustness_unitary(e.kraus[0], e.dims)
    rep = relative_robustness_gate(e, depolarizing(e.dims))
    rep.kind = "random"
    return rep


def random_robustness_max(dims: Sequence[int]) -> float:
    dA, dB = dims
    return dA * dA * dB * dB / 2


def c_r(value: float) -> float:
    return math.log1p(value)


@dataclass
class ChainingResult:
    bound: float
    lhs: float
    lhs_exact: bool
    cr_sum: float
    cr_composed: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.bound + 1e-6


def chaining_bound(e1: Channel, e2: Channel) -> ChainingResult:
    """R_r(E1 o E2) against R_r(E1) + R_r(E2) + R_r(E1) R_r(E2); E1 must be unital."""
    if not (e1.is_trace_preserving() and e1.is_unital()):
        raise HypothesisError("first channel must be trace-preserving and unital")
    if not e2.is_trace_preserving():
        raise HypothesisError("second channel must be trace-preserving")
    r1 = random_robustness_channel(e1).value
    r2 = random_robustness_channel(e2).value
    comp = compose(e1, e2)
    if e1.is_unitary() and e2.is_unitary():
        comp_rep = random_robustness_unitary(e1.kraus[0] @ e2.kraus[0], e1.dims)
    else:
        comp_rep = random_robustness_channel(comp)
    bound = r1 + r2 + r1 * r2
    return ChainingResult(bound, comp_rep.value, comp_rep.exact, c_r(r1) + c_r(r2), c_r(comp_rep.value))


def continuity_bound_random_robustness(u, v, dims=None) -> tuple[float, float]:
    """|R_r(U) - R_r(V)| and d_M dA^3 dB^3 ||U - V||^2.

    The quadratic right-hand side is not a valid bound for nearby gates: the
    left side shrinks linearly in ||U - V||. Use ``continuity_bound_linear``
    for a bound that holds at every distance.
    """
    U, V = _unitary(u, dims), _unitary(v, dims)
    if U.dims != V.dims:
        raise ValueError("operators act on different spaces")
    dA, dB = U.dims
    lhs = abs(random_robustness_unitary(U).value - random_robustness_unitary(V).value)
    rhs = min(dA, dB) * dA ** 3 * dB ** 3 * operator_norm(U.entries - V.entries) ** 2
    return lhs, rhs


def continuity_bound_linear(u, v, dims=None) -> tuple[float, float]:
    """|R_r(U) - R_r(V)| and d_M (dA dB)^{5/2} ||U - V||.

    From |R_r(U) - R_r(V)| <= dA^2 dB^2 sum_j |u_j - v_j|, Cauchy-Schwarz over
    the d_M^2 coefficients, and sum_j (u_j - v_j)^2 <= dA dB ||U - V||^2.
    """
    U, V = _unitary(u, dims), _unitary(v, dims)
    if U.dims != V.dims:
        raise ValueError("operators act on different spaces")
    dA, dB = U.dims
    lhs = abs(random_robustness_unitary(U).value - random_robustness_unitary(V).value)
    rhs = min(dA, dB) * (dA * dB) ** 2.5 * operator_norm(U.entries - V.entries)
    return lhs, rhs


def unital_schmidt_robustness(u, dims=None) -> RobustnessReport:
    """Global = separable robustness (sum_j u_j)^2 / (dA dB) - 1 for unital-Schmidt gates.

    Requires a Schmidt decomposition whose factors are all proportional to
    unitaries. The worst-case noise channel is returned as the witness and
    the separability of U + R F is checked through the PPT test on the Choi
    states (exact on qubits for this construction, since the Choi state of
    F equals the optimal noise state of psi(U)).
    """
    op = _unitary(u, dims)
    dec = unitary_schmidt_form(op)
    if dec is None:
        raise HypothesisError("no Schmidt decomposition with factors proportional to unitaries")
    dA, dB = op.dims
    value = float(np.sum(dec.coeffs) ** 2 / (dA * dB) - 1)
    if value < 1e-12:
        return RobustnessReport(0.0, "global", True, threshold_bound=0.0)
    F = worst_noise(op, schmidt=dec)
    cu, cf = choi_state(Channel([op.entries], op.dims)), choi_state(F)
    if min_pt_eigenvalue((cu.rho + value * cf.rho) / (1 + value), cu.cut) < -DEFAULT.predicate:
        raise AssertionError("U + R F failed the PPT test")
    return RobustnessReport(value, "global", True, noise_witness=F, threshold_bound=value / (1 + value))


def threshold_bound_depolarizing(u, dims=None) -> float:
    """Noise level p above which independent depolarization makes the gate set simulable.

    Solves p^2 / (1 - p)^2 = R_r(U): p = (R - sqrt R)/(R - 1), equal to
    sqrt R / (1 + sqrt R), which is also the value used at R = 1.
    """
    R = random_robustness_unitary(u, dims).value
    if R <= 0:
        raise ValueError("gate is not entangling; no threshold bound")
    if abs(R - 1) < 1e-12:
        return 0.5
    return (R - math.sqrt(R)) / (R - 1)


@dataclass
class ThresholdBound:
    value: float
    robustness: float
    source: str          # unital-schmidt | random-fallback | depolarize-all


def threshold_bound_general(u, dims=None) -> ThresholdBound:
    """p_th <= R_g/(1 + R_g); falls back to R_r (depolarizing is one admissible noise)."""
    op = _unitary(u, dims)
    try:
        rep = unital_schmidt_robustness(op)
        R, src = rep.value, "unital-schmidt"
    except HypothesisError:
        R, src = random_robustness_unitary(op).value, "random-fallback"
    if R <= 0:
        raise HypothesisError("gate is not entangling; no threshold bound")
    return ThresholdBound(R / (1 + R), R, src)


def threshold_bound_all_gates(dims: Sequence[int] = (2, 2)) -> ThresholdBound:
    """With every gate available the worst noise is depolarizing: R = dA^2 dB^2 / 2."""
    R = random_robustness_max(dims)
    return ThresholdBound(R / (1 + R), R, "depolarize-all")


@dataclass
class MaxRobustnessCheck:
    analytic_max: float
    max_depolarizing: float              # max over sampled U of R(U||D)
    max_against_e: float                 # max over sampled U of R(U||E) (PPT lower bounds)
    averaged_violations: int             # sampled U with R(U||D) > mean_k R(V_k^dag U||E)
    trials: int

    @property
    def holds(self) -> bool:
        return self.max_depolarizing <= self.max_against_e + 1e-6


def max_robustness_depolarizing_theorem_check(e: Channel, trials: int, rng: np.random.Generator,
                                              include: Sequence[np.ndarray] = ()) -> MaxRobustnessCheck:
    """Sample unitaries and compare robustness against D with robustness against E.

    Per sample it also checks R(U||D) <= mean_k R(V_k^dag U||E) over the local
    Pauli/Weyl products V_k that make up D. The right-hand side uses PPT
    boundary values, which only underestimate R(.||E), so a reported
    violation is inconclusive rather than a refutation.
    """
    if not e.is_trace_preserving():
        raise HypothesisError("noise channel must be trace-preserving")
    dA, dB = e.dims
    us = list(include) + [haar_unitary(dA * dB, rng) for _ in range(trials)]
    locals_ = [np.kron(a, b) for a in weyl_operators(dA) for b in weyl_operators(dB)]
    ce = choi_state(e).rho
    cut = (dA * dA, dB * dB)
    max_d, max_e, violations = 0.0, 0.0, 0
    for U in us:
        rd = random_robustness_unitary(U, (dA, dB)).value
        vals = []
        for V in locals_:
            W = V.conj().T @ U
            psi = psi_of_unitary(W, (dA, dB))
            vals.append(relative_robustness_state(np.outer(psi, psi.conj()), ce, cut).value)
        max_d = max(max_d, rd)
        max_e = max(max_e, max(vals))
        if rd > float(np.mean(vals)) + 1e-6:
            violations += 1
    return MaxRobustnessCheck(random_robustness_max((dA, dB)), max_d, max_e, violations, len(us))


def mixing_feasibility(rho, sigma, cutoff: float = DEFAULT.clamp, support_tol: float = 1e-9) -> float:
    """Largest p with rho = p sigma + (1 - p) tau for a density matrix tau.

    p = 1/lambda_max(rho^{-1} sigma) on the support of rho, and 0 when sigma
    leaves that support.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    supp = w > cutoff
    Vs, Vn = v[:, supp], v[:, ~supp]
    if Vn.shape[1] and np.abs(Vn.conj().T @ sigma @ Vn).max() > support_tol:
        return 0.0
    s_half = Vs / np.sqrt(w[supp])
    m = s_half.conj().T @ sigma @ s_half
    lam = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[-1])
    if lam <= 0:
        return 1.0
    return min(1.0, 1.0 / lam)


def mixture_remainder(rho, sigma, p: float) -> np.ndarray:
    """tau = (rho - p sigma)/(1 - p)."""
    return (np.asarray(rho) - p * np.asarray(sigma)) / (1 - p)


@dataclass
class ChannelMixing:
    p: float
    remainder: Channel | None


def mixing_feasibility_channels(e: Channel, f: Channel) -> ChannelMixing:
    """Largest p with E = p F + (1 - p) G for a trace-preserving G, with G rebuilt."""
    if not (e.is_trace_preserving() and f.is_trace_preserving()):
        raise HypothesisError("both channels must be trace-preserving")
    ce, cf = choi_state(e), choi_state(f)
    p = mixing_feasibility(ce.rho, cf.rho)
    if p >= 1 - 1e-12:
        return ChannelMixing(1.0, None)
    tau = mixture_remainder(ce.rho, cf.rho, p)
    # clear the negative rounding left on the boundary eigenvector
    wv, vv = np.linalg.eigh((tau + tau.conj().T) / 2)
    tau = (vv * np.clip(wv, 0, None)) @ vv.conj().T
    G = channel_from_choi(choi_from_matrix(tau, e.dims))
    if not G.is_trace_preserving(DEFAULT.reconstruction):
        raise AssertionError("reconstructed remainder is not trace-preserving")
    return ChannelMixing(p, G)


def worst_noise_choi_matches(u, dims=None) -> float:
    """Max deviation between the worst-noise Choi state and the optimal noise state of psi(U)."""
    op = _unitary(u, dims)
    dec = unitary_schmidt_form(op)
    F = worst_noise(op, schmidt=dec)
    dA, dB = op.dims
    sigma = _vt_in_basis(op, dec)
    return float(np.abs(choi_state(F).rho - sigma).max())


def _vt_in_basis(op, dec) -> np.ndarray:
    """Optimal noise state of psi(U) written in the Schmidt basis induced by ``dec``."""
    from .choi import _apply_local
    dA, dB = op.dims
    n = len(dec.coeffs)
    s = dec.coeffs / np.sqrt(dA * dB)
    R = float(np.sum(s) ** 2 - 1)
    # |k> = sqrt(dA)(I (x) A_k)|alpha>, |l> = sqrt(dB)(B_l (x) I)|beta>
    ka = [np.sqrt(dA) * np.kron(np.eye(dA), a) @ _max_ent(dA) for a in dec.basis_a]
    lb = [np.sqrt(dB) * np.kron(b, np.eye(dB)) @ _max_ent(dB) for b in dec.basis_b]
    sigma = sum(s[k] * s[l] * np.kron(np.outer(ka[k], ka[k].conj()), np.outer(lb[l], lb[l].conj()))
                for k in range(n) for l in range(n) if k != l)
    return sigma / R


def _max_ent(d):
    from .choi import max_entangled
    return max_entangled(d)


__all__ = [
    "RobustnessReport", "relative_robustness_gate", "random_robustness_unitary",
    "random_robustness_channel", "random_robustness_max", "c_r", "chaining_bound",
    "continuity_bound_random_robustness", "continuity_bound_linear", "unital_schmidt_robustness",
    "threshold_bound_depolarizing", "threshold_bound_general", "threshold_bound_all_gates",
    "max_robustness_depolarizing_theorem_check", "mixing_feasibility", "mixture_remainder",
    "mixing_feasibility_channels", "worst_noise_choi_matches", "vt_optimal_noise_state",
    "ChoiState",
]
