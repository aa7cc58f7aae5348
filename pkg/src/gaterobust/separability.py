"""State separability tests, state robustness and two-qubit product decompositions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .linalg import SWAP, Y, DimensionError, bloch_density, bloch_vector, partial_transpose
from .tolerances import DEFAULT

YY = np.kron(Y, Y).real          # sigma_y (x) sigma_y is real

# Published residual constant for decompose_separable_2q: residual <= C_DECOMPOSE * 2**-l.
C_DECOMPOSE = 16.0


class EntangledInputError(ValueError):
    pass


@dataclass
class SeparabilityVerdict:
    status: str                       # separable | entangled | undecided
    min_pt_eigenvalue: float
    witness_value: float | None = None


@dataclass
class StateRobustness:
    value: float
    exact: bool

    def __float__(self):
        return float(self.value)


def trace_distance(a, b) -> float:
    diff = np.asarray(a) - np.asarray(b)
    diff = (diff + diff.conj().T) / 2
    return float(np.abs(np.linalg.eigvalsh(diff)).sum() / 2)


def _complete_cut(dims) -> bool:
    dA, dB = dims
    return min(dA, dB) == 1 or dA * dB <= 6


def ppt_check(rho, dims: Sequence[int], tol: float = DEFAULT.predicate) -> SeparabilityVerdict:
    """Peres test across the dA:dB cut.

    PPT is sufficient only for 2x2 and 2x3; larger cuts that pass are "undecided".
    The witness value is <phi|rho^{T_B}|phi> for the most negative eigenvector phi,
    i.e. tr(rho W) with W = (|phi><phi|)^{T_B}.
    """
    dims = tuple(int(d) for d in dims)
    pt = partial_transpose(np.asarray(rho), dims, 1)
    pt = (pt + pt.conj().T) / 2
    w, v = np.linalg.eigh(pt)
    lam = float(w[0])
    witness = float(np.real(v[:, 0].conj() @ pt @ v[:, 0]))
    if lam < -tol:
        status = "entangled"
    elif _complete_cut(dims):
        status = "separable"
    else:
        status = "undecided"
    return SeparabilityVerdict(status, lam, witness)


def min_pt_eigenvalue(rho, dims) -> float:
    pt = partial_transpose(np.asarray(rho), dims, 1)
    return float(np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0])


def _is_pure(rho, tol=1e-10) -> bool:
    return abs(np.trace(rho @ rho).real - np.trace(rho).real ** 2) < tol


def relative_robustness_state(rho, sigma, dims: Sequence[int], cap: float = 1e6,
                              iterations: int = 60, tol: float = 1e-13) -> StateRobustness:
    """Smallest t >= 0 with (rho + t sigma)/(1 + t) separable, by bisection on PPT.

    The value is exact on 2x2 / 2x3 cuts and for a pure rho against white noise;
    otherwise it is the PPT boundary, a lower bound on the true robustness.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    dims = tuple(int(d) for d in dims)
    D = dims[0] * dims[1]
    exact = _complete_cut(dims) or (
        _is_pure(rho) and np.abs(sigma - np.eye(D) / D).max() < DEFAULT.predicate)

    def ok(t):
        return min_pt_eigenvalue((rho + t * sigma) / (1 + t), dims) >= -tol

    if ok(0.0):
        return StateRobustness(0.0, exact)
    if not ok(cap):
        return StateRobustness(float("inf"), exact)
    lo, hi = 0.0, cap
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return StateRobustness(hi, exact)


def pure_schmidt(psi, dims: Sequence[int]):
    """Schmidt coefficients and local bases: psi = sum_j s_j U[:, j] (x) Vh[j, :]."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    dA, dB = (int(d) for d in dims)
    if psi.size != dA * dB:
        raise DimensionError(f"state of length {psi.size} does not match dims {dims}")
    U, s, Vh = np.linalg.svd(psi.reshape(dA, dB))
    return s, U, Vh


def _check_normalized(psi):
    n = np.linalg.norm(psi)
    if abs(n - 1) > 1e-8:
        raise ValueError(f"state is not normalized (norm {n:.6g})")


def random_robustness_state(psi, dims: Sequence[int]) -> float:
    """psi_1 psi_2 dA dB from the two largest Schmidt coefficients."""
    _check_normalized(psi)
    s, _, _ = pure_schmidt(psi, dims)
    s2 = s[1] if len(s) > 1 else 0.0
    return float(s[0] * s2 * dims[0] * dims[1])


def robustness_pure(psi, dims: Sequence[int]) -> float:
    """(sum_j psi_j)^2 - 1; equal to both the separable and the global robustness."""
    _check_normalized(psi)
    s, _, _ = pure_schmidt(psi, dims)
    return float(np.sum(s) ** 2 - 1)


def vt_optimal_noise_state(psi, dims: Sequence[int]) -> np.ndarray:
    """Separable state sigma with psi + R(psi) sigma separable, in psi's Schmidt basis."""
    _check_normalized(psi)
    s, U, Vh = pure_schmidt(psi, dims)
    R = float(np.sum(s) ** 2 - 1)
    if R <= 1e-12:
        raise ValueError("product state: robustness is zero and the noise state is undefined")
    dA, dB = (int(d) for d in dims)
    sigma = np.zeros((dA * dB, dA * dB), dtype=complex)
    n = len(s)
    for k in range(n):
        pa = np.outer(U[:, k], U[:, k].conj())
        for l in range(n):
            if k != l and s[k] * s[l] > 0:
                b = Vh[l, :]
                sigma += s[k] * s[l] * np.kron(pa, np.outer(b, b.conj()))
    return sigma / R


def swap_witness_bound(psi, dims: Sequence[int], sigma=None) -> float:
    """Lower bound (sum psi_j)^2 - 1 on any t with psi + t sigma separable.

    Uses the positive operator M = I - SWAP, whose partial transpose is
    I - |alpha><alpha| with |alpha> = sum_j |jj>. The state is first brought
    to Schmidt form by local unitaries (which leave robustness unchanged).
    """
    dA, dB = (int(d) for d in dims)
    if dA != dB:
        raise DimensionError("the SWAP witness needs equal local dimensions")
    _check_normalized(psi)
    s, U, Vh = pure_schmidt(psi, dims)
    L = np.kron(U.conj().T, Vh.conj())
    psi_s = L @ np.asarray(psi, dtype=complex).reshape(-1)
    M = np.eye(dA * dA) - _swap(dA)
    MTA = partial_transpose(M, [dA, dA], 0)
    value = float(-np.real(psi_s.conj() @ MTA @ psi_s))
    if sigma is not None:
        sig = L @ np.asarray(sigma) @ L.conj().T
        if np.real(np.trace(MTA @ sig)) > np.real(np.trace(sig)) + 1e-9:
            raise AssertionError("tr(M^T_A sigma) exceeded tr(sigma)")
    ref = float(np.sum(s) ** 2 - 1)
    if abs(value - ref) > 1e-9:
        raise AssertionError(f"witness bound {value} disagrees with Schmidt formula {ref}")
    return value


def _swap(d: int) -> np.ndarray:
    if d == 2:
        return SWAP.copy()
    S = np.zeros((d * d, d * d))
    for j in range(d):
        for k in range(d):
            S[k * d + j, j * d + k] = 1
    return S


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit state via the spectrum of rho rho~."""
    rho = np.asarray(rho, dtype=complex)
    rt = YY @ rho.conj() @ YY
    ev = np.sqrt(np.abs(np.linalg.eigvals(rho @ rt).real))
    ev = np.sort(ev)[::-1]
    return float(max(0.0, ev[0] - ev[1] - ev[2] - ev[3]))


# ---------------------------------------------------------------- decompositions

@dataclass
class ProductDecomposition:
    probs: np.ndarray                  # (n,)
    bloch_a: np.ndarray                # (n, 3)
    bloch_b: np.ndarray                # (n, 3)
    residual: float = 0.0
    method: str = ""
    precision_bits: int | None = None

    def __len__(self):
        return len(self.probs)

    @property
    def terms(self):
        return list(zip(self.probs, self.bloch_a, self.bloch_b))

    def state(self) -> np.ndarray:
        return sum(p * np.kron(bloch_density(a), bloch_density(b))
                   for p, a, b in zip(self.probs, self.bloch_a, self.bloch_b))


def takagi(A: np.ndarray, tol: float = 1e-13):
    """Takagi factorization A = U diag(s) U^T of a complex symmetric matrix.

    Positive singular values come from the real symmetric embedding
    [[Re A, Im A], [Im A, -Re A]], whose +s eigenvectors [x; y] give columns
    u = x + i y with A conj(u) = s u; zero singular values take the null
    space of conj(A).
    """
    A = (A + A.T) / 2
    n = A.shape[0]
    s_all = np.linalg.svd(A, compute_uv=False)
    scale = max(1.0, s_all[0] if n else 1.0)
    npos = int(np.sum(s_all > tol * scale))
    B = np.block([[A.real, A.imag], [A.imag, -A.real]])
    w, V = np.linalg.eigh(B)
    cols = []
    for idx in range(2 * n - 1, 2 * n - 1 - npos, -1):
        cols.append(V[:n, idx] + 1j * V[n:, idx])
    s = list(w[::-1][:npos])
    if npos < n:
        _, _, Qh = np.linalg.svd(A.conj())
        for vec in Qh[npos:]:
            cols.append(vec.conj())
            s.append(0.0)
    U = np.array(cols).T
    # re-orthonormalize against numerical drift, preserving the column order
    Q, R = np.linalg.qr(U)
    U = Q * (np.diag(R) / np.abs(np.diag(R)))
    return U, np.array(s)


def _closing_phases(s: np.ndarray) -> np.ndarray:
    """Angles phi with sum_i s_i exp(i phi_i) = 0 for s1 >= s2 >= s3 >= s4 >= 0.

    Exists iff s1 <= s2 + s3 + s4 (zero concurrence). Small violations are clamped.
    """
    s1, s2, s3, s4 = s
    phi = np.zeros(4)
    if s1 <= 0:
        return phi
    L = max(s1 - s4, s2 - s3)
    if s4 > 0:
        phi[3] = np.arccos(np.clip((L * L - s1 * s1 - s4 * s4) / (2 * s1 * s4), -1, 1))
    c = s1 + s4 * np.exp(1j * phi[3])
    target = -c
    L = abs(c)
    if s2 <= 0:
        return phi
    if L <= 1e-15:
        phi[1], phi[2] = 0.0, np.pi
        return phi
    alpha = np.arccos(np.clip((L * L + s2 * s2 - s3 * s3) / (2 * L * s2), -1, 1))
    phi[1] = np.angle(target) + alpha
    rest = target - s2 * np.exp(1j * phi[1])
    phi[2] = np.angle(rest) if s3 > 0 else 0.0
    return phi


_HAD4 = np.array([[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]]) / 2.0


def _product_factor(z: np.ndarray):
    """Best product approximation a (x) b of a normalized two-qubit vector."""
    U, _, Vh = np.linalg.svd(z.reshape(2, 2))
    a, b = U[:, 0], Vh[0, :]
    return bloch_vector(np.outer(a, a.conj())), bloch_vector(np.outer(b, b.conj()))


def _wootters_terms(w: np.ndarray, tol: float):
    lam, vec = np.linalg.eigh(w)
    v = vec * np.sqrt(np.clip(lam, 0, None))
    tau = v.T @ YY @ v
    U, s = takagi(tau)
    conc = s[0] - s[1:].sum()
    if conc > tol:
        raise EntangledInputError(f"state is entangled (concurrence {conc:.3e})")
    x = v @ U.conj()
    phi = _closing_phases(s)
    x = x * np.exp(0.5j * phi)
    z = x @ _HAD4.T
    terms = []
    for j in range(4):
        p = float(np.vdot(z[:, j], z[:, j]).real)
        if p > 1e-15:
            a, b = _product_factor(z[:, j] / np.sqrt(p))
            terms.append((p, a, b))
    return terms


def _product_terms(w: np.ndarray):
    ra = w.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3)
    rb = w.reshape(2, 2, 2, 2).trace(axis1=0, axis2=2)
    if np.abs(np.kron(ra, rb) - w).max() < 1e-12:
        return [(1.0, bloch_vector(ra), bloch_vector(rb))]
    return None


def _diagonal_terms(w: np.ndarray):
    if np.abs(w - np.diag(np.diag(w))).max() > 1e-12:
        return None
    basis = {0: (0, 0, 1), 1: (0, 0, -1)}
    d = np.diag(w).real
    return [(float(d[2 * i + j]), np.array(basis[i], float), np.array(basis[j], float))
            for i in (0, 1) for j in (0, 1) if d[2 * i + j] > 1e-15]


def _spectral_terms(w: np.ndarray):
    lam, vec = np.linalg.eigh(w)
    terms = []
    for p, z in zip(lam, vec.T):
        if p <= 1e-15:
            continue
        m = z.reshape(2, 2)
        sv = np.linalg.svd(m, compute_uv=False)
        if sv[1] > 1e-10:
            return None
        a, b = _product_factor(z)
        terms.append((float(p), a, b))
    return terms


def round_bits(x, l: int) -> np.ndarray:
    return np.round(np.asarray(x, dtype=float) * 2.0 ** l) / 2.0 ** l


def round_bloch(s, l: int) -> np.ndarray:
    """Round to l fractional bits while keeping the vector inside the unit ball."""
    s = np.clip(np.asarray(s, dtype=float), -1, 1)
    r = round_bits(s, l)
    if np.dot(r, r) > 1.0:
        r = np.trunc(s * 2.0 ** l) / 2.0 ** l
        while np.dot(r, r) > 1.0:
            r = np.trunc(r * (1 - 2.0 ** -l) * 2.0 ** l) / 2.0 ** l
    return r


def round_probabilities(p, l: int) -> np.ndarray:
    """Round to l bits; the largest entry absorbs the rounding so the sum is exactly 1."""
    p = np.asarray(p, dtype=float)
    p = p / p.sum()
    r = round_bits(p, l)
    k = int(np.argmax(r))
    r[k] = 1.0 - (r.sum() - r[k])
    return r


def _finalize(terms, w, l, method) -> ProductDecomposition:
    probs = np.array([t[0] for t in terms], dtype=float)
    A = np.array([t[1] for t in terms], dtype=float)
    B = np.array([t[2] for t in terms], dtype=float)
    if l is not None:
        probs = round_probabilities(probs, l)
        A = np.array([round_bloch(a, l) for a in A])
        B = np.array([round_bloch(b, l) for b in B])
        keep = probs > 0
        probs, A, B = probs[keep], A[keep], B[keep]
    else:
        probs = probs / probs.sum()
    dec = ProductDecomposition(probs, A, B, method=method, precision_bits=l)
    dec.residual = trace_distance(dec.state(), w)
    return dec


def _fit_terms(w, init_terms, rng, n_terms=16):
    """Least-squares fit of up to 16 product terms (fallback route)."""
    k0 = len(init_terms)
    logits = np.full(n_terms, -6.0)
    va = rng.normal(size=(n_terms, 3))
    vb = rng.normal(size=(n_terms, 3))
    for j, (p, a, b) in enumerate(init_terms[:n_terms]):
        logits[j] = np.log(max(p, 1e-12))
        va[j] = np.arctanh(np.clip(np.linalg.norm(a), 0, 0.999)) * a / max(np.linalg.norm(a), 1e-12)
        vb[j] = np.arctanh(np.clip(np.linalg.norm(b), 0, 0.999)) * b / max(np.linalg.norm(b), 1e-12)
    del k0

    def unpack(x):
        lg = x[:n_terms]
        p = np.exp(lg - lg.max())
        p /= p.sum()
        ua = x[n_terms:4 * n_terms].reshape(n_terms, 3)
        ub = x[4 * n_terms:].reshape(n_terms, 3)
        na = np.linalg.norm(ua, axis=1, keepdims=True) + 1e-300
        nb = np.linalg.norm(ub, axis=1, keepdims=True) + 1e-300
        return p, np.tanh(na) * ua / na, np.tanh(nb) * ub / nb

    def f(x):
        p, a, b = unpack(x)
        m = sum(pj * np.kron(bloch_density(aj), bloch_density(bj)) for pj, aj, bj in zip(p, a, b))
        return float(np.sum(np.abs(m - w) ** 2))

    x0 = np.concatenate([logits, va.ravel(), vb.ravel()])
    res = minimize(f, x0, method="L-BFGS-B", options={"maxiter": 4000, "ftol": 1e-20, "gtol": 1e-14})
    p, a, b = unpack(res.x)
    return [(float(pj), aj, bj) for pj, aj, bj in zip(p, a, b) if pj > 1e-14]


def decompose_separable_2q(w, l: int | None = None, rng: np.random.Generator | None = None,
                           c: float = C_DECOMPOSE, entangled_tol: float = DEFAULT.entangled) -> ProductDecomposition:
    """Write a separable two-qubit state as a mixture of at most 16 product states.

    Routes, first acceptable wins: exact product; computational-basis diagonal;
    spectral decomposition with product eigenvectors; the zero-concurrence
    construction (Takagi-rotate the subnormalized eigenvectors so their
    preconcurrences are diagonal, choose phases that close the polygon of
    the singular values, then mix with a 4x4 Hadamard so every term has zero
    preconcurrence); finally a least-squares fit over 16 product terms.
    Probabilities and Bloch components are rounded to ``l`` bits, and the
    reported residual is the trace distance of the rounded mixture to ``w``.
    """
    w = np.asarray(w, dtype=complex)
    if w.shape != (4, 4):
        raise DimensionError("decompose_separable_2q takes a 4x4 density matrix")
    w = (w + w.conj().T) / 2
    w = w / np.trace(w).real
    if concurrence(w) > entangled_tol:
        raise EntangledInputError(f"gate output entangled (concurrence {concurrence(w):.3e})")
    bound = c * 2.0 ** -l if l is not None else 1e-9
    best = None
    for method, builder in (("product", _product_terms), ("diagonal", _diagonal_terms),
                            ("spectral", _spectral_terms),
                            ("zero-concurrence", lambda m: _wootters_terms(m, entangled_tol))):
        terms = builder(w)
        if not terms:
            continue
        dec = _finalize(terms, w, l, method)
        if best is None or dec.residual < best.residual:
            best = dec
        if dec.residual <= bound:
            return dec
    rng = rng or np.random.default_rng(0)
    init = [(p, a, b) for p, a, b in best.terms] if best is not None else []
    dec = _finalize(_fit_terms(w, init, rng), w, l, "least-squares")
    return dec if best is None or dec.residual < best.residual else best
