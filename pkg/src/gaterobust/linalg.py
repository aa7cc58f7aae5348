"""Bipartite operator algebra and the operator-Schmidt decomposition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from .tolerances import DEFAULT

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)

P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)
CNOT = np.kron(P0, I2) + np.kron(P1, X)
SWAP = np.eye(4, dtype=complex)[[0, 2, 1, 3]]


class DimensionError(ValueError):
    pass


class NotUnitaryError(ValueError):
    pass


@dataclass(frozen=True)
class Operator:
    """A square matrix on a bipartite space with local dimensions ``dims``."""

    entries: np.ndarray
    dims: tuple[int, int]

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        d = int(np.prod(self.dims))
        if m.shape != (d, d):
            raise DimensionError(f"matrix shape {m.shape} does not match dims {self.dims}")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "dims", tuple(int(x) for x in self.dims))

    @property
    def dA(self) -> int:
        return self.dims[0]

    @property
    def dB(self) -> int:
        return self.dims[1]

    def is_unitary(self, tol: float = DEFAULT.predicate) -> bool:
        return is_unitary(self.entries, tol)

    def is_hermitian(self, tol: float = DEFAULT.predicate) -> bool:
        return bool(np.abs(self.entries - self.entries.conj().T).max() <= tol)

    def is_positive(self, tol: float = DEFAULT.predicate) -> bool:
        return self.is_hermitian(tol) and bool(np.linalg.eigvalsh(self.entries).min() >= -tol)


def as_operator(q, dims: Sequence[int] | None = None) -> Operator:
    """Coerce a matrix or :class:`Operator` to an :class:`Operator`.

    Without explicit ``dims`` a square matrix of size d is split as
    (sqrt(d), sqrt(d)) when d is a perfect square and (d, 1) otherwise.
    """
    if isinstance(q, Operator):
        if dims is not None and tuple(dims) != q.dims:
            return Operator(q.entries, tuple(dims))
        return q
    m = np.asarray(q, dtype=complex)
    if dims is None:
        d = m.shape[0]
        r = int(round(np.sqrt(d)))
        dims = (r, r) if r * r == d else (d, 1)
    return Operator(m, tuple(dims))


def is_unitary(m: np.ndarray, tol: float = DEFAULT.predicate) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max() <= tol)


def tensor(*ops) -> np.ndarray:
    """Kronecker product, first argument's indices major."""
    out = np.array([[1.0 + 0j]])
    for op in ops:
        if isinstance(op, Operator):
            op = op.entries
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def hs_inner(q, p) -> complex:
    """Hilbert-Schmidt inner product tr(q^dagger p)."""
    q = q.entries if isinstance(q, Operator) else np.asarray(q)
    p = p.entries if isinstance(p, Operator) else np.asarray(p)
    if q.shape != p.shape:
        raise DimensionError(f"shape mismatch {q.shape} vs {p.shape}")
    return complex(np.vdot(q, p))


def operator_norm(m) -> float:
    m = m.entries if isinstance(m, Operator) else np.asarray(m)
    return float(np.linalg.norm(m, 2))


def _check_dims(rho: np.ndarray, dims: Sequence[int]) -> None:
    if rho.shape != (int(np.prod(dims)),) * 2:
        raise DimensionError(f"matrix shape {rho.shape} inconsistent with dims {list(dims)}")


def partial_transpose(rho, dims: Sequence[int], which: int = 1) -> np.ndarray:
    """Transpose the indices of subsystem ``which`` only."""
    rho = np.asarray(rho)
    dims = [int(d) for d in dims]
    _check_dims(rho, dims)
    n = len(dims)
    if not 0 <= which < n:
        raise IndexError(f"subsystem {which} out of range for {n} subsystems")
    t = rho.reshape(dims + dims)
    axes = list(range(2 * n))
    axes[which], axes[n + which] = axes[n + which], axes[which]
    return t.transpose(axes).reshape(rho.shape)


def partial_trace(rho, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``."""
    rho = np.asarray(rho)
    dims = [int(d) for d in dims]
    _check_dims(rho, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise IndexError(f"keep={keep} out of range for {n} subsystems")
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = [letters[n + i] if i in keep else row[i] for i in range(n)]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return np.einsum("".join(row) + "".join(col) + "->" + out, rho.reshape(dims + dims)).reshape(dk, dk)


def operator_basis(d: int) -> list[np.ndarray]:
    """Orthonormal operator basis: normalized Paulis for d=2, matrix units otherwise."""
    if d == 2:
        return [p / np.sqrt(2) for p in PAULIS]
    basis = []
    for j in range(d):
        for k in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = 1
            basis.append(e)
    return basis


@dataclass
class SchmidtDecomposition:
    coeffs: np.ndarray
    basis_a: list[np.ndarray]
    basis_b: list[np.ndarray]

    def reconstruct(self) -> np.ndarray:
        return sum(c * np.kron(a, b) for c, a, b in zip(self.coeffs, self.basis_a, self.basis_b))

    def __len__(self):
        return len(self.coeffs)


def operator_schmidt(q, dims: Sequence[int] | None = None, clamp: float = DEFAULT.clamp) -> SchmidtDecomposition:
    """Operator-Schmidt decomposition ``q = sum_l u_l A_l (x) B_l``.

    The coefficient matrix ``M[j, k] = (C_j (x) D_k, q)`` in fixed product
    bases is factored by SVD and the bases are rotated by the singular
    vectors. Coefficients are nonincreasing; those below ``clamp`` are dropped.
    """
    op = as_operator(q, dims)
    dA, dB = op.dims
    ca, cb = operator_basis(dA), operator_basis(dB)
    # tr((C_j (x) D_k)^dag Q) via the realigned matrix
    R = op.entries.reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3).reshape(dA * dA, dB * dB)
    Ca = np.array([c.reshape(-1) for c in ca])
    Cb = np.array([c.reshape(-1) for c in cb])
    M = Ca.conj() @ R @ Cb.conj().T
    U, s, Vh = np.linalg.svd(M)
    keep = s > clamp
    basis_a = [np.tensordot(U[:, l], np.array(ca), axes=1) for l in np.flatnonzero(keep)]
    basis_b = [np.tensordot(Vh[l, :], np.array(cb), axes=1) for l in np.flatnonzero(keep)]
    return SchmidtDecomposition(s[keep], basis_a, basis_b)


def schmidt_coefficients(q, dims: Sequence[int] | None = None, clamp: float = DEFAULT.clamp) -> np.ndarray:
    """Nonincreasing operator-Schmidt coefficients, without the bases."""
    op = as_operator(q, dims)
    dA, dB = op.dims
    R = op.entries.reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3).reshape(dA * dA, dB * dB)
    s = np.linalg.svd(R, compute_uv=False)
    return s[s > clamp]


def _unitarity_defect(ops: list[np.ndarray], d: int) -> float:
    eye = np.eye(d)
    return float(sum(np.abs(d * o @ o.conj().T - eye).max() for o in ops))


def _block_objective(params, A, Bc, dA, dB):
    k = A.shape[0]
    H = np.zeros((k, k), dtype=complex)
    iu = np.triu_indices(k, 1)
    H[np.diag_indices(k)] = params[:k]
    n_off = len(iu[0])
    H[iu] = params[k:k + n_off] + 1j * params[k + n_off:]
    H = H + np.triu(H, 1).conj().T
    W = expm(1j * H)
    A2 = np.tensordot(W.T, A, axes=1)
    B2 = np.tensordot(W.conj().T, Bc, axes=1)
    ea, eb = np.eye(dA), np.eye(dB)
    f = 0.0
    for a in A2:
        f += np.sum(np.abs(dA * a @ a.conj().T - ea) ** 2)
    for b in B2:
        f += np.sum(np.abs(dB * b @ b.conj().T - eb) ** 2)
    return f, W


def unitary_schmidt_form(q, dims: Sequence[int] | None = None, tol: float = DEFAULT.reconstruction,
                         restarts: int = 24, rng: np.random.Generator | None = None) -> SchmidtDecomposition | None:
    """Search for a Schmidt decomposition whose factors are proportional to unitaries.

    Within a block of degenerate coefficients the Schmidt factors may be
    rotated as ``A'_l = sum_m W[m, l] A_m``, ``B'_l = sum_m conj(W[m, l]) B_m``
    for any unitary W without changing the operator. Each block is optimized
    separately. Returns None when no such form is found.
    """
    op = as_operator(q, dims)
    dA, dB = op.dims
    dec = operator_schmidt(op)
    if rng is None:
        rng = np.random.default_rng(20021)
    coeffs = dec.coeffs
    blocks: list[list[int]] = []
    for i, c in enumerate(coeffs):
        if blocks and abs(coeffs[blocks[-1][0]] - c) < DEFAULT.degeneracy:
            blocks[-1].append(i)
        else:
            blocks.append([i])
    basis_a, basis_b = list(dec.basis_a), list(dec.basis_b)
    for blk in blocks:
        A = np.array([basis_a[i] for i in blk])
        B = np.array([basis_b[i] for i in blk])
        if _unitarity_defect(list(A), dA) + _unitarity_defect(list(B), dB) <= tol:
            continue
        if len(blk) == 1:
            return None
        k = len(blk)
        best = None
        for attempt in range(restarts):
            x0 = np.zeros(k * k) if attempt == 0 else rng.normal(scale=1.5, size=k * k)
            res = minimize(lambda p: _block_objective(p, A, B, dA, dB)[0], x0, method="BFGS",
                           options={"gtol": 1e-12, "maxiter": 2000})
            if best is None or res.fun < best.fun:
                best = res
            if best.fun < 1e-20:
                break
        _, W = _block_objective(best.x, A, B, dA, dB)
        A2 = np.tensordot(W.T, A, axes=1)
        B2 = np.tensordot(W.conj().T, B, axes=1)
        # polish: snap each factor to the nearest scaled unitary
        A2 = [_nearest_scaled_unitary(a, dA) for a in A2]
        B2 = [_nearest_scaled_unitary(b, dB) for b in B2]
        for i, a, b in zip(blk, A2, B2):
            basis_a[i], basis_b[i] = a, b
    out = SchmidtDecomposition(coeffs.copy(), basis_a, basis_b)
    ok = (_unitarity_defect(out.basis_a, dA) <= tol and _unitarity_defect(out.basis_b, dB) <= tol
          and np.abs(out.reconstruct() - op.entries).max() <= tol)
    return out if ok else None


def _nearest_scaled_unitary(m: np.ndarray, d: int) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return (u @ vh) / np.sqrt(d)


def schmidt_continuity_gap(u, v, dims: Sequence[int] | None = None) -> tuple[float, float]:
    """Both sides of ``2(1 - sum_j u_j v_j / dA dB) <= ||U - V||^2``."""
    U, V = as_operator(u, dims), as_operator(v, dims)
    if U.dims != V.dims:
        raise DimensionError("operators act on different spaces")
    if not (U.is_unitary() and V.is_unitary()):
        raise NotUnitaryError("continuity gap is defined for unitaries only")
    dA, dB = U.dims
    su, sv = schmidt_coefficients(U, clamp=-1.0), schmidt_coefficients(V, clamp=-1.0)
    lhs = 2.0 * (1.0 - float(np.dot(su, sv)) / (dA * dB))
    rhs = operator_norm(U.entries - V.entries) ** 2
    return max(lhs, 0.0), rhs


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from QR of a complex Ginibre matrix with phase fix."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def bloch_density(s) -> np.ndarray:
    """Single-qubit density operator (I + s.sigma)/2."""
    s = np.asarray(s, dtype=float)
    return 0.5 * (I2 + s[0] * X + s[1] * Y + s[2] * Z)


def bloch_vector(rho) -> np.ndarray:
    rho = np.asarray(rho)
    return np.array([np.trace(rho @ p).real for p in (X, Y, Z)])
