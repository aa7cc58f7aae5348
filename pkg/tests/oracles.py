"""Independent reference computations used to derive and freeze test values.

Nothing here imports gaterobust: each routine takes a different route from
the library (explicit loops, full-operator embeddings, root finding).
"""

import numpy as np
from scipy.linalg import sqrtm
from scipy.optimize import brentq

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0 + 0j, -1.0])
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def realigned_singular_values(u, dA, dB):
    """Operator-Schmidt coefficients from the realigned matrix built entry by entry."""
    r = np.zeros((dA * dA, dB * dB), dtype=complex)
    for i in range(dA):
        for j in range(dA):
            for k in range(dB):
                for l in range(dB):
                    r[i * dA + j, k * dB + l] = u[i * dB + k, j * dB + l]
    s = np.linalg.svd(r, compute_uv=False)
    return s[s > 1e-10]


def partial_transpose_loops(rho, dA, dB):
    out = np.zeros_like(rho)
    for a in range(dA):
        for b in range(dB):
            for a2 in range(dA):
                for b2 in range(dB):
                    out[a * dB + b, a2 * dB + b2] = rho[a * dB + b2, a2 * dB + b]
    return out


def min_pt_eig(rho, dA, dB):
    return float(np.linalg.eigvalsh(partial_transpose_loops(rho, dA, dB)).min())


def max_ent(d):
    return np.eye(d).reshape(-1).astype(complex) / np.sqrt(d)


def choi_full(kraus, dA, dB):
    """(I (x) K (x) I)|alpha>|beta> via a full Kronecker embedding."""
    v0 = np.kron(max_ent(dA), max_ent(dB))
    rho = 0
    for K in kraus:
        v = np.kron(np.kron(np.eye(dA), K), np.eye(dB)) @ v0
        rho = rho + np.outer(v, v.conj())
    return rho


def concurrence_wootters(rho):
    yy = np.kron(Y, Y)
    s = sqrtm(rho)
    m = sqrtm(s @ yy @ rho.conj() @ yy @ s)
    ev = np.sort(np.linalg.eigvalsh((m + m.conj().T) / 2))[::-1]
    return max(0.0, ev[0] - ev[1] - ev[2] - ev[3])


def ppt_boundary(rho, sigma, dA, dB, cap=1e6):
    """Smallest t >= 0 making (rho + t sigma)/(1 + t) PPT, by root bracketing."""
    f = lambda t: min_pt_eig((rho + t * sigma) / (1 + t), dA, dB)
    if f(0) >= -1e-12:
        return 0.0
    if f(cap) < 0:
        return np.inf
    return brentq(f, 0, cap, xtol=1e-13, rtol=1e-14, maxiter=500)


def mixing_p_bisect(rho, sigma):
    """Largest p with rho - p sigma >= 0, by bisection on the minimum eigenvalue."""
    lo, hi = 0.0, 1.0
    if np.linalg.eigvalsh(rho - sigma).min() >= -1e-12:
        return 1.0
    for _ in range(80):
        mid = (lo + hi) / 2
        if np.linalg.eigvalsh(rho - mid * sigma).min() >= -1e-13:
            lo = mid
        else:
            hi = mid
    return lo


def embed(K, targets, q):
    """Full 2^q operator for K on the given target qubits, via a permutation of qubits."""
    k = len(targets)
    rest = [i for i in range(q) if i not in targets]
    order = list(targets) + rest
    full = np.kron(K, np.eye(2 ** (q - k)))
    perm = np.zeros((2 ** q, 2 ** q))
    for idx in range(2 ** q):
        bits = [(idx >> (q - 1 - i)) & 1 for i in range(q)]
        reordered = [bits[o] for o in order]
        j = int("".join(map(str, reordered)), 2) if q else 0
        perm[j, idx] = 1
    return perm.T @ full @ perm


def circuit_distribution(q, initial, gates, measure):
    """gates: list of (kraus list, targets). Returns dict outcome -> probability."""
    rho = np.zeros((2 ** q, 2 ** q), dtype=complex)
    i0 = int(initial, 2)
    rho[i0, i0] = 1
    for kraus, targets in gates:
        ks = [embed(K, targets, q) for K in kraus]
        rho = sum(K @ rho @ K.conj().T for K in ks)
    out = {}
    for idx in range(2 ** q):
        bits = format(idx, f"0{q}b")
        key = "".join(bits[m] for m in measure)
        out[key] = out.get(key, 0.0) + rho[idx, idx].real
    return {k: v for k, v in out.items() if v > 1e-15}
