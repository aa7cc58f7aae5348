"""JSON formats for matrices, channels and circuits. Complex entries are [re, im] pairs."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .channels import (Channel, classical_cnot, depolarizing, identity_channel, local_depolarizing,
                       noisy_gate_model, one_sided_depolarize, unitary_channel)
from .choi import channel_from_choi, choi_from_matrix
from .linalg import CNOT, SWAP, I2, X, Y, Z
from .simulator import Circuit, Gate


class FormatError(ValueError):
    """Malformed input file."""


BUILTIN_MATRICES = {
    "cnot": CNOT,
    "swap": SWAP,
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "identity": np.eye(4, dtype=complex),
    "i": I2, "x": X, "y": Y, "z": Z,
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
}


def encode_complex(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in a.ravel()]


def encode_matrix(m, dims=None) -> dict:
    m = np.asarray(m, dtype=complex)
    out = {"entries": encode_complex(m), "shape": list(m.shape)}
    if dims is not None:
        out["dims"] = [int(d) for d in dims]
    return out


def _parse_number(z) -> complex:
    if isinstance(z, (int, float)):
        return complex(z)
    if isinstance(z, (list, tuple)) and len(z) == 2 and all(isinstance(t, (int, float)) for t in z):
        return complex(z[0], z[1])
    raise FormatError(f"cannot read {z!r} as a complex number")


def decode_matrix(obj) -> tuple[np.ndarray, tuple[int, ...] | None]:
    """Accepts {"dims", "entries"} with flat [re, im] pairs or nested rows, or a bare nested list."""
    dims = None
    if isinstance(obj, dict):
        dims = tuple(int(d) for d in obj["dims"]) if "dims" in obj else None
        entries = obj.get("entries", obj.get("matrix"))
        if entries is None:
            raise FormatError("matrix object needs an 'entries' field")
    else:
        entries = obj
    if not isinstance(entries, list) or not entries:
        raise FormatError("matrix entries must be a non-empty list")
    # a flat list of n*n pairs never has exactly 2 elements, so square rows mean nesting
    if isinstance(entries[0], list) and len(entries[0]) == len(entries):
        m = np.array([[_parse_number(z) for z in row] for row in entries], dtype=complex)
    else:
        flat = np.array([_parse_number(z) for z in entries], dtype=complex)
        n = int(round(np.sqrt(len(flat))))
        if n * n != len(flat):
            raise FormatError(f"{len(flat)} entries do not form a square matrix")
        m = flat.reshape(n, n)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise FormatError(f"matrix must be square, got shape {m.shape}")
    return m, dims


def _read_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def load_matrix(ref) -> tuple[np.ndarray, tuple[int, ...] | None]:
    """A builtin gate name (cnot, swap, ...) or a path to a matrix JSON file."""
    key = str(ref).lower()
    if key in BUILTIN_MATRICES and not Path(ref).exists():
        m = BUILTIN_MATRICES[key]
        return m.copy(), None
    try:
        return decode_matrix(_read_json(ref))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{ref}: {exc}") from exc


def decode_channel(obj) -> Channel:
    if not isinstance(obj, dict) or "dims" not in obj:
        raise FormatError("channel object needs 'dims' and 'kraus' or 'choi'")
    dims = tuple(int(d) for d in obj["dims"])
    if len(dims) == 1:
        dims = (dims[0], 1)
    if "kraus" in obj:
        return Channel([decode_matrix(k)[0] for k in obj["kraus"]], dims)
    if "choi" in obj:
        return channel_from_choi(choi_from_matrix(decode_matrix(obj["choi"])[0], dims))
    if "entries" in obj:
        return unitary_channel(decode_matrix(obj)[0], dims)
    raise FormatError("channel object needs 'kraus' or 'choi'")


def load_channel(ref) -> Channel:
    """Builtin name, matrix JSON (treated as a unitary gate) or channel JSON."""
    key = str(ref).lower()
    if not Path(ref).exists():
        if key == "depolarizing":
            return depolarizing((2, 2))
        if key == "classical-cnot":
            return classical_cnot()
        if key in BUILTIN_MATRICES:
            m = BUILTIN_MATRICES[key]
            return unitary_channel(m, (2, 2) if m.shape[0] == 4 else (2, 1))
    obj = _read_json(ref)
    try:
        return decode_channel(obj)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{ref}: {exc}") from exc


def _gate_from_json(g: dict) -> Gate:
    try:
        name = g["name"]
        targets = tuple(int(t) for t in g["targets"])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"gate entry {g!r} needs 'name' and 'targets'") from exc
    k = len(targets)
    dims = (2, 2) if k == 2 else (2, 1)
    if name == "identity":
        ch = identity_channel(dims)
    elif name == "depolarize1":
        ch = depolarizing((2, 1), float(g.get("p", 1.0)))
    elif name == "depolarize2":
        ch = depolarizing((2, 2), float(g.get("p", 1.0)))
    elif name == "classical-cnot":
        ch = classical_cnot()
    elif name == "local-depolarize":
        ch = local_depolarizing((2, 2), int(g.get("side", 0)))
    elif name == "one-sided-depolarize":
        ch = one_sided_depolarize(_gate_matrix(g), g.get("side", "A"), (2, 2))
    elif name == "noisy-unitary":
        ch = noisy_gate_model(_gate_matrix(g), float(g["p"]), (2, 2))
    elif name == "unitary":
        ch = unitary_channel(_gate_matrix(g), dims)
    elif name == "kraus":
        ch = Channel([decode_matrix(m)[0] for m in g["kraus"]], dims)
    else:
        raise FormatError(f"unknown gate name {name!r}")
    return Gate(ch, targets, name)


def _gate_matrix(g: dict) -> np.ndarray:
    m = g.get("matrix", g.get("unitary"))
    if m is None:
        raise FormatError(f"gate {g.get('name')} needs a 'matrix'")
    if isinstance(m, str):
        if m.lower() not in BUILTIN_MATRICES:
            raise FormatError(f"unknown builtin matrix {m!r}")
        return BUILTIN_MATRICES[m.lower()]
    return decode_matrix(m)[0]


def decode_circuit(obj) -> Circuit:
    try:
        n = int(obj["qubits"])
        initial = str(obj.get("initial", "0" * n))
        gates = [_gate_from_json(g) for g in obj.get("gates", [])]
        measure = obj.get("measure")
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"circuit needs 'qubits' and a list of 'gates' ({exc})") from exc
    return Circuit(n, initial, gates, None if measure is None else [int(m) for m in measure])


def load_circuit(path) -> Circuit:
    return decode_circuit(_read_json(path))


def encode_circuit(c: Circuit) -> dict:
    gates = []
    for g in c.gates:
        gates.append({"name": "kraus", "targets": list(g.targets),
                      "kraus": [encode_complex(k) for k in g.channel.kraus]})
    return {"qubits": c.qubits, "initial": c.initial, "gates": gates, "measure": list(c.measure)}


__all__ = [
    "FormatError", "BUILTIN_MATRICES", "encode_complex", "encode_matrix", "decode_matrix",
    "load_matrix", "decode_channel", "load_channel", "decode_circuit", "load_circuit", "encode_circuit",
]
