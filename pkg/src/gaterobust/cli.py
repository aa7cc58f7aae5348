"""Command-line interface: ``gaterobust <command> ...``.

Exit status is 0 on success, 1 on a domain error (non-unitary input, failed
hypothesis, entangled gate in the simulator) and 2 on I/O or format errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import io
from .channels import Channel, HypothesisError, depolarizing, unitary_channel
from .choi import choi_state, sep_char_check
from .linalg import as_operator, operator_schmidt
from .robustness import (mixing_feasibility, mixing_feasibility_channels, random_robustness_channel,
                         random_robustness_unitary, relative_robustness_gate, threshold_bound_all_gates,
                         threshold_bound_depolarizing, threshold_bound_general, unital_schmidt_robustness)
from .separability import (min_pt_eigenvalue, random_robustness_state, relative_robustness_state,
                           robustness_pure)
from .simulator import dense_oracle, l1_distance, run_circuit

SEED_ENV = "GATEROBUST_SEED"
TEXT_DIGITS = 12


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return f"{x:.{TEXT_DIGITS}g}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    if isinstance(x, dict):
        return "{" + ", ".join(f"{k}: {_fmt(v)}" for k, v in x.items()) + "}"
    return str(x)


def _fmt_complex(z) -> str:
    z = complex(z)
    return f"{z.real:.{TEXT_DIGITS}g}{z.imag:+.{TEXT_DIGITS}g}j"


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return [[float(z.real), float(z.imag)] for z in np.asarray(x, dtype=complex).ravel()]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _emit(report: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(_jsonable(report), indent=2) + "\n")
        return
    for k, v in report.items():
        if isinstance(v, np.ndarray):
            out.write(f"{k}:\n")
            for row in v:
                out.write("  " + "  ".join(_fmt_complex(z) for z in row) + "\n")
        elif isinstance(v, dict) and v and all(isinstance(t, (int, float)) for t in v.values()):
            out.write(f"{k}:\n")
            for kk, vv in v.items():
                out.write(f"  {kk}  {_fmt(_jsonable(vv))}\n")
        else:
            out.write(f"{k}: {_fmt(_jsonable(v))}\n")


def _dims(args, m: np.ndarray, file_dims):
    if args.dims:
        return tuple(args.dims)
    if file_dims:
        return file_dims
    return as_operator(m).dims


# ------------------------------------------------------------- commands

def cmd_schmidt(args) -> dict:
    m, fd = io.load_matrix(args.gate)
    dims = _dims(args, m, fd)
    dec = operator_schmidt(m, dims)
    rep = {"dims": list(dims), "coefficients": [float(c) for c in dec.coeffs]}
    op = as_operator(m, dims)
    if op.is_unitary():
        rep["R_r"] = random_robustness_unitary(op).value
    return rep


def cmd_choi(args) -> dict:
    e = io.load_channel(args.channel)
    st = choi_state(e)
    chk = sep_char_check(st)
    rep = {"dims": list(e.dims), "trace_preserving": st.source_tp,
           "marginal_maximally_mixed": chk.marginal_ok, "cut": chk.cut_status,
           "min_pt_eigenvalue": chk.min_pt_eigenvalue}
    rep["choi"] = st.rho
    return rep


def cmd_robustness(args) -> dict:
    e = io.load_channel(args.gate)
    measure = args.measure or ("relative" if args.against else "random")
    if measure == "relative":
        if not args.against:
            raise ValueError("--measure relative needs --against")
        r = relative_robustness_gate(e, io.load_channel(args.against))
    elif measure == "random":
        r = random_robustness_channel(e)
    else:
        if not e.is_unitary():
            raise HypothesisError("unital-schmidt robustness needs a unitary gate")
        r = unital_schmidt_robustness(e.kraus[0], e.dims)
    return r.as_dict()


def cmd_robustness_state(args) -> dict:
    m, fd = io.load_matrix(args.state)
    if m.shape[0] != m.shape[1]:
        raise ValueError("state must be a square matrix")
    dims = tuple(args.cut) if args.cut else (fd or as_operator(m).dims)
    rank1 = np.linalg.matrix_rank(m, tol=1e-10) == 1
    if args.sigma and args.sigma != "white":
        sigma, _ = io.load_matrix(args.sigma)
        r = relative_robustness_state(m, sigma, dims)
        return {"cut": list(dims), "R": r.value, "exact": r.exact}
    if rank1:
        w, v = np.linalg.eigh((m + m.conj().T) / 2)
        psi = v[:, -1]
        return {"cut": list(dims), "R": robustness_pure(psi, dims), "R_r": random_robustness_state(psi, dims)}
    d = m.shape[0]
    r = relative_robustness_state(m, np.eye(d) / d, dims)
    return {"cut": list(dims), "R_r": r.value, "exact": r.exact,
            "min_pt_eigenvalue": min_pt_eigenvalue(m, dims)}


def cmd_threshold(args) -> dict:
    if args.noise == "depolarize-all":
        b = threshold_bound_all_gates()
        return {"noise": args.noise, "p_th_upper": b.value, "R": b.robustness}
    m, fd = io.load_matrix(args.gate)
    dims = _dims(args, m, fd)
    if args.noise == "depolarize-each":
        return {"noise": args.noise, "p_th_upper": threshold_bound_depolarizing(m, dims),
                "R_r": random_robustness_unitary(m, dims).value}
    b = threshold_bound_general(m, dims)
    return {"noise": "worst-general", "p_th_upper": b.value, "R": b.robustness, "source": b.source}


def cmd_simulate(args) -> dict:
    c = io.load_circuit(args.circuit)
    r = run_circuit(c, epsilon=args.epsilon, seed=args.seed, shots=args.shots)
    rep = {"shots": args.shots, "precision_bits": r.precision_bits, "error_budget": r.error_budget,
           "per_gate_residuals": r.per_gate_residuals, "histogram": r.histogram()}
    if args.oracle:
        exact = dense_oracle(c)
        rep["exact"] = exact
        rep["l1_gap"] = l1_distance(r.distribution(), exact)
    return rep


def _is_channel_file(ref) -> bool:
    try:
        obj = io._read_json(ref)
    except OSError:
        return False
    return isinstance(obj, dict) and ("kraus" in obj or "choi" in obj)


def cmd_mixfeas(args) -> dict:
    if _is_channel_file(args.rho) or _is_channel_file(args.sigma):
        e, f = io.load_channel(args.rho), io.load_channel(args.sigma)
        res = mixing_feasibility_channels(e, f)
        rep = {"p": res.p}
        if res.remainder is not None:
            rep["remainder_kraus_count"] = len(res.remainder.kraus)
        return rep
    rho, _ = io.load_matrix(args.rho)
    sigma, _ = io.load_matrix(args.sigma)
    if rho.shape != sigma.shape:
        raise ValueError("states have different dimensions")
    return {"p": mixing_feasibility(rho, sigma)}


# ------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    env_seed = os.environ.get(SEED_ENV)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text",
                        help="output format (default: text)")
    p = argparse.ArgumentParser(prog="gaterobust",
                                description="Robustness of quantum gates and classical simulation of "
                                            "separability-preserving circuits.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("schmidt", parents=[common], help="operator-Schmidt coefficients and R_r")
    s.add_argument("gate", help="matrix JSON or builtin name (cnot, swap, cz, identity)")
    s.add_argument("--dims", type=int, nargs=2, metavar=("DA", "DB"), help="subsystem dimensions")
    s.set_defaults(func=cmd_schmidt)

    s = sub.add_parser("choi", parents=[common], help="Choi state and separability checks of a channel")
    s.add_argument("channel", help="channel JSON (kraus or choi), matrix JSON, or builtin name")
    s.set_defaults(func=cmd_choi)

    s = sub.add_parser("robustness", parents=[common], help="gate robustness measures")
    s.add_argument("gate")
    s.add_argument("--measure", choices=("random", "unital-schmidt", "relative"),
                   help="robustness measure (default: random, or relative with --against)")
    s.add_argument("--against", help="second channel for relative robustness R(E||F)")
    s.set_defaults(func=cmd_robustness)

    s = sub.add_parser("robustness-state", parents=[common], help="robustness of a bipartite state")
    s.add_argument("state", help="density matrix JSON")
    s.add_argument("--cut", type=int, nargs=2, metavar=("DA", "DB"), help="bipartition dimensions")
    s.add_argument("--sigma", help="noise state JSON or 'white' (default: white)")
    s.set_defaults(func=cmd_robustness_state)

    s = sub.add_parser("threshold", parents=[common], help="upper bounds on the noise threshold")
    s.add_argument("gate", nargs="?", default="cnot")
    s.add_argument("--noise", choices=("depolarize-each", "worst-general", "general", "depolarize-all"),
                   default="depolarize-each", help="noise model; 'general' is an alias of 'worst-general' (default: depolarize-each)")
    s.add_argument("--dims", type=int, nargs=2, metavar=("DA", "DB"))
    s.set_defaults(func=cmd_threshold)

    s = sub.add_parser("simulate", parents=[common], help="sample a separability-preserving circuit")
    s.add_argument("circuit", help="circuit JSON")
    s.add_argument("--shots", type=int, default=1000, help="number of samples (default: 1000)")
    s.add_argument("--epsilon", type=float, default=0.01, help="target accuracy (default: 0.01)")
    s.add_argument("--seed", type=int, default=int(env_seed) if env_seed else 0,
                   help=f"root seed (default: ${SEED_ENV} or 0)")
    s.add_argument("--oracle", action="store_true", help="also print the exact distribution and l1 gap")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("mixfeas", parents=[common],
                       help="largest p with rho = p sigma + (1 - p) tau (states or channels)")
    s.add_argument("rho")
    s.add_argument("sigma")
    s.set_defaults(func=cmd_mixfeas)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        report = args.func(args)
    except (io.FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(report, args.format, out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
