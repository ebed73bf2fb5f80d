"""Command-line front end.

Every analysis prints one JSON document ``{schema, result, manifest}`` to
stdout. Exit codes: 0 success, 1 usage error, 2 validation failure,
3 numerical-integrity failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .circuits import (
    hadamard_test_exact,
    hadamard_test_sample,
    trace_estimation_exact,
    trace_estimation_sample,
)
from .errors import ArgumentError, NumericalIntegrityError, SusyError, ValidationError
from .fockalg import SparseOperator, hermitian_function, identity, parity_operator
from .models import (
    SykCoupling,
    ansatz_supercharge,
    hardcore_model,
    independence_euler_characteristic,
    independent_sets,
    load_ansatz_file,
    load_graph,
    syk_model,
    syk_refined_index_closed_form,
    zq_symmetry_operator,
)
from .spectral import NoGroundStateError, diagonalize, generalized_witten, ground_correlator, witten_index
from .susycore import (
    SusyModel,
    jordan_model,
    load_model,
    model_to_dict,
    operator_from_triplets,
    parse_partition,
)
from .wittenapprox import ApproxConfig, approximation_gap_report, witten_additive_estimate

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_INTEGRITY = 0, 1, 2, 3
SYK_RTOL = 1e-9


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error("usage", message)
        sys.exit(EXIT_USAGE)


def _emit_error(kind: str, message: str, **extra):
    print(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True), file=sys.stderr)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# input helpers ----------------------------------------------------------------------

def _read_graph(path: str):
    return load_graph(Path(path).read_text(encoding="utf-8"))


def _model_from_args(args) -> SusyModel:
    if getattr(args, "model", None):
        return load_model(args.model)
    if getattr(args, "graph", None):
        return hardcore_model(_read_graph(args.graph))
    raise ArgumentError("need --model (or --graph for a hard-core model)")


def _load_operator(path: str, dim: int) -> SparseOperator:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    op = operator_from_triplets(2 ** int(doc["N"]), doc["triplets"], doc.get("parity", "unknown"))
    if op.dim != dim:
        raise ArgumentError(f"operator in {path} has dimension {op.dim}, model has {dim}")
    return op


def parse_operator(spec: str, model: SusyModel) -> SparseOperator:
    """identity | hamiltonian | parity | evolve:T | zq:Q:R | file:PATH"""
    name, _, rest = spec.partition(":")
    if name == "identity":
        return identity(model.dim)
    if name == "hamiltonian":
        return model.hamiltonian
    if name == "parity":
        return parity_operator(model.n_modes)
    if name == "evolve":
        return hermitian_function(model.hamiltonian, -1j * float(rest or 1.0))
    if name == "zq":
        q, r = rest.split(":")
        return zq_symmetry_operator(model.n_modes, int(q), float(r))
    if name == "file":
        return _load_operator(rest, model.dim)
    raise ArgumentError(f"unknown operator spec {spec!r}")


def _insertions(specs: list[str], model: SusyModel) -> list[tuple[SparseOperator, float]]:
    out = []
    for item in specs or []:
        op_spec, _, time_text = item.rpartition("@") if "@" in item else (item, "", "0")
        out.append((parse_operator(op_spec, model), float(time_text)))
    return out


# subcommands ----------------------------------------------------------------------------

def cmd_build(args) -> tuple[dict, int]:
    if args.family == "hardcore":
        model = hardcore_model(_read_graph(args.graph))
    elif args.family == "syk":
        if args.couplings:
            coupling = SykCoupling.from_dict(json.loads(Path(args.couplings).read_text(encoding="utf-8")))
        else:
            coupling = SykCoupling.random(args.n, args.q, args.seed)
        if coupling.q % 2 == 0:
            raise ValidationError(f"q={coupling.q} is even; the supercharge would be bosonic")
        model = syk_model(coupling)
    elif args.family == "ansatz":
        n, B = load_ansatz_file(args.b_ops)
        model, _ = ansatz_supercharge(n, B)
    else:
        S = None
        if args.conjugator:
            doc = json.loads(Path(args.conjugator).read_text(encoding="utf-8"))
            S = _load_operator(args.conjugator, 2 ** int(doc["N"]))
        model = jordan_model(parse_partition(args.partition), S)
    doc = model_to_dict(model)
    if not model.report.passed:
        _emit_error("validation", "model failed validation", validation=_jsonable(doc["validation"]))
        return {"validation": doc["validation"]}, EXIT_VALIDATION
    if args.out:
        Path(args.out).write_text(json.dumps(_jsonable(doc), indent=1) + "\n", encoding="utf-8")
    result = {"N": model.n_modes, "projected_dim": model.projected_dim,
              "validation": doc["validation"], "labels": model.labels}
    if not args.out:
        result["model"] = doc
    return result, EXIT_OK


def cmd_validate(args):
    model = _model_from_args(args)
    rep = model.report
    return rep.to_dict(), EXIT_OK if rep.passed else EXIT_VALIDATION


def cmd_spectrum(args):
    model = _model_from_args(args)
    rep = diagonalize(model, tolerance=args.tolerance)
    out = rep.to_dict()
    ok = not rep.pairing_violations and rep.min_eigenvalue >= -args.tolerance
    ok = ok and abs(rep.witten_index) <= rep.n_B + rep.n_F
    return out, EXIT_OK if ok else EXIT_INTEGRITY


def cmd_witten(args):
    return {"witten_index": witten_index(_model_from_args(args))}, EXIT_OK


def cmd_gwitten(args):
    model = _model_from_args(args)
    value = generalized_witten(model, _insertions(args.insert, model))
    return {"generalized_witten": value}, EXIT_OK


def cmd_correlator(args):
    model = _model_from_args(args)
    res = ground_correlator(model, _insertions(args.insert, model))
    return {"values": res.values, "parities": res.parities, "average": res.average}, EXIT_OK


def _ground_state(model: SusyModel, k: int) -> np.ndarray:
    states = diagonalize(model).ground_states
    if not states:
        raise NoGroundStateError("no supersymmetric ground states")
    if not 0 <= k < len(states):
        raise ArgumentError(f"ground state {k} out of range (have {len(states)})")
    return states[k]


def cmd_hadamard(args):
    model = _model_from_args(args)
    op = parse_operator(args.op, model)
    state = _ground_state(model, args.ground)
    out = {"p0_exact": hadamard_test_exact(state, op, args.part)}
    if args.shots:
        rec = hadamard_test_sample(state, op, args.shots, args.seed, args.part)
        out["sample"] = rec.to_dict()
    return out, EXIT_OK


def cmd_trace(args):
    model = _model_from_args(args)
    op = parse_operator(args.op, model)
    out = {"p0_exact": trace_estimation_exact(model, op, args.normalization),
           "normalization": args.normalization}
    if args.shots:
        rec = trace_estimation_sample(model, op, args.shots, args.seed, args.normalization)
        out["sample"] = rec.to_dict()
    return out, EXIT_OK


def cmd_approx(args):
    model = _model_from_args(args)
    config = ApproxConfig(args.mu, args.epsilon, args.confidence, args.gamma)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        est = witten_additive_estimate(model, config, args.seed, args.shots)
    out = {"z_hat": est.z_hat, "shots": est.shots, "guarantee": est.halfwidth,
           "range_bound": est.range_bound, "config": config.to_dict(),
           "warnings": [str(w.message) for w in caught]}
    if model.dim <= 2**14:
        gap = approximation_gap_report(model, config)
        exact = gap["exact_z"] / (model.dim * math.exp(config.mu * gap["lambda"]))
        out.update(exact_z=exact, gap=gap["normalized_gap"], within_half_epsilon=gap["within_half_epsilon"])
    return out, EXIT_OK


def cmd_sykindex(args):
    closed = syk_refined_index_closed_form(args.n, args.q, args.r)
    out = {"N": args.n, "q": args.q, "r": args.r, "closed_form": closed}
    code = EXIT_OK
    if args.compare_brute:
        brute = (parity_operator(args.n) @ zq_symmetry_operator(args.n, args.q, args.r)).trace()
        rel = abs(brute - closed) / max(abs(closed), 1e-300) if abs(closed) > 1e-12 else abs(brute - closed)
        out.update(brute_force=brute, relative_difference=rel)
        if rel > SYK_RTOL:
            code = EXIT_INTEGRITY
    return out, code


def cmd_euler(args):
    G = _read_graph(args.graph)
    return {"euler_characteristic": independence_euler_characteristic(G),
            "independent_sets": len(independent_sets(G))}, EXIT_OK


COMMANDS = {
    "build": cmd_build, "validate": cmd_validate, "spectrum": cmd_spectrum, "witten": cmd_witten,
    "gwitten": cmd_gwitten, "correlator": cmd_correlator, "hadamard": cmd_hadamard,
    "trace": cmd_trace, "approx": cmd_approx, "sykindex": cmd_sykindex, "euler": cmd_euler,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="susyqc", description="Exact simulation of supersymmetric qubit systems.")
    parser.add_argument("--version", action="version", version=f"susyqc {__version__}")
    parser.add_argument("--plain", action="store_true", help="human-readable summary instead of JSON")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--plain", action="store_true", default=argparse.SUPPRESS,
                        help="human-readable summary instead of JSON")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add = sub.add_parser

    def add_command(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_command

    def model_input(p, graph=True):
        p.add_argument("--model", help="model JSON file")
        if graph:
            p.add_argument("--graph", help="edge-list file; builds the hard-core model")

    b = sub.add_parser("build", help="construct a model and write its JSON")
    fam = b.add_subparsers(dest="family", required=True, parser_class=_Parser)
    _add_family = fam.add_parser
    fam.add_parser = lambda name, **kw: _add_family(name, parents=[common], **kw)
    hc = fam.add_parser("hardcore")
    hc.add_argument("--graph", required=True)
    syk = fam.add_parser("syk")
    syk.add_argument("--n", type=int, required=True)
    syk.add_argument("--q", type=int, required=True)
    syk.add_argument("--seed", type=int, default=0)
    syk.add_argument("--couplings")
    an = fam.add_parser("ansatz")
    an.add_argument("--b-ops", required=True)
    jo = fam.add_parser("jordan")
    jo.add_argument("--partition", required=True, help='"n2,n1" block counts or an explicit partition')
    jo.add_argument("--conjugator")
    for p in (hc, syk, an, jo):
        p.add_argument("--out", help="model file to write (default: embed in stdout report)")

    for name in ("validate", "witten"):
        model_input(sub.add_parser(name))
    sp = sub.add_parser("spectrum")
    model_input(sp)
    sp.add_argument("--tolerance", type=float, default=1e-10)

    for name, tdoc in (("gwitten", "Euclidean"), ("correlator", "Lorentzian")):
        p = sub.add_parser(name)
        model_input(p)
        p.add_argument("--insert", action="append", default=[],
                       help=f"OPERATOR[@TIME] with {tdoc} time; repeatable, applied in order")

    hd = sub.add_parser("hadamard")
    model_input(hd)
    hd.add_argument("--op", default="evolve:1.0")
    hd.add_argument("--ground", type=int, default=0, help="index of the ground state to use")
    hd.add_argument("--part", choices=("real", "imaginary"), default="real")
    hd.add_argument("--shots", type=int, default=0)
    hd.add_argument("--seed", type=int, default=0)

    tr = sub.add_parser("trace")
    model_input(tr)
    tr.add_argument("--op", default="evolve:1.0")
    tr.add_argument("--normalization", choices=("full_space", "projected"), default="full_space")
    tr.add_argument("--shots", type=int, default=0)
    tr.add_argument("--seed", type=int, default=0)

    ap = sub.add_parser("approx")
    model_input(ap)
    ap.add_argument("--mu", type=float, default=0.0)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--confidence", type=float, default=0.9)
    ap.add_argument("--gamma", type=float, default=None)
    ap.add_argument("--shots", type=int, default=None)
    ap.add_argument("--seed", type=int, default=0)

    si = sub.add_parser("sykindex")
    si.add_argument("--n", type=int, required=True)
    si.add_argument("--q", type=int, required=True)
    si.add_argument("--r", type=float, required=True)
    si.add_argument("--compare-brute", action="store_true")

    eu = sub.add_parser("euler")
    eu.add_argument("--graph", required=True)
    return parser


def _manifest(args, started: float) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("plain",)}
    digests = {}
    for key in ("model", "graph", "couplings", "b_ops", "conjugator"):
        path = config.get(key)
        if path and Path(path).is_file():
            digests[path] = _digest(path)
    return {
        "subcommand": args.command if args.command != "build" else f"build {args.family}",
        "config": config,
        "inputs": digests,
        "seed": config.get("seed"),
        "version": __version__,
        "duration_s": round(time.perf_counter() - started, 6),
    }


def _plain(result: dict, prefix: str = "") -> list[str]:
    lines = []
    for key, value in result.items():
        if isinstance(value, dict) and not {"re", "im"} >= value.keys():
            lines.extend(_plain(value, f"{prefix}{key}."))
        elif isinstance(value, list) and len(value) > 12:
            lines.append(f"{prefix}{key:<28} [{len(value)} items]")
        else:
            lines.append(f"{prefix}{key:<28} {value}")
    return lines


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        result, code = COMMANDS[args.command](args)
    except (ValidationError, NoGroundStateError) as exc:
        _emit_error("validation", str(exc))
        return EXIT_VALIDATION
    except NumericalIntegrityError as exc:
        _emit_error("integrity", str(exc))
        return EXIT_INTEGRITY
    except (ArgumentError, OSError, KeyError, json.JSONDecodeError) as exc:
        _emit_error("usage", str(exc))
        return EXIT_USAGE
    except SusyError as exc:
        _emit_error("error", str(exc))
        return EXIT_VALIDATION
    result = _jsonable(result)
    if args.plain:
        print("\n".join(_plain(result)))
    else:
        schema = "susyqc." + args.command.replace(" ", "_") + "/1"
        doc = {"schema": schema, "result": result, "manifest": _jsonable(_manifest(args, started))}
        print(json.dumps(doc, indent=2, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
