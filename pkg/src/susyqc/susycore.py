"""Supersymmetric models on qubits: validation, Hamiltonians, exactness.

Also hosts the Jordan-normal-form constructors that classify degree-2
nilpotent supercharges up to conjugation.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Any

import numpy as np
import scipy.linalg as sla

from .errors import ArgumentError, ValidationError
from .fockalg import (
    PARITY_TOL,
    SparseOperator,
    anticommutator,
    classify_parity,
    commutator,
    identity,
    operator_norm_bound,
    parity_operator,
    parity_residuals,
    residual,
)

SCHEMA_VERSION = 1
VALIDATION_TOL = 1e-12
CONDITION_CAP = 1e12


@dataclass(frozen=True)
class ValidationReport:
    nilpotency_residual: float
    parity_residual: float
    projector_residuals: tuple[float, float, float]
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        out = asdict(self)
        out["projector_residuals"] = dict(zip(
            ("idempotency", "hermiticity", "compatibility"), self.projector_residuals))
        return out


@dataclass(frozen=True, eq=False)
class SusyModel:
    """Supercharge ``Q`` and Hilbert-space projector ``P`` on ``n_modes`` qubits.

    Construction does not validate; call :func:`validate` or use any
    operation that needs a genuine supersymmetric model.
    """

    n_modes: int
    Q: SparseOperator
    P: SparseOperator
    labels: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        dim = 2**self.n_modes
        for name, op in (("Q", self.Q), ("P", self.P)):
            if op.dim != dim:
                raise ArgumentError(f"{name} has dimension {op.dim}, expected {dim}")

    @property
    def dim(self) -> int:
        return 2**self.n_modes

    @cached_property
    def parity(self) -> SparseOperator:
        return parity_operator(self.n_modes)

    @cached_property
    def report(self) -> ValidationReport:
        return validate(self)

    @cached_property
    def hamiltonian(self) -> SparseOperator:
        return hamiltonian(self)

    @cached_property
    def projected_dim(self) -> int:
        return int(round(self.P.trace().real))


def validate(model: SusyModel, tolerance: float = VALIDATION_TOL) -> ValidationReport:
    """Measure every supersymmetry constraint; never raises on failure.

    Residuals of Q are made scale-relative by max(1, ||Q||_bound) so that
    random-coupling supercharges are judged like integer ones.
    """
    Q, P = model.Q, model.P
    scale = max(1.0, operator_norm_bound(Q))
    nil = residual(Q @ Q) / scale**2
    par = residual(anticommutator(model.parity, Q)) / scale
    idem = residual(P @ P - P)
    herm = residual(P - P.H)
    compat = residual(commutator(Q, P)) / scale
    passed = all(r <= tolerance for r in (nil, par, idem, herm, compat))
    return ValidationReport(nil, par, (idem, herm, compat), tolerance, passed)


def require_valid(model: SusyModel) -> SusyModel:
    rep = model.report
    if not rep.passed:
        worst = max(rep.nilpotency_residual, rep.parity_residual, *rep.projector_residuals)
        raise ValidationError(
            f"model is not supersymmetric (worst residual {worst:.3e} > {rep.tolerance:g})", worst)
    return model


def hamiltonian(model: SusyModel) -> SparseOperator:
    """H = {Q, Q^dag} on the full 2^N space."""
    require_valid(model)
    return anticommutator(model.Q, model.Q.H).with_parity("bosonic")


def exact_deformation(model: SusyModel, psi: SparseOperator, tol: float = PARITY_TOL) -> SparseOperator:
    """Return the Q-exact operator {Q, psi} for fermionic ``psi``."""
    _, fer = parity_residuals(psi)
    if fer > tol * max(1.0, psi.max_abs()):
        raise ValidationError(f"psi is not fermionic (residual {fer:.3e})", fer)
    return anticommutator(model.Q, psi).with_parity("bosonic")


def random_fermionic(n_modes: int, seed: int, density: float = 0.5) -> SparseOperator:
    """Seeded random parity-odd operator with entries of modulus at most 1.

    Draws a sparse complex A and keeps (A - (-1)^F A (-1)^F)/2, which is
    just A masked to parity-flipping coordinates.
    """
    rng = np.random.default_rng(seed)
    dim = 2**n_modes
    mask = rng.random((dim, dim)) < density
    vals = rng.random((dim, dim)) * np.exp(2j * np.pi * rng.random((dim, dim)))
    signs = parity_operator(n_modes).diag().real
    flips = np.outer(signs, signs) < 0
    return SparseOperator.from_dense(np.where(mask & flips, vals, 0), "fermionic")


def is_closed(op: SparseOperator, model: SusyModel, tol: float = 1e-10) -> tuple[bool, float]:
    """Q-closedness: [Q, op] = 0 for bosonic op, {Q, op} = 0 for fermionic."""
    if op.parity == "bosonic":
        res = residual(commutator(model.Q, op))
    elif op.parity == "fermionic":
        res = residual(anticommutator(model.Q, op))
    else:
        raise ArgumentError(f"operator needs a definite parity tag, got {op.parity!r}")
    return res <= tol, res


def check_parity_anticommutation(q_candidate: SparseOperator, tol: float = VALIDATION_TOL) -> tuple[bool, float]:
    res = residual(anticommutator(parity_operator(q_candidate.n_modes), q_candidate))
    return res <= tol, res


# Jordan normal forms ------------------------------------------------------------

def enumerate_partitions(M: int) -> list[tuple[int, ...]]:
    """Nontrivial partitions of M into parts of size <= 2, most 2-blocks first."""
    if M < 2 or M % 2:
        raise ArgumentError(f"M must be an even integer >= 2, got {M}")
    return [(2,) * n2 + (1,) * (M - 2 * n2) for n2 in range(M // 2, 0, -1)]


def _check_partition(partition) -> tuple[int, int]:
    parts = tuple(int(p) for p in partition)
    if not parts or any(p not in (1, 2) for p in parts) or list(parts) != sorted(parts, reverse=True):
        raise ArgumentError(f"partition must be 2s followed by 1s, got {parts}")
    M = sum(parts)
    if M < 2 or M & (M - 1):
        raise ArgumentError(f"partition total {M} is not a power of two >= 2")
    return parts.count(2), M


def parse_partition(text: str) -> tuple[int, ...]:
    """Parse "n2,n1" block counts, or an explicit partition of three or more parts.

    Two numbers are always block counts, so "2,2" means (2,2,1,1).
    """
    try:
        parts = [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise ArgumentError(f"bad partition {text!r}") from exc
    if len(parts) == 2:
        if min(parts) < 0:
            raise ArgumentError(f"block counts must be >= 0, got {text!r}")
        n2, n1 = parts
        return (2,) * n2 + (1,) * n1
    return tuple(parts)


def nilpotent_from_partition(partition, conjugator: SparseOperator | np.ndarray | None = None) -> SparseOperator:
    """Jordan form with ``n_2`` blocks [[0,1],[0,0]], optionally S^-1 Q S."""
    n2, M = _check_partition(partition)
    jordan = SparseOperator.from_triplets(M, [(2 * k, 2 * k + 1, 1.0) for k in range(n2)])
    if conjugator is None:
        return jordan.with_parity(classify_parity(jordan))
    S = conjugator.to_dense() if isinstance(conjugator, SparseOperator) else np.asarray(conjugator, complex)
    if S.shape != (M, M):
        raise ArgumentError(f"conjugator shape {S.shape} does not match dimension {M}")
    cond = np.linalg.cond(S)
    if not np.isfinite(cond) or cond > CONDITION_CAP:
        raise ValidationError(f"conjugator is singular or ill-conditioned (cond ~ {cond:.3e})", cond)
    out = SparseOperator.from_dense(np.linalg.solve(S, jordan.to_dense() @ S))
    return out.with_parity(classify_parity(out))


def jordan_conjugator(Q: SparseOperator, rtol: float = 1e-10) -> tuple[tuple[int, ...], np.ndarray]:
    """Find the partition and an S with S^-1 (Jordan form) S = Q.

    Q must square to zero. Columns of S^-1 are Jordan chains (Q v, v)
    followed by a basis of ker Q complementary to range Q.
    """
    dense = Q.to_dense()
    M = dense.shape[0]
    if residual(Q @ Q) > rtol * max(1.0, operator_norm_bound(Q)) ** 2:
        raise ValidationError("operator is not nilpotent of degree 2")
    u, s, vh = np.linalg.svd(dense)
    rank = int((s > rtol * max(1.0, s[0] if s.size else 0.0)).sum())
    heads = vh[:rank].conj().T
    tails = dense @ heads
    kernel = vh[rank:].conj().T
    extra = kernel @ sla.null_space(tails.conj().T @ kernel) if M - 2 * rank else np.zeros((M, 0))
    cols = []
    for k in range(rank):
        cols.extend([tails[:, k], heads[:, k]])
    T = np.column_stack(cols + [extra[:, k] for k in range(extra.shape[1])])
    partition = (2,) * rank + (1,) * (M - 2 * rank)
    return partition, np.linalg.inv(T)


def jordan_model(partition, conjugator=None, projector: SparseOperator | None = None,
                 labels: dict | None = None) -> SusyModel:
    Q = nilpotent_from_partition(partition, conjugator)
    n = Q.n_modes
    P = projector if projector is not None else identity(2**n)
    meta = {"family": "jordan", "partition": list(partition), "conjugated": conjugator is not None}
    meta.update(labels or {})
    return SusyModel(n, Q, P, meta)


# serialization ------------------------------------------------------------------

def operator_to_triplets(op: SparseOperator) -> list[list]:
    return [[r, c, v.real, v.imag] for r, c, v in op.entries()]


def operator_from_triplets(dim: int, triplets, parity: str = "unknown") -> SparseOperator:
    try:
        return SparseOperator.from_triplets(dim, ((int(r), int(c), complex(re, im)) for r, c, re, im in triplets), parity)
    except (TypeError, ValueError) as exc:
        raise ArgumentError(f"bad operator triplets: {exc}") from exc


def model_to_dict(model: SusyModel, include_report: bool = True) -> dict:
    doc = {
        "schema": "susyqc.model",
        "version": SCHEMA_VERSION,
        "N": model.n_modes,
        "Q": operator_to_triplets(model.Q),
        "P": operator_to_triplets(model.P),
        "labels": model.labels,
    }
    if include_report:
        doc["validation"] = model.report.to_dict()
    return doc


def model_from_dict(doc: dict) -> SusyModel:
    if doc.get("version") != SCHEMA_VERSION:
        raise ArgumentError(f"unsupported model version {doc.get('version')!r}")
    try:
        n = int(doc["N"])
        Q = operator_from_triplets(2**n, doc["Q"], "fermionic")
        P = operator_from_triplets(2**n, doc["P"], "bosonic")
    except KeyError as exc:
        raise ArgumentError(f"model document missing field {exc}") from exc
    return SusyModel(n, Q, P, dict(doc.get("labels", {})))


def dump_model(model: SusyModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path) -> SusyModel:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ArgumentError(f"{path}: not valid JSON ({exc})") from exc
    return model_from_dict(doc)
