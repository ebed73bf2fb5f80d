"""Concrete supercharge families.

* fermion hard-core model on a graph, with a brute-force independence
  complex enumerator used as its oracle;
* supersymmetric SYK with the Z_q refined index;
* the generic ``Q = sum_i a_i^dag B_i`` ansatz.
"""

from __future__ import annotations

import cmath
import itertools
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, GraphParseError
from .fockalg import (
    PARITY_TOL,
    BasisState,
    SparseOperator,
    identity,
    jw_creation,
    number_operator,
    parity_residuals,
    total_number_operator,
    zero,
)
from .susycore import SusyModel, ValidationReport, operator_from_triplets, validate

HARDCORE_MAX_VERTICES = 20
ENUMERATION_MAX_VERTICES = 24


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 1..n_vertices."""

    n_vertices: int
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        if self.n_vertices < 1:
            raise ArgumentError(f"graph needs at least one vertex, got {self.n_vertices}")
        normalized = set()
        for u, v in self.edges:
            if u == v:
                raise ArgumentError(f"self-loop at vertex {u}")
            if not (1 <= u <= self.n_vertices and 1 <= v <= self.n_vertices):
                raise ArgumentError(f"edge ({u}, {v}) references a vertex outside 1..{self.n_vertices}")
            normalized.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(normalized))

    def neighbors(self, i: int) -> list[int]:
        return sorted({v for u, v in self.edges if u == i} | {u for u, v in self.edges if v == i})

    def to_dict(self) -> dict:
        return {"n_vertices": self.n_vertices, "edges": sorted(list(e) for e in self.edges)}

    @classmethod
    def from_dict(cls, doc: dict) -> "Graph":
        return cls(int(doc["n_vertices"]), frozenset(tuple(e) for e in doc["edges"]))

    def to_text(self) -> str:
        return "\n".join([str(self.n_vertices)] + [f"{u} {v}" for u, v in sorted(self.edges)]) + "\n"


def complete_graph(n: int) -> Graph:
    return Graph(n, frozenset(itertools.combinations(range(1, n + 1), 2)))


def path_graph(n: int) -> Graph:
    return Graph(n, frozenset((i, i + 1) for i in range(1, n)))


def random_graph(n: int, p: float, seed: int) -> Graph:
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    keep = rng.random(len(pairs)) < p
    return Graph(n, frozenset(e for e, k in zip(pairs, keep) if k))


def load_graph(text: str) -> Graph:
    """Parse the edge-list format: vertex count, then one ``u v`` per line."""
    n = None
    edges: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n is None:
            if len(fields) != 1 or not fields[0].isdigit() or int(fields[0]) < 1:
                raise GraphParseError(f"expected a positive vertex count, got {line!r}", lineno)
            n = int(fields[0])
            continue
        if len(fields) != 2 or not all(f.isdigit() for f in fields):
            raise GraphParseError(f"expected 'u v', got {line!r}", lineno)
        u, v = int(fields[0]), int(fields[1])
        if u == v:
            raise GraphParseError(f"self-loop at vertex {u}", lineno)
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphParseError(f"vertex out of range 1..{n} in {line!r}", lineno)
        key = (min(u, v), max(u, v))
        if key in edges:
            raise GraphParseError(f"duplicate edge {key}", lineno)
        edges.add(key)
    if n is None:
        raise GraphParseError("empty graph file", 1)
    return Graph(n, frozenset(edges))


# independence complex -------------------------------------------------------

def _guard(G: Graph, limit: int = ENUMERATION_MAX_VERTICES):
    if G.n_vertices > limit:
        raise ArgumentError(f"{G.n_vertices} vertices exceeds enumeration guard {limit}")


def _independent_masks(G: Graph) -> list[int]:
    # Backtracking over vertices; only independent sets are ever visited.
    adj = [0] * (G.n_vertices + 1)
    for u, v in G.edges:
        adj[u] |= 1 << (v - 1)
        adj[v] |= 1 << (u - 1)
    out = []

    def extend(vertex: int, mask: int):
        if vertex > G.n_vertices:
            out.append(mask)
            return
        extend(vertex + 1, mask)
        if not adj[vertex] & mask:
            extend(vertex + 1, mask | (1 << (vertex - 1)))

    extend(1, 0)
    return sorted(out)


def independent_sets(G: Graph) -> list[BasisState]:
    _guard(G)
    return [BasisState.from_index(m, G.n_vertices) for m in _independent_masks(G)]


def independence_euler_characteristic(G: Graph) -> int:
    """Unreduced Euler characteristic: sum over independent sets of (-1)^|s|.

    The empty set counts +1, so this equals Tr_H (-1)^F of the hard-core model.
    """
    _guard(G)
    return sum(-1 if bin(m).count("1") % 2 else 1 for m in _independent_masks(G))


# hard-core model ------------------------------------------------------------

def site_projector(G: Graph, i: int) -> SparseOperator:
    """P_i: product of (1 - n_j) over neighbours j of i."""
    n = G.n_vertices
    out = identity(2**n)
    for j in G.neighbors(i):
        out = out @ (identity(2**n) - number_operator(j, n))
    return out


def hardcore_projector(G: Graph) -> SparseOperator:
    n = G.n_vertices
    out = identity(2**n)
    for u, v in sorted(G.edges):
        out = out @ (identity(2**n) - number_operator(u, n) @ number_operator(v, n))
    return out


def hardcore_model(G: Graph, max_vertices: int = HARDCORE_MAX_VERTICES) -> SusyModel:
    """Q = sum_i a_i^dag P_i with the independent-set projector."""
    if G.n_vertices > max_vertices:
        raise ArgumentError(f"{G.n_vertices} vertices exceeds the hard-core limit {max_vertices}")
    n = G.n_vertices
    Q = zero(2**n, "fermionic")
    for i in range(1, n + 1):
        Q = Q + jw_creation(i, n) @ site_projector(G, i)
    labels = {"family": "hardcore", "graph": G.to_dict()}
    return SusyModel(n, Q, hardcore_projector(G), labels)


def model_graph(model: SusyModel) -> Graph:
    if model.labels.get("family") != "hardcore" or "graph" not in model.labels:
        raise ArgumentError("model is not a hard-core model with an embedded graph")
    return Graph.from_dict(model.labels["graph"])


# SYK -------------------------------------------------------------------------

@dataclass(frozen=True)
class SykCoupling:
    """Antisymmetric coupling tensor stored on ascending index tuples."""

    n_modes: int
    q: int
    table: dict[tuple[int, ...], complex] = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        for key in self.table:
            if len(key) != self.q or list(key) != sorted(set(key)) or not all(1 <= k <= self.n_modes for k in key):
                raise ArgumentError(f"coupling index {key} is not an ascending {self.q}-tuple in 1..{self.n_modes}")

    @classmethod
    def random(cls, n_modes: int, q: int, seed: int) -> "SykCoupling":
        """Independent unit-variance complex Gaussians per ascending tuple."""
        rng = np.random.default_rng(seed)
        keys = list(itertools.combinations(range(1, n_modes + 1), q)) if q <= n_modes else []
        draws = rng.normal(size=(len(keys), 2)) / math.sqrt(2)
        return cls(n_modes, q, {k: complex(a, b) for k, (a, b) in zip(keys, draws)}, seed)

    def to_dict(self) -> dict:
        return {"N": self.n_modes, "q": self.q, "seed": self.seed,
                "couplings": [[list(k), v.real, v.imag] for k, v in sorted(self.table.items())]}

    @classmethod
    def from_dict(cls, doc: dict) -> "SykCoupling":
        try:
            table = {tuple(int(i) for i in idx): complex(re, im) for idx, re, im in doc["couplings"]}
            return cls(int(doc["N"]), int(doc["q"]), table, doc.get("seed"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ArgumentError(f"bad coupling document: {exc}") from exc


def syk_model(coupling: SykCoupling) -> SusyModel:
    """Q = i sum C_{i1..iq} a^dag_{i1} ... a^dag_{iq}, with P = identity."""
    n, q = coupling.n_modes, coupling.q
    if q % 2 == 0:
        raise ArgumentError(f"q={q} is even: a product of an even number of creation operators is bosonic")
    if q > n:
        warnings.warn(f"q={q} > N={n}: the supercharge is identically zero", stacklevel=2)
    dim = 2**n
    creators = [jw_creation(i, n) for i in range(1, n + 1)]
    Q = zero(dim, "fermionic")
    for idx, c in sorted(coupling.table.items()):
        term = creators[idx[0] - 1]
        for k in idx[1:]:
            term = term @ creators[k - 1]
        Q = Q + term * (1j * c)
    labels = {"family": "syk", "N": n, "q": q, "seed": coupling.seed}
    return SusyModel(n, Q.with_parity("fermionic"), identity(dim), labels)


def zq_symmetry_operator(n_modes: int, q: int, r: float) -> SparseOperator:
    """g^r = exp(2 pi i r Nhat / q), Nhat the total fermion number."""
    if q < 2:
        raise ArgumentError(f"q must be >= 2, got {q}")
    counts = total_number_operator(n_modes).diag().real
    return SparseOperator.diagonal(np.exp(2j * np.pi * r * counts / q))


def syk_refined_index_closed_form(n_modes: int, q: int, r: float) -> complex:
    return cmath.exp(1j * n_modes * math.pi * (r / q - 0.5)) * (2 * math.sin(math.pi * r / q)) ** n_modes


# ansatz -------------------------------------------------------------------------

def ansatz_supercharge(n_modes: int, B: list[SparseOperator],
                       tol: float = PARITY_TOL) -> tuple[SusyModel, ValidationReport]:
    """Assemble Q = sum_i a_i^dag B_i with P = identity and validate it.

    A failing nilpotency check is reported, not raised.
    """
    if len(B) != n_modes:
        raise ArgumentError(f"need {n_modes} B operators, got {len(B)}")
    dim = 2**n_modes
    Q = zero(dim, "fermionic")
    for i, b in enumerate(B, start=1):
        if b.dim != dim:
            raise ArgumentError(f"B_{i} has dimension {b.dim}, expected {dim}")
        bos, _ = parity_residuals(b)
        if bos > tol * max(1.0, b.max_abs()):
            raise ArgumentError(f"B_{i} is not bosonic (residual {bos:.3e})")
        Q = Q + jw_creation(i, n_modes) @ b
    model = SusyModel(n_modes, Q.with_parity("fermionic"), identity(dim), {"family": "ansatz"})
    return model, validate(model)


def load_ansatz_file(path) -> tuple[int, list[SparseOperator]]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        n = int(doc["N"])
        return n, [operator_from_triplets(2**n, b, "bosonic") for b in doc["B"]]
    except (KeyError, TypeError) as exc:
        raise ArgumentError(f"bad ansatz file: {exc}") from exc
