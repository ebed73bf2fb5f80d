"""Fock/qubit basis, sparse complex operators and Jordan-Wigner builders.

Basis convention: the bit string ``|n_1 ... n_N>`` is stored at index
``sum_i n_i * 2**(i-1)``, so mode 1 is the least significant bit. Every
Jordan-Wigner sign in the package depends on this choice.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ArgumentError, ValidationError

PRUNE_RTOL = 1e-14
DENSE_CAP = 2**14
HERMITIAN_TOL = 1e-10
PARITY_TOL = 1e-10

_PARITY_TAGS = ("bosonic", "fermionic", "mixed", "unknown")


@dataclass(frozen=True)
class BasisState:
    """A computational basis state, carried both as bits and as an index."""

    bits: tuple[int, ...]
    index: int

    @classmethod
    def from_index(cls, index: int, n_modes: int) -> "BasisState":
        if not 0 <= index < 2**n_modes:
            raise ArgumentError(f"index {index} outside [0, 2^{n_modes})")
        return cls(tuple((index >> k) & 1 for k in range(n_modes)), index)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BasisState":
        if any(b not in (0, 1) for b in bits):
            raise ArgumentError(f"bits must be 0/1, got {tuple(bits)}")
        return cls(tuple(int(b) for b in bits), sum(int(b) << k for k, b in enumerate(bits)))

    @property
    def parity(self) -> int:
        return -1 if sum(self.bits) % 2 else 1

    def __str__(self) -> str:
        return "|" + "".join(map(str, self.bits)) + ">"


def popcount(indices: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(indices, dtype=np.int64)).astype(np.int64)


def parity_signs(n_modes: int) -> np.ndarray:
    """(-1)^(number of set bits) for every basis index."""
    return 1 - 2 * (popcount(np.arange(2**n_modes)) & 1)


def _prune(mat: sp.csr_array) -> sp.csr_array:
    mat.sum_duplicates()
    if mat.nnz:
        mags = np.abs(mat.data)
        cutoff = PRUNE_RTOL * mags.max()
        if (mags <= cutoff).any():
            mat.data[mags <= cutoff] = 0
            mat.eliminate_zeros()
    return mat


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Immutable complex sparse matrix on the 2^N bit-string basis.

    ``parity`` is a bookkeeping tag; it is propagated through products but
    never trusted for correctness checks, which always measure residuals.
    """

    matrix: sp.csr_array
    parity: str = "unknown"

    def __post_init__(self):
        if self.parity not in _PARITY_TAGS:
            raise ArgumentError(f"unknown parity tag {self.parity!r}")
        mat = sp.csr_array(self.matrix, dtype=np.complex128, copy=True)
        if mat.shape[0] != mat.shape[1]:
            raise ArgumentError(f"operator must be square, got shape {mat.shape}")
        object.__setattr__(self, "matrix", _prune(mat))

    # construction -------------------------------------------------------
    @classmethod
    def from_triplets(cls, dim: int, triplets: Iterable[tuple[int, int, complex]],
                      parity: str = "unknown") -> "SparseOperator":
        rows, cols, vals = [], [], []
        seen = set()
        for r, c, v in triplets:
            if (r, c) in seen:
                raise ArgumentError(f"duplicate coordinate ({r}, {c})")
            if not (0 <= r < dim and 0 <= c < dim):
                raise ArgumentError(f"coordinate ({r}, {c}) outside dimension {dim}")
            seen.add((r, c))
            rows.append(r)
            cols.append(c)
            vals.append(complex(v))
        mat = sp.coo_array((np.array(vals, dtype=np.complex128), (rows, cols)), shape=(dim, dim))
        return cls(mat.tocsr(), parity)

    @classmethod
    def from_dense(cls, array, parity: str = "unknown") -> "SparseOperator":
        return cls(sp.csr_array(np.asarray(array, dtype=np.complex128)), parity)

    @classmethod
    def diagonal(cls, values, parity: str = "bosonic") -> "SparseOperator":
        values = np.asarray(values, dtype=np.complex128)
        return cls(sp.diags_array(values, format="csr"), parity)

    # views ---------------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_modes(self) -> int:
        n = self.dim.bit_length() - 1
        if 2**n != self.dim:
            raise ArgumentError(f"dimension {self.dim} is not a power of two")
        return n

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def entries(self) -> list[tuple[int, int, complex]]:
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [(int(coo.row[k]), int(coo.col[k]), complex(coo.data[k])) for k in order]

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def diag(self) -> np.ndarray:
        return self.matrix.diagonal()

    def is_diagonal(self) -> bool:
        coo = self.matrix.tocoo()
        return bool(np.all(coo.row == coo.col))

    def max_abs(self) -> float:
        return float(np.abs(self.matrix.data).max()) if self.nnz else 0.0

    def trace(self) -> complex:
        return complex(self.matrix.diagonal().sum())

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(vector, dtype=np.complex128)

    def with_parity(self, parity: str) -> "SparseOperator":
        return SparseOperator(self.matrix, parity)

    # arithmetic ------------------------------------------------------------
    def _check(self, other: "SparseOperator"):
        if self.dim != other.dim:
            raise ArgumentError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        self._check(other)
        return SparseOperator(self.matrix + other.matrix, _sum_parity(self.parity, other.parity))

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        self._check(other)
        return SparseOperator(self.matrix - other.matrix, _sum_parity(self.parity, other.parity))

    def __neg__(self) -> "SparseOperator":
        return SparseOperator(-self.matrix, self.parity)

    def __mul__(self, scalar: complex) -> "SparseOperator":
        if isinstance(scalar, SparseOperator):
            raise TypeError("use @ for operator products")
        return SparseOperator(self.matrix * complex(scalar), self.parity)

    __rmul__ = __mul__

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        self._check(other)
        return SparseOperator(self.matrix @ other.matrix, _product_parity(self.parity, other.parity))

    @property
    def H(self) -> "SparseOperator":
        return SparseOperator(self.matrix.conj().T, self.parity)

    def __repr__(self) -> str:
        return f"SparseOperator(dim={self.dim}, nnz={self.nnz}, parity={self.parity!r})"


def _sum_parity(a: str, b: str) -> str:
    if a == b:
        return a
    if "unknown" in (a, b):
        return "unknown"
    return "mixed"


def _product_parity(a: str, b: str) -> str:
    if a in ("bosonic", "fermionic") and b in ("bosonic", "fermionic"):
        return "bosonic" if a == b else "fermionic"
    if "unknown" in (a, b):
        return "unknown"
    return "mixed"


# functional aliases --------------------------------------------------------

def add(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    return a + b


def scale(c: complex, a: SparseOperator) -> SparseOperator:
    return a * c


def mul(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    return a @ b


def adjoint(a: SparseOperator) -> SparseOperator:
    return a.H


def commutator(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    return a @ b - b @ a


def anticommutator(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    return a @ b + b @ a


def operator_norm_bound(a: SparseOperator) -> float:
    """Upper bound on the spectral norm: sqrt(max row sum * max column sum)."""
    if not a.nnz:
        return 0.0
    absmat = abs(a.matrix)
    row = float(absmat.sum(axis=1).max())
    col = float(absmat.sum(axis=0).max())
    return float(np.sqrt(row * col))


def residual(a: SparseOperator) -> float:
    """Largest entry magnitude; the package's standard residual measure."""
    return a.max_abs()


# builders --------------------------------------------------------------------

def identity(dim: int) -> SparseOperator:
    return SparseOperator(sp.eye_array(dim, format="csr"), "bosonic")


def zero(dim: int, parity: str = "bosonic") -> SparseOperator:
    return SparseOperator(sp.csr_array((dim, dim)), parity)


def _check_mode(i: int, n_modes: int):
    if n_modes < 1:
        raise ArgumentError(f"need at least one mode, got N={n_modes}")
    if not 1 <= i <= n_modes:
        raise ArgumentError(f"mode index {i} outside 1..{n_modes}")


def jw_annihilation(i: int, n_modes: int) -> SparseOperator:
    """Jordan-Wigner image of a_i with the parity string on modes j < i."""
    _check_mode(i, n_modes)
    bit = 1 << (i - 1)
    idx = np.arange(2**n_modes)
    cols = idx[(idx & bit) != 0]
    rows = cols ^ bit
    signs = 1 - 2 * (popcount(cols & (bit - 1)) & 1)
    dim = 2**n_modes
    mat = sp.csr_array((signs.astype(np.complex128), (rows, cols)), shape=(dim, dim))
    return SparseOperator(mat, "fermionic")


def jw_creation(i: int, n_modes: int) -> SparseOperator:
    return jw_annihilation(i, n_modes).H


def number_operator(i: int, n_modes: int) -> SparseOperator:
    _check_mode(i, n_modes)
    occ = (np.arange(2**n_modes) >> (i - 1)) & 1
    return SparseOperator.diagonal(occ.astype(float))


def total_number_operator(n_modes: int) -> SparseOperator:
    return SparseOperator.diagonal(popcount(np.arange(2**n_modes)).astype(float))


def parity_operator(n_modes: int) -> SparseOperator:
    """(-1)^F, i.e. sigma_z on every qubit."""
    if n_modes < 1:
        raise ArgumentError(f"need at least one mode, got N={n_modes}")
    return SparseOperator.diagonal(parity_signs(n_modes).astype(float))


def parity_residuals(a: SparseOperator) -> tuple[float, float]:
    """Return (bosonic, fermionic) residuals: max|a -/+ (-1)^F a (-1)^F|."""
    coo = a.matrix.tocoo()
    if not coo.nnz:
        return 0.0, 0.0
    flips = (popcount(coo.row ^ coo.col) & 1).astype(bool)
    mags = np.abs(coo.data)
    bos = 2 * float(mags[flips].max()) if flips.any() else 0.0
    fer = 2 * float(mags[~flips].max()) if (~flips).any() else 0.0
    return bos, fer


def classify_parity(a: SparseOperator, tol: float = PARITY_TOL) -> str:
    bos, fer = parity_residuals(a)
    if bos <= tol:
        return "bosonic"
    if fer <= tol:
        return "fermionic"
    return "mixed"


def hermiticity_residual(a: SparseOperator) -> float:
    return residual(a - a.H)


def hermitian_function(a: SparseOperator, c: complex, *, max_dim: int = DENSE_CAP,
                       tol: float = HERMITIAN_TOL) -> SparseOperator:
    """exp(c * A) for Hermitian A, via eigendecomposition.

    Diagonal inputs are exponentiated entrywise; everything else goes through
    a dense ``eigh`` capped at ``max_dim``.
    """
    dev = hermiticity_residual(a)
    if dev > tol:
        raise ValidationError(f"operator is not Hermitian (max |A - A^dag| = {dev:.3e})", dev)
    c = complex(c)
    parity = "bosonic" if a.parity == "bosonic" else "unknown"
    if a.is_diagonal():
        return SparseOperator.diagonal(np.exp(c * a.diag().real), parity)
    if a.dim > max_dim:
        raise ArgumentError(f"dimension {a.dim} exceeds dense cap {max_dim}")
    dense = a.to_dense()
    w, v = np.linalg.eigh((dense + dense.conj().T) / 2)
    return SparseOperator.from_dense((v * np.exp(c * w)) @ v.conj().T, parity)
