"""Exact diagonalization on the projected Hilbert space.

Ground states, the Witten index (by kernel count and by trace), spectral
pairing, generalized indices with Euclidean insertions and ground-state
correlators with Lorentzian insertions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, NumericalIntegrityError, SusyError
from .fockalg import (
    DENSE_CAP,
    SparseOperator,
    hermitian_function,
    operator_norm_bound,
    parity_residuals,
    parity_signs,
)
from .susycore import SusyModel, exact_deformation, is_closed, require_valid

ZERO_TOL = 1e-10
PAIRING_TOL = 1e-8
INDEX_ROUNDING_TOL = 1e-9
CLOSURE_WARN_TOL = 1e-8
EXP_BUDGET = 50.0


class NoGroundStateError(SusyError):
    """The model has no supersymmetric (E = 0) ground states."""


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    parities: np.ndarray
    n_B: int
    n_F: int
    witten_index: int
    tolerance: float
    ground_states: list[np.ndarray] = field(repr=False, default_factory=list)
    ground_parities: list[int] = field(default_factory=list)
    pairing_violations: list[dict] = field(default_factory=list)

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues.min()) if self.eigenvalues.size else 0.0

    def to_dict(self) -> dict:
        return {
            "schema": "susyqc.spectrum/1",
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "parities": [int(p) for p in self.parities],
            "n_B": self.n_B,
            "n_F": self.n_F,
            "witten_index": self.witten_index,
            "tolerance": self.tolerance,
            "pairing_violations": self.pairing_violations,
        }


def sector_indices(model: SusyModel) -> dict[int, np.ndarray]:
    """Basis indices of the projected space split by parity (+1, -1).

    Only projectors diagonal in the computational basis are supported, which
    covers every built-in family.
    """
    P = model.P
    if not P.is_diagonal():
        raise ArgumentError("spectral routines need a projector diagonal in the bit-string basis")
    d = P.diag().real
    keep = np.isclose(d, 1.0, atol=1e-12)
    if not np.all(keep | np.isclose(d, 0.0, atol=1e-12)):
        raise ArgumentError("projector diagonal is not 0/1")
    signs = parity_signs(model.n_modes)
    return {s: np.flatnonzero(keep & (signs == s)) for s in (1, -1)}


def zero_threshold(model: SusyModel, tolerance: float = ZERO_TOL) -> float:
    return tolerance * max(1.0, operator_norm_bound(model.hamiltonian))


def _pairing_violations(eigs: np.ndarray, pars: np.ndarray, floor: float, tol: float) -> list[dict]:
    mask = eigs > floor
    eigs, pars = eigs[mask], pars[mask]
    order = np.argsort(eigs)
    eigs, pars = eigs[order], pars[order]
    out = []
    start = 0
    for k in range(1, len(eigs) + 1):
        if k == len(eigs) or eigs[k] - eigs[k - 1] > tol * max(1.0, eigs[k]):
            block = pars[start:k]
            nb, nf = int((block > 0).sum()), int((block < 0).sum())
            if nb != nf:
                out.append({"energy": float(eigs[start:k].mean()), "n_B": nb, "n_F": nf})
            start = k
    return out


def diagonalize(model: SusyModel, tolerance: float = ZERO_TOL, max_dim: int = DENSE_CAP) -> SpectralReport:
    """Full spectrum of H restricted to the projected space, sector by sector."""
    require_valid(model)
    if model.projected_dim > max_dim:
        raise ArgumentError(
            f"projected dimension {model.projected_dim} exceeds dense cap {max_dim}; "
            "iterative solvers are not provided, use a smaller system")
    H = model.hamiltonian.matrix
    threshold = zero_threshold(model, tolerance)
    eig_parts, par_parts, ground, ground_par = [], [], [], []
    for sign, idx in sector_indices(model).items():
        if not idx.size:
            continue
        block = H[idx][:, idx].toarray()
        w, v = np.linalg.eigh((block + block.conj().T) / 2)
        eig_parts.append(w)
        par_parts.append(np.full(w.size, sign))
        for k in np.flatnonzero(w < threshold):
            vec = np.zeros(model.dim, dtype=complex)
            vec[idx] = v[:, k]
            ground.append(vec)
            ground_par.append(sign)
    eigs = np.concatenate(eig_parts) if eig_parts else np.zeros(0)
    pars = np.concatenate(par_parts) if par_parts else np.zeros(0, dtype=int)
    order = np.argsort(eigs, kind="stable")
    eigs, pars = eigs[order], pars[order]
    n_B = sum(1 for p in ground_par if p > 0)
    n_F = len(ground_par) - n_B
    index = n_B - n_F
    by_trace = witten_index(model)
    if index != by_trace:
        raise NumericalIntegrityError(
            f"kernel count gives index {index} but Tr P(-1)^F gives {by_trace}; "
            f"zero threshold {threshold:.2e} may be mis-scaled")
    violations = _pairing_violations(eigs, pars, threshold, PAIRING_TOL)
    return SpectralReport(eigs, pars, n_B, n_F, index, tolerance, ground, ground_par, violations)


def witten_index(model: SusyModel) -> int:
    """Tr P (-1)^F, rounded; no diagonalization."""
    require_valid(model)
    value = (model.P @ model.parity).trace()
    nearest = round(value.real)
    if abs(value - nearest) > INDEX_ROUNDING_TOL:
        raise NumericalIntegrityError(f"Tr P(-1)^F = {value} is not an integer")
    return int(nearest)


def _check_insertion(model: SusyModel, op: SparseOperator):
    if op.dim != model.dim:
        raise ArgumentError(f"insertion has dimension {op.dim}, model has {model.dim}")
    if op.parity not in ("bosonic", "fermionic"):
        bos, fer = parity_residuals(op)
        op = op.with_parity("bosonic" if bos <= fer else "fermionic")
    _, res = is_closed(op, model)
    if res > CLOSURE_WARN_TOL:
        warnings.warn(f"insertion is not Q-closed (residual {res:.2e})", stacklevel=3)


def default_tau_max(model: SusyModel) -> float:
    return EXP_BUDGET / max(operator_norm_bound(model.hamiltonian), 1e-12)


def generalized_witten(model: SusyModel, insertions: list[tuple[SparseOperator, float]],
                       tau_max: float | None = None) -> complex:
    """Tr[P (-1)^F O_1(tau_1) ... O_n(tau_n)], O(tau) = e^{tau H} O e^{-tau H}.

    Insertions are applied in the listed order, including at coincident times.
    """
    require_valid(model)
    taus = [float(t) for _, t in insertions]
    if any(t < 0 for t in taus) or taus != sorted(taus):
        raise ArgumentError(f"Euclidean times must be ascending and >= 0, got {taus}")
    tau_max = default_tau_max(model) if tau_max is None else tau_max
    if taus and taus[-1] > tau_max:
        raise ArgumentError(f"tau {taus[-1]} exceeds tau_max {tau_max:.3g}")
    H = model.hamiltonian
    acc = model.P @ model.parity
    for op, tau in insertions:
        _check_insertion(model, op)
        if tau:
            op = hermitian_function(H, tau) @ op @ hermitian_function(H, -tau)
        acc = acc @ op
    return acc.trace()


def deformation_invariance_check(model: SusyModel, insertions: list[tuple[SparseOperator, float]],
                                 psi_list: list[SparseOperator], tol: float = 1e-8) -> dict:
    """Compare Z_P[O_1..O_n] with each O_k shifted by {Q, psi_k}."""
    if len(psi_list) != len(insertions):
        raise ArgumentError("need one psi per insertion")
    base = generalized_witten(model, insertions)
    scale = max(1.0, abs(base))
    diffs = []
    for k, psi in enumerate(psi_list):
        shifted = list(insertions)
        op, tau = shifted[k]
        shifted[k] = (op + exact_deformation(model, psi), tau)
        diffs.append(abs(generalized_witten(model, shifted) - base))
    return {"base": base, "differences": diffs, "scale": scale,
            "passed": all(d <= tol * scale for d in diffs)}


@dataclass
class CorrelatorResult:
    values: list[complex]
    parities: list[int]

    @property
    def average(self) -> complex:
        return complex(np.mean(self.values))

    def to_dict(self) -> dict:
        return {
            "schema": "susyqc.correlator/1",
            "values": [[v.real, v.imag] for v in self.values],
            "parities": self.parities,
            "average": [self.average.real, self.average.imag],
        }


def ground_correlator(model: SusyModel, insertions: list[tuple[SparseOperator, float]],
                      report: SpectralReport | None = None) -> CorrelatorResult:
    """<Omega| O_1(t_1) ... O_n(t_n) |Omega> for each orthonormal ground state."""
    report = report or diagonalize(model)
    if not report.ground_states:
        raise NoGroundStateError("no supersymmetric ground states")
    H = model.hamiltonian
    acc = None
    for op, t in insertions:
        if op.dim != model.dim:
            raise ArgumentError(f"insertion has dimension {op.dim}, model has {model.dim}")
        if t:
            op = hermitian_function(H, 1j * t) @ op @ hermitian_function(H, -1j * t)
        acc = op if acc is None else acc @ op
    values = []
    for vec in report.ground_states:
        out = vec if acc is None else acc.apply(vec)
        values.append(complex(np.vdot(vec, out)))
    return CorrelatorResult(values, list(report.ground_parities))
