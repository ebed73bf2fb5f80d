"""Supersymmetric Hadamard test and one-clean-qubit trace estimation.

Exact mode evaluates the ancilla outcome probability from the matrix
element or trace directly and so accepts non-unitary operators such as
``U_S + E``. Sampling mode models a physical circuit: it needs a unitary,
computes the Born probability of each drawn register state and flips a
seeded biased coin per shot.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ArgumentError, ValidationError
from .fockalg import (
    SparseOperator,
    commutator,
    hermitian_function,
    identity,
    parity_operator,
    parity_residuals,
    residual,
)
from .spectral import diagonalize, sector_indices
from .susycore import SusyModel, exact_deformation

NORM_TOL = 1e-12
UNITARITY_TOL = 1e-8
CLOSURE_TOL = 1e-8
CHUNK = 4096
_SNAP = 1e-12


@dataclass(frozen=True)
class SampleRecord:
    shots: int
    zeros: int
    seed: int
    mode: str

    @property
    def p0_hat(self) -> float:
        return self.zeros / self.shots

    @property
    def ci95_halfwidth(self) -> float:
        p = self.p0_hat
        return 1.96 * math.sqrt(p * (1 - p) / self.shots)

    def covers(self, p0: float) -> bool:
        return abs(self.p0_hat - p0) <= self.ci95_halfwidth

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(p0_hat=self.p0_hat, ci95_halfwidth=self.ci95_halfwidth)
        return out


def _streams(seed: int, shots: int):
    """One generator per CHUNK shots, derived from (seed, chunk index)."""
    children = np.random.SeedSequence(seed).spawn(-(-shots // CHUNK))
    for k, child in enumerate(children):
        yield np.random.default_rng(child), min(CHUNK, shots - k * CHUNK)


def _snap(p: np.ndarray | float):
    p = np.clip(p, 0.0, 1.0)
    return np.where(p > 1 - _SNAP, 1.0, np.where(p < _SNAP, 0.0, p))


def unitarity_residual(op: SparseOperator) -> float:
    return residual(op.H @ op - identity(op.dim))


def _require_unitary(op: SparseOperator):
    res = unitarity_residual(op)
    if res > UNITARITY_TOL:
        raise ValidationError(f"sampling needs a unitary (max |U^dag U - I| = {res:.2e})", res)


def _require_shots(shots: int):
    if shots < 1:
        raise ArgumentError(f"shots must be positive, got {shots}")


def _check_state(state) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    norm = np.linalg.norm(state)
    if abs(norm - 1) > NORM_TOL:
        raise ArgumentError(f"state is not normalized (|psi| = {norm:.15f})")
    return state


# Hadamard test -----------------------------------------------------------------

def hadamard_test_exact(state, op: SparseOperator, part: str = "real") -> float:
    """p(0) = (1 + Re<s|op|s>)/2, or with Im for the S^dag-prepared ancilla."""
    state = _check_state(state)
    if op.dim != state.size:
        raise ArgumentError(f"operator dimension {op.dim} does not match state size {state.size}")
    amp = np.vdot(state, op.apply(state))
    if part == "real":
        return 0.5 * (1 + amp.real)
    if part == "imaginary":
        return 0.5 * (1 + amp.imag)
    raise ArgumentError(f"part must be 'real' or 'imaginary', got {part!r}")


def hadamard_test_sample(state, unitary: SparseOperator, shots: int, seed: int,
                         part: str = "real") -> SampleRecord:
    _require_shots(shots)
    _require_unitary(unitary)
    p0 = float(_snap(hadamard_test_exact(state, unitary, part)))
    zeros = sum(int((rng.random(n) < p0).sum()) for rng, n in _streams(seed, shots))
    return SampleRecord(shots, zeros, seed, "hadamard")


# trace estimation ----------------------------------------------------------------

def _register(model_or_dim) -> tuple[int, SparseOperator, SparseOperator, SusyModel | None]:
    if isinstance(model_or_dim, SusyModel):
        m = model_or_dim
        return m.dim, m.P, m.parity, m
    dim = int(model_or_dim)
    n = dim.bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise ArgumentError(f"register dimension {dim} is not a power of two")
    return dim, identity(dim), parity_operator(n), None


def _normalizer(dim: int, P: SparseOperator, normalization: str) -> float:
    if normalization == "full_space":
        return float(dim)
    if normalization == "projected":
        d = P.trace().real
        if d < 0.5:
            raise ArgumentError("projected normalization with an empty projected space")
        return d
    raise ArgumentError(f"normalization must be 'full_space' or 'projected', got {normalization!r}")


def trace_estimation_exact(model_or_dim, op: SparseOperator, normalization: str = "full_space") -> float:
    """p(0) = (1 + Re Tr[P (-1)^F op] / D) / 2 with D = 2^N or Tr P."""
    dim, P, F, _ = _register(model_or_dim)
    if op.dim != dim:
        raise ArgumentError(f"operator dimension {op.dim} does not match register {dim}")
    D = _normalizer(dim, P, normalization)
    return 0.5 * (1 + (P @ F @ op).trace().real / D)


def per_state_p0(model_or_dim, op: SparseOperator, normalization: str = "full_space") -> tuple[np.ndarray, np.ndarray]:
    """Register pool and ancilla p(0) for each pure register basis state.

    The weight is the diagonal of P (-1)^F op, so in full-space mode a basis
    state outside the projected space contributes p(0) = 1/2 and the pool
    average reproduces ``trace_estimation_exact``.
    """
    dim, P, F, model = _register(model_or_dim)
    _normalizer(dim, P, normalization)
    if normalization == "projected":
        if model is None:
            pool = np.arange(dim)
        else:
            sectors = sector_indices(model)
            pool = np.sort(np.concatenate([sectors[1], sectors[-1]]))
    else:
        pool = np.arange(dim)
    diag = (P @ F @ op).diag()
    return pool, 0.5 * (1 + diag[pool].real)


def trace_estimation_sample(model_or_dim, unitary: SparseOperator, shots: int, seed: int,
                            normalization: str = "full_space") -> SampleRecord:
    """Draw a uniform register basis state per shot, then the ancilla outcome."""
    _require_shots(shots)
    _require_unitary(unitary)
    pool, p0 = per_state_p0(model_or_dim, unitary, normalization)
    p0 = _snap(p0)
    zeros = 0
    for rng, n in _streams(seed, shots):
        picks = rng.integers(pool.size, size=n)
        zeros += int((rng.random(n) < p0[picks]).sum())
    return SampleRecord(shots, zeros, seed, "trace")


# robustness -----------------------------------------------------------------------

def _require_closed(model: SusyModel, U: SparseOperator, which: str = "Q"):
    charge = model.Q if which == "Q" else model.Q.H
    res = residual(commutator(charge, U))
    if res > CLOSURE_TOL:
        raise ValidationError(f"circuit is not closed under {which} (residual {res:.2e})", res)
    return res


def robustness_report(model: SusyModel, U_S: SparseOperator, psi: SparseOperator, mode: str,
                      states: list[np.ndarray] | None = None,
                      normalization: str = "projected") -> dict:
    """Exact p(0) before and after U_S -> U_S + {Q, psi}.

    ``hadamard_on_ground`` compares each supplied (ground) state. ``trace``
    compares the averaged outcome and also reports the largest per-register-
    state shift, which is generally nonzero even though the average is not.
    """
    _require_closed(model, U_S)
    deformed = U_S + exact_deformation(model, psi)
    if mode == "hadamard_on_ground":
        if states is None:
            states = diagonalize(model).ground_states
        devs = [abs(hadamard_test_exact(s, deformed) - hadamard_test_exact(s, U_S)) for s in states]
        return {"mode": mode, "deviations": devs, "max_deviation": max(devs, default=0.0)}
    if mode == "trace":
        before = trace_estimation_exact(model, U_S, normalization)
        after = trace_estimation_exact(model, deformed, normalization)
        _, p_before = per_state_p0(model, U_S, normalization)
        _, p_after = per_state_p0(model, deformed, normalization)
        return {
            "mode": mode,
            "p0_before": before,
            "p0_after": after,
            "averaged_deviation": abs(after - before),
            "per_state_max_deviation": float(np.abs(p_after - p_before).max()),
        }
    raise ArgumentError(f"mode must be 'hadamard_on_ground' or 'trace', got {mode!r}")


def admissible_psi(model: SusyModel, seed: int, max_dim: int = 64) -> SparseOperator:
    """Random fermionic psi for which exp(i Re{Q, psi}) is itself Q-closed.

    Solves the real-linear constraint [Q, Re{Q, psi}] = 0 over all
    parity-odd psi and draws a Gaussian combination of the null space.
    Dropping exp(i Re E) from a trace is exact only in this setting; for a
    generic psi the identity fails at second order in E.
    """
    if model.dim > max_dim:
        raise ArgumentError(f"dimension {model.dim} exceeds the admissible-psi solver cap {max_dim}")
    Q = model.Q.to_dense()
    signs = model.parity.diag().real
    rows, cols = np.nonzero(np.outer(signs, signs) < 0)

    def constraint(psi: np.ndarray) -> np.ndarray:
        E = Q @ psi + psi @ Q
        re_e = (E + E.conj().T) / 2
        c = Q @ re_e - re_e @ Q
        return np.concatenate([c.real.ravel(), c.imag.ravel()])

    basis = []
    for r, c in zip(rows, cols):
        for unit in (1.0, 1j):
            psi = np.zeros_like(Q)
            psi[r, c] = unit
            basis.append(constraint(psi))
    A = np.column_stack(basis)
    _, s, vh = np.linalg.svd(A)
    rank = int((s > 1e-10 * max(1.0, s[0])).sum())
    null = vh[rank:].T
    rng = np.random.default_rng(seed)
    x = null @ rng.normal(size=null.shape[1])
    psi = np.zeros_like(Q)
    psi[rows, cols] = x[0::2] + 1j * x[1::2]
    psi /= max(np.abs(psi).max(), 1e-300)
    return SparseOperator.from_dense(psi, "fermionic")


def drop_exact_factor_check(model: SusyModel, U_hat: SparseOperator, E: SparseOperator,
                            tol: float = 1e-8) -> dict:
    """Compare Tr_H[(-1)^F U_hat exp(i Re E)] with Tr_H[(-1)^F U_hat].

    ``U_hat`` must commute with both Q and Q^dag. The identity additionally
    presumes exp(i Re E) is a supersymmetric circuit; that closure residual is
    reported as ``u_e_closure_residual`` and gates ``precondition_met``.
    """
    _require_closed(model, U_hat, "Q")
    _require_closed(model, U_hat, "Q^dag")
    bos, _ = parity_residuals(E)
    if bos > CLOSURE_TOL * max(1.0, E.max_abs()):
        raise ValidationError(f"E is not bosonic (residual {bos:.2e})", bos)
    re_e = ((E + E.H) * 0.5).with_parity("bosonic")
    U_E = hermitian_function(re_e, 1j)
    closure = residual(commutator(model.Q, U_E))
    PF = model.P @ model.parity
    lhs = (PF @ U_hat @ U_E).trace()
    rhs = (PF @ U_hat).trace()
    scale = max(1.0, model.P.trace().real)
    return {
        "trace_with_factor": lhs,
        "trace_without_factor": rhs,
        "difference": abs(lhs - rhs),
        "scale": scale,
        "u_e_closure_residual": closure,
        "precondition_met": closure <= CLOSURE_TOL,
        "passed": abs(lhs - rhs) <= tol * scale,
    }
