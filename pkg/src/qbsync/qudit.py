"""State-vector simulation of the single-qudit list distribution.

One qudit of dimension ``m`` travels P_1 -> P_2 -> ... -> P_m.  Each process
applies a basis phase and an encoding phase (both diagonal), and P_m
projects onto the initial uniform superposition.  A round is kept when the
detector fires, the projection succeeds and the revealed basis choices sum
to zero mod ``m``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .lists import CorrelatedListSet

ATOL = 1e-9


class BudgetExhausted(RuntimeError):
    """Raised when list generation runs out of distribution rounds."""

    def __init__(self, kept: int, wanted: int, rounds: int):
        super().__init__(f"kept {kept}/{wanted} positions after {rounds} rounds")
        self.kept = kept
        self.wanted = wanted
        self.rounds = rounds


def omega(m: int) -> complex:
    return cmath.exp(2j * math.pi / m)


@dataclass(frozen=True, eq=False)
class QuditState:
    amplitudes: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def overlap(self, other: "QuditState") -> complex:
        """Inner product <other|self>."""
        return complex(np.vdot(other.amplitudes, self.amplitudes))

    def allclose(self, other: "QuditState", atol: float = ATOL) -> bool:
        return self.dim == other.dim and bool(np.allclose(self.amplitudes, other.amplitudes, rtol=0, atol=atol))


def prepare_initial(m: int) -> QuditState:
    """Uniform superposition over the ``m`` basis states."""
    if m < 2:
        raise ValueError(f"need m >= 2 processes, got {m}")
    return QuditState(np.full(m, 1 / math.sqrt(m), dtype=np.complex128))


def _check_index(x: int, m: int, what: str) -> None:
    if not 0 <= x < m:
        raise ValueError(f"{what} must lie in 0..{m - 1}, got {x}")


def basis_phases(m: int, c: int) -> np.ndarray:
    """Diagonal of the basis unitary: 1 on |0>, omega**c elsewhere."""
    d = np.full(m, omega(m) ** c, dtype=np.complex128)
    d[0] = 1.0
    return d


def encoding_phases(m: int, n: int) -> np.ndarray:
    """Diagonal of the encoding unitary: omega**(j*n) on |j>."""
    j = np.arange(m)
    return np.exp(2j * np.pi * ((j * n) % m) / m)


def apply_basis_phase(state: QuditState, c: int) -> QuditState:
    _check_index(c, state.dim, "basis choice")
    return QuditState(state.amplitudes * basis_phases(state.dim, c))


def apply_encoding(state: QuditState, n: int) -> QuditState:
    _check_index(n, state.dim, "encoded value")
    return QuditState(state.amplitudes * encoding_phases(state.dim, n))


def pass_probability(state: QuditState) -> float:
    """Probability that the projection onto the initial state succeeds."""
    p = abs(state.overlap(prepare_initial(state.dim))) ** 2
    return _snap(p)


def _snap(p):
    # exact 0/1 outcomes must stay exact under float phase error
    p = np.where(p > 1 - ATOL, 1.0, p)
    p = np.where(p < ATOL, 0.0, p)
    return float(p) if np.ndim(p) == 0 else p


@dataclass(frozen=True)
class Detection:
    """Outcome at P_m.  ``passed`` is None when the detector did not fire."""

    detected: bool
    passed: bool | None = None


def measure_initial_projection(state: QuditState, eta: float, rng: np.random.Generator) -> Detection:
    if not 0 <= eta <= 1:
        raise ValueError(f"detector efficiency must be in [0, 1], got {eta}")
    if rng.random() >= eta:
        return Detection(False)
    return Detection(True, bool(rng.random() < pass_probability(state)))


@dataclass(frozen=True)
class RoundRecord:
    basis_choices: tuple[int, ...]
    encoded_values: tuple[int, ...]
    detected: bool
    projected_initial: bool
    basis_sum_ok: bool = field(init=False)

    def __post_init__(self):
        m = len(self.basis_choices)
        object.__setattr__(self, "basis_sum_ok", sum(self.basis_choices) % m == 0)

    @property
    def m(self) -> int:
        return len(self.basis_choices)

    @property
    def kept(self) -> bool:
        return self.detected and self.projected_initial and self.basis_sum_ok

    def reveals(self) -> list[tuple[int, int]]:
        """Basis announcements (process id, choice), P_m first and P_1 last."""
        return [(k + 1, self.basis_choices[k]) for k in reversed(range(self.m))]


def _draw_choices(m: int, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    c = rng.integers(0, m, size=(size, m))
    n = np.empty((size, m), dtype=np.int64)
    n[:, 0] = rng.integers(0, m, size=size)
    n[:, 1:] = rng.integers(0, 2, size=(size, m - 1))
    return c, n


def run_distribution_round(m: int, eta: float, rng: np.random.Generator) -> RoundRecord:
    """One pass of the qudit through all ``m`` processes."""
    state = prepare_initial(m)
    c, n = _draw_choices(m, rng, 1)
    c, n = c[0], n[0]
    for k in range(m):
        state = apply_basis_phase(state, int(c[k]))
        state = apply_encoding(state, int(n[k]))
    det = measure_initial_projection(state, eta, rng)
    return RoundRecord(tuple(int(x) for x in c), tuple(int(x) for x in n), det.detected, bool(det.passed))


@dataclass
class RoundBatch:
    """Vectorised counterpart of many ``RoundRecord``s."""

    basis_choices: np.ndarray   # (size, m)
    encoded_values: np.ndarray  # (size, m)
    pass_prob: np.ndarray
    detected: np.ndarray
    projected_initial: np.ndarray

    @property
    def basis_sum_ok(self) -> np.ndarray:
        m = self.basis_choices.shape[1]
        return self.basis_choices.sum(axis=1) % m == 0

    @property
    def kept(self) -> np.ndarray:
        return self.detected & self.projected_initial & self.basis_sum_ok


def run_distribution_rounds(m: int, eta: float, rng: np.random.Generator, size: int) -> RoundBatch:
    """``size`` independent rounds, applying the same per-process phases row-wise."""
    if m < 2:
        raise ValueError(f"need m >= 2 processes, got {m}")
    if not 0 <= eta <= 1:
        raise ValueError(f"detector efficiency must be in [0, 1], got {eta}")
    c, n = _draw_choices(m, rng, size)
    amps = np.full((size, m), 1 / math.sqrt(m), dtype=np.complex128)
    w = omega(m)
    j = np.arange(m)
    for k in range(m):
        amps[:, 1:] *= (w ** c[:, k])[:, None]
        amps *= np.exp(2j * np.pi * ((j[None, :] * n[:, k : k + 1]) % m) / m)
    p = _snap(np.abs(amps.sum(axis=1) / math.sqrt(m)) ** 2)
    detected = rng.random(size) < eta
    passed = detected & (rng.random(size) < p)
    return RoundBatch(c, n, p, detected, passed)


def default_budget(m: int, length: int) -> int:
    return 100 * m * m * length


def generate_list_set(
    m: int,
    length: int,
    eta: float,
    rng: np.random.Generator,
    budget: int | None = None,
) -> CorrelatedListSet:
    """Run rounds until ``length`` positions are kept.

    Position j of list k is the value encoded by P_k in the j-th kept round.
    ``rounds_consumed`` counts rounds up to and including the last kept one.
    """
    if length < 1:
        raise ValueError("list length must be >= 1")
    budget = default_budget(m, length) if budget is None else budget
    kept_rows: list[np.ndarray] = []
    n_kept = 0
    used = 0
    while n_kept < length:
        if used >= budget:
            raise BudgetExhausted(n_kept, length, used)
        want = length - n_kept
        chunk = min(budget - used, max(1024, int(1.2 * m * m * want)))
        batch = run_distribution_rounds(m, eta, rng, chunk)
        idx = np.flatnonzero(batch.kept)
        if len(idx) >= want:
            idx = idx[:want]
            used += int(idx[-1]) + 1
        else:
            used += chunk
        kept_rows.append(batch.encoded_values[idx])
        n_kept += len(idx)
    lists = np.concatenate(kept_rows, axis=0).T.copy()
    return CorrelatedListSet(m, lists, provenance="quantum", rounds_consumed=used)
