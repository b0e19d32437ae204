"""Detector-efficiency cost of distributing one list position.

A position is delivered only if every detection it needs fires.  The single
qudit needs one detection whatever m is.  QKD-distributed lists need m-2
single-qubit detections on the bit channels plus ceil(log2 m) on the channel
carrying values in 0..m-1.  The entangled-state route needs ceil(log2 m)
detections on each of m-1 channels.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .qudit import run_distribution_rounds


class Scheme(str, enum.Enum):
    SINGLE_QUDIT = "SingleQudit"
    QKD_LISTS = "QkdLists"
    ENTANGLED_STATE = "EntangledState"


def ceil_log2(m: int) -> int:
    return (m - 1).bit_length()


def channel_accounting(scheme: Scheme | str, m: int) -> list[tuple[str, int]]:
    """(channel, detections per position) for each channel the scheme uses."""
    scheme = Scheme(scheme)
    if scheme is Scheme.SINGLE_QUDIT:
        return [(f"P1->...->P{m} qudit", 1)]
    if scheme is Scheme.QKD_LISTS:
        return [(f"P{m}-P1", ceil_log2(m))] + [(f"P{m}-P{k}", 1) for k in range(2, m)]
    return [(f"P{m}-P{k}", ceil_log2(m)) for k in range(1, m)]


def detections_per_position(scheme: Scheme | str, m: int) -> int:
    return sum(d for _, d in channel_accounting(scheme, m))


@dataclass(frozen=True)
class CostModel:
    scheme: Scheme
    m: int
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not 0 <= self.eta <= 1:
            raise ValueError(f"detector efficiency must be in [0, 1], got {self.eta}")
        if self.m < 2 or (self.scheme is Scheme.ENTANGLED_STATE and self.m < 3):
            raise ValueError(f"m={self.m} too small for {self.scheme.value}")


def p_success(model: CostModel) -> float:
    return model.eta ** detections_per_position(model.scheme, model.m)


@dataclass(frozen=True)
class EfficiencyEstimate:
    scheme: str
    m: int
    eta: float
    trials: int
    successes: int
    closed_form: float

    @property
    def rate(self) -> float:
        return self.successes / self.trials

    @property
    def sigma(self) -> float:
        p = self.closed_form
        return math.sqrt(p * (1 - p) / self.trials)

    @property
    def z(self) -> float:
        if self.sigma == 0:
            return 0.0 if self.rate == self.closed_form else math.inf
        return (self.rate - self.closed_form) / self.sigma

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "m": self.m,
            "eta": self.eta,
            "trials": self.trials,
            "successes": self.successes,
            "rate": self.rate,
            "closed_form": self.closed_form,
            "sigma": self.sigma,
        }


def _qudit_successes(m: int, eta: float, trials: int, rng: np.random.Generator) -> int:
    # Rounds whose choices would pass post-selection with a perfect detector
    # are the positions on offer; a success is one where the detector fired.
    eligible = 0
    fired = 0
    while eligible < trials:
        want = trials - eligible
        batch = run_distribution_rounds(m, eta, rng, max(4096, int(1.2 * m * m * want)))
        ok = batch.basis_sum_ok & (batch.encoded_values.sum(axis=1) % m == 0)
        idx = np.flatnonzero(ok)[:want]
        eligible += len(idx)
        fired += int(batch.kept[idx].sum())
    return fired


def monte_carlo_efficiency(scheme: Scheme | str, m: int, eta: float, trials: int, rng: np.random.Generator) -> EfficiencyEstimate:
    if trials < 1:
        raise ValueError("need at least one trial")
    model = CostModel(Scheme(scheme), m, eta)
    if model.scheme is Scheme.SINGLE_QUDIT:
        wins = _qudit_successes(m, eta, trials, rng)
    else:
        d = detections_per_position(model.scheme, m)
        fired = rng.random((trials, d)) < eta
        wins = int(fired.all(axis=1).sum())
    return EfficiencyEstimate(model.scheme.value, m, eta, trials, wins, p_success(model))


def list_type_count(m: int) -> tuple[int, int]:
    """Distinct relay-bit patterns, and the m! permutation lists of the entangled scheme."""
    if m < 2:
        raise ValueError("need m >= 2")
    return 2 ** (m - 1), math.factorial(m)
