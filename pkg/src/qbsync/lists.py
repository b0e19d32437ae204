"""Correlated private lists and the claims built from them.

Column j of a list set is one distributed position.  The source list l_1
holds values in 0..m-1; the relay lists hold bits.  Where l_1 is 0 or 1 every
relay holds the same bit; where l_1 = N >= 2 the relay bits sum to m - N.

Post-selection in the qudit protocol keeps exactly the tuples whose values
sum to 0 mod m, each with equal weight, so the relay bits of a position are
uniform over all 2**(m-1) patterns and l_1 is determined by them.  In
particular P(l_1 = b) = 2**-(m-1) for each bit b, which fixes the expected
length of an honest claim.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

PROVENANCES = ("quantum", "dealer")


@dataclass(frozen=True, eq=False)
class CorrelatedListSet:
    m: int
    lists: np.ndarray  # shape (m, L); row 0 is l_1
    provenance: str = "dealer"
    rounds_consumed: int | None = None

    def __post_init__(self):
        lists = np.asarray(self.lists, dtype=np.int64)
        if lists.ndim != 2 or lists.shape[0] != self.m:
            raise ValueError(f"expected {self.m} lists of equal length, got shape {lists.shape}")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        lists.setflags(write=False)
        object.__setattr__(self, "lists", lists)

    @property
    def length(self) -> int:
        return self.lists.shape[1]

    def list_of(self, k: int) -> np.ndarray:
        """Private list of process ``k`` (1-based)."""
        return self.lists[k - 1]

    def to_json(self) -> str:
        return json.dumps(
            {"m": self.m, "L": self.length, "provenance": self.provenance, "lists": self.lists.tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "CorrelatedListSet":
        d = json.loads(text)
        rows = d["lists"]
        if len(rows) != d["m"] or any(len(r) != d["L"] for r in rows):
            raise ValueError("list set JSON does not match its declared m and L")
        return cls(int(d["m"]), np.array(rows, dtype=np.int64).reshape(d["m"], d["L"]), d["provenance"])


@dataclass
class ValidationReport:
    violations: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_list_set(ls: CorrelatedListSet) -> ValidationReport:
    """Report every position breaking a range or correlation rule."""
    m = ls.m
    src = ls.lists[0]
    relays = ls.lists[1:]
    bad = (src < 0) | (src >= m) | np.any((relays != 0) & (relays != 1), axis=0)
    corr = (src == 0) | (src == 1)
    bad |= corr & np.any(relays != src, axis=0)
    bad |= ~corr & (relays.sum(axis=0) != m - src)
    return ValidationReport(np.flatnonzero(bad).tolist())


def dealer_generate(m: int, length: int, rng: np.random.Generator) -> CorrelatedListSet:
    """Trusted-dealer stand-in for the QKD distribution.

    Draws the relay bits uniformly and sets l_1 = -(sum of bits) mod m, which
    is the post-selected output distribution of the qudit protocol.
    """
    return CorrelatedListSet(m, dealer_lists(m, length, rng), "dealer")


def dealer_lists(m: int, length: int, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
    """Raw dealer arrays, shape (m, L) or (count, m, L) when ``count`` is given."""
    if m < 2 or length < 1:
        raise ValueError(f"need m >= 2 and L >= 1, got m={m}, L={length}")
    shape = (1 if count is None else count, m, length)
    out = np.empty(shape, dtype=np.int64)
    out[:, 1:, :] = rng.integers(0, 2, size=(shape[0], m - 1, length))
    out[:, 0, :] = (-out[:, 1:, :].sum(axis=1)) % m
    return out[0] if count is None else out


def positions_of(values: Sequence[int] | np.ndarray, value: int) -> tuple[int, ...]:
    if value not in (0, 1):
        raise ValueError(f"claim values are bits, got {value}")
    return tuple(np.flatnonzero(np.asarray(values) == value).tolist())


@dataclass(frozen=True)
class Claim:
    """A message bit with the positions of l_1 that are said to hold it."""

    value: int
    positions: tuple[int, ...]

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=np.int64)

    def well_formed(self, length: int) -> bool:
        if self.value not in (0, 1):
            return False
        pos = self.array
        if pos.size == 0:
            return True
        return bool(pos[0] >= 0 and pos[-1] < length and (pos[1:] > pos[:-1]).all())


def bit_fraction(m: int) -> float:
    """Probability that l_1 holds a given bit at a position."""
    return 2.0 ** -(m - 1)


def expected_claim_length(m: int, length: int) -> float:
    return length * bit_fraction(m)


def length_tolerance(m: int, length: int, sigmas: float = 5.0) -> int:
    p = bit_fraction(m)
    return math.ceil(sigmas * math.sqrt(length * p * (1 - p)))


@dataclass(frozen=True)
class CheckResult:
    consistent: bool
    reason: str = ""  # "", "malformed", "length" or "mismatch"

    def __bool__(self) -> bool:
        return self.consistent


CONSISTENT = CheckResult(True)


def check_claim(
    claim: Claim,
    own_list: np.ndarray,
    length: int,
    m: int,
    theta: float | None = None,
    expected: float | None = None,
) -> CheckResult:
    """Check a claim against a private list.

    The claim must name between max(1, expected - theta) and
    expected + theta positions, and ``own_list`` must hold ``claim.value`` at
    every one of them.  An empty claim is never accepted since it is
    consistent with every list.
    """
    if not claim.well_formed(length):
        return CheckResult(False, "malformed")
    exp = expected_claim_length(m, length) if expected is None else expected
    tol = length_tolerance(m, length) if theta is None else theta
    n = len(claim.positions)
    if n < max(1.0, exp - tol) or n > exp + tol:
        return CheckResult(False, "length")
    if not (own_list[claim.array] == claim.value).all():
        return CheckResult(False, "mismatch")
    return CONSISTENT


@dataclass(frozen=True)
class ClaimRule:
    """check_claim with the list geometry and tolerances bound."""

    m: int
    length: int
    theta: float | None = None
    expected: float | None = None

    def __call__(self, claim: Claim, own_list: np.ndarray) -> CheckResult:
        return check_claim(claim, own_list, self.length, self.m, self.theta, self.expected)

    @property
    def target_length(self) -> int:
        exp = expected_claim_length(self.m, self.length) if self.expected is None else self.expected
        return max(1, round(exp))
