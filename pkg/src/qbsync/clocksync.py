"""Fault-tolerant clock synchronization over rotated QB runs.

Clocks are integer tick offsets against a global reference and never drift
(all clocks tick at the same rate).  In rotation x, process P_x broadcasts
its difference vector (D_x[y] = offset_x - offset_y for every y), one QB run
per bit of every entry, each run on a fresh list set.  All honest processes
then hold the same agreed vectors, cross-check them for triangle
consistency, and move their clock to the lower median of the times implied
by the accepted sources.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from . import rng as streams
from .dba import QBConfig, default_length, run_qb
from .harness import (
    FaultProfile,
    LieClockDifferences,
    Transcript,
    format_fault,
    honest_ids,
    parse_fault,
    profiles_for,
    register_runner,
)
from .lists import CorrelatedListSet, dealer_lists
from .om import lower_median


@dataclass(frozen=True)
class ClockState:
    offset: int  # ticks relative to the global reference
    resolution: float = 1e-3  # seconds per tick
    rate: int = 1

    @property
    def seconds(self) -> float:
        return self.offset * self.resolution


@dataclass(frozen=True)
class SyncConfig:
    bit_width: int = 16
    resolution: float = 1e-3
    rotation: tuple[int, ...] | None = None  # source order; default 1..m
    theta: float | None = None
    list_length: int | None = None  # per QB run; default from dba.default_length
    triangle_tolerance: int = 0  # ticks
    backend: str = "dealer"
    eta: float = 1.0
    fresh_lists_per_bit: bool = True

    def __post_init__(self):
        if self.bit_width < 2:
            raise ValueError("bit width must be at least 2")
        if not self.fresh_lists_per_bit:
            raise ValueError("every bit needs its own list set; list reuse is not supported")
        if self.backend not in ("dealer", "quantum"):
            raise ValueError(f"unknown backend {self.backend!r}")


def read_difference(x: int, y: int, offsets: Sequence[int]) -> int:
    """Difference between P_x's clock and P_y's, as P_x reads it."""
    return int(offsets[x - 1]) - int(offsets[y - 1])


def encode_difference(delta: int, bits: int) -> tuple[int, ...]:
    """Two's complement, most significant bit first."""
    lo, hi = -(1 << (bits - 1)), 1 << (bits - 1)
    if not lo <= delta < hi:
        raise ValueError(f"difference {delta} does not fit in {bits} bits")
    u = delta & ((1 << bits) - 1)
    return tuple((u >> (bits - 1 - i)) & 1 for i in range(bits))


def decode_difference(bits: Sequence[int]) -> int:
    u = 0
    for b in bits:
        u = (u << 1) | int(b)
    if bits and bits[0]:
        u -= 1 << len(bits)
    return u


def wrap(delta: int, bits: int) -> int:
    """Reduce an arbitrary integer to the encodable two's-complement range."""
    half = 1 << (bits - 1)
    return ((delta + half) % (1 << bits)) - half


def triangle_consistent(dx: Sequence[int], dy: Sequence[int], x: int, y: int, tol: int = 0) -> bool:
    """Whether x's and y's vectors agree through every third process z.

    x claims the x-z difference is D_x[z]; via y it would be D_x[y] + D_y[z].
    The check runs both ways round.
    """
    m = len(dx)
    for z in range(m):
        if abs(dx[y - 1] + dy[z] - dx[z]) > tol or abs(dy[x - 1] + dx[z] - dy[z]) > tol:
            return False
    return True


def accepted_sources(vectors: Mapping[int, Sequence[int] | None], tol: int = 0) -> tuple[int, ...]:
    """Largest set of sources whose vectors are pairwise triangle-consistent.

    Ties go to the lexicographically smallest id tuple.  A vector must also
    report a zero difference to itself.
    """
    cand = sorted(x for x, v in vectors.items() if v is not None and abs(v[x - 1]) <= tol)
    ok = {
        (a, b): triangle_consistent(vectors[a], vectors[b], a, b, tol)
        for a, b in itertools.combinations(cand, 2)
    }
    for size in range(len(cand), 0, -1):
        for group in itertools.combinations(cand, size):
            if all(ok[p] for p in itertools.combinations(group, 2)):
                return group
    return ()


@dataclass
class SyncReport:
    per_rotation: list[dict[str, Any]] = field(default_factory=list)
    adjustments: list[int | None] = field(default_factory=list)
    c1: bool = False
    c2: bool = False
    aborted: bool = False
    qb_runs: int = 0
    messages: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass
class SyncResult:
    before: list[int]
    after: list[int]
    report: SyncReport


def claimed_vector(x: int, offsets: Sequence[int], profile: FaultProfile, bits: int) -> list[int]:
    m = len(offsets)
    vec = [read_difference(x, y, offsets) for y in range(1, m + 1)]
    if isinstance(profile.strategy, LieClockDifferences):
        vec = [wrap(v + profile.strategy.offsets.get(y, 0), bits) for y, v in zip(range(1, m + 1), vec)]
    return vec


def _list_sets(m: int, length: int, count: int, cfg: SyncConfig, g: np.random.Generator) -> list[CorrelatedListSet]:
    if cfg.backend == "dealer":
        arr = dealer_lists(m, length, g, count)
        return [CorrelatedListSet(m, a, "dealer") for a in arr]
    from .qudit import generate_list_set

    return [generate_list_set(m, length, cfg.eta, g) for _ in range(count)]


def run_sync(
    offsets: Sequence[int],
    profiles: Mapping[int, FaultProfile] | None,
    cfg: SyncConfig = SyncConfig(),
    seed: int = 0,
    trial: int = 0,
    transcript: Transcript | None = None,
) -> SyncResult:
    m = len(offsets)
    profiles = dict(profiles) if profiles is not None else profiles_for(m)
    honest = honest_ids(profiles)
    bits = cfg.bit_width
    for x in honest:
        for y in range(1, m + 1):
            encode_difference(read_difference(x, y, offsets), bits)  # range check
    length = cfg.list_length or default_length(m)
    rotation = cfg.rotation or tuple(range(1, m + 1))
    report = SyncReport()
    qcfg_theta = cfg.theta

    # agreed[k][x] = vector P_k holds for source x, or None after an abort
    agreed: dict[int, dict[int, list[int] | None]] = {k: {} for k in honest}
    for rot, x in enumerate(rotation):
        vec = claimed_vector(x, offsets, profiles[x], bits)
        sets = _list_sets(m, length, m * bits, cfg, streams.derive_rng(seed, trial, streams.LISTS, rot))
        held = {k: [[0] * bits for _ in range(m)] for k in honest}
        aborted = {k: False for k in honest}
        for y in range(m):
            for b, bit in enumerate(encode_difference(vec[y], bits)):
                run_id = (rot * m + y) * bits + b
                res = run_qb(
                    m,
                    bit,
                    profiles,
                    sets[y * bits + b],
                    QBConfig(source=x, theta=qcfg_theta),
                    seed=seed,
                    trial=trial * 1_000_003 + run_id,
                    transcript=None,
                )
                report.qb_runs += 1
                report.messages += res.messages
                for k in honest:
                    v = res.verdicts[k]
                    if v.aborted:
                        aborted[k] = True
                    else:
                        held[k][y][b] = v.value
        for k in honest:
            agreed[k][x] = None if aborted[k] else [decode_difference(bv) for bv in held[k]]
        view = agreed[honest[0]][x] if honest else None
        entry = {"source": x, "vector": view, "aborted": view is None}
        report.per_rotation.append(entry)
        if transcript is not None:
            transcript.record(trial, rot, x, None, "rotation", view, "abort" if view is None else "agreed")

    after = list(int(o) for o in offsets)
    adjustments: list[int | None] = [None] * m
    failed = False
    accepted_views = {}
    for k in honest:
        acc = accepted_sources(agreed[k], cfg.triangle_tolerance)
        accepted_views[k] = acc
        if not acc:
            failed = True
            break
        adjustments[k - 1] = lower_median([agreed[k][x][k - 1] for x in acc])
    for entry in report.per_rotation:
        entry["accepted"] = bool(honest) and entry["source"] in accepted_views.get(honest[0], ())
    if failed:
        report.aborted = True
        adjustments = [None] * m
    else:
        for k in honest:
            after[k - 1] += adjustments[k - 1]
    report.adjustments = adjustments
    chk = check_c1_c2(list(offsets), after, honest, cfg)
    report.c1, report.c2 = chk["c1"], chk["c2"]
    if transcript is not None:
        transcript.record(trial, len(rotation), None, None, "sync", {"after": after, "aborted": report.aborted}, None)
    return SyncResult(list(int(o) for o in offsets), after, report)


def check_c1_c2(before: Sequence[int], after: Sequence[int], honest: Sequence[int], cfg: SyncConfig | None = None) -> dict[str, Any]:
    """C1: honest clocks equal after sync.  C2: no honest clock moved further
    than the largest honest pairwise difference before sync."""
    hb = [before[k - 1] for k in honest]
    ha = [after[k - 1] for k in honest]
    spread = max(hb) - min(hb) if hb else 0
    moves = [abs(a - b) for a, b in zip(ha, hb)]
    return {
        "c1": len(set(ha)) <= 1,
        "c2": all(d <= spread for d in moves),
        "max_honest_spread": spread,
        "max_adjustment": max(moves, default=0),
    }


def sync_config_dict(offsets: Sequence[int], faults: Mapping[int, Any], cfg: SyncConfig) -> dict[str, Any]:
    d = asdict(cfg)
    d["rotation"] = list(cfg.rotation) if cfg.rotation else None
    return {"offsets": list(offsets), "faults": [format_fault(p, s) for p, s in sorted(faults.items())], "sync": d}


def sync_config_from_dict(d: Mapping[str, Any]) -> SyncConfig:
    d = dict(d)
    if d.get("rotation"):
        d["rotation"] = tuple(d["rotation"])
    return SyncConfig(**d)


@register_runner("clocksync")
def recorded_sync(seed: int, config: dict[str, Any]) -> Transcript:
    offsets = [int(o) for o in config["offsets"]]
    faults = dict(parse_fault(s) for s in config.get("faults", []))
    t = Transcript("clocksync", seed, config)
    run_sync(offsets, profiles_for(len(offsets), faults), sync_config_from_dict(config["sync"]), seed=seed, transcript=t)
    return t
