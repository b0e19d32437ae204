"""Adversary sweeps over the strategy library."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterator

import numpy as np

from . import rng as streams
from .dba import QBConfig, default_length, make_list_set, run_qb
from .harness import (
    BotAlways,
    Crash,
    FlipRelayForgedList,
    FlipRelayRandomList,
    LieClockDifferences,
    SplitBroadcast,
    format_fault,
    profiles_for,
)
from .om import OmConfig, om


def split_maps(recipients: list[int]) -> Iterator[dict[int, int]]:
    for bits in itertools.product((0, 1), repeat=len(recipients)):
        yield dict(zip(recipients, bits))


def qb_library(m: int, pid: int, source: int = 1, selective_relays: bool = True) -> list[Any]:
    """Every finite strategy a process can play in one QB run.

    A SplitBroadcast relay forwards what it received to recipients whose
    mapped value matches it and forges a claim for the others.  Setting
    ``selective_relays`` False drops those relay-side maps, leaving only
    strategies that treat all recipients alike.
    """
    base = [Crash(1), BotAlways(), FlipRelayForgedList(), FlipRelayRandomList()]
    if pid == source:
        recips = [k for k in range(1, m + 1) if k != source]
        return base + [SplitBroadcast(d) for d in split_maps(recips)]
    if not selective_relays:
        return base
    recips = [k for k in range(1, m + 1) if k not in (source, pid)]
    return base + [SplitBroadcast(d) for d in split_maps(recips) if len(set(d.values())) > 1]


def exhaustive_assignments(m: int, max_faults: int | None = None, selective_relays: bool = True) -> Iterator[dict[int, Any]]:
    """All fault assignments with at most ``max_faults`` faulty processes (default m - 2)."""
    max_faults = m - 2 if max_faults is None else max_faults
    ids = list(range(1, m + 1))
    for r in range(0, max_faults + 1):
        for group in itertools.combinations(ids, r):
            libs = [qb_library(m, p, 1, selective_relays) for p in group]
            for choice in itertools.product(*libs):
                yield dict(zip(group, choice))


def random_assignment(m: int, g: np.random.Generator, n_faulty: int, selective_relays: bool = True) -> dict[int, Any]:
    group = sorted(g.choice(np.arange(1, m + 1), size=n_faulty, replace=False).tolist())
    out = {}
    for p in group:
        lib = qb_library(m, p, 1, selective_relays)
        out[p] = lib[int(g.integers(len(lib)))]
    return out


@dataclass
class SweepResult:
    trials: int = 0
    agreement_violations: int = 0
    validity_violations: int = 0
    max_faulty: int = 0
    examples: list[dict[str, Any]] = field(default_factory=list)
    cases: dict[str, int] = field(default_factory=dict)

    def add(self, res, faults, value) -> None:
        self.trials += 1
        self.max_faulty = max(self.max_faulty, len(faults))
        for v in res.honest_verdicts().values():
            self.cases[v.case] = self.cases.get(v.case, 0) + 1
        a, v = res.agreement(), res.validity()
        self.agreement_violations += not a
        self.validity_violations += not v
        if (not a or not v) and len(self.examples) < 5:
            self.examples.append(
                {
                    "value": value,
                    "faults": [format_fault(p, s) for p, s in sorted(faults.items())],
                    "verdicts": {k: x.to_dict() for k, x in res.honest_verdicts().items()},
                }
            )

    @property
    def clean(self) -> bool:
        return self.agreement_violations == 0 and self.validity_violations == 0


def qb_exhaustive(m: int, seed: int = 0, length: int | None = None, backend: str = "dealer", selective_relays: bool = True) -> SweepResult:
    length = length or default_length(m)
    out = SweepResult()
    trial = 0
    for faults in exhaustive_assignments(m, selective_relays=selective_relays):
        for value in (0, 1):
            ls = make_list_set(m, length, backend, seed, trial)
            res = run_qb(m, value, profiles_for(m, faults), ls, QBConfig(), seed=seed, trial=trial)
            out.add(res, faults, value)
            trial += 1
    return out


def qb_random(m: int, trials: int, seed: int = 0, length: int | None = None, backend: str = "dealer", selective_relays: bool = True) -> SweepResult:
    """Random assignments; every third trial uses the maximum m - 2 faulty processes."""
    length = length or default_length(m)
    out = SweepResult()
    for t in range(trials):
        g = streams.derive_rng(seed, t, streams.STRATEGY, 0)
        n_faulty = m - 2 if t % 3 == 0 else int(g.integers(0, m - 1))
        faults = random_assignment(m, g, n_faulty, selective_relays)
        value = int(g.integers(2))
        ls = make_list_set(m, length, backend, seed, t)
        res = run_qb(m, value, profiles_for(m, faults), ls, QBConfig(), seed=seed, trial=t)
        out.add(res, faults, value)
    return out


def om_library(m: int, pid: int) -> list[Any]:
    recips = [k for k in range(2, m + 1) if k != pid]
    lib: list[Any] = [Crash(1), BotAlways(), FlipRelayForgedList(), FlipRelayRandomList(), LieClockDifferences({r: 1 for r in recips})]
    return lib + [SplitBroadcast(d) for d in split_maps(recips)]


def om_exhaustive(m: int, n: int, max_faults: int | None = None) -> dict[str, Any]:
    """OM(n) over every assignment of at most ``max_faults`` (default n) faulty processes."""
    max_faults = n if max_faults is None else max_faults
    cfg = OmConfig(m, n)
    stats = {"trials": 0, "agreement_violations": 0, "validity_violations": 0, "witnesses": []}
    for r in range(0, max_faults + 1):
        for group in itertools.combinations(range(1, m + 1), r):
            for choice in itertools.product(*[om_library(m, p) for p in group]):
                faults = dict(zip(group, choice))
                for value in (0, 1):
                    res = om(cfg, value, faults)
                    stats["trials"] += 1
                    bad = False
                    if not res.agreement():
                        stats["agreement_violations"] += 1
                        bad = True
                    if not res.validity():
                        stats["validity_violations"] += 1
                        bad = True
                    if bad and len(stats["witnesses"]) < 5:
                        stats["witnesses"].append(
                            {"value": value, "faults": [format_fault(p, s) for p, s in faults.items()], "decisions": res.decisions}
                        )
    return stats

