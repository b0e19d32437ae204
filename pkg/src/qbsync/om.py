"""The classical recursive oral-messages algorithm OM(n).

Values are plain integers so the same recursion carries bits and clock
differences.  Lieutenants decide on the lower median of the values they
obtained.  Each receiver set at depth d excludes every process already on the
relay path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .harness import (
    Arbitrary,
    BotAlways,
    Crash,
    FaultProfile,
    FlipRelayForgedList,
    FlipRelayRandomList,
    Honest,
    LieClockDifferences,
    SplitBroadcast,
    profiles_for,
)


@dataclass(frozen=True)
class OmConfig:
    m: int
    n: int
    default: int = 0

    def __post_init__(self):
        if self.n < 0 or self.m < self.n + 2:
            raise ValueError(f"OM({self.n}) needs m >= n + 2 processes, got m={self.m}")


def lower_median(values) -> int:
    s = sorted(values)
    return s[(len(s) - 1) // 2]


def om_message_count(n: int, m: int) -> int:
    """Messages sent by OM(n) among m processes."""
    OmConfig(m, n)
    if n == 0:
        return m - 1
    return (m - 1) * (1 + om_message_count(n - 1, m - 1))


def flip(v: int) -> int:
    return 1 - v if v in (0, 1) else -v


def om_send(profile: FaultProfile, receiver: int, value: int, depth: int) -> int | None:
    """Value actually sent; None is silence."""
    s = profile.strategy
    if isinstance(s, Honest):
        return value
    if isinstance(s, (Crash, BotAlways)):
        return None
    if isinstance(s, SplitBroadcast):
        return s.values.get(receiver, value)
    if isinstance(s, (FlipRelayForgedList, FlipRelayRandomList)):
        return flip(value)
    if isinstance(s, LieClockDifferences):
        return value + s.offsets.get(receiver, 0)
    if isinstance(s, Arbitrary):
        return s.script.get((depth, receiver), s.script.get(receiver, value))
    raise TypeError(f"unknown strategy {s!r}")


@dataclass
class OmResult:
    decisions: dict[int, int]
    messages: int
    commander_value: int
    profiles: dict[int, FaultProfile]

    def honest_lieutenants(self) -> list[int]:
        return [k for k in self.decisions if self.profiles[k].honest]

    def agreement(self) -> bool:
        return len({self.decisions[k] for k in self.honest_lieutenants()}) <= 1

    def validity(self) -> bool:
        if not self.profiles[1].honest:
            return True
        return all(self.decisions[k] == self.commander_value for k in self.honest_lieutenants())

    def honest_agreement(self) -> bool:
        """Agreement over every honest process, counting an honest commander's own value."""
        vals = {self.decisions[k] for k in self.honest_lieutenants()}
        if self.profiles[1].honest:
            vals.add(self.commander_value)
        return len(vals) <= 1

    def interactive_consistency(self) -> bool:
        return self.agreement() and self.validity()


class _OM:
    def __init__(self, cfg: OmConfig, profiles: Mapping[int, FaultProfile]):
        self.cfg = cfg
        self.profiles = profiles
        self.messages = 0

    def run(self, n: int, commander: int, value: int, lieutenants: list[int]) -> dict[int, int]:
        received = {}
        for r in lieutenants:
            self.messages += 1
            sent = om_send(self.profiles[commander], r, value, self.cfg.n - n)
            received[r] = self.cfg.default if sent is None else sent
        if n == 0:
            return received
        sub = {i: self.run(n - 1, i, received[i], [j for j in lieutenants if j != i]) for i in lieutenants}
        return {
            r: lower_median([received[r]] + [sub[i][r] for i in lieutenants if i != r])
            for r in lieutenants
        }


def om(
    cfg: OmConfig,
    commander_value: int,
    profiles: Mapping[int, FaultProfile] | Mapping[int, Any] | None = None,
    rng=None,
) -> OmResult:
    """Run OM(n) with P_1 as commander; ``rng`` is accepted for interface parity, all strategies here are deterministic."""
    faults = {k: (p.strategy if isinstance(p, FaultProfile) else p) for k, p in (profiles or {}).items()}
    profiles = profiles_for(cfg.m, faults)
    runner = _OM(cfg, profiles)
    decisions = runner.run(cfg.n, 1, commander_value, list(range(2, cfg.m + 1)))
    return OmResult(decisions, runner.messages, commander_value, dict(profiles))
