"""Synchronous simulated network, fault strategies and transcripts.

Channels are pairwise, reliable and authenticated: the delivery layer knows
which process handed it a message, and a message whose ``sender`` field
disagrees with that origin is dropped.  A dropped or suppressed message
reaches the receiver as ``BOT`` so that the protocol engines stay total.
"""

from __future__ import annotations

import enum
import gzip
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

from .lists import Claim, ClaimRule, positions_of

TRANSCRIPT_VERSION = 1


class Bot(enum.Enum):
    """The relay token meaning 'I have received inconsistent data'."""

    BOT = "⊥"

    def __repr__(self) -> str:
        return "BOT"


BOT = Bot.BOT


@dataclass(frozen=True)
class Announcement:
    """Value-only relay used by an exempt dealer process."""

    value: int


# -- strategies ------------------------------------------------------------


@dataclass(frozen=True)
class Honest:
    pass


@dataclass(frozen=True)
class Crash:
    round: int = 1  # silent from this round on


@dataclass(frozen=True)
class SplitBroadcast:
    values: Mapping[int, int] = field(default_factory=dict)  # recipient -> bit


@dataclass(frozen=True)
class FlipRelayForgedList:
    pass


@dataclass(frozen=True)
class FlipRelayRandomList:
    pass


@dataclass(frozen=True)
class BotAlways:
    pass


@dataclass(frozen=True)
class LieClockDifferences:
    offsets: Mapping[int, int] = field(default_factory=dict)  # entry -> ticks added


@dataclass(frozen=True)
class Arbitrary:
    """Scripted messages keyed by (round, recipient).

    A script entry is a payload (Claim, BOT, Announcement or None for
    silence), or a dict ``{"payload": ..., "as_sender": pid}`` to attempt
    impersonation.
    """

    script: Mapping[tuple[int, int], Any] = field(default_factory=dict)


STRATEGIES = {
    cls.__name__: cls
    for cls in (
        Honest,
        Crash,
        SplitBroadcast,
        FlipRelayForgedList,
        FlipRelayRandomList,
        BotAlways,
        LieClockDifferences,
        Arbitrary,
    )
}


@dataclass(frozen=True)
class FaultProfile:
    process: int
    strategy: Any = field(default_factory=Honest)

    @property
    def honest(self) -> bool:
        return isinstance(self.strategy, Honest)


def profiles_for(m: int, faults: Mapping[int, Any] | None = None) -> dict[int, FaultProfile]:
    """One profile per process id 1..m; unlisted processes are honest."""
    faults = dict(faults or {})
    unknown = set(faults) - set(range(1, m + 1))
    if unknown:
        raise ValueError(f"fault profiles for unknown processes {sorted(unknown)}")
    return {k: FaultProfile(k, faults.get(k, Honest())) for k in range(1, m + 1)}


def honest_ids(profiles: Mapping[int, FaultProfile]) -> list[int]:
    return sorted(k for k, p in profiles.items() if p.honest)


def format_fault(pid: int, strategy: Any) -> str:
    name = type(strategy).__name__
    if isinstance(strategy, Crash):
        return f"{pid}:{name}:{strategy.round}"
    if isinstance(strategy, (SplitBroadcast, LieClockDifferences)):
        d = strategy.values if isinstance(strategy, SplitBroadcast) else strategy.offsets
        return f"{pid}:{name}:" + json.dumps({str(k): v for k, v in sorted(d.items())}, separators=(",", ":"))
    if isinstance(strategy, Arbitrary):
        raise ValueError("scripted strategies have no string form")
    return f"{pid}:{name}"


def parse_fault(spec: str) -> tuple[int, Any]:
    """Parse ``pid:Name[:arg]``, e.g. ``3:SplitBroadcast:{"2":0,"4":1}``."""
    pid_s, _, rest = spec.partition(":")
    name, _, arg = rest.partition(":")
    if name not in STRATEGIES or name == "Arbitrary":
        raise ValueError(f"unknown fault strategy {name!r}")
    pid = int(pid_s)
    if name == "Crash":
        return pid, Crash(int(arg) if arg else 1)
    if name in ("SplitBroadcast", "LieClockDifferences"):
        d = {int(k): int(v) for k, v in json.loads(arg or "{}").items()}
        return pid, STRATEGIES[name](d)
    return pid, STRATEGIES[name]()


# -- messages and strategy application ---------------------------------------


@dataclass(frozen=True)
class Message:
    sender: int
    receiver: int
    round: int
    kind: str
    payload: Any


@dataclass
class StrategyContext:
    """What a (possibly faulty) sender knows when it emits a message."""

    own_list: np.ndarray
    rule: ClaimRule
    rng: np.random.Generator | None
    received: Claim | None = None  # source claim a relay got in round 1


def _flip_base(msg: Message, ctx: StrategyContext) -> int:
    if isinstance(msg.payload, Claim):
        return msg.payload.value
    if ctx.received is not None:
        return ctx.received.value
    return 0


def forged_claim(value: int, ctx: StrategyContext) -> Claim:
    """Claim for ``value`` using positions where the sender's own list holds it."""
    own = np.asarray(positions_of(ctx.own_list, value), dtype=np.int64)
    k = min(len(own), ctx.rule.target_length)
    pick = np.sort(ctx.rng.choice(own, size=k, replace=False)) if k else own[:0]
    return Claim(value, tuple(pick.tolist()))


def random_claim(value: int, ctx: StrategyContext) -> Claim:
    k = min(ctx.rule.length, ctx.rule.target_length)
    pick = np.sort(ctx.rng.choice(ctx.rule.length, size=k, replace=False))
    return Claim(value, tuple(pick.tolist()))


def apply_strategy(profile: FaultProfile, msg: Message, ctx: StrategyContext) -> Message | None:
    """The message a process actually emits in place of ``msg``; None means silence."""
    s = profile.strategy
    if isinstance(s, (Honest, LieClockDifferences)):
        # clock lies act on the broadcast values, not on the bit protocol
        return msg
    if isinstance(s, Crash):
        return None if msg.round >= s.round else msg
    if isinstance(s, BotAlways):
        return _with(msg, BOT)
    if isinstance(s, FlipRelayForgedList):
        return _with(msg, forged_claim(1 - _flip_base(msg, ctx), ctx))
    if isinstance(s, FlipRelayRandomList):
        return _with(msg, random_claim(1 - _flip_base(msg, ctx), ctx))
    if isinstance(s, SplitBroadcast):
        if msg.receiver not in s.values:
            return msg
        want = s.values[msg.receiver]
        if isinstance(msg.payload, Claim) and msg.payload.value == want:
            return msg
        if ctx.received is not None and ctx.received.value == want:
            return _with(msg, ctx.received)
        return _with(msg, forged_claim(want, ctx))
    if isinstance(s, Arbitrary):
        key = (msg.round, msg.receiver)
        if key not in s.script:
            return msg
        entry = s.script[key]
        if isinstance(entry, dict):
            return Message(entry.get("as_sender", msg.sender), msg.receiver, msg.round, msg.kind, entry.get("payload"))
        if entry is None:
            return None
        return _with(msg, entry)
    raise TypeError(f"unknown strategy {s!r}")


def _with(msg: Message, payload: Any) -> Message:
    return Message(msg.sender, msg.receiver, msg.round, msg.kind, payload)


# -- transcripts -------------------------------------------------------------


def summarize(payload: Any) -> Any:
    if isinstance(payload, Claim):
        digest = hashlib.blake2b(np.asarray(payload.positions, dtype=np.int64).tobytes(), digest_size=6).hexdigest()
        return {"value": payload.value, "n": len(payload.positions), "digest": digest}
    if payload is BOT:
        return "BOT"
    if isinstance(payload, Announcement):
        return {"announce": payload.value}
    return payload


def config_hash(config: Mapping[str, Any]) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class Transcript:
    kind: str
    seed: int
    config: dict[str, Any]
    events: list[dict[str, Any]] = field(default_factory=list)
    version: int = TRANSCRIPT_VERSION

    def record(self, trial: int, round: int, frm: int | None, to: int | None, kind: str, payload: Any = None, case: str | None = None) -> None:
        self.events.append(
            {"trial": trial, "round": round, "from": frm, "to": to, "kind": kind, "payload": summarize(payload), "case": case}
        )

    def header(self) -> dict[str, Any]:
        return {"version": self.version, "kind": self.kind, "seed": self.seed, "config_hash": config_hash(self.config), "config": self.config}

    def dumps(self) -> str:
        lines = [json.dumps(self.header(), sort_keys=True)]
        lines += [json.dumps(e, sort_keys=True, ensure_ascii=False) for e in self.events]
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        data = self.dumps().encode("utf-8")
        if path.suffix == ".gz":
            data = gzip.compress(data, mtime=0)
        path.write_bytes(data)

    @classmethod
    def read(cls, path: str | Path) -> "Transcript":
        raw = Path(path).read_bytes()
        if str(path).endswith(".gz"):
            raw = gzip.decompress(raw)
        lines = [ln for ln in raw.decode("utf-8").splitlines() if ln.strip()]
        head = json.loads(lines[0])
        if head.get("config_hash") != config_hash(head["config"]):
            raise ValueError("transcript header config hash does not match its config")
        events = [json.loads(ln) for ln in lines[1:]]
        return cls(head["kind"], head["seed"], head["config"], events, head["version"])


# -- network -----------------------------------------------------------------


class Network:
    """m processes with m*(m-1) directed authenticated channels."""

    def __init__(self, m: int, transcript: Transcript | None = None, trial: int = 0):
        if m < 2:
            raise ValueError("a network needs at least two processes")
        self.m = m
        self.channels = frozenset((a, b) for a in range(1, m + 1) for b in range(1, m + 1) if a != b)
        self.transcript = transcript
        self.trial = trial
        self.delivered = 0
        self.rejected = 0

    def deliver(self, round: int, sends: list[tuple[int, int, Message | None]]) -> dict[int, dict[int, Any]]:
        """Deliver one synchronous round.

        ``sends`` holds (origin, receiver, message-or-None).  Every slot
        yields exactly one inbox entry; silence and rejected impersonation
        both arrive as BOT.
        """
        inbox: dict[int, dict[int, Any]] = {}
        for origin, receiver, msg in sends:
            if (origin, receiver) not in self.channels:
                raise ValueError(f"no channel {origin}->{receiver}")
            payload = BOT
            kind = "silent"
            if msg is not None:
                if msg.sender != origin or msg.receiver != receiver:
                    self.rejected += 1
                    kind = "rejected"
                else:
                    payload = BOT if msg.payload is None else msg.payload
                    kind = msg.kind
            inbox.setdefault(receiver, {})[origin] = payload
            self.delivered += 1
            if self.transcript is not None:
                self.transcript.record(self.trial, round, origin, receiver, kind, payload)
        return inbox


# -- replay ------------------------------------------------------------------

RUNNERS: dict[str, Callable[[int, dict[str, Any]], Transcript]] = {}


def register_runner(kind: str):
    def deco(fn):
        RUNNERS[kind] = fn
        return fn

    return deco


class ReplayMismatch(RuntimeError):
    pass


@dataclass
class ReplayResult:
    identical: bool
    original: Transcript
    replayed: Transcript
    first_difference: int | None = None


def replay(transcript: Transcript) -> ReplayResult:
    """Re-run a recorded experiment from its header and compare event streams."""
    from . import clocksync, dba  # noqa: F401  (registers runners)

    if transcript.version != TRANSCRIPT_VERSION:
        raise ReplayMismatch(f"transcript version {transcript.version} != harness version {TRANSCRIPT_VERSION}")
    if transcript.kind not in RUNNERS:
        raise ReplayMismatch(f"no runner for transcript kind {transcript.kind!r}")
    again = RUNNERS[transcript.kind](transcript.seed, dict(transcript.config))
    a = [json.dumps(e, sort_keys=True) for e in transcript.events]
    b = [json.dumps(e, sort_keys=True) for e in again.events]
    first = next((i for i, (x, y) in enumerate(zip(a, b)) if x != y), None)
    if first is None and len(a) != len(b):
        first = min(len(a), len(b))
    return ReplayResult(first is None, transcript, again, first)
