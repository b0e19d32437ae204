"""QB(n, m): detectable Byzantine agreement over correlated lists.

Round 1: the source sends each relay a bit plus the positions of l_1 that
hold it.  Round 2: each relay checks that claim against its own list and
forwards it verbatim to the other relays, or forwards BOT if the check
failed.  Then every relay decides from its own check and the relayed data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from . import rng as streams
from .harness import (
    BOT,
    Announcement,
    FaultProfile,
    Message,
    Network,
    StrategyContext,
    Transcript,
    apply_strategy,
    format_fault,
    parse_fault,
    profiles_for,
    register_runner,
)
from .lists import Claim, ClaimRule, CorrelatedListSet, dealer_generate, positions_of

CASES = ("iia", "iib", "iic", "iic-ext", "iid", "iie", "bot-path", "source", "source-abort")


class ProtocolViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class RelayMessage:
    sender: int
    payload: Any  # Claim, BOT or Announcement


@dataclass(frozen=True)
class Verdict:
    value: int | None  # None means abort
    case: str
    suspected: frozenset[int] = frozenset()
    advisory: bool = False

    @property
    def aborted(self) -> bool:
        return self.value is None

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "case": self.case,
            "suspected": sorted(self.suspected),
            "advisory": self.advisory,
        }


@dataclass(frozen=True)
class QBConfig:
    source: int = 1
    theta: float | None = None
    expected: float | None = None
    # dealer-provenance lists: the last list holder plays the QKD hub, knows every
    # list, and so only announces the bit it received; its verdict is advisory
    exempt_dealer: bool = False


def source_broadcast(source_list: np.ndarray, value: int, recipients) -> dict[int, Claim]:
    """Honest round-1 claims: the same claim for every recipient."""
    claim = Claim(value, positions_of(source_list, value))
    return {r: claim for r in recipients}


def relay(own_claim: Any, own_list: np.ndarray, rule: ClaimRule, sender: int = 0) -> RelayMessage:
    """Forward a consistent source claim verbatim, anything else as BOT."""
    if isinstance(own_claim, Claim) and rule(own_claim, own_list):
        return RelayMessage(sender, own_claim)
    return RelayMessage(sender, BOT)


def decide(
    own_result: Any,
    inbox: Mapping[int, Any],
    own_list: np.ndarray,
    rule: ClaimRule,
    source: int = 1,
    expected_senders=None,
) -> Verdict:
    """Decision of one relay.

    ``own_result`` is the source claim if it passed the local check, else BOT.
    ``inbox`` maps each other relay to what it forwarded (a Claim, BOT, an
    Announcement, or a RelayMessage wrapping one of these).
    """
    if expected_senders is not None:
        missing = set(expected_senders) - set(inbox)
        if missing:
            raise ProtocolViolation(f"no relay message from {sorted(missing)}")
    consistent: dict[int, int] = {}
    inconsistent: set[int] = set()
    bots: set[int] = set()
    own_bot = not isinstance(own_result, Claim)
    if not own_bot:
        consistent[source] = own_result.value
    for sender, payload in sorted(inbox.items()):
        if isinstance(payload, RelayMessage):
            payload = payload.payload
        if isinstance(payload, Announcement):
            continue
        if not isinstance(payload, Claim):
            bots.add(sender)
        elif rule(payload, own_list):
            consistent[sender] = payload.value
        else:
            inconsistent.add(sender)
    values = set(consistent.values())
    faulty_source = frozenset({source})

    if own_bot:
        # not covered by the decision table: mirror row iid from the BOT side
        if len(values) == 1:
            return Verdict(values.pop(), "bot-path", faulty_source | frozenset(inconsistent))
        return Verdict(None, "bot-path", faulty_source | frozenset(inconsistent))
    if len(values) > 1:
        if inconsistent:
            return Verdict(None, "iic-ext", faulty_source | frozenset(inconsistent))
        return Verdict(None, "iie" if bots else "iib", faulty_source)
    (v,) = values
    if inconsistent:
        return Verdict(v, "iic", frozenset(inconsistent))
    if bots:
        return Verdict(v, "iid", faulty_source)
    return Verdict(v, "iia")


@dataclass
class QBResult:
    verdicts: dict[int, Verdict]
    messages: int
    profiles: dict[int, FaultProfile]
    source: int
    source_value: int
    transcript: Transcript | None = None

    def honest_verdicts(self) -> dict[int, Verdict]:
        return {k: v for k, v in self.verdicts.items() if self.profiles[k].honest and not v.advisory}

    def agreement(self) -> bool:
        """All honest processes hold the same value, or all abort."""
        outs = {v.value for v in self.honest_verdicts().values()}
        return len(outs) <= 1

    def validity(self) -> bool:
        """With an honest source every honest process holds its value or aborts."""
        if not self.profiles[self.source].honest:
            return True
        return all(v.value in (self.source_value, None) for v in self.honest_verdicts().values())


def role_order(m: int, source: int) -> list[int]:
    """Process ids in list order: the source holds l_1, the rest follow by id."""
    return [source] + [k for k in range(1, m + 1) if k != source]


def run_qb(
    m: int,
    source_value: int,
    profiles: Mapping[int, FaultProfile] | None,
    list_set: CorrelatedListSet,
    cfg: QBConfig = QBConfig(),
    seed: int = 0,
    trial: int = 0,
    transcript: Transcript | None = None,
) -> QBResult:
    """One QB run: broadcast, relay, decide."""
    if list_set.m != m:
        raise ValueError(f"list set is for m={list_set.m}, run is for m={m}")
    if source_value not in (0, 1):
        raise ValueError("source value must be a bit")
    profiles = dict(profiles) if profiles is not None else profiles_for(m)
    if sorted(profiles) != list(range(1, m + 1)):
        raise ValueError("need exactly one fault profile per process")
    order = role_order(m, cfg.source)
    src = cfg.source
    relays = order[1:]
    own = {pid: list_set.lists[i] for i, pid in enumerate(order)}
    exempt = order[-1] if (cfg.exempt_dealer and list_set.provenance == "dealer" and m > 2) else None
    rule = ClaimRule(m, list_set.length, cfg.theta, cfg.expected)
    net = Network(m, transcript, trial)

    def ctx(pid: int, received=None) -> StrategyContext:
        # honest senders never draw, so skip building their generator
        g = None if profiles[pid].honest else streams.derive_rng(seed, trial, streams.STRATEGY, pid)
        return StrategyContext(own[pid], rule, g, received)

    # round 1
    intended = source_broadcast(own[src], source_value, relays)
    sctx = ctx(src)
    sends = [
        (src, r, apply_strategy(profiles[src], Message(src, r, 1, "claim", intended[r]), sctx))
        for r in relays
    ]
    inbox1 = net.deliver(1, sends)

    # round 2
    own_result: dict[int, Any] = {}
    sends = []
    for k in relays:
        got = inbox1[k][src]
        msg = relay(got, own[k], rule, k)
        own_result[k] = msg.payload
        payload = msg.payload
        if k == exempt:
            payload = Announcement(got.value) if isinstance(got, Claim) else BOT
        kctx = ctx(k, got if isinstance(got, Claim) else None)
        for r in relays:
            if r != k:
                sends.append((k, r, apply_strategy(profiles[k], Message(k, r, 2, "relay", payload), kctx)))
    inbox2 = net.deliver(2, sends)

    # The length window is public, so a source whose own claim falls outside it
    # knows every honest receiver will reject it, and aborts with them.
    own_ok = rule(intended[relays[0]], own[src]) if relays else True
    verdicts: dict[int, Verdict] = {src: Verdict(source_value, "source") if own_ok else Verdict(None, "source-abort")}
    for k in relays:
        others = [r for r in relays if r != k]
        v = decide(own_result[k], inbox2.get(k, {}), own[k], rule, src, others)
        if k == exempt:
            v = Verdict(v.value, v.case, v.suspected, advisory=True)
        verdicts[k] = v
        if transcript is not None:
            transcript.record(trial, 3, k, None, "verdict", v.value, v.case)
    return QBResult(verdicts, net.delivered, dict(profiles), src, source_value, transcript)


def message_budget(m: int) -> int:
    return (m - 1) ** 2


# -- recorded runs -----------------------------------------------------------


def qb_config_dict(m: int, value: int, faults: Mapping[int, Any], length: int, backend: str = "dealer", eta: float = 1.0, theta=None, source: int = 1) -> dict[str, Any]:
    return {
        "m": m,
        "value": value,
        "faults": [format_fault(p, s) for p, s in sorted(faults.items())],
        "L": length,
        "backend": backend,
        "eta": eta,
        "theta": theta,
        "source": source,
    }


def make_list_set(m: int, length: int, backend: str, seed: int, trial: int, index: int = 0, eta: float = 1.0) -> CorrelatedListSet:
    g = streams.derive_rng(seed, trial, streams.LISTS, index)
    if backend == "dealer":
        return dealer_generate(m, length, g)
    if backend == "quantum":
        from .qudit import generate_list_set

        return generate_list_set(m, length, eta, g)
    raise ValueError(f"unknown backend {backend!r}")


@register_runner("dba")
def recorded_dba(seed: int, config: dict[str, Any]) -> Transcript:
    """Run a single QB trial described by a JSON config and return its transcript."""
    m = int(config["m"])
    faults = dict(parse_fault(s) for s in config.get("faults", []))
    ls = make_list_set(m, int(config["L"]), config.get("backend", "dealer"), seed, 0, eta=float(config.get("eta", 1.0)))
    t = Transcript("dba", seed, config)
    cfg = QBConfig(source=int(config.get("source", 1)), theta=config.get("theta"))
    run_qb(m, int(config["value"]), profiles_for(m, faults), ls, cfg, seed=seed, transcript=t)
    return t


def default_length(m: int, per_claim: int = 64) -> int:
    """List length giving ``per_claim`` expected positions per honest claim."""
    return per_claim * 2 ** (m - 1)
