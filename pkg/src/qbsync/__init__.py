"""Single-qudit detectable Byzantine agreement and clock synchronization."""

from .clocksync import SyncConfig, check_c1_c2, run_sync
from .costs import CostModel, Scheme, list_type_count, monte_carlo_efficiency, p_success
from .dba import QBConfig, Verdict, decide, run_qb
from .harness import BOT, FaultProfile, Transcript, profiles_for
from .lists import Claim, CorrelatedListSet, check_claim, dealer_generate, positions_of, validate_list_set
from .om import OmConfig, om, om_message_count
from .qudit import QuditState, generate_list_set, prepare_initial, run_distribution_round

__version__ = "0.1.0"

__all__ = [
    "SyncConfig",
    "check_c1_c2",
    "run_sync",
    "CostModel",
    "Scheme",
    "list_type_count",
    "monte_carlo_efficiency",
    "p_success",
    "QBConfig",
    "Verdict",
    "decide",
    "run_qb",
    "BOT",
    "FaultProfile",
    "Transcript",
    "profiles_for",
    "Claim",
    "CorrelatedListSet",
    "check_claim",
    "dealer_generate",
    "positions_of",
    "validate_list_set",
    "OmConfig",
    "om",
    "om_message_count",
    "QuditState",
    "generate_list_set",
    "prepare_initial",
    "run_distribution_round",
]
