"""Policy checkers, all built on the shared framework."""
from .according import (
    ap_direct, ap_instance, check_according_to_policy, correspondence_brute,
    correspondence_exists,
)
from .dynrelease import check_dynrelease, dynrelease_instance
from .erasure import ce_direct, ce_instance, check_crypto_erasure
from .forgetful import (
    Automaton, absorbing_automaton, check_forgetful, fa_direct, fa_instance,
    perfect_recall_automaton, single_memory_automaton,
)
from .framework import (
    INSECURE, NOT_APPLICABLE, SECURE, BudgetExceeded, FrameworkInstance, Verdict,
    Witness, check_framework, definitional_knowledge, replay_witness,
)
from .gradual import (
    check_gradual_release, check_tight_gr, encode_gradual_release, encode_tight_gr,
    gr_direct, gr_instance, tgr_direct, tgr_instance,
)
from .paralocks import (
    Attacker, check_paralocks_table, encode_paralocks, parse_attacker, pl_direct,
    pl_instance,
)

POLICY_IDS = ("dynrelease", "dynrelease-tran", "dynrelease-per", "gr", "tgr", "ap",
              "ce", "fa-single", "paralocks")

__all__ = [n for n in dir() if not n.startswith("_")]
