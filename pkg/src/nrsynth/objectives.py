"""Participant objectives evaluated on limit valuations.

All predicates are monotone, so each temporal objective collapses to a
boolean function of the stable valuation a fair run converges to.  The
original temporal forms live in :mod:`nrsynth.ltl` and serve as a
cross-validation oracle.
"""

from __future__ import annotations

import enum
from typing import FrozenSet, Iterable

from .predicates import N_STANDARD, Pred, mask_of, nro, nrr


class ObjectiveId(enum.Enum):
    ORIGINATOR = "originator"            # full objective of O
    RECIPIENT = "recipient"              # full objective of R
    TTP = "ttp"                          # full objective of the third party
    FAIRNESS = "fairness"                # evidence exchange is mutual
    NRO = "nro"
    NRR = "nrr"
    O_STARTED = "o_started"              # O eventually sends m1
    O_GOT_SIGNATURE = "o_got_signature"  # O ends holding R's signature
    O_GOT_ABORT = "o_got_abort"          # O ends cleanly aborted
    R_GOT_SIGNATURE = "r_got_signature"
    R_GOT_ABORT = "r_got_abort"
    TTP_ANSWERED = "ttp_answered"              # every request draws a response
    TTP_RESOLVE_COMPLETE_O = "ttp_resolve_complete_o"  # r2_R implies r2_O side too
    TTP_RESOLVE_COMPLETE_R = "ttp_resolve_complete_r"
    TTP_ABORT_COMPLETE_O = "ttp_abort_complete_o"      # a2_O implies a2_R side too
    TTP_ABORT_COMPLETE_R = "ttp_abort_complete_r"


def _as_mask(val: int | Iterable[Pred]) -> int:
    if isinstance(val, int):
        return val
    return mask_of(val)


def _has(mask: int, p: Pred) -> bool:
    return bool(mask >> int(p) & 1)


def o_started(m: int) -> bool:
    return _has(m, Pred.M1)


def o_got_signature(m: int) -> bool:
    return _has(m, Pred.SIGB_R) or (_has(m, Pred.SIGB_TTP) and not _has(m, Pred.AB_O))


def o_got_abort(m: int) -> bool:
    return _has(m, Pred.AB_O) and not _has(m, Pred.SIGA_O) and not _has(m, Pred.SIGA_TTP)


def originator(m: int) -> bool:
    return o_started(m) and (o_got_signature(m) or o_got_abort(m))


def r_got_signature(m: int) -> bool:
    return _has(m, Pred.SIGA_O) or (_has(m, Pred.SIGA_TTP) and not _has(m, Pred.AB_R))


def r_got_abort(m: int) -> bool:
    return _has(m, Pred.AB_R) and not _has(m, Pred.SIGB_R) and not _has(m, Pred.SIGB_TTP)


def recipient(m: int) -> bool:
    if not _has(m, Pred.EOO):
        return True
    return r_got_signature(m) or r_got_abort(m)


def ttp_answered(m: int) -> bool:
    if not (_has(m, Pred.REQA) or _has(m, Pred.REQR)):
        return True
    return (_has(m, Pred.AB_O) or _has(m, Pred.AB_R)
            or _has(m, Pred.SIGA_TTP) or _has(m, Pred.SIGB_TTP))


def ttp_resolve_complete_r(m: int) -> bool:
    # If O's replacement signature went out, R's must follow and no aborts.
    if not _has(m, Pred.SIGA_TTP):
        return True
    return _has(m, Pred.SIGB_TTP) and not _has(m, Pred.AB_O) and not _has(m, Pred.AB_R)


def ttp_resolve_complete_o(m: int) -> bool:
    if not _has(m, Pred.SIGB_TTP):
        return True
    return _has(m, Pred.SIGA_TTP) and not _has(m, Pred.AB_O) and not _has(m, Pred.AB_R)


def ttp_abort_complete_o(m: int) -> bool:
    if not _has(m, Pred.AB_O):
        return True
    return _has(m, Pred.AB_R) and not _has(m, Pred.SIGA_TTP) and not _has(m, Pred.SIGB_TTP)


def ttp_abort_complete_r(m: int) -> bool:
    if not _has(m, Pred.AB_R):
        return True
    return _has(m, Pred.AB_O) and not _has(m, Pred.SIGA_TTP) and not _has(m, Pred.SIGB_TTP)


def ttp(m: int) -> bool:
    return (ttp_answered(m) and ttp_resolve_complete_r(m) and ttp_resolve_complete_o(m)
            and ttp_abort_complete_o(m) and ttp_abort_complete_r(m))


def fairness(m: int) -> bool:
    return (not nro(m) or nrr(m)) and (not nrr(m) or nro(m))


_EVALUATORS = {
    ObjectiveId.ORIGINATOR: originator,
    ObjectiveId.RECIPIENT: recipient,
    ObjectiveId.TTP: ttp,
    ObjectiveId.FAIRNESS: fairness,
    ObjectiveId.NRO: nro,
    ObjectiveId.NRR: nrr,
    ObjectiveId.O_STARTED: o_started,
    ObjectiveId.O_GOT_SIGNATURE: o_got_signature,
    ObjectiveId.O_GOT_ABORT: o_got_abort,
    ObjectiveId.R_GOT_SIGNATURE: r_got_signature,
    ObjectiveId.R_GOT_ABORT: r_got_abort,
    ObjectiveId.TTP_ANSWERED: ttp_answered,
    ObjectiveId.TTP_RESOLVE_COMPLETE_O: ttp_resolve_complete_o,
    ObjectiveId.TTP_RESOLVE_COMPLETE_R: ttp_resolve_complete_r,
    ObjectiveId.TTP_ABORT_COMPLETE_O: ttp_abort_complete_o,
    ObjectiveId.TTP_ABORT_COMPLETE_R: ttp_abort_complete_r,
}


def eval_objective(objective: ObjectiveId, limit: int | Iterable[Pred]) -> bool:
    """Evaluate an objective on the limit valuation of a fair run."""
    return _EVALUATORS[objective](_as_mask(limit))


# ---------------------------------------------------------------------------
# Reachability-consistent valuations over the standard predicates.
#
# Arbitrary flag combinations can pretend, say, that O holds R's signature
# without ever having obtained the evidence of receipt.  The entailments
# below are exactly what the send gates and delivery effects force on every
# run; the guaranteed-fairness sweep quantifies over all valuations that
# respect them.

_IMPLICATIONS: list[tuple[int, int]] = [
    (Pred.M2.bit, Pred.EOO.bit),
    (Pred.M3.bit, Pred.EOR.bit),
    (Pred.M4.bit, Pred.SIGA_O.bit),
    (Pred.REQR_O.bit, Pred.EOR.bit),
    (Pred.REQR_R.bit, Pred.EOO.bit),
    (Pred.SIGA_O.bit, Pred.M3.bit),
    (Pred.SIGB_R.bit, Pred.M4.bit),
    (Pred.SIGA_TTP.bit, Pred.R2_R.bit),
    (Pred.SIGB_TTP.bit, Pred.R2_O.bit),
    (Pred.AB_O.bit, Pred.A2_O.bit),
    (Pred.AB_R.bit, Pred.A2_R.bit),
    (Pred.REQA.bit, Pred.REQA_O.bit),
]

_DISJUNCTIVE: list[tuple[int, int]] = [
    # receipt flag -> one of its delivery sources
    (Pred.EOO.bit, Pred.M1.bit | Pred.SIGA_TTP.bit),
    (Pred.EOR.bit, Pred.M2.bit | Pred.SIGB_TTP.bit),
    (Pred.REQR.bit, Pred.REQR_O.bit | Pred.REQR_R.bit),
    # third-party responses require a received request
    (Pred.A2_O.bit | Pred.A2_R.bit | Pred.R2_O.bit | Pred.R2_R.bit,
     Pred.REQA.bit | Pred.REQR.bit),
]


def is_consistent(mask: int) -> bool:
    """True iff a standard-predicate valuation respects the message order."""
    for pre, post in _IMPLICATIONS:
        if mask & pre and mask & post != post:
            return False
    for pre, post in _DISJUNCTIVE:
        if mask & pre and not mask & post:
            return False
    return True


def fairness_implication_exceptions() -> list[int]:
    """Exhaustively sweep all 2^k standard valuations; return every
    message-order-consistent valuation where the three participant
    objectives hold but fairness does not."""
    import numpy as np

    n = 1 << N_STANDARD
    masks = np.arange(n, dtype=np.int64)

    def has(p: Pred):
        return (masks >> int(p) & 1).astype(bool)

    m1, eor, m3 = has(Pred.M1), has(Pred.EOR), has(Pred.M3)
    sigb_r, sigb_ttp = has(Pred.SIGB_R), has(Pred.SIGB_TTP)
    reqa_o, reqr_o, ab_o = has(Pred.REQA_O), has(Pred.REQR_O), has(Pred.AB_O)
    eoo, m2, siga_o = has(Pred.EOO), has(Pred.M2), has(Pred.SIGA_O)
    m4, siga_ttp = has(Pred.M4), has(Pred.SIGA_TTP)
    reqr_r, ab_r = has(Pred.REQR_R), has(Pred.AB_R)
    reqa, reqr = has(Pred.REQA), has(Pred.REQR)
    a2_o, a2_r, r2_o, r2_r = has(Pred.A2_O), has(Pred.A2_R), has(Pred.R2_O), has(Pred.R2_R)

    phi_o = m1 & ((sigb_r | (sigb_ttp & ~ab_o)) | (ab_o & ~siga_o & ~siga_ttp))
    phi_r = ~eoo | (siga_o | (siga_ttp & ~ab_r)) | (ab_r & ~sigb_r & ~sigb_ttp)
    answered = ~(reqa | reqr) | (ab_o | ab_r | siga_ttp | sigb_ttp)
    phi_ttp = (answered
               & (~siga_ttp | (sigb_ttp & ~ab_o & ~ab_r))
               & (~sigb_ttp | (siga_ttp & ~ab_o & ~ab_r))
               & (~ab_o | (ab_r & ~siga_ttp & ~sigb_ttp))
               & (~ab_r | (ab_o & ~siga_ttp & ~sigb_ttp)))
    nro_v = eoo & (siga_o | siga_ttp)
    nrr_v = eor & (sigb_r | sigb_ttp)
    phi_f = (~nro_v | nrr_v) & (~nrr_v | nro_v)

    consistent = (
        (~m2 | eoo) & (~m3 | eor) & (~m4 | siga_o)
        & (~reqr_o | eor) & (~reqr_r | eoo)
        & (~siga_o | m3) & (~sigb_r | m4)
        & (~siga_ttp | r2_r) & (~sigb_ttp | r2_o)
        & (~ab_o | a2_o) & (~ab_r | a2_r)
        & (~reqa | reqa_o)
        & (~eoo | (m1 | siga_ttp)) & (~eor | (m2 | sigb_ttp))
        & (~reqr | (reqr_o | reqr_r))
        & (~(a2_o | a2_r | r2_o | r2_r) | (reqa | reqr))
    )

    bad = consistent & phi_o & phi_r & phi_ttp & ~phi_f
    return [int(x) for x in masks[bad]]
