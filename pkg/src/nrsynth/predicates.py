"""Monotone protocol predicates and the participant variable partition.

Every predicate is a boolean flag that, once set during a protocol
instance, stays set.  A valuation is the set of flags that currently
hold; internally valuations travel as bit masks for speed.
"""

from __future__ import annotations

import enum
from typing import FrozenSet, Iterable


class Role(enum.Enum):
    O = "O"
    R = "R"
    TTP = "TTP"

    def __lt__(self, other: "Role") -> bool:
        return ROLE_ORDER[self] < ROLE_ORDER[other]


ROLE_ORDER = {Role.O: 0, Role.R: 1, Role.TTP: 2}


class Pred(enum.IntEnum):
    # Originator-side flags.
    M1 = 0          # sent m1
    EOR = 1         # evidence of receipt (got m2 or r2_O)
    M3 = 2          # sent m3
    SIGB_R = 3      # got R's signature via m4
    SIGB_TTP = 4    # got R's replacement signature via r2_O
    REQA_O = 5      # sent abort request a1_O
    REQR_O = 6      # sent resolve request r1_O
    AB_O = 7        # got abort token a2_O
    # Recipient-side flags.
    EOO = 8         # evidence of origin (got m1 or r2_R)
    M2 = 9          # sent m2
    SIGA_O = 10     # got O's signature via m3
    M4 = 11         # sent m4
    SIGA_TTP = 12   # got O's replacement signature via r2_R
    REQR_R = 13     # sent resolve request r1_R
    AB_R = 14       # got abort token a2_R
    # Third-party-side flags.
    REQA = 15       # received an abort request
    REQR = 16       # received a resolve request
    A2_O = 17       # sent a2_O
    A2_R = 18       # sent a2_R
    R2_O = 19       # sent r2_O
    R2_R = 20       # sent r2_R
    # Bookkeeping flags (not part of the standard predicate universe).
    FIRST_REQ_ABORT = 21    # first request delivered was an abort request
    FIRST_REQ_RESOLVE = 22  # first request delivered was a resolve request
    FIRST_REQ_FROM_R = 23   # that first request was sent by R
    FIRST_RESP_ABORT = 24   # first token/evidence response was abort-class
    FIRST_RESP_RESOLVE = 25  # first token/evidence response was resolve-class
    GOT_A1_O = 26   # a1_O delivered
    GOT_R1_O = 27   # r1_O delivered
    GOT_R1_R = 28   # r1_R delivered
    GOT_A1_R = 29   # a1_R delivered
    # Symmetric-extension flags.
    REQA_R = 30     # R sent abort request a1_R
    REQO_SENT = 31  # TTP sent the recovery invite req_O
    REQO_RCVD = 32  # O received req_O
    RESO_SENT = 33  # O sent the recovery answer res_O
    RESO_RCVD = 34  # TTP received res_O
    O_DECLINED = 35  # O's window for answering req_O has closed

    @property
    def bit(self) -> int:
        return 1 << int(self)


#: The predicates of the underlying protocol state (objectives only read these).
STANDARD_PREDS: tuple[Pred, ...] = tuple(Pred(i) for i in range(21))
N_STANDARD = len(STANDARD_PREDS)

# Variable partition.  O_DECLINED is the shared recovery-window state: it is
# observable both by O (whose window it is) and by the TTP (whose clock
# closes it), so it appears in both restrictions.
O_VARS: FrozenSet[Pred] = frozenset({
    Pred.M1, Pred.EOR, Pred.M3, Pred.SIGB_R, Pred.SIGB_TTP,
    Pred.REQA_O, Pred.REQR_O, Pred.AB_O,
    Pred.REQO_RCVD, Pred.RESO_SENT, Pred.O_DECLINED,
})
R_VARS: FrozenSet[Pred] = frozenset({
    Pred.EOO, Pred.M2, Pred.SIGA_O, Pred.M4, Pred.SIGA_TTP,
    Pred.REQR_R, Pred.AB_R, Pred.REQA_R,
})
TTP_VARS: FrozenSet[Pred] = frozenset({
    Pred.REQA, Pred.REQR, Pred.A2_O, Pred.A2_R, Pred.R2_O, Pred.R2_R,
    Pred.FIRST_REQ_ABORT, Pred.FIRST_REQ_RESOLVE, Pred.FIRST_REQ_FROM_R,
    Pred.FIRST_RESP_ABORT, Pred.FIRST_RESP_RESOLVE,
    Pred.GOT_A1_O, Pred.GOT_R1_O, Pred.GOT_R1_R, Pred.GOT_A1_R,
    Pred.REQO_SENT, Pred.RESO_RCVD, Pred.O_DECLINED,
})

ROLE_VARS = {Role.O: O_VARS, Role.R: R_VARS, Role.TTP: TTP_VARS}


def mask_of(preds: Iterable[Pred]) -> int:
    m = 0
    for p in preds:
        m |= p.bit
    return m


def preds_of(mask: int) -> FrozenSet[Pred]:
    return frozenset(p for p in Pred if mask >> int(p) & 1)


O_MASK = mask_of(O_VARS)
R_MASK = mask_of(R_VARS)
TTP_MASK = mask_of(TTP_VARS)
ROLE_MASKS = {Role.O: O_MASK, Role.R: R_MASK, Role.TTP: TTP_MASK}

_RESPONSE_MASK = mask_of({Pred.A2_O, Pred.A2_R, Pred.R2_O, Pred.R2_R})


def has_responded(mask: int) -> bool:
    """True once the TTP has issued any abort token or replacement signature."""
    return bool(mask & _RESPONSE_MASK)


def nro(mask: int) -> bool:
    """Non-repudiation of origin held by R."""
    return bool(mask & Pred.EOO.bit) and bool(mask & (Pred.SIGA_O.bit | Pred.SIGA_TTP.bit))


def nrr(mask: int) -> bool:
    """Non-repudiation of receipt held by O."""
    return bool(mask & Pred.EOR.bit) and bool(mask & (Pred.SIGB_R.bit | Pred.SIGB_TTP.bit))
