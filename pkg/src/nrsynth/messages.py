"""Message kinds, channel status, and the move vocabulary."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import FrozenSet, Tuple

from .predicates import Pred, Role


class Msg(enum.IntEnum):
    m1 = 0
    m2 = 1
    m3 = 2
    m4 = 3
    a1_O = 4
    a1_R = 5
    r1_O = 6
    r1_R = 7
    a2_O = 8
    a2_R = 9
    r2_O = 10
    r2_R = 11
    req_O = 12
    res_O = 13


class Status(enum.IntEnum):
    UNSENT = 0
    IN_TRANSIT = 1
    DELIVERED = 2
    DROPPED = 3


class Edge(enum.Enum):
    AGENT = "agent"  # O <-> R
    TTP = "ttp"      # agent <-> TTP


SENDER = {
    Msg.m1: Role.O, Msg.m2: Role.R, Msg.m3: Role.O, Msg.m4: Role.R,
    Msg.a1_O: Role.O, Msg.a1_R: Role.R, Msg.r1_O: Role.O, Msg.r1_R: Role.R,
    Msg.a2_O: Role.TTP, Msg.a2_R: Role.TTP, Msg.r2_O: Role.TTP, Msg.r2_R: Role.TTP,
    Msg.req_O: Role.TTP, Msg.res_O: Role.O,
}

#: Flag the sender sets at the instant of sending.
SENT_PRED = {
    Msg.m1: Pred.M1, Msg.m2: Pred.M2, Msg.m3: Pred.M3, Msg.m4: Pred.M4,
    Msg.a1_O: Pred.REQA_O, Msg.a1_R: Pred.REQA_R,
    Msg.r1_O: Pred.REQR_O, Msg.r1_R: Pred.REQR_R,
    Msg.a2_O: Pred.A2_O, Msg.a2_R: Pred.A2_R,
    Msg.r2_O: Pred.R2_O, Msg.r2_R: Pred.R2_R,
    Msg.req_O: Pred.REQO_SENT, Msg.res_O: Pred.RESO_SENT,
}

#: Flags the receiver sets on delivery (first-request bookkeeping is added in step()).
RECV_PREDS = {
    Msg.m1: (Pred.EOO,),
    Msg.m2: (Pred.EOR,),
    Msg.m3: (Pred.SIGA_O,),
    Msg.m4: (Pred.SIGB_R,),
    Msg.a1_O: (Pred.REQA, Pred.GOT_A1_O),
    Msg.a1_R: (Pred.REQA, Pred.GOT_A1_R),
    Msg.r1_O: (Pred.REQR, Pred.GOT_R1_O),
    Msg.r1_R: (Pred.REQR, Pred.GOT_R1_R),
    Msg.a2_O: (Pred.AB_O,),
    Msg.a2_R: (Pred.AB_R,),
    Msg.r2_O: (Pred.SIGB_TTP, Pred.EOR),
    Msg.r2_R: (Pred.SIGA_TTP, Pred.EOO),
    Msg.req_O: (Pred.REQO_RCVD,),
    Msg.res_O: (Pred.RESO_RCVD,),
}

EDGE_OF = {
    Msg.m1: Edge.AGENT, Msg.m2: Edge.AGENT, Msg.m3: Edge.AGENT, Msg.m4: Edge.AGENT,
}
for _m in Msg:
    EDGE_OF.setdefault(_m, Edge.TTP)

REQUEST_KINDS: FrozenSet[Msg] = frozenset({Msg.a1_O, Msg.a1_R, Msg.r1_O, Msg.r1_R})
ABORT_REQUESTS: FrozenSet[Msg] = frozenset({Msg.a1_O, Msg.a1_R})
ABORT_TOKENS: FrozenSet[Msg] = frozenset({Msg.a2_O, Msg.a2_R})
RESOLVE_TOKENS: FrozenSet[Msg] = frozenset({Msg.r2_O, Msg.r2_R})


@dataclass(frozen=True, order=True)
class Move:
    """A participant move: send one message, send a pair, or idle (empty)."""

    kinds: Tuple[Msg, ...] = ()

    def __repr__(self) -> str:
        if not self.kinds:
            return "idle"
        return "+".join(k.name for k in self.kinds)

    @property
    def is_idle(self) -> bool:
        return not self.kinds


IDLE = Move()


def send(kind: Msg) -> Move:
    return Move((kind,))


def send_both(a: Msg, b: Msg) -> Move:
    return Move((a, b))


ABORT_BOTH = send_both(Msg.a2_O, Msg.a2_R)
RESOLVE_BOTH = send_both(Msg.r2_O, Msg.r2_R)

#: The composite pairs the TTP may send in one move.
COMPOSITE_MOVES = (ABORT_BOTH, RESOLVE_BOTH)


def move_sort_key(move: Move) -> tuple:
    if move.is_idle:
        return (1, ())
    return (0, tuple(int(k) for k in move.kinds))


def parse_move(text: str) -> Move:
    """Parse ``m1`` or ``a2_O+a2_R`` style move names."""
    if text == "idle":
        return IDLE
    kinds = tuple(Msg[p] for p in text.split("+"))
    return Move(kinds)
