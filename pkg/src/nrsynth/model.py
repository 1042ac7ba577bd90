"""Participants, protocol specs, configurations, and the step semantics.

A protocol is a triple of participant refinements over a fixed move
vocabulary.  Each participant's behavior is a move assignment: a function
from the restriction of the valuation to that participant's own variables
to a set of enabled moves.  Assignments are represented as ordered rule
lists over such restrictions so that refinements can be compared,
serialized, and re-parsed.

All values are immutable; ``step`` is a pure function, so the module is
safe for concurrent use by any number of analysis workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, FrozenSet, Iterable, Optional, Sequence, Tuple

from .messages import (
    ABORT_BOTH, ABORT_REQUESTS, ABORT_TOKENS, COMPOSITE_MOVES, EDGE_OF, IDLE,
    RECV_PREDS, REQUEST_KINDS, RESOLVE_BOTH, RESOLVE_TOKENS, SENDER, SENT_PRED,
    Edge, Move, Msg, Status, move_sort_key, send,
)
from .predicates import (
    Pred, ROLE_MASKS, Role, has_responded, mask_of, preds_of,
)


class UsageError(ValueError):
    """Raised for malformed queries (unknown participant, variant mismatch...)."""


class RefinementViolation(ValueError):
    """Raised when a rule tries to allow a move outside the base behavior."""


class ContractViolation(RuntimeError):
    """Raised when stepping with an action that is not enabled."""


class Variant(enum.Enum):
    STANDARD = "standard"
    NO_TTP = "no_ttp"
    SYMMETRIC = "symmetric"


class ChannelKind(enum.Enum):
    UNRELIABLE = "unreliable"
    RESILIENT = "resilient"
    OPERATIONAL = "operational"


@dataclass(frozen=True)
class Rule:
    """One restriction rule for a participant's move assignment.

    A rule matches a valuation restriction when every predicate in
    ``requires`` is set and none in ``absent`` is.  With ``exact`` the
    restriction must equal ``requires`` over the participant's variables.
    The first rule mentioning a move decides it; unmentioned moves fall
    through to the most general behavior within the alphabet.
    """

    role: Role
    requires: FrozenSet[Pred] = frozenset()
    absent: FrozenSet[Pred] = frozenset()
    allow: bool = False
    moves: Tuple[Move, ...] = ()
    exact: bool = False

    def matches(self, restriction_mask: int, role_mask: int) -> bool:
        req = mask_of(self.requires)
        if self.exact:
            return restriction_mask & role_mask == req & role_mask
        if restriction_mask & req != req:
            return False
        return not (restriction_mask & mask_of(self.absent))


DENY_ALL = "deny_all"
ALLOW_ALL = "allow_all"


@dataclass(frozen=True)
class ParticipantSpec:
    """A participant: alphabet, assignment rules, and behavioral flags."""

    role: Role
    alphabet: FrozenSet[Move]
    rules: Tuple[Rule, ...] = ()
    default: str = ALLOW_ALL
    bounded_idle: bool = False
    reasonable: bool = False

    def assigned(self, restriction_mask: int) -> FrozenSet[Move]:
        """Raw move assignment at a restriction (before knowledge filtering)."""
        role_mask = ROLE_MASKS[self.role]
        decided: dict[Move, bool] = {}
        undecided = set(self.alphabet)
        for rule in self.rules:
            if not undecided:
                break
            if not rule.matches(restriction_mask, role_mask):
                continue
            for mv in rule.moves:
                if mv in undecided:
                    decided[mv] = rule.allow
                    undecided.discard(mv)
        default_allow = self.default == ALLOW_ALL
        out = {mv for mv, ok in decided.items() if ok}
        if default_allow:
            out |= undecided
        return frozenset(out)

    def mentioned_preds(self) -> FrozenSet[Pred]:
        preds: set[Pred] = set()
        for rule in self.rules:
            preds |= rule.requires
            preds |= rule.absent
        return frozenset(preds)


@dataclass(frozen=True)
class ProtocolSpec:
    """A triple of participants plus channel semantics."""

    variant: Variant
    participants: Tuple[ParticipantSpec, ...]
    agent_channel: ChannelKind = ChannelKind.UNRELIABLE
    ttp_channel: ChannelKind = ChannelKind.RESILIENT
    name: str = ""

    def participant(self, role: Role) -> ParticipantSpec:
        for p in self.participants:
            if p.role is role:
                return p
        raise UsageError(f"no participant {role.value} in this spec")

    def roles(self) -> Tuple[Role, ...]:
        return tuple(p.role for p in self.participants)

    def channel_of(self, kind: Msg) -> ChannelKind:
        return self.agent_channel if EDGE_OF[kind] is Edge.AGENT else self.ttp_channel

    def with_participant(self, part: ParticipantSpec) -> "ProtocolSpec":
        parts = tuple(part if p.role is part.role else p for p in self.participants)
        return replace(self, participants=parts)

    @property
    def universe(self) -> Tuple[Msg, ...]:
        return message_universe(self)

    def canonical_key(self) -> str:
        """Stable structural identity, used for caching and digests."""
        bits = [self.variant.value, self.agent_channel.value, self.ttp_channel.value]
        for p in self.participants:
            bits.append(p.role.value)
            bits.append(",".join(sorted(repr(m) for m in p.alphabet)))
            bits.append(str(int(p.bounded_idle)) + str(int(p.reasonable)) + p.default)
            for r in p.rules:
                bits.append("|".join([
                    r.role.value,
                    ",".join(sorted(q.name for q in r.requires)),
                    ",".join(sorted(q.name for q in r.absent)),
                    "A" if r.allow else "D",
                    ",".join(sorted(repr(m) for m in r.moves)),
                    "X" if r.exact else "-",
                ]))
        return ";".join(bits)


def message_universe(spec: ProtocolSpec) -> Tuple[Msg, ...]:
    """The message kinds that exist for this spec."""
    kinds = [Msg.m1, Msg.m2, Msg.m3, Msg.m4]
    if spec.variant is not Variant.NO_TTP:
        kinds += [Msg.a1_O, Msg.r1_O, Msg.r1_R, Msg.a2_O, Msg.a2_R, Msg.r2_O, Msg.r2_R]
        if spec.variant is Variant.SYMMETRIC:
            kinds.insert(5, Msg.a1_R)
        mentioned = set()
        for p in spec.participants:
            for mv in p.alphabet:
                mentioned.update(mv.kinds)
        if spec.variant is Variant.SYMMETRIC or Msg.req_O in mentioned:
            kinds += [Msg.req_O, Msg.res_O]
    return tuple(sorted(kinds))


# ---------------------------------------------------------------------------
# Configurations

@dataclass(frozen=True)
class Config:
    """One node of the exploration arena: valuation plus channel statuses.

    ``status`` packs two bits per message kind, indexed by the spec's
    message universe order.
    """

    val: int
    status: int

    def status_of(self, idx: int) -> Status:
        return Status(self.status >> (2 * idx) & 3)

    def with_status(self, idx: int, st: Status) -> "Config":
        cleared = self.status & ~(3 << (2 * idx))
        return Config(self.val, cleared | (int(st) << (2 * idx)))

    def valuation(self) -> FrozenSet[Pred]:
        return preds_of(self.val)


INITIAL = Config(0, 0)


# ---------------------------------------------------------------------------
# Actions

@dataclass(frozen=True)
class Action:
    """An arena transition: a participant move, a delivery, a drop, or the
    expiry of the recovery window."""

    kind: str                      # "move" | "deliver" | "drop" | "expire"
    role: Optional[Role] = None    # for moves
    move: Optional[Move] = None    # for moves
    msg: Optional[Msg] = None      # for deliver/drop

    def sort_key(self) -> tuple:
        if self.kind == "move":
            return (0, ROLE_MASKS_ORDER[self.role], move_sort_key(self.move))
        if self.kind == "deliver":
            return (1, int(self.msg), 0)
        if self.kind == "drop":
            return (1, int(self.msg), 1)
        return (2, 0, 0)

    def __repr__(self) -> str:
        if self.kind == "move":
            return f"{self.role.value}:{self.move!r}"
        if self.kind in ("deliver", "drop"):
            return f"{self.kind}:{self.msg.name}"
        return "expire"


ROLE_MASKS_ORDER = {Role.O: 0, Role.R: 1, Role.TTP: 2}


def move_action(role: Role, mv: Move) -> Action:
    return Action("move", role=role, move=mv)


def deliver(msg: Msg) -> Action:
    return Action("deliver", msg=msg)


def drop(msg: Msg) -> Action:
    return Action("drop", msg=msg)


EXPIRE = Action("expire")


# ---------------------------------------------------------------------------
# Knowledge admissibility

_KNOWLEDGE_GATES = {
    Msg.m2: Pred.EOO.bit,
    Msg.r1_R: Pred.EOO.bit,
    Msg.a1_R: Pred.EOO.bit,
    Msg.m3: Pred.EOR.bit,
    Msg.r1_O: Pred.EOR.bit,
    Msg.m4: Pred.SIGA_O.bit,
}

_RESO_GATE = Pred.REQO_RCVD.bit | Pred.EOR.bit


def _kind_admissible(spec: ProtocolSpec, cfg: Config, part: ParticipantSpec,
                     kind: Msg, uni_index: dict) -> bool:
    idx = uni_index.get(kind)
    if idx is None:
        return False
    if cfg.status_of(idx) is not Status.UNSENT:
        return False
    gate = _KNOWLEDGE_GATES.get(kind)
    if gate is not None and cfg.val & gate != gate:
        return False
    if kind is Msg.res_O:
        if cfg.val & _RESO_GATE != _RESO_GATE:
            return False
        if cfg.val & Pred.O_DECLINED.bit:
            return False
    if part.role is Role.TTP and part.reasonable:
        if not _ttp_response_admissible(cfg.val, kind):
            return False
    return True


def _ttp_response_admissible(val: int, kind: Msg) -> bool:
    """A reasonable third party answers only received requests, and its
    response to the first one matches the request class."""
    if not val & (Pred.REQA.bit | Pred.REQR.bit):
        return False
    if kind is Msg.req_O:
        # Invite O to recover: right after a first abort request from R, or
        # at any later point once some abort request has been received.
        if has_responded(val):
            return bool(val & Pred.REQA.bit)
        return bool(val & Pred.FIRST_REQ_FROM_R.bit) and bool(val & Pred.FIRST_REQ_ABORT.bit)
    if has_responded(val):
        return True
    if val & Pred.FIRST_REQ_RESOLVE.bit:
        return kind in RESOLVE_TOKENS
    # First request was an abort request.  Once the recovery invite has been
    # answered, resolving becomes admissible as well.
    if kind in ABORT_TOKENS:
        return True
    return bool(val & Pred.RESO_RCVD.bit)


def enabled_moves(spec: ProtocolSpec, cfg: Config, who: Role) -> FrozenSet[Move]:
    """The moves ``who`` may take at ``cfg``: assignment intersected with
    knowledge admissibility.  Always contains the idle move."""
    part = spec.participant(who)
    uni_index = _universe_index(spec)
    restriction = cfg.val & ROLE_MASKS[who]
    assigned = part.assigned(restriction)
    out = {IDLE}
    for mv in assigned:
        if mv.is_idle:
            continue
        if all(_kind_admissible(spec, cfg, part, k, uni_index) for k in mv.kinds):
            out.add(mv)
    return frozenset(out)


_UNIVERSE_CACHE: dict = {}


def _universe_index(spec: ProtocolSpec) -> dict:
    key = spec.canonical_key()
    hit = _UNIVERSE_CACHE.get(key)
    if hit is None:
        hit = {m: i for i, m in enumerate(message_universe(spec))}
        _UNIVERSE_CACHE[key] = hit
    return hit


# ---------------------------------------------------------------------------
# The recovery window (req_O / res_O timing)

def window_open(spec: ProtocolSpec, cfg: Config) -> bool:
    """True while the third party's clock on the recovery invite can still
    expire.  Under operational channels a bounded-idle O that can still
    answer is guaranteed to make the window; under resilient channels the
    invite or the answer may be delayed past any bound."""
    uni_index = _universe_index(spec)
    if Msg.req_O not in uni_index:
        return False
    if cfg.val & Pred.O_DECLINED.bit:
        return False
    if spec.ttp_channel is ChannelKind.OPERATIONAL:
        if not cfg.val & Pred.REQO_RCVD.bit:
            return False
        if cfg.val & Pred.RESO_SENT.bit:
            return False
        try:
            part_o = spec.participant(Role.O)
        except UsageError:
            return True
        if part_o.bounded_idle and send(Msg.res_O) in enabled_moves(spec, cfg, Role.O):
            return False
        return True
    # Resilient: delivery of either message may be delayed arbitrarily.
    if not cfg.val & Pred.REQO_SENT.bit:
        return False
    return not cfg.val & Pred.RESO_RCVD.bit


# ---------------------------------------------------------------------------
# Step semantics

def step(spec: ProtocolSpec, cfg: Config, action: Action) -> Config:
    """Deterministic successor of ``cfg`` under an enabled ``action``."""
    uni_index = _universe_index(spec)
    if action.kind == "move":
        if action.move.is_idle:
            return cfg
        if action.move not in enabled_moves(spec, cfg, action.role):
            raise ContractViolation(f"move {action.move!r} not enabled for {action.role.value}")
        return _apply_send(spec, cfg, action.role, action.move, uni_index)
    if action.kind == "deliver":
        idx = uni_index.get(action.msg)
        if idx is None or cfg.status_of(idx) is not Status.IN_TRANSIT:
            raise ContractViolation(f"{action.msg.name} is not in transit")
        return _apply_delivery(spec, cfg, action.msg, idx)
    if action.kind == "drop":
        idx = uni_index.get(action.msg)
        if idx is None or cfg.status_of(idx) is not Status.IN_TRANSIT:
            raise ContractViolation(f"{action.msg.name} is not in transit")
        if spec.channel_of(action.msg) is not ChannelKind.UNRELIABLE:
            raise ContractViolation(f"{action.msg.name} travels a lossless channel")
        return cfg.with_status(idx, Status.DROPPED)
    if action.kind == "expire":
        if not window_open(spec, cfg):
            raise ContractViolation("recovery window is not open")
        return Config(cfg.val | Pred.O_DECLINED.bit, cfg.status)
    raise UsageError(f"unknown action kind {action.kind}")


def _apply_send(spec: ProtocolSpec, cfg: Config, role: Role, mv: Move,
                uni_index: dict) -> Config:
    val = cfg.val
    status = cfg.status
    # O taking any other action while it could answer the invite forfeits it.
    if role is Role.O and Msg.res_O not in mv.kinds:
        if (val & Pred.REQO_RCVD.bit and not val & Pred.O_DECLINED.bit
                and send(Msg.res_O) in enabled_moves(spec, cfg, Role.O)):
            val |= Pred.O_DECLINED.bit
    substantive = any(k in ABORT_TOKENS or k in RESOLVE_TOKENS for k in mv.kinds)
    if role is Role.TTP and substantive and not has_responded(val):
        if any(k in ABORT_TOKENS for k in mv.kinds):
            val |= Pred.FIRST_RESP_ABORT.bit
        else:
            val |= Pred.FIRST_RESP_RESOLVE.bit
    for k in mv.kinds:
        val |= SENT_PRED[k].bit
        idx = uni_index[k]
        status = status & ~(3 << (2 * idx)) | (int(Status.IN_TRANSIT) << (2 * idx))
    return Config(val, status)


def _apply_delivery(spec: ProtocolSpec, cfg: Config, kind: Msg, idx: int) -> Config:
    val = cfg.val
    for p in RECV_PREDS[kind]:
        val |= p.bit
    if kind in REQUEST_KINDS:
        if not cfg.val & (Pred.REQA.bit | Pred.REQR.bit):
            if kind in ABORT_REQUESTS:
                val |= Pred.FIRST_REQ_ABORT.bit
            else:
                val |= Pred.FIRST_REQ_RESOLVE.bit
            if SENDER[kind] is Role.R:
                val |= Pred.FIRST_REQ_FROM_R.bit
    new = Config(val, cfg.status)
    return new.with_status(idx, Status.DELIVERED)


def available_actions(spec: ProtocolSpec, cfg: Config, include_drops: bool = False) -> list[Action]:
    """All non-idle actions enabled at ``cfg``, in canonical order.

    Drops are omitted by default: stopping with an unreliable message still
    in transit has the same limit as dropping it, so the explorer treats
    them as redundant.  ``step`` still accepts explicit drop actions.
    """
    uni = message_universe(spec)
    out: list[Action] = []
    for p in spec.participants:
        for mv in enabled_moves(spec, cfg, p.role):
            if not mv.is_idle:
                out.append(move_action(p.role, mv))
    for i, k in enumerate(uni):
        if cfg.status_of(i) is Status.IN_TRANSIT:
            out.append(deliver(k))
            if include_drops and spec.channel_of(k) is ChannelKind.UNRELIABLE:
                out.append(drop(k))
    if window_open(spec, cfg):
        out.append(EXPIRE)
    out.sort(key=Action.sort_key)
    return out


# ---------------------------------------------------------------------------
# The most general participants

def _full_alphabet(role: Role, variant: Variant) -> FrozenSet[Move]:
    if role is Role.O:
        kinds = [Msg.m1, Msg.m3, Msg.a1_O, Msg.r1_O]
        if variant is Variant.NO_TTP:
            kinds = [Msg.m1, Msg.m3]
        if variant is Variant.SYMMETRIC:
            kinds.append(Msg.res_O)
        return frozenset({IDLE} | {send(k) for k in kinds})
    if role is Role.R:
        kinds = [Msg.m2, Msg.m4, Msg.r1_R]
        if variant is Variant.NO_TTP:
            kinds = [Msg.m2, Msg.m4]
        if variant is Variant.SYMMETRIC:
            kinds.append(Msg.a1_R)
        return frozenset({IDLE} | {send(k) for k in kinds})
    moves = {IDLE, ABORT_BOTH, RESOLVE_BOTH}
    moves |= {send(k) for k in (Msg.a2_O, Msg.a2_R, Msg.r2_O, Msg.r2_R)}
    if variant is Variant.SYMMETRIC:
        moves.add(send(Msg.req_O))
    return frozenset(moves)


def most_general(variant: Variant | str) -> ProtocolSpec:
    """The most liberal participants of a variant: every knowledge-admissible
    move is enabled everywhere, nobody is bounded, the TTP is reasonable."""
    if isinstance(variant, str):
        try:
            variant = Variant(variant)
        except ValueError as exc:
            raise UsageError(f"unknown variant {variant!r}") from exc
    parts = [
        ParticipantSpec(Role.O, _full_alphabet(Role.O, variant)),
        ParticipantSpec(Role.R, _full_alphabet(Role.R, variant)),
    ]
    if variant is not Variant.NO_TTP:
        parts.append(ParticipantSpec(Role.TTP, _full_alphabet(Role.TTP, variant),
                                     reasonable=True))
    return ProtocolSpec(variant=variant, participants=tuple(parts),
                        name=f"most_general({variant.value})")


# ---------------------------------------------------------------------------
# Refinement construction and ordering

def refine(base: ProtocolSpec, rules: Sequence[Rule] = (),
           bounded_idle: Iterable[Role] = (),
           drop_moves: dict[Role, Iterable[Move]] | None = None,
           name: str = "") -> ProtocolSpec:
    """Build a refinement of ``base`` from restriction rules.

    New rules take precedence (first-match-wins per move); unmatched moves
    keep the base behavior.  ``drop_moves`` removes moves from a
    participant's alphabet outright.  Raises RefinementViolation if the
    result would enable a move anywhere the base does not.
    """
    drop_moves = drop_moves or {}
    bounded = set(bounded_idle)
    parts = []
    for p in base.participants:
        my_rules = tuple(r for r in rules if r.role is p.role)
        for r in my_rules:
            if r.allow:
                for mv in r.moves:
                    if mv not in p.alphabet and not mv.is_idle:
                        raise RefinementViolation(
                            f"rule allows {mv!r}, absent from {p.role.value}'s alphabet")
        alphabet = frozenset(p.alphabet) - frozenset(drop_moves.get(p.role, ()))
        refined = replace(
            p, alphabet=alphabet | {IDLE},
            rules=my_rules + p.rules,
            bounded_idle=p.bounded_idle or p.role in bounded,
        )
        role_mask = ROLE_MASKS[p.role]
        for m in _comparison_masks(refined, p):
            extra = refined.assigned(m & role_mask) - p.assigned(m & role_mask)
            if extra:
                raise RefinementViolation(
                    f"rule re-enables {sorted(map(repr, extra))} for {p.role.value}, "
                    "which the base forbids there")
        parts.append(refined)
    return replace(base, participants=tuple(parts), name=name or base.name)


def _comparison_masks(a: ParticipantSpec, b: ParticipantSpec) -> list[int]:
    """Restriction masks that distinguish the two assignments: all subsets of
    the predicates either side's rules mention (other flags cannot matter)."""
    preds = sorted(a.mentioned_preds() | b.mentioned_preds())
    masks = []
    n = len(preds)
    for bits in range(1 << n):
        m = 0
        for i in range(n):
            if bits >> i & 1:
                m |= preds[i].bit
        masks.append(m)
    return masks


def is_refinement(a: ProtocolSpec, b: ProtocolSpec) -> bool:
    """True iff every participant of ``a`` allows at most the moves of its
    counterpart in ``b`` at every restriction, and ``a`` is at least as
    constrained on idling."""
    if a.variant is not b.variant:
        raise UsageError("cannot compare refinements across variants")
    if set(a.roles()) != set(b.roles()):
        return False
    for pa in a.participants:
        pb = b.participant(pa.role)
        if pb.bounded_idle and not pa.bounded_idle:
            return False
        if not pa.alphabet <= pb.alphabet:
            return False
        role_mask = ROLE_MASKS[pa.role]
        for m in _comparison_masks(pa, pb):
            if not pa.assigned(m & role_mask) <= pb.assigned(m & role_mask):
                return False
    return True
