"""Exhaustive exploration of the protocol arena.

Every non-idle transition strictly grows the pair (valuation, channel
statuses), so the arena is a finite DAG plus idle self-loops.  A fair run
may stop changing state only at a quiescent configuration:

* no message on a lossless (resilient or operational) channel is still in
  transit;
* no bounded-idle participant has an enabled non-idle move;
* a reasonable bounded-idle third party has no undischarged first-request
  obligation;
* the recovery window, if open, has been answered or has expired.

Unreliable in-transit messages may stay undelivered forever, which is
observationally the same as dropping them, so the explorer never schedules
explicit drop events (``step`` still replays them).

Exploration is deterministic: actions are totally ordered (O < R < TTP <
channel events, message kinds in declaration order, deliveries before
drops, window expiry last) and every reported witness is the
lexicographically least run for its query.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

from .messages import Move, Status
from .model import (
    Action, ChannelKind, Config, INITIAL, ProtocolSpec, Role,
    available_actions, message_universe, step,
)
from .predicates import Pred, has_responded, preds_of

Condition = Callable[[int], bool]


@dataclass(frozen=True)
class Run:
    """A replayable finite run: actions paired with the configs they visit."""

    actions: Tuple[Action, ...]
    configs: Tuple[Config, ...]

    @property
    def limit(self) -> int:
        return self.configs[-1].val

    @property
    def limit_preds(self) -> FrozenSet[Pred]:
        return preds_of(self.limit)

    def sends(self) -> Tuple[Move, ...]:
        """The message backbone: participant moves in order, deliveries elided."""
        return tuple(a.move for a in self.actions if a.kind == "move")

    def replay(self, spec: ProtocolSpec) -> bool:
        cfg = self.configs[0]
        for action, expected in zip(self.actions, self.configs[1:]):
            cfg = step(spec, cfg, action)
            if cfg != expected:
                return False
        return cfg == self.configs[-1]


EMPTY_RUN = Run((), (INITIAL,))


@dataclass(frozen=True)
class Verdict:
    """Outcome of a universal check."""

    holds: bool
    counterexample: Optional[Run] = None
    limit: Optional[FrozenSet[Pred]] = None

    def __bool__(self) -> bool:
        return self.holds


class Arena:
    """Compiled transition system for one spec, with memoized structure."""

    def __init__(self, spec: ProtocolSpec):
        self.spec = spec
        self.universe = message_universe(spec)
        self._lossless_idx = tuple(
            i for i, k in enumerate(self.universe)
            if spec.channel_of(k) is not ChannelKind.UNRELIABLE)
        self._bounded = tuple(
            p.role for p in spec.participants if p.bounded_idle)
        ttp = next((p for p in spec.participants if p.role is Role.TTP), None)
        self._forced_ttp = ttp is not None and ttp.bounded_idle and ttp.reasonable
        self._succs: Dict[Config, Tuple[Tuple[Action, Config], ...]] = {}
        self._quiescent: Dict[Config, bool] = {}

    def successors(self, cfg: Config) -> Tuple[Tuple[Action, Config], ...]:
        hit = self._succs.get(cfg)
        if hit is None:
            hit = tuple((a, step(self.spec, cfg, a))
                        for a in available_actions(self.spec, cfg))
            self._succs[cfg] = hit
        return hit

    def quiescent(self, cfg: Config) -> bool:
        hit = self._quiescent.get(cfg)
        if hit is None:
            hit = self._compute_quiescent(cfg)
            self._quiescent[cfg] = hit
        return hit

    def _compute_quiescent(self, cfg: Config) -> bool:
        for i in self._lossless_idx:
            if cfg.status_of(i) is Status.IN_TRANSIT:
                return False
        actions = self.successors(cfg)
        for action, _ in actions:
            if action.kind == "expire":
                return False  # the recovery window is still open
            if action.kind == "move" and action.role in self._bounded:
                return False  # a bounded participant still owes a move
        if (self._forced_ttp and actions
                and cfg.val & (Pred.REQA.bit | Pred.REQR.bit)
                and not has_responded(cfg.val)):
            # Pending first-request obligation: the run must go on until a
            # token or replacement signature has been issued.
            return False
        return True

    def reachable(self) -> FrozenSet[Config]:
        seen = {INITIAL}
        frontier = [INITIAL]
        while frontier:
            cfg = frontier.pop()
            for _, nxt in self.successors(cfg):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return frozenset(seen)

    def can_reach(self, cond: Condition) -> Callable[[Config], bool]:
        """Lazy memo: can some fair completion from a config end quiescent
        with a valuation satisfying ``cond``?"""
        memo: Dict[Config, bool] = {}

        def can(cfg: Config) -> bool:
            hit = memo.get(cfg)
            if hit is not None:
                return hit
            ok = self.quiescent(cfg) and cond(cfg.val)
            if not ok:
                for _, nxt in self.successors(cfg):
                    if can(nxt):
                        ok = True
                        break
            memo[cfg] = ok
            return ok

        return can


_ARENAS: Dict[str, Arena] = {}


def arena_for(spec: ProtocolSpec) -> Arena:
    key = spec.canonical_key()
    hit = _ARENAS.get(key)
    if hit is None:
        hit = Arena(spec)
        _ARENAS[key] = hit
    return hit


def reachable_configs(spec: ProtocolSpec) -> FrozenSet[Config]:
    """Every configuration reachable from the all-false initial valuation."""
    return arena_for(spec).reachable()


def limit_valuations(spec: ProtocolSpec) -> Dict[FrozenSet[Pred], Run]:
    """All achievable limit valuations, each with its canonical witness run."""
    arena = arena_for(spec)
    limits: Dict[int, Run] = {}
    _collect_limits(arena, INITIAL, [], [INITIAL], limits, set())
    return {preds_of(m): run for m, run in limits.items()}


def _collect_limits(arena: Arena, cfg: Config, actions: List[Action],
                    configs: List[Config], limits: Dict[int, Run],
                    seen: set) -> None:
    # Depth-first in canonical action order: the first run recorded for a
    # valuation is the lexicographically least one reaching it.
    if arena.quiescent(cfg) and cfg.val not in limits:
        limits[cfg.val] = Run(tuple(actions), tuple(configs))
    if cfg in seen:
        return
    seen.add(cfg)
    for action, nxt in arena.successors(cfg):
        actions.append(action)
        configs.append(nxt)
        _collect_limits(arena, nxt, actions, configs, limits, seen)
        actions.pop()
        configs.pop()


def witness_trace(spec: ProtocolSpec, condition: Condition,
                  backbone: Optional[Tuple[Move, ...]] = None) -> Optional[Run]:
    """The lexicographically least fair run whose limit satisfies
    ``condition``, or None.  With ``backbone`` the search is constrained to
    runs whose participant moves are exactly that sequence."""
    arena = arena_for(spec)
    if backbone is not None:
        return _witness_with_backbone(arena, condition, backbone)
    can = arena.can_reach(condition)
    if not can(INITIAL):
        return None
    actions: List[Action] = []
    configs: List[Config] = [INITIAL]
    cfg = INITIAL
    while True:
        if arena.quiescent(cfg) and condition(cfg.val):
            return Run(tuple(actions), tuple(configs))
        for action, nxt in arena.successors(cfg):
            if can(nxt):
                actions.append(action)
                configs.append(nxt)
                cfg = nxt
                break
        else:
            raise AssertionError("reachability memo promised a completion")


def _witness_with_backbone(arena: Arena, condition: Condition,
                           backbone: Tuple[Move, ...]) -> Optional[Run]:
    found: List[Optional[Run]] = [None]
    dead: set = set()

    def visit(cfg: Config, used: int, actions: List[Action], configs: List[Config]) -> bool:
        if used == len(backbone) and arena.quiescent(cfg) and condition(cfg.val):
            found[0] = Run(tuple(actions), tuple(configs))
            return True
        key = (cfg, used)
        if key in dead:
            return False
        for action, nxt in arena.successors(cfg):
            if action.kind == "move":
                if used >= len(backbone) or action.move != backbone[used]:
                    continue
                nused = used + 1
            else:
                nused = used
            actions.append(action)
            configs.append(nxt)
            if visit(nxt, nused, actions, configs):
                return True
            actions.pop()
            configs.pop()
        dead.add(key)
        return False

    visit(INITIAL, 0, [], [INITIAL])
    return found[0]


def universal_check(spec: ProtocolSpec, condition: Condition) -> Verdict:
    """Does every fair run's limit satisfy ``condition``?"""
    witness = witness_trace(spec, lambda m: not condition(m))
    if witness is None:
        return Verdict(True)
    return Verdict(False, counterexample=witness, limit=witness.limit_preds)
