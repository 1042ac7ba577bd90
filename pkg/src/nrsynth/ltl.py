"""A small LTL evaluator over ultimately periodic valuation traces.

This is the test oracle: the objectives are written here in their
original temporal form and evaluated directly on lassos, independently of
the limit-valuation shortcut in :mod:`nrsynth.objectives`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .objectives import ObjectiveId
from .predicates import Pred


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Prop(Formula):
    pred: Pred


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    arg: Formula


@dataclass(frozen=True)
class Always(Formula):
    arg: Formula


def conj(*args: Formula) -> Formula:
    return And(tuple(args))


def disj(*args: Formula) -> Formula:
    return Or(tuple(args))


class Lasso:
    """The trace ``prefix . loop^omega`` of valuations (as predicate masks)."""

    def __init__(self, prefix: Sequence[int], loop: Sequence[int]):
        if not loop:
            raise ValueError("loop must be non-empty")
        states = list(prefix) + list(loop)
        for a, b in zip(states, states[1:]):
            if a & ~b:
                raise ValueError("trace is not monotone")
        if states[-1] & ~states[len(prefix)]:
            raise ValueError("loop is not monotone under wrap-around")
        self.prefix = list(prefix)
        self.loop = list(loop)

    def __len__(self) -> int:
        return len(self.prefix) + len(self.loop)

    def state(self, i: int) -> int:
        if i < len(self.prefix):
            return self.prefix[i]
        j = (i - len(self.prefix)) % len(self.loop)
        return self.loop[j]

    def positions(self) -> range:
        return range(len(self.prefix) + len(self.loop))

    def suffixes(self, i: int) -> range:
        """Position indices whose suffixes are distinct, seen from i."""
        return range(i, len(self.prefix) + len(self.loop))


def _eval(f: Formula, lasso: Lasso, i: int) -> bool:
    if isinstance(f, Prop):
        return bool(lasso.state(i) >> int(f.pred) & 1)
    if isinstance(f, Not):
        return not _eval(f.arg, lasso, i)
    if isinstance(f, And):
        return all(_eval(a, lasso, i) for a in f.args)
    if isinstance(f, Or):
        return any(_eval(a, lasso, i) for a in f.args)
    if isinstance(f, Implies):
        return not _eval(f.left, lasso, i) or _eval(f.right, lasso, i)
    if isinstance(f, Eventually):
        lo = min(i, len(lasso.prefix))
        return any(_eval(f.arg, lasso, j) for j in range(lo, len(lasso)))
    if isinstance(f, Always):
        lo = min(i, len(lasso.prefix))
        return all(_eval(f.arg, lasso, j) for j in range(lo, len(lasso)))
    raise TypeError(f"unknown formula node {f!r}")


def evaluate(f: Formula, prefix: Sequence[int], loop: Sequence[int]) -> bool:
    """Truth of ``f`` at position 0 of the trace ``prefix . loop^omega``."""
    return _eval(f, Lasso(prefix, loop), 0)


# ---------------------------------------------------------------------------
# The objectives in their original temporal form.

def _p(p: Pred) -> Formula:
    return Prop(p)


NRO_F = conj(_p(Pred.EOO), disj(_p(Pred.SIGA_O), _p(Pred.SIGA_TTP)))
NRR_F = conj(_p(Pred.EOR), disj(_p(Pred.SIGB_R), _p(Pred.SIGB_TTP)))

O_STARTED_F = Eventually(_p(Pred.M1))
O_GOT_SIGNATURE_F = disj(
    Eventually(_p(Pred.SIGB_R)),
    conj(Eventually(_p(Pred.SIGB_TTP)), Always(Not(_p(Pred.AB_O)))),
)
O_GOT_ABORT_F = conj(
    Eventually(_p(Pred.AB_O)),
    Always(conj(Not(_p(Pred.SIGA_O)), Not(_p(Pred.SIGA_TTP)))),
)
ORIGINATOR_F = conj(O_STARTED_F, Always(disj(O_GOT_SIGNATURE_F, O_GOT_ABORT_F)))

R_GOT_SIGNATURE_F = disj(
    Eventually(_p(Pred.SIGA_O)),
    conj(Eventually(_p(Pred.SIGA_TTP)), Always(Not(_p(Pred.AB_R)))),
)
R_GOT_ABORT_F = conj(
    Eventually(_p(Pred.AB_R)),
    Always(conj(Not(_p(Pred.SIGB_R)), Not(_p(Pred.SIGB_TTP)))),
)
RECIPIENT_F = Always(Implies(_p(Pred.EOO), disj(R_GOT_SIGNATURE_F, R_GOT_ABORT_F)))

TTP_ANSWERED_F = Always(Implies(
    disj(_p(Pred.REQA), _p(Pred.REQR)),
    disj(Eventually(_p(Pred.AB_O)), Eventually(_p(Pred.AB_R)),
         Eventually(_p(Pred.SIGA_TTP)), Eventually(_p(Pred.SIGB_TTP))),
))
TTP_RESOLVE_COMPLETE_R_F = Always(Implies(
    _p(Pred.SIGA_TTP),
    conj(Eventually(_p(Pred.SIGB_TTP)),
         Always(conj(Not(_p(Pred.AB_O)), Not(_p(Pred.AB_R))))),
))
TTP_RESOLVE_COMPLETE_O_F = Always(Implies(
    _p(Pred.SIGB_TTP),
    conj(Eventually(_p(Pred.SIGA_TTP)),
         Always(conj(Not(_p(Pred.AB_O)), Not(_p(Pred.AB_R))))),
))
TTP_ABORT_COMPLETE_O_F = Always(Implies(
    _p(Pred.AB_O),
    conj(Eventually(_p(Pred.AB_R)),
         Always(conj(Not(_p(Pred.SIGA_TTP)), Not(_p(Pred.SIGB_TTP))))),
))
TTP_ABORT_COMPLETE_R_F = Always(Implies(
    _p(Pred.AB_R),
    conj(Eventually(_p(Pred.AB_O)),
         Always(conj(Not(_p(Pred.SIGA_TTP)), Not(_p(Pred.SIGB_TTP))))),
))
TTP_F = conj(TTP_ANSWERED_F, TTP_RESOLVE_COMPLETE_R_F, TTP_RESOLVE_COMPLETE_O_F,
             TTP_ABORT_COMPLETE_O_F, TTP_ABORT_COMPLETE_R_F)

FAIRNESS_F = conj(
    Always(Implies(NRO_F, Eventually(NRR_F))),
    Always(Implies(NRR_F, Eventually(NRO_F))),
)

FORMULAS = {
    ObjectiveId.ORIGINATOR: ORIGINATOR_F,
    ObjectiveId.RECIPIENT: RECIPIENT_F,
    ObjectiveId.TTP: TTP_F,
    ObjectiveId.FAIRNESS: FAIRNESS_F,
    ObjectiveId.NRO: Eventually(NRO_F),
    ObjectiveId.NRR: Eventually(NRR_F),
    ObjectiveId.O_STARTED: O_STARTED_F,
    ObjectiveId.O_GOT_SIGNATURE: O_GOT_SIGNATURE_F,
    ObjectiveId.O_GOT_ABORT: O_GOT_ABORT_F,
    ObjectiveId.R_GOT_SIGNATURE: R_GOT_SIGNATURE_F,
    ObjectiveId.R_GOT_ABORT: R_GOT_ABORT_F,
    ObjectiveId.TTP_ANSWERED: TTP_ANSWERED_F,
    ObjectiveId.TTP_RESOLVE_COMPLETE_O: TTP_RESOLVE_COMPLETE_O_F,
    ObjectiveId.TTP_RESOLVE_COMPLETE_R: TTP_RESOLVE_COMPLETE_R_F,
    ObjectiveId.TTP_ABORT_COMPLETE_O: TTP_ABORT_COMPLETE_O_F,
    ObjectiveId.TTP_ABORT_COMPLETE_R: TTP_ABORT_COMPLETE_R_F,
}


def eval_ltl_on_lasso(objective: ObjectiveId, prefix: Sequence[int],
                      loop: Sequence[int]) -> bool:
    """Evaluate the original temporal objective on ``prefix . loop^omega``."""
    return evaluate(FORMULAS[objective], prefix, loop)
