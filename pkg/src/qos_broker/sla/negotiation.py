"""Alternating-offers SLA negotiation.

Every offer (the broker's proposal or the provider's counter) opens a new
round, up to max_rounds. The broker answers a counter by accepting it or by
proposing its terms again. Once no round is left, a rejected counter or a
counter arriving in the last round ends the session as exhausted.
"""

from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass
from enum import Enum
from typing import Literal, Protocol
from uuid import uuid4

import structlog
from pydantic import BaseModel, Field

from qos_broker.clock import Clock, SystemClock
from qos_broker.errors import CatalogMismatchError, InvalidTransitionError, ResponderUnreachable
from qos_broker.qos.profiles import RequirementProfile
from qos_broker.qos.terms import TermValue, unmet_terms
from qos_broker.selection.utility import acceptance_threshold, aggregate_utility, is_acceptable
from qos_broker.sla.contracts import Contract
from qos_broker.sla.documents import SLADocument

logger = structlog.get_logger(__name__)

DEFAULT_MAX_ROUNDS = 3
ROUNDS_EXHAUSTED = "rounds-exhausted"


class NegotiationState(str, Enum):
    DRAFTED = "Drafted"
    PROPOSED = "Proposed"
    COUNTERED = "Countered"
    AGREED = "Agreed"
    FAILED = "Failed"


ALLOWED_TRANSITIONS: dict[NegotiationState, frozenset[NegotiationState]] = {
    NegotiationState.DRAFTED: frozenset({NegotiationState.PROPOSED}),
    NegotiationState.PROPOSED: frozenset(
        {NegotiationState.AGREED, NegotiationState.FAILED, NegotiationState.COUNTERED}
    ),
    NegotiationState.COUNTERED: frozenset(
        {NegotiationState.AGREED, NegotiationState.FAILED, NegotiationState.PROPOSED}
    ),
    NegotiationState.AGREED: frozenset(),
    NegotiationState.FAILED: frozenset(),
}


class Action(str, Enum):
    PROPOSE = "propose"
    ACCEPT = "accept"
    REJECT = "reject"
    COUNTER = "counter"


# Transcript action -> state it moves the session to
ACTION_STATES = {
    Action.PROPOSE: NegotiationState.PROPOSED,
    Action.COUNTER: NegotiationState.COUNTERED,
    Action.ACCEPT: NegotiationState.AGREED,
    Action.REJECT: NegotiationState.FAILED,
}


class FailureReason(str, Enum):
    EXHAUSTED = "exhausted"
    PROVIDER_REJECTED = "provider-rejected"
    UNREACHABLE = "unreachable"


class RejectReason(str, Enum):
    BELOW_THRESHOLD = "below-threshold"
    OVER_BUDGET = "over-budget"
    TERMS_UNMET = "terms-unmet"
    CATALOG_MISMATCH = "catalog-mismatch"


class NegotiationMessage(BaseModel):
    """Wire message exchanged with a provider negotiation endpoint."""

    session_id: str
    round: int = Field(ge=1)
    action: Action
    document: SLADocument | None = None


class TranscriptEntry(BaseModel):
    round: int
    actor: Literal["broker", "provider"]
    action: Action
    document: SLADocument | None = None
    note: str | None = None


class NegotiationSession(BaseModel):
    """State of one negotiation between the broker and a provider."""

    session_id: str = Field(default_factory=lambda: f"neg-{uuid4().hex[:12]}")
    state: NegotiationState = NegotiationState.DRAFTED
    round: int = 0
    max_rounds: int = Field(default=DEFAULT_MAX_ROUNDS, ge=1)
    document: SLADocument
    transcript: list[TranscriptEntry] = Field(default_factory=list)

    @property
    def is_terminal(self) -> bool:
        return not ALLOWED_TRANSITIONS[self.state]

    def transition(self, target: NegotiationState) -> None:
        if target not in ALLOWED_TRANSITIONS[self.state]:
            raise InvalidTransitionError(
                f"{self.session_id}: {self.state.value} -> {target.value} is not allowed"
            )
        self.state = target

    def record(
        self,
        actor: Literal["broker", "provider"],
        action: Action,
        document: SLADocument | None,
        note: str | None = None,
    ) -> None:
        self.transcript.append(
            TranscriptEntry(
                round=self.round, actor=actor, action=action, document=document, note=note
            )
        )


class Responder(Protocol):
    """A provider's negotiation endpoint."""

    def respond(self, message: NegotiationMessage) -> NegotiationMessage: ...


@dataclass(frozen=True)
class CounterEvaluation:
    """Broker's verdict on a counter-offer."""

    accepted: bool
    reason: RejectReason | None
    utility: float
    threshold: float


class NegotiationOutcome(BaseModel):
    session: NegotiationSession
    contract: Contract | None = None
    reason: FailureReason | None = None

    @property
    def agreed(self) -> bool:
        return self.session.state == NegotiationState.AGREED


def evaluate_counter(
    counter: SLADocument,
    profile: RequirementProfile,
    demanded_terms: Mapping[str, TermValue] | None = None,
) -> CounterEvaluation:
    """Accept a counter iff its guarantees clear the consumer threshold, its cost
    fits the budget, and it keeps every demanded term.

    Args:
        counter: Counter-offered document.
        profile: Consumer requirement profile.
        demanded_terms: Qualitative terms the consumer insists on.

    Returns:
        CounterEvaluation with a reject reason when not accepted.
    """
    utility = aggregate_utility(counter.guarantees, profile).utility
    threshold = acceptance_threshold(profile)

    reason = None
    if not is_acceptable(utility, threshold):
        reason = RejectReason.BELOW_THRESHOLD
    elif profile.budget is not None and counter.cost > profile.budget:
        reason = RejectReason.OVER_BUDGET
    elif demanded_terms and unmet_terms(demanded_terms, counter.terms):
        reason = RejectReason.TERMS_UNMET

    return CounterEvaluation(
        accepted=reason is None, reason=reason, utility=utility, threshold=threshold
    )


def run_negotiation(
    session: NegotiationSession,
    responder: Responder,
    profile: RequirementProfile,
    clock: Clock | None = None,
    contract_id_factory: Callable[[], str] | None = None,
) -> NegotiationOutcome:
    """Negotiate the session's draft with a provider until agreement or failure.

    Args:
        session: Session in the Drafted state; its document is the opening proposal.
        responder: Provider endpoint.
        profile: Consumer profile used to judge counters.
        clock: Time source for the agreement timestamp.
        contract_id_factory: Id source for the resulting contract.

    Returns:
        NegotiationOutcome with a Contract when Agreed, a FailureReason when Failed.
    """
    if session.state != NegotiationState.DRAFTED:
        raise InvalidTransitionError(
            f"{session.session_id} already started ({session.state.value})"
        )

    clock = clock or SystemClock()
    new_contract_id = contract_id_factory or (lambda: f"ctr-{uuid4().hex[:12]}")
    proposal = session.document
    demanded = proposal.terms

    session.round = 1
    while True:
        session.transition(NegotiationState.PROPOSED)
        session.record("broker", Action.PROPOSE, proposal)

        try:
            reply = responder.respond(
                NegotiationMessage(
                    session_id=session.session_id,
                    round=session.round,
                    action=Action.PROPOSE,
                    document=proposal,
                )
            )
        except ResponderUnreachable as e:
            session.record("broker", Action.REJECT, None, note=f"unreachable: {e}")
            session.transition(NegotiationState.FAILED)
            return _finish(session, None, FailureReason.UNREACHABLE)

        if reply.action == Action.ACCEPT:
            session.record("provider", Action.ACCEPT, proposal)
            session.transition(NegotiationState.AGREED)
            return _finish(session, _contract(session, proposal, clock, new_contract_id), None)

        if reply.action != Action.COUNTER or reply.document is None:
            note = None if reply.action == Action.REJECT else f"invalid reply: {reply.action.value}"
            session.record("provider", Action.REJECT, reply.document, note=note)
            session.transition(NegotiationState.FAILED)
            return _finish(session, None, FailureReason.PROVIDER_REJECTED)

        counter = reply.document
        if session.round >= session.max_rounds:
            # A counter would open a round past the bound
            session.record("broker", Action.REJECT, counter, note=ROUNDS_EXHAUSTED)
            session.transition(NegotiationState.FAILED)
            return _finish(session, None, FailureReason.EXHAUSTED)

        session.round += 1
        session.record("provider", Action.COUNTER, counter)
        session.transition(NegotiationState.COUNTERED)

        try:
            verdict = evaluate_counter(counter, profile, demanded)
            rejection = verdict.reason
        except CatalogMismatchError:
            rejection = RejectReason.CATALOG_MISMATCH

        if rejection is None:
            session.record("broker", Action.ACCEPT, counter)
            session.transition(NegotiationState.AGREED)
            return _finish(session, _contract(session, counter, clock, new_contract_id), None)

        if session.round >= session.max_rounds:
            session.record("broker", Action.REJECT, counter, note=rejection.value)
            session.transition(NegotiationState.FAILED)
            return _finish(session, None, FailureReason.EXHAUSTED)

        logger.debug(
            "counter_rejected",
            session_id=session.session_id,
            round=session.round,
            reason=rejection.value,
        )
        session.round += 1


def _contract(
    session: NegotiationSession,
    document: SLADocument,
    clock: Clock,
    new_contract_id: Callable[[], str],
) -> Contract:
    return Contract(
        contract_id=new_contract_id(),
        document=document,
        agreed_at=clock.now(),
        session_id=session.session_id,
    )


def _finish(
    session: NegotiationSession, contract: Contract | None, reason: FailureReason | None
) -> NegotiationOutcome:
    logger.info(
        "negotiation_finished",
        session_id=session.session_id,
        provider_id=session.document.provider_id,
        state=session.state.value,
        rounds=session.round,
        reason=reason.value if reason else None,
    )
    return NegotiationOutcome(session=session, contract=contract, reason=reason)


def replay_transcript(entries: Iterable[TranscriptEntry]) -> NegotiationState:
    """Re-apply a transcript to a fresh session state machine and return its final state."""
    state = NegotiationState.DRAFTED
    for entry in entries:
        target = ACTION_STATES[entry.action]
        if target not in ALLOWED_TRANSITIONS[state]:
            raise InvalidTransitionError(
                f"Transcript step {entry.action.value} at round {entry.round} "
                f"is not allowed from {state.value}"
            )
        state = target
    return state
