"""SLA management - documents, negotiation, contracts and penalties."""

from qos_broker.sla.contracts import (
    Contract,
    ContractStatus,
    ContractStore,
    apply_penalty,
    owed_credit,
)
from qos_broker.sla.documents import PenaltyClause, ServiceRequest, SLADocument, draft_sla
from qos_broker.sla.negotiation import (
    ALLOWED_TRANSITIONS,
    Action,
    CounterEvaluation,
    FailureReason,
    NegotiationMessage,
    NegotiationOutcome,
    NegotiationSession,
    NegotiationState,
    RejectReason,
    Responder,
    evaluate_counter,
    replay_transcript,
    run_negotiation,
)

__all__ = [
    "Contract",
    "ContractStatus",
    "ContractStore",
    "apply_penalty",
    "owed_credit",
    "PenaltyClause",
    "ServiceRequest",
    "SLADocument",
    "draft_sla",
    "ALLOWED_TRANSITIONS",
    "Action",
    "CounterEvaluation",
    "FailureReason",
    "NegotiationMessage",
    "NegotiationOutcome",
    "NegotiationSession",
    "NegotiationState",
    "RejectReason",
    "Responder",
    "evaluate_counter",
    "replay_transcript",
    "run_negotiation",
]
