"""The broker: registry, subscriptions, policies, credentials, and the Coordinator loop."""

import json
from collections.abc import Callable, Iterable, Mapping
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any
from uuid import uuid4

import structlog
from dateutil.parser import isoparse

from qos_broker.broker.gateway import CredentialGateway, random_token
from qos_broker.broker.policies import apply_selection_policies, authorize
from qos_broker.broker.records import (
    AuthorizationDecision,
    ConsumerRecord,
    CredentialMapping,
    NegotiationAttempt,
    Policy,
    ProviderRecord,
    ProvisioningResult,
    UsageReport,
    UsageRow,
)
from qos_broker.broker.responders import ResponderDirectory
from qos_broker.broker.store import RecordStore
from qos_broker.clock import Clock, SystemClock, ensure_utc
from qos_broker.config import BrokerConfig
from qos_broker.errors import (
    AuthorizationDenied,
    CatalogMismatchError,
    NoActiveContractError,
    NoProvidersError,
    ProfileError,
    RecordNotFoundError,
    ReportPeriodError,
    UnknownAttributeError,
    UnknownPrincipalError,
)
from qos_broker.monitoring.compliance import ComplianceReport, ComplianceResult
from qos_broker.monitoring.monitor import Monitor
from qos_broker.monitoring.samples import MeasurementSample
from qos_broker.qos.attributes import AttributeCatalog, QoSVector, default_catalog
from qos_broker.qos.offerings import Offering
from qos_broker.qos.profiles import RequirementProfile, validate_profile
from qos_broker.qos.terms import unmet_terms
from qos_broker.qos.tiers import TierTable, default_tier_table, load_tier_table, tier_to_profile
from qos_broker.selection.ranking import RankingResult, rank_offerings
from qos_broker.sla.contracts import Contract, ContractStore
from qos_broker.sla.documents import PenaltyClause, ServiceRequest, draft_sla
from qos_broker.sla.negotiation import NegotiationSession, run_negotiation
from qos_broker.telemetry.events import (
    CREDENTIAL_ACCESS,
    SERVICE_REQUEST,
    emit_credential_access,
    emit_service_request,
)
from qos_broker.telemetry.sink import TelemetrySink

logger = structlog.get_logger(__name__)

SUBMIT_REQUEST = "submit_request"

IdFactory = Callable[[str], str]


def uuid_ids(prefix: str) -> str:
    return f"{prefix}-{uuid4().hex[:12]}"


def parse_instant(value: str | datetime, name: str) -> datetime:
    """ISO-8601 string or datetime to aware UTC; raises ReportPeriodError."""
    if isinstance(value, datetime):
        return ensure_utc(value)
    try:
        return ensure_utc(isoparse(value))
    except (TypeError, ValueError, OverflowError) as e:
        raise ReportPeriodError(f"Malformed {name!r} time {value!r}: {e}") from e


def parse_period(start: str | datetime, end: str | datetime) -> tuple[datetime, datetime]:
    """Report period [start, end) in UTC."""
    begin, finish = parse_instant(start, "from"), parse_instant(end, "to")
    if begin >= finish:
        raise ReportPeriodError(
            f"Report period is empty: {begin.isoformat()} >= {finish.isoformat()}"
        )
    return begin, finish


class Broker:
    """Cloud service broker over one data directory.

    Operations are safe to call from several threads: every store locks its
    own updates and one service request runs its attempts in sequence.
    """

    def __init__(
        self,
        config: BrokerConfig,
        catalog: AttributeCatalog | None = None,
        tiers: TierTable | None = None,
        clock: Clock | None = None,
        id_factory: IdFactory = uuid_ids,
        token_factory: Callable[[], str] = random_token,
        responders: ResponderDirectory | None = None,
    ):
        self.config = config
        self.clock = clock or SystemClock()
        self.new_id = id_factory
        self.responders = responders or ResponderDirectory()

        data_dir = config.data_dir
        data_dir.mkdir(parents=True, exist_ok=True)
        self.catalog = self._load_catalog(data_dir / "catalog.json", catalog)
        if tiers is not None:
            self.tiers = tiers
        elif config.tiers_path is not None:
            self.tiers = load_tier_table(config.tiers_path, self.catalog)
        else:
            self.tiers = default_tier_table(self.catalog)

        every = config.snapshot_every
        self.providers: RecordStore[ProviderRecord] = RecordStore(
            data_dir, "providers", ProviderRecord, lambda r: r.provider_id, every
        )
        self.consumers: RecordStore[ConsumerRecord] = RecordStore(
            data_dir, "consumers", ConsumerRecord, lambda r: r.consumer_id, every
        )
        self.policies: RecordStore[Policy] = RecordStore(
            data_dir, "policies", Policy, lambda r: r.policy_id, every
        )
        self.provisioning: RecordStore[ProvisioningResult] = RecordStore(
            data_dir, "provisioning", ProvisioningResult, lambda r: r.request_id, every
        )
        credentials: RecordStore[CredentialMapping] = RecordStore(
            data_dir, "credentials", CredentialMapping, lambda r: r.key, every
        )
        self.gateway = CredentialGateway(
            credentials,
            self.clock,
            timedelta(hours=config.credential_ttl_hours),
            token_factory,
        )
        self.contracts = ContractStore(data_dir / "contracts")
        self.sink = TelemetrySink(data_dir / "telemetry")
        self.monitor = Monitor(
            self.catalog, data_dir, self.contracts, config.window_seconds, self.clock
        )

    @staticmethod
    def _load_catalog(path: Path, catalog: AttributeCatalog | None) -> AttributeCatalog:
        if path.exists():
            with open(path) as f:
                stored = AttributeCatalog.model_validate(json.load(f))
            if catalog is not None and catalog != stored:
                raise CatalogMismatchError(f"Data directory uses another catalog: {stored.ids}")
            return stored
        catalog = catalog or default_catalog()
        path.write_text(catalog.model_dump_json(indent=2))
        return catalog

    @property
    def penalty(self) -> PenaltyClause:
        return PenaltyClause(
            violation_threshold=self.config.violation_threshold,
            credit_per_violation=self.config.credit_per_violation,
        )

    # Registry and profiles

    def register_provider(self, record: ProviderRecord | Mapping[str, Any]) -> str:
        """Store a provider; its offerings are aligned to the broker catalog."""
        provider = (
            record
            if isinstance(record, ProviderRecord)
            else ProviderRecord.model_validate(record)
        )
        offerings = tuple(
            o.model_copy(update={"qos": self.catalog.align(o.qos)}) for o in provider.offerings
        )
        provider = provider.model_copy(update={"offerings": offerings})
        self.providers.add(provider)
        logger.info(
            "provider_registered",
            provider_id=provider.provider_id,
            service_types=[o.service_type for o in offerings],
            endpoint=provider.endpoint,
        )
        return provider.provider_id

    def resolve_profile(self, spec: RequirementProfile | Mapping[str, Any]) -> RequirementProfile:
        """Validate a profile, expanding ``{"tier": name, ...}`` shorthand from the tier table."""
        if isinstance(spec, Mapping) and "tier" in spec:
            profile = tier_to_profile(
                self.tiers.tier(spec["tier"]),
                spec.get("weights") or {},
                spec.get("sensitivities") or {},
                spec.get("budget"),
            )
        else:
            profile = validate_profile(spec)
        try:
            return profile.aligned(self.catalog)
        except (CatalogMismatchError, UnknownAttributeError) as e:
            raise ProfileError(str(e)) from e

    def subscribe_consumer(self, record: ConsumerRecord | Mapping[str, Any]) -> str:
        """Store a consumer with validated, catalog-aligned profiles."""
        if isinstance(record, ConsumerRecord):
            data: dict[str, Any] = record.model_dump()
            profiles = record.profiles
        else:
            data = dict(record)
            profiles = data.get("profiles") or {}
        data["profiles"] = {
            service_type: self.resolve_profile(spec) for service_type, spec in profiles.items()
        }
        consumer = ConsumerRecord.model_validate(data)
        self.consumers.add(consumer)
        logger.info(
            "consumer_subscribed",
            consumer_id=consumer.consumer_id,
            group=consumer.group,
            service_types=sorted(consumer.profiles),
            principals=len(consumer.principals),
        )
        return consumer.consumer_id

    def add_policy(self, policy: Policy | Mapping[str, Any]) -> str:
        record = policy if isinstance(policy, Policy) else Policy.model_validate(policy)
        self.policies.add(record)
        logger.info("policy_added", policy_id=record.policy_id, kind=record.kind)
        return record.policy_id

    # Identity and access

    def authorize(self, principal_id: str, action: str, consumer_id: str) -> AuthorizationDecision:
        consumer = self.consumers.find(consumer_id)
        return authorize(
            self.policies.all(),
            principal_id,
            action,
            consumer_id,
            consumer.group if consumer else None,
        )

    def consumer_of(self, principal_id: str) -> ConsumerRecord:
        for consumer in self.consumers.all():
            if principal_id in consumer.principals:
                return consumer
        raise UnknownPrincipalError(f"Unknown principal: {principal_id}")

    def resolve_credentials(self, principal_id: str, provider_id: str) -> CredentialMapping:
        """Provider credential for a member principal, logged as a usage event.

        Args:
            principal_id: Member identity of a subscribed consumer.
            provider_id: Provider the consumer holds an Active contract with.

        Returns:
            The active CredentialMapping, minted when absent or expired.
        """
        consumer = self.consumer_of(principal_id)
        contracts = self.contracts.active_for(consumer.consumer_id, provider_id)
        if not contracts:
            raise NoActiveContractError(
                f"{consumer.consumer_id} holds no active contract with {provider_id}"
            )

        mapping, _ = self.gateway.resolve(principal_id, provider_id)
        emit_credential_access(
            self.sink,
            self.clock.now(),
            principal_id=principal_id,
            consumer_id=consumer.consumer_id,
            group=consumer.group,
            provider_id=provider_id,
            service_type=contracts[0].document.service_type,
        )
        return mapping

    # Coordinator

    def handle_service_request(
        self,
        consumer_id: str,
        service_type: str,
        principal_id: str | None = None,
    ) -> ProvisioningResult:
        """Rank, then negotiate with accepted providers in rank order until one agrees.

        Args:
            consumer_id: Subscribed consumer.
            service_type: Service type the consumer has a profile for.
            principal_id: Member submitting the request; checked against
                authorization policies when given.

        Returns:
            ProvisioningResult with the contract, or a failure of
            no-accepted-providers / no-agreement.
        """
        consumer = self.consumers.get(consumer_id)
        if principal_id is not None:
            decision = self.authorize(principal_id, SUBMIT_REQUEST, consumer_id)
            if not decision.allowed:
                raise AuthorizationDenied(principal_id, SUBMIT_REQUEST, decision.reason)

        profile = consumer.profiles.get(service_type)
        if profile is None:
            raise RecordNotFoundError(f"{consumer_id} has no profile for {service_type}")

        candidates = {
            p.provider_id: (p, offering)
            for p in self.providers.all()
            if (offering := p.offering(service_type)) is not None
        }
        if not candidates:
            raise NoProvidersError(f"No provider offers {service_type}")
        selection = apply_selection_policies(
            self.policies.all(), consumer_id, service_type, sorted(candidates)
        )
        if not selection.provider_ids:
            raise NoProvidersError(
                f"Selection policies {selection.policy_ids} leave no provider for {service_type}"
            )

        eligible = []
        for pid in selection.provider_ids:
            missing = unmet_terms(consumer.demanded_terms, candidates[pid][1].terms)
            if missing:
                logger.info("offering_lacks_terms", provider_id=pid, terms=missing)
            else:
                eligible.append(pid)
        if not eligible:
            raise NoProvidersError(
                f"No provider of {service_type} offers the demanded terms "
                f"{sorted(consumer.demanded_terms)}"
            )

        request_id = self.new_id("req")
        started_at = self.clock.now()
        ranking = rank_offerings(
            [(pid, self._selection_qos(pid, candidates[pid][1])) for pid in eligible],
            profile,
            threshold=selection.threshold,
        )

        request = ServiceRequest(
            consumer_id=consumer_id,
            service_type=service_type,
            profile=profile,
            demanded_terms=consumer.demanded_terms,
        )
        attempts = []
        contract = None
        for provider_id in ranking.accepted:
            provider, offering = candidates[provider_id]
            contract = self._attempt(request, provider, offering, attempts)
            if contract is not None:
                break

        if contract is not None:
            failure = None
        elif ranking.accepted:
            failure = "no-agreement"
        else:
            failure = "no-accepted-providers"

        result = ProvisioningResult(
            request_id=request_id,
            consumer_id=consumer_id,
            service_type=service_type,
            ranking=ranking,
            attempts=tuple(attempts),
            contract=contract,
            failure=failure,
            started_at=started_at,
            finished_at=self.clock.now(),
        )
        self.provisioning.add(result)
        emit_service_request(
            self.sink,
            result.finished_at,
            request_id=request_id,
            consumer_id=consumer_id,
            group=consumer.group,
            service_type=service_type,
            provider_id=contract.provider_id if contract else None,
            outcome=result.outcome,
        )
        logger.info(
            "service_request_handled",
            request_id=request_id,
            consumer_id=consumer_id,
            service_type=service_type,
            ranking=ranking.order,
            attempted=result.attempted,
            outcome=result.outcome,
        )
        return result

    def _selection_qos(self, provider_id: str, offering: Offering) -> QoSVector:
        """Advertised QoS, or the recently observed QoS when configured and available."""
        if self.config.selection_source == "observed":
            observed = self.monitor.recent_qos(
                provider_id, offering.service_type, self.config.observation_windows
            )
            if observed is not None:
                return observed
        return offering.qos

    def _attempt(
        self,
        request: ServiceRequest,
        provider: ProviderRecord,
        offering: Offering,
        attempts: list[NegotiationAttempt],
    ) -> Contract | None:
        document = draft_sla(
            request,
            provider.provider_id,
            offering,
            self.penalty,
            valid_from=self.clock.now(),
            validity=timedelta(days=self.config.contract_validity_days),
        )
        session = NegotiationSession(
            session_id=self.new_id("neg"),
            max_rounds=self.config.max_rounds,
            document=document,
        )
        outcome = run_negotiation(
            session,
            self.responders.resolve(provider.endpoint),
            request.profile,
            clock=self.clock,
            contract_id_factory=lambda: self.new_id("ctr"),
        )
        attempts.append(
            NegotiationAttempt(
                provider_id=provider.provider_id,
                session_id=session.session_id,
                state=session.state,
                reason=outcome.reason,
                rounds=session.round,
                transcript=tuple(session.transcript),
            )
        )
        if outcome.contract is None:
            return None
        return self.contracts.add(outcome.contract)

    def get_provisioning(self, request_id: str) -> ProvisioningResult:
        return self.provisioning.get(request_id)

    def get_ranking(self, request_id: str) -> RankingResult:
        return self.get_provisioning(request_id).ranking

    def get_contract(self, contract_id: str) -> Contract:
        return self.contracts.get(contract_id)

    def terminate_contract(self, contract_id: str) -> Contract:
        return self.contracts.terminate(contract_id)

    # Usage reporting

    def usage_report(
        self,
        group: str | None,
        start: str | datetime,
        end: str | datetime,
    ) -> UsageReport:
        """Request and credential-access counts per (service type, provider) in [start, end).

        Args:
            group: Consumer group tag; None counts every group.
            start: Inclusive period start (ISO-8601 or datetime).
            end: Exclusive period end.

        Returns:
            UsageReport derived from logged usage events only.
        """
        begin, finish = parse_period(start, end)
        counts: dict[tuple[str, str | None], UsageRow] = {}

        for event in self.sink.read_events(begin, finish):
            attributes = event.get("attributes", {})
            if group is not None and attributes.get("broker.consumer.group") != group:
                continue
            key = (attributes.get("broker.service.type", ""), attributes.get("broker.provider.id"))
            row = counts.setdefault(key, UsageRow(service_type=key[0], provider_id=key[1]))
            if event["event_type"] == SERVICE_REQUEST:
                row.requests += 1
            elif event["event_type"] == CREDENTIAL_ACCESS:
                row.credential_accesses += 1

        rows = [counts[key] for key in sorted(counts, key=lambda k: (k[0], k[1] or ""))]
        return UsageReport(group=group, start=begin, end=finish, rows=rows)

    # Monitoring

    def ingest(self, samples: Iterable[MeasurementSample | Mapping[str, Any]]) -> int:
        return self.monitor.ingest(
            s if isinstance(s, MeasurementSample) else MeasurementSample.model_validate(s)
            for s in samples
        )

    def evaluate_compliance(self, until: datetime | None = None) -> list[ComplianceResult]:
        return self.monitor.evaluate_all(until or self.clock.now())

    def compliance_report(
        self,
        contract_id: str,
        start: str | datetime | None = None,
        end: str | datetime | None = None,
    ) -> ComplianceReport:
        """Evaluate the contract up to now, then report over [start, end).

        The period defaults to the contract's validity window.
        """
        contract = self.contracts.get(contract_id)
        begin, finish = parse_period(
            start if start is not None else contract.document.valid_from,
            end if end is not None else contract.document.valid_until,
        )
        self.monitor.evaluate_contract(contract_id, self.clock.now())
        return self.monitor.compliance_report(contract_id, begin, finish)

    def health(self) -> dict[str, Any]:
        return {
            "status": "ok",
            "providers": len(self.providers),
            "consumers": len(self.consumers),
            "policies": len(self.policies),
            "contracts": len(self.contracts.all()),
            "samples": len(self.monitor.samples),
        }

    def close(self) -> None:
        self.responders.close()
