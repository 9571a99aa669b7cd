"""Scenario files and the deterministic scenario runner."""

import json
import math
import tempfile
from collections import defaultdict
from datetime import datetime, timedelta
from pathlib import Path
from typing import Annotated, Any, Literal

import numpy as np
import structlog
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from qos_broker.broker.api import BrokerApi
from qos_broker.broker.coordinator import Broker
from qos_broker.clock import EPOCH, LogicalClock, ensure_utc
from qos_broker.config import BrokerConfig
from qos_broker.errors import ScenarioError
from qos_broker.qos.attributes import AttributeCatalog, default_catalog
from qos_broker.qos.tiers import TierTable, default_tier_table
from qos_broker.selection.utility import display_utility
from qos_broker.simulation.providers import SimProviderConfig, SimulatedProvider, spawn_provider

logger = structlog.get_logger(__name__)

# Broker settings a scenario may override
CONFIG_OVERRIDES = {
    "max_rounds",
    "contract_validity_days",
    "violation_threshold",
    "credit_per_violation",
    "window_seconds",
    "credential_ttl_hours",
    "selection_source",
    "observation_windows",
    "snapshot_every",
}

NUMERIC_CHECKS = {"violation_count", "penalty_credit"}


class _Action(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)


class RegisterAction(_Action):
    action: Literal["register"]
    providers: list[str] | None = None


class SubscribeAction(_Action):
    action: Literal["subscribe"]
    consumers: list[str] | None = None


class AddPolicyAction(_Action):
    action: Literal["add-policy"]
    policies: list[str] | None = None


class RequestAction(_Action):
    action: Literal["request"]
    consumer: str
    service_type: str
    principal: str | None = None
    label: str | None = None


class AdvanceTimeAction(_Action):
    action: Literal["advance-time"]
    seconds: float = Field(ge=0.0)


class ScriptedSample(BaseModel):
    provider_id: str
    service_type: str
    attribute_id: str
    value: float
    offset: float = Field(default=0.0, le=0.0)
    source_id: str = "scenario"


class EmitMeasurementsAction(_Action):
    action: Literal["emit-measurements"]
    samples: list[ScriptedSample]


class ResolveCredentialsAction(_Action):
    action: Literal["resolve-credentials"]
    principal: str
    provider: str


class ReportUsageAction(_Action):
    action: Literal["report-usage"]
    group: str | None = None
    start: datetime | None = Field(default=None, alias="from")
    end: datetime | None = Field(default=None, alias="to")


class ReportComplianceAction(_Action):
    action: Literal["report-compliance"]
    request: str
    start: datetime | None = Field(default=None, alias="from")
    end: datetime | None = Field(default=None, alias="to")


TimelineAction = Annotated[
    RegisterAction
    | SubscribeAction
    | AddPolicyAction
    | RequestAction
    | AdvanceTimeAction
    | EmitMeasurementsAction
    | ResolveCredentialsAction
    | ReportUsageAction
    | ReportComplianceAction,
    Field(discriminator="action"),
]


class Assertion(BaseModel):
    """Expected outcome of a labelled request, checked after the run.

    Numeric checks may give ``at_least`` / ``at_most`` bounds instead of an
    exact ``expected`` value.
    """

    model_config = ConfigDict(frozen=True)

    check: Literal[
        "contract_provider",
        "attempted",
        "ranking_order",
        "accepted",
        "display_utilities",
        "outcome",
        "violation_count",
        "penalty_credit",
    ]
    request: str
    expected: Any = None
    at_least: float | None = None
    at_most: float | None = None

    @model_validator(mode="after")
    def _check_bounds(self) -> "Assertion":
        bounded = self.at_least is not None or self.at_most is not None
        if bounded and self.check not in NUMERIC_CHECKS:
            raise ValueError(f"{self.check} takes an expected value, not bounds")
        if bounded and self.expected is not None:
            raise ValueError("Give either an expected value or bounds")
        if not bounded and "expected" not in self.model_fields_set:
            raise ValueError(f"{self.check} needs an expected value")
        return self

    @property
    def target(self) -> Any:
        """The expected value, or the bounds."""
        if self.at_least is None and self.at_most is None:
            return self.expected
        return {"at_least": self.at_least, "at_most": self.at_most}

    def holds(self, actual: Any) -> bool:
        if self.at_least is not None or self.at_most is not None:
            if actual is None:
                return False
            low = -math.inf if self.at_least is None else self.at_least
            high = math.inf if self.at_most is None else self.at_most
            return low <= actual <= high
        if self.check == "penalty_credit" and actual is not None:
            return abs(actual - float(self.expected)) <= 1e-9
        return bool(actual == self.expected)


class AssertionResult(BaseModel):
    check: str
    request: str
    passed: bool
    expected: Any
    actual: Any


class Scenario(BaseModel):
    name: str = ""
    seed: int = Field(ge=0)
    start: datetime = EPOCH
    catalog: AttributeCatalog | None = None
    tiers: dict[str, dict[str, float]] | None = None
    config: dict[str, Any] = Field(default_factory=dict)
    providers: list[SimProviderConfig] = Field(default_factory=list)
    consumers: list[dict[str, Any]] = Field(default_factory=list)
    policies: list[dict[str, Any]] = Field(default_factory=list)
    timeline: list[TimelineAction]
    assertions: list[Assertion] = Field(default_factory=list)

    @field_validator("catalog", mode="before")
    @classmethod
    def _catalog_list(cls, value: Any) -> Any:
        return {"attributes": value} if isinstance(value, list) else value

    @field_validator("config")
    @classmethod
    def _known_settings(cls, value: dict[str, Any]) -> dict[str, Any]:
        unknown = sorted(set(value) - CONFIG_OVERRIDES)
        if unknown:
            raise ValueError(f"Unknown config settings: {unknown}")
        return value

    @model_validator(mode="after")
    def _references(self) -> "Scenario":
        provider_ids = [p.provider_id for p in self.providers]
        if len(set(provider_ids)) != len(provider_ids):
            raise ValueError("Provider ids must be unique")
        consumer_ids = {c.get("consumer_id") for c in self.consumers}
        policy_ids = {p.get("policy_id") for p in self.policies}
        labels: set[str] = set()

        for step, action in enumerate(self.timeline):
            if isinstance(action, RegisterAction):
                missing = set(action.providers or ()) - set(provider_ids)
            elif isinstance(action, SubscribeAction):
                missing = set(action.consumers or ()) - consumer_ids
            elif isinstance(action, AddPolicyAction):
                missing = set(action.policies or ()) - policy_ids
            elif isinstance(action, RequestAction):
                missing = set()
                labels.add(action.label or f"request-{step}")
            elif isinstance(action, ReportComplianceAction):
                missing = {action.request} - labels
            else:
                missing = set()
            if missing:
                raise ValueError(f"timeline step {step} references unknown ids {sorted(missing)}")

        unknown = sorted({a.request for a in self.assertions} - labels)
        if unknown:
            raise ValueError(f"Assertions reference unknown requests: {unknown}")
        return self

    def attribute_catalog(self) -> AttributeCatalog:
        return self.catalog or default_catalog()

    def tier_table(self, catalog: AttributeCatalog) -> TierTable:
        if self.tiers is None:
            return default_tier_table(catalog)
        return TierTable(tiers={name: catalog.vector(m) for name, m in self.tiers.items()})


class ScenarioRun(BaseModel):
    """Transcript, final-state summary and assertion results of one run."""

    transcript: list[dict[str, Any]]
    summary: dict[str, Any]
    assertions: list[AssertionResult]

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.assertions)

    def transcript_lines(self) -> str:
        return "".join(json.dumps(entry, sort_keys=True) + "\n" for entry in self.transcript)


def load_scenario(path: Path) -> Scenario:
    """Read and validate a scenario JSON file; raises ScenarioError."""
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario {path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path} is not valid JSON: {e}") from e
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise ScenarioError(f"{path}: {e}") from e


class SequentialIds:
    """Deterministic ids: ``<prefix>-0001``, ``<prefix>-0002``, ... per prefix."""

    def __init__(self) -> None:
        self._counters: dict[str, int] = defaultdict(int)

    def __call__(self, prefix: str) -> str:
        self._counters[prefix] += 1
        return f"{prefix}-{self._counters[prefix]:04d}"


class SeededTokens:
    """128-bit hex tokens drawn from a generator split off the scenario seed."""

    def __init__(self, seed: int):
        self._rng = np.random.default_rng([seed, 0x746F6B656E])

    def __call__(self) -> str:
        return self._rng.bytes(16).hex()


class ScenarioRunner:
    """Executes a scenario's timeline against an embedded broker through its API."""

    def __init__(self, scenario: Scenario, data_dir: Path):
        self.scenario = scenario
        self.clock = LogicalClock(ensure_utc(scenario.start))
        self.catalog = scenario.attribute_catalog()
        config = BrokerConfig(data_dir=data_dir, **scenario.config)
        self.broker = Broker(
            config,
            catalog=self.catalog,
            tiers=scenario.tier_table(self.catalog),
            clock=self.clock,
            id_factory=SequentialIds(),
            token_factory=SeededTokens(scenario.seed),
        )
        self.api = BrokerApi(self.broker)
        self.providers: dict[str, SimulatedProvider] = {}
        self.results: dict[str, dict[str, Any]] = {}
        self.transcript: list[dict[str, Any]] = []

    def call(
        self,
        step: int,
        action: str,
        method: str,
        path: str,
        query: dict[str, str] | None = None,
        body: Any = None,
    ) -> tuple[int, Any]:
        status, payload = self.api.dispatch(method, path, query, body)
        self.transcript.append(
            {
                "step": step,
                "time": self.clock.now().isoformat(),
                "action": action,
                "method": method,
                "path": path,
                "query": query or {},
                "status": status,
                "response": payload,
            }
        )
        return status, payload

    def run(self) -> ScenarioRun:
        for step, action in enumerate(self.scenario.timeline):
            logger.debug("scenario_step", step=step, action=action.action)
            self._execute(step, action)

        _, health = self.call(len(self.scenario.timeline), "final", "GET", "/health")
        assertions = [self._check(a) for a in self.scenario.assertions]
        summary = {
            "scenario": self.scenario.name,
            "seed": self.scenario.seed,
            "final_time": self.clock.now().isoformat(),
            "requests": {
                label: {
                    "outcome": result["outcome"],
                    "attempted": result["attempted"],
                    "contract_id": (result.get("contract") or {}).get("contract_id"),
                }
                for label, result in self.results.items()
            },
            "contracts": [
                c.model_dump(
                    mode="json", include={"contract_id", "status", "violations", "credited"}
                )
                for c in self.broker.contracts.all()
            ],
            "health": health,
            "assertions_passed": sum(r.passed for r in assertions),
            "assertions_failed": sum(not r.passed for r in assertions),
        }
        self.broker.close()
        return ScenarioRun(transcript=self.transcript, summary=summary, assertions=assertions)

    def _execute(self, step: int, action: TimelineAction) -> None:
        now = self.clock.now()

        if isinstance(action, RegisterAction):
            for config in self.scenario.providers:
                if action.providers is not None and config.provider_id not in action.providers:
                    continue
                provider = spawn_provider(config, self.catalog, self.scenario.seed, now)
                self.providers[config.provider_id] = provider
                self.broker.responders.attach(provider.endpoint, provider)
                self.call(step, action.action, "POST", "/providers", body=config.record())

        elif isinstance(action, SubscribeAction):
            for consumer in self.scenario.consumers:
                if action.consumers is None or consumer.get("consumer_id") in action.consumers:
                    self.call(step, action.action, "POST", "/consumers", body=consumer)

        elif isinstance(action, AddPolicyAction):
            for policy in self.scenario.policies:
                if action.policies is None or policy.get("policy_id") in action.policies:
                    self.call(step, action.action, "POST", "/policies", body=policy)

        elif isinstance(action, RequestAction):
            body = {"consumer_id": action.consumer, "service_type": action.service_type}
            if action.principal:
                body["principal_id"] = action.principal
            status, result = self.call(step, action.action, "POST", "/requests", body=body)
            label = action.label or f"request-{step}"
            if status != 200:
                self.results[label] = {"outcome": f"error:{status}", "attempted": []}
                return
            self.results[label] = result
            self.call(step, action.action, "GET", f"/rankings/{result['request_id']}")
            if result.get("contract"):
                contract_id = result["contract"]["contract_id"]
                self.call(step, action.action, "GET", f"/contracts/{contract_id}")

        elif isinstance(action, AdvanceTimeAction):
            until = self.clock.advance(action.seconds)
            samples = [
                sample.model_dump(mode="json")
                for provider_id in sorted(self.providers)
                for sample in self.providers[provider_id].emit_samples(until)
            ]
            if samples:
                self.call(step, action.action, "POST", "/measurements", body=samples)
            evaluated = self.broker.evaluate_compliance(until)
            self.transcript.append(
                {
                    "step": step,
                    "time": until.isoformat(),
                    "action": "evaluate-compliance",
                    "windows": len(evaluated),
                    "violations": sum(len(r.violations) for r in evaluated),
                }
            )

        elif isinstance(action, EmitMeasurementsAction):
            samples = [
                {
                    "provider_id": s.provider_id,
                    "service_type": s.service_type,
                    "attribute_id": s.attribute_id,
                    "timestamp": (now + timedelta(seconds=s.offset)).isoformat(),
                    "value": s.value,
                    "source_id": s.source_id,
                }
                for s in action.samples
            ]
            self.call(step, action.action, "POST", "/measurements", body=samples)

        elif isinstance(action, ResolveCredentialsAction):
            body = {"principal_id": action.principal, "provider_id": action.provider}
            self.call(step, action.action, "POST", "/credentials", body=body)

        elif isinstance(action, ReportUsageAction):
            query = {
                "from": (action.start or self.scenario.start).isoformat(),
                "to": (action.end or now + timedelta(seconds=1)).isoformat(),
            }
            if action.group:
                query["group"] = action.group
            self.call(step, action.action, "GET", "/reports/usage", query=query)

        elif isinstance(action, ReportComplianceAction):
            contract = (self.results.get(action.request) or {}).get("contract")
            if not contract:
                self.transcript.append(
                    {"step": step, "action": action.action, "error": "request has no contract"}
                )
                return
            query = {}
            if action.start:
                query["from"] = action.start.isoformat()
            if action.end:
                query["to"] = action.end.isoformat()
            self.call(step, action.action, "GET", f"/compliance/{contract['contract_id']}", query)

    def _check(self, assertion: Assertion) -> AssertionResult:
        result = self.results.get(assertion.request, {})
        contract = result.get("contract")
        entries = (result.get("ranking") or {}).get("entries", [])

        actual: Any
        if assertion.check == "contract_provider":
            actual = contract["document"]["provider_id"] if contract else None
        elif assertion.check == "attempted":
            actual = result.get("attempted", [])
        elif assertion.check == "ranking_order":
            actual = [e["provider_id"] for e in entries]
        elif assertion.check == "accepted":
            actual = [e["provider_id"] for e in entries if e["accepted"]]
        elif assertion.check == "display_utilities":
            actual = {e["provider_id"]: display_utility(e["score"]["utility"]) for e in entries}
        elif assertion.check == "outcome":
            actual = result.get("outcome")
        else:
            stored = self.broker.contracts.get(contract["contract_id"]) if contract else None
            if assertion.check == "violation_count":
                actual = stored.violations if stored else None
            else:
                actual = stored.credited if stored else None

        return AssertionResult(
            check=assertion.check,
            request=assertion.request,
            passed=assertion.holds(actual),
            expected=assertion.target,
            actual=actual,
        )


def run_scenario(scenario: Scenario, data_dir: Path | None = None) -> ScenarioRun:
    """Run a scenario against a fresh broker.

    Args:
        scenario: Validated scenario.
        data_dir: Broker data directory; a temporary one is used when omitted.

    Returns:
        ScenarioRun. Failed assertions are reported in it, never raised.
    """
    if data_dir is not None:
        return ScenarioRunner(scenario, data_dir).run()
    with tempfile.TemporaryDirectory(prefix="qos-broker-scenario-") as tmp:
        return ScenarioRunner(scenario, Path(tmp)).run()
