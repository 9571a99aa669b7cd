"""Tests for contracts, penalty accounting and the contract store."""

from datetime import timedelta

import pytest

from qos_broker.clock import EPOCH
from qos_broker.errors import ContractStateError, DuplicateRecordError, RecordNotFoundError
from qos_broker.qos.offerings import Offering
from qos_broker.sla.contracts import (
    Contract,
    ContractStatus,
    ContractStore,
    apply_penalty,
    owed_credit,
)
from qos_broker.sla.documents import PenaltyClause, ServiceRequest, draft_sla
from tests.conftest import EXAMPLE_OFFERINGS, SERVICE


@pytest.fixture
def contract(catalog, example_profile):
    request = ServiceRequest(consumer_id="university", service_type=SERVICE, profile=example_profile)
    offering = Offering(service_type=SERVICE, qos=catalog.vector(EXAMPLE_OFFERINGS["SP4"]), price=110)
    document = draft_sla(
        request,
        "SP4",
        offering,
        PenaltyClause(violation_threshold=3, credit_per_violation=5.0),
        valid_from=EPOCH,
        validity=timedelta(days=30),
    )
    return Contract(contract_id="ctr-0001", document=document, agreed_at=EPOCH)


class TestPenalty:
    """Tests for the penalty clause arithmetic."""

    @pytest.mark.parametrize(
        ("violations", "credit"), [(0, 0.0), (3, 0.0), (4, 5.0), (9, 30.0)]
    )
    def test_owed_credit(self, violations, credit):
        """Nothing is owed up to the threshold, then a fixed credit per violation."""
        assert owed_credit(violations, 3, 5.0) == credit

    def test_incremental_credit(self, contract):
        """Credits are paid once: each call returns only the newly owed amount."""
        assert apply_penalty(contract, 2) == 0.0
        assert apply_penalty(contract, 2) == 5.0
        assert apply_penalty(contract, 5) == 25.0
        assert contract.violations == 9
        assert contract.credited == 30.0

    def test_zero_violations(self, contract):
        assert apply_penalty(contract, 0) == 0.0
        assert contract.violations == 0

    def test_negative_rejected(self, contract):
        with pytest.raises(ValueError):
            apply_penalty(contract, -1)

    def test_terminated_contract(self, contract):
        contract.status = ContractStatus.TERMINATED
        with pytest.raises(ContractStateError):
            apply_penalty(contract, 1)


class TestContractStore:
    """Tests for ContractStore."""

    def test_add_and_get(self, tmp_path, contract):
        store = ContractStore(tmp_path)
        store.add(contract)

        assert store.get("ctr-0001") == contract
        assert (tmp_path / "ctr-0001.json").exists()

    def test_duplicate(self, tmp_path, contract):
        store = ContractStore(tmp_path)
        store.add(contract)
        with pytest.raises(DuplicateRecordError):
            store.add(contract)

    def test_missing(self, tmp_path):
        with pytest.raises(RecordNotFoundError):
            ContractStore(tmp_path).get("ctr-9999")

    def test_get_returns_copy(self, tmp_path, contract):
        store = ContractStore(tmp_path)
        store.add(contract)
        copy = store.get("ctr-0001")
        copy.violations = 42

        assert store.get("ctr-0001").violations == 0

    def test_violations_survive_reopen(self, tmp_path, contract):
        """Recorded violations and credits are read back by a new store."""
        store = ContractStore(tmp_path)
        store.add(contract)
        updated, credit = store.record_violations("ctr-0001", 5)

        assert credit == 10.0
        assert updated.violations == 5

        reopened = ContractStore(tmp_path).get("ctr-0001")
        assert reopened.violations == 5
        assert reopened.credited == 10.0

    def test_terminate(self, tmp_path, contract):
        store = ContractStore(tmp_path)
        store.add(contract)
        store.terminate("ctr-0001")

        assert store.get("ctr-0001").status == ContractStatus.TERMINATED
        assert store.active_for("university") == []
        with pytest.raises(ContractStateError):
            store.terminate("ctr-0001")
        with pytest.raises(ContractStateError):
            store.record_violations("ctr-0001", 1)

    def test_active_for(self, tmp_path, contract):
        store = ContractStore(tmp_path)
        store.add(contract)

        assert [c.contract_id for c in store.active_for("university", "SP4")] == ["ctr-0001"]
        assert store.active_for("university", "SP3") == []
        assert store.active_for("college") == []
