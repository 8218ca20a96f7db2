"""
Tests for common modules (config, events, errors, logging).

What this tests:
- Report builders share one envelope and carry no random ids or timestamps
- Domain errors serialize to error objects
- Simulation configuration and tolerances from environment defaults
- Logging goes to stderr
"""

import importlib
import json
import logging
import sys
from pathlib import Path

import pytest
from pydantic import ValidationError

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from common import config, events
from common.errors import DualityViolation, InvalidDistribution, InvalidModelError, MxQueueError, OrderingViolation
from common.logging_config import setup_logging


@pytest.mark.unit
class TestEventCreation:
    """Test that report builders work correctly."""

    def test_scenario_analyzed_event(self):
        """Test ScenarioAnalyzed envelope and payload."""
        event = events.create_scenario_analyzed_event({"family": "MixedErlangPositive"}, {"meanW": 0.5}, 0.95, [0.0, 1.0])

        assert event["eventType"] == "ScenarioAnalyzed"
        assert event["source"] == "queuerisk"
        assert event["schemaVersion"] == events.SCHEMA_VERSION
        assert event["payload"]["summary"]["meanW"] == 0.5
        assert event["payload"]["grid"] == [0.0, 1.0]

    def test_grid_is_optional(self):
        """Test the grid key is left out without curves."""
        event = events.create_scenario_analyzed_event({}, {}, 0.95)
        assert "grid" not in event["payload"]

    def test_no_ids_or_timestamps(self):
        """Test two identical calls give equal reports."""
        a = events.create_table_computed_event("varyK", "unit_service_rate", [{"K": 1}])
        b = events.create_table_computed_event("varyK", "unit_service_rate", [{"K": 1}])
        assert a == b
        assert "eventId" not in a
        assert "timestamp" not in a

    def test_simulation_event(self):
        """Test analytic values are optional."""
        event = events.create_simulation_completed_event({}, {"seed": 1}, {"waiting": {}})
        assert event["eventType"] == "SimulationCompleted"
        assert "analytic" not in event["payload"]

    def test_ordering_event(self):
        """Test OrderingChecked carries weights and the empirical block when given."""
        event = events.create_ordering_checked_event(2, (0.5, 0.5), True, {"violations": []}, {"flags": []})
        assert event["payload"]["weights"] == [0.5, 0.5]
        assert event["payload"]["empirical"] == {"flags": []}

    def test_verification_event_counts_failures(self):
        """Test failure count ignores passed and known checks."""
        checks = [{"status": "pass"}, {"status": "fail"}, {"status": "known"}]
        event = events.create_verification_completed_event(False, checks)
        assert event["payload"]["checkCount"] == 3
        assert event["payload"]["failureCount"] == 1

    def test_error_event(self):
        """Test the error object fields."""
        event = events.create_error_event("StabilityViolation", "rho >= 1")
        assert event["eventType"] == events.EVENT_ERROR
        assert event["payload"] == {"errorType": "StabilityViolation", "errorMessage": "rho >= 1", "details": {}}

    def test_serializable(self):
        """Test every report is plain JSON."""
        event = events.create_error_event("X", "y", {"u": 1.0})
        assert json.loads(json.dumps(event)) == event


@pytest.mark.unit
class TestErrors:
    """Test the domain error hierarchy."""

    def test_hierarchy(self):
        """Test InvalidDistribution is an InvalidModelError and an MxQueueError."""
        err = InvalidDistribution("weights must sum to 1", {"sum": 0.9})
        assert isinstance(err, InvalidModelError)
        assert isinstance(err, MxQueueError)
        assert err.error_type == "InvalidDistribution"

    def test_to_dict(self):
        """Test errors serialize with their details."""
        d = InvalidModelError("bad", {"field": "mu"}).to_dict()
        assert d == {"errorType": "InvalidModelError", "errorMessage": "bad", "details": {"field": "mu"}}

    def test_duality_details(self):
        """Test DualityViolation records the point and the gap."""
        err = DualityViolation(1.5, 2e-6)
        assert err.details["u"] == 1.5
        assert "u=1.5" in err.message

    def test_ordering_details(self):
        """Test OrderingViolation merges extra details."""
        err = OrderingViolation("D0<=D-", 0.0, 0.1, {"violations": [1]})
        assert err.details["relation"] == "D0<=D-"
        assert err.details["violations"] == [1]


@pytest.mark.unit
class TestConfig:
    """Test configuration defaults."""

    def test_defaults(self):
        """Test tolerances and batch count."""
        assert config.N_BATCHES >= 20
        assert config.DUALITY_TOL > 0
        assert config.TABLE_NORMALIZATION in ("unit_service_rate", "unit_arrival_rate")

    def test_get_sim_config(self):
        """Test overrides win over environment defaults."""
        cfg = config.get_sim_config(seed=3, n_customers=5000)
        assert cfg.seed == 3
        assert cfg.n_customers == 5000
        assert cfg.n_batches == config.N_BATCHES

    def test_get_sim_config_validates(self):
        """Test invalid overrides are rejected."""
        with pytest.raises(ValidationError):
            config.get_sim_config(n_customers=10)

    def test_cluster_radius_scales(self):
        """Test the merge radius grows with the root magnitude."""
        assert config.cluster_radius(100.0) > config.cluster_radius(0.0)

    def test_output_dir(self, tmp_path, monkeypatch):
        """Test the output directory is created on demand."""
        monkeypatch.setattr(config, "OUTPUT_DIR", str(tmp_path / "out"))
        assert config.get_output_dir().is_dir()

    def test_tolerances_from_environment(self, monkeypatch):
        """Test MXQ_WORKLOAD_ATOM_TOL and MXQ_VERIFY_RUIN_SLACK override the defaults."""
        monkeypatch.setenv("MXQ_WORKLOAD_ATOM_TOL", "1e-7")
        monkeypatch.setenv("MXQ_VERIFY_RUIN_SLACK", "0.01")
        try:
            importlib.reload(config)
            assert config.WORKLOAD_ATOM_TOL == 1e-7
            assert config.VERIFY_RUIN_SLACK == 0.01
        finally:
            monkeypatch.delenv("MXQ_WORKLOAD_ATOM_TOL")
            monkeypatch.delenv("MXQ_VERIFY_RUIN_SLACK")
            importlib.reload(config)


@pytest.mark.unit
class TestLogging:
    """Test logger setup."""

    def test_named_logger(self):
        """Test setup_logging returns the named logger."""
        logger = setup_logging("mxqueue.test")
        assert logger.name == "mxqueue.test"
        assert isinstance(logger, logging.Logger)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
