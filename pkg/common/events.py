"""
Report builders for everything the CLI writes out.

Every report is an envelope of eventType, source (the producing service),
schemaVersion and payload. Reports carry no random ids or wall-clock
timestamps, so the same command and seed produce byte-identical files.
"""

from typing import Any, Dict, List, Optional

SCHEMA_VERSION = "1.0"


def _envelope(event_type: str, source: str, payload: Dict[str, Any]) -> Dict[str, Any]:
    return {
        "eventType": event_type,
        "source": source,
        "schemaVersion": SCHEMA_VERSION,
        "payload": payload,
    }


def create_scenario_analyzed_event(
    model: Dict[str, Any],
    summary: Dict[str, Any],
    level: float,
    grid: Optional[List[float]] = None,
) -> Dict[str, Any]:
    payload = {
        "model": model,
        "summary": summary,
        "level": level,
    }

    # Grid is only present when curves were requested
    if grid is not None:
        payload["grid"] = list(grid)

    return _envelope(EVENT_SCENARIO_ANALYZED, "queuerisk", payload)


def create_table_computed_event(
    which: str,
    normalization: str,
    rows: List[Dict[str, Any]],
    reference: Optional[List[Dict[str, Any]]] = None,
) -> Dict[str, Any]:
    payload = {
        "table": which,
        "normalization": normalization,
        "rows": rows,
    }
    if reference is not None:
        payload["reference"] = reference

    return _envelope(EVENT_TABLE_COMPUTED, "cli", payload)


def create_simulation_completed_event(
    model: Dict[str, Any],
    config: Dict[str, Any],
    estimates: Dict[str, Any],
    analytic: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    payload = {
        "model": model,
        "config": config,
        "estimates": estimates,
    }
    if analytic is not None:
        payload["analytic"] = analytic

    return _envelope(EVENT_SIMULATION_COMPLETED, "montecarlo", payload)


def create_ordering_checked_event(
    K: int, weights: List[float], symmetric: bool, exact: Dict[str, Any], empirical: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    payload = {
        "K": K,
        "weights": list(weights),
        "symmetric": symmetric,
        "exact": exact,
    }
    if empirical is not None:
        payload["empirical"] = empirical

    return _envelope(EVENT_ORDERING_CHECKED, "montecarlo", payload)


def create_verification_completed_event(passed: bool, checks: List[Dict[str, Any]]) -> Dict[str, Any]:
    failures = [c for c in checks if c.get("status") == "fail"]
    return _envelope(
        EVENT_VERIFICATION_COMPLETED,
        "cli",
        {
            "passed": passed,
            "checkCount": len(checks),
            "failureCount": len(failures),
            "checks": checks,
        },
    )


def create_error_event(error_type: str, error_message: str, details: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return _envelope(
        EVENT_ERROR,
        "cli",
        {
            "errorType": error_type,
            "errorMessage": error_message,
            "details": details or {},
        },
    )


# ============================================================================
# Event Types (for consistency)
# ============================================================================

EVENT_SCENARIO_ANALYZED = "ScenarioAnalyzed"
EVENT_TABLE_COMPUTED = "TableComputed"
EVENT_SIMULATION_COMPLETED = "SimulationCompleted"
EVENT_ORDERING_CHECKED = "OrderingChecked"
EVENT_VERIFICATION_COMPLETED = "VerificationCompleted"
EVENT_ERROR = "Error"
