from __future__ import annotations

import pytest

from stackopt.labor import Phase, ScenarioParams

REFERENCE_HOURS = {
    Phase.REQUIREMENTS: 200.0,
    Phase.DESIGN: 300.0,
    Phase.DEVELOPMENT: 800.0,
    Phase.TESTING: 600.0,
    Phase.DEPLOYMENT: 100.0,
    Phase.MAINTENANCE: 300.0,
}


def make_reference_params(**overrides) -> ScenarioParams:
    kwargs = dict(
        phase_hours=REFERENCE_HOURS,
        coord_hours=500.0,
        team_size=20,
        capacity_hours=135.0,
        cost_rate=75.0,
        stated_base_hours=2700.0,
    )
    kwargs.update(overrides)
    return ScenarioParams(**kwargs)


@pytest.fixture
def reference_params() -> ScenarioParams:
    return make_reference_params()


@pytest.fixture
def summed_params() -> ScenarioParams:
    """Reference table without the stated-total override (base = 2800 hr)."""
    return make_reference_params(stated_base_hours=None)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in results:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
