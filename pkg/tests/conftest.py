import os
import time

import pytest

from macro_router.registry import (
    ApiCallTemplate,
    MacroRecord,
    MacroRegistry,
    OutputBinding,
)
from macro_router.slots import ParamSpec, SlotSpec

FIXTURES = os.path.join(
    os.path.dirname(__file__), "..", "src", "macro_router", "fixtures"
)

SESSION_START = time.perf_counter()


def pytest_collection_modifyitems(items):
    # acceptance criteria run last so their suite-budget check covers the rest
    items.sort(key=lambda item: item.fspath.basename == "test_acceptance.py")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" in report.nodeid and report.when == "call":
                lines.append((report.nodeid.split("::")[-1], outcome.upper()))
    if lines:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for name, outcome in sorted(lines):
            terminalreporter.write_line(f"  {outcome:<6} {name}")


@pytest.fixture
def fixture_dir() -> str:
    return os.path.abspath(FIXTURES)


@pytest.fixture
def fixture_registry(fixture_dir) -> MacroRegistry:
    return MacroRegistry.load(os.path.join(fixture_dir, "macros.json"))


def make_record(
    macro_name="TRACK_AND_COMPARE_SPENDING",
    use_case="Personal Finance Management",
    scenario="Track and compare spending on specific categories over time.",
    params=(("category", "text"), ("dates", "text")),
    url="http://sim.local/finance/spending?category={category}&dates={dates}",
    method="GET",
    body=None,
    output_bindings=(),
    slot_specs=(),
) -> MacroRecord:
    return MacroRecord(
        id=None,
        use_case=use_case,
        scenario_description=scenario,
        macro_name=macro_name,
        params=[ParamSpec(name=n, kind=k) for n, k in params],
        call_templates=[
            ApiCallTemplate(
                method=method,
                url_template=url,
                body_template=body,
                output_bindings=[OutputBinding(*b) for b in output_bindings],
            )
        ],
        slot_specs=[SlotSpec(*s) for s in slot_specs],
    )
