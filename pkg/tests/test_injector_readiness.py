from __future__ import annotations

from conftest import FakeClock
from injector_helpers import make_selection, sample_set
from snappattern.injector import PatternKind, check_readiness, plan_injection


class ScriptedStatusExecutor:
    """resource_status answers from a per-poll script; last entry repeats."""

    def __init__(self, script_by_kind: dict[str, list[str]]):
        self.script = script_by_kind
        self.polls: dict[str, int] = {}

    def resource_status(self, ref) -> str:
        poll = self.polls.get(ref.kind, 0)
        self.polls[ref.kind] = poll + 1
        states = self.script.get(ref.kind, ["ready"])
        return states[min(poll, len(states) - 1)]


def make_plan():
    return plan_injection(sample_set(), make_selection(PatternKind.CB, "filter-service"))


def sleeping_clock(clock: FakeClock):
    def sleep(seconds: float) -> None:
        clock.advance(seconds)

    return sleep


def test_all_ready_at_second_poll(fake_clock):
    executor = ScriptedStatusExecutor({"Deployment": ["pending", "pending", "ready"]})
    report = check_readiness(executor, make_plan(), timeout_ms=10_000,
                             poll_interval_ms=500, clock=fake_clock,
                             sleep=sleeping_clock(fake_clock))
    assert report.overall is True
    assert report.elapsed_ms >= 2 * 500


def test_never_ready_times_out_listing_pending(fake_clock):
    executor = ScriptedStatusExecutor({"Deployment": ["pending"]})
    report = check_readiness(executor, make_plan(), timeout_ms=3_000,
                             poll_interval_ms=500, clock=fake_clock,
                             sleep=sleeping_clock(fake_clock))
    assert report.overall is False
    assert any(ref.kind == "Deployment" for ref in report.pending)
    assert report.elapsed_ms <= 3_000


def test_failed_resource_reported_by_name(fake_clock):
    executor = ScriptedStatusExecutor({
        "Deployment": ["failed"],
        "Service": ["ready"],
        "ConfigMap": ["ready"],
    })
    report = check_readiness(executor, make_plan(), timeout_ms=10_000,
                             clock=fake_clock, sleep=sleeping_clock(fake_clock))
    assert report.overall is False
    assert [ref.kind for ref in report.failed] == ["Deployment"]
