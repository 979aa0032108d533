"""Adapter execution, output extraction, and environment capture."""

import sys

import pytest

from conftest import fixture_adapter_dict
from evalbench.doe import RunSpec
from evalbench.errors import AdapterMismatchError, FailureBudgetError
from evalbench.runner import (
    BenchmarkAdapter,
    ExtractionRule,
    capture_environment,
    execute_plan,
    parse_output,
)


def echo_adapter(text: str, metric: str = "value", pattern: str = r"value=([0-9.]+)"):
    return BenchmarkAdapter(
        name="echo",
        command=f'{sys.executable} -c "print({text!r})"',
        timeout=20,
        rules=(ExtractionRule(metric=metric, unit="u", pattern=pattern),),
    )


def plan_of(combos, replicate=1):
    return [RunSpec(i + 1, dict(c), replicate) for i, c in enumerate(combos)]


class TestExecutePlan:
    def test_echo_fixture_two_runs(self):
        adapter = echo_adapter("value=7")
        result = execute_plan(plan_of([{"f": "a"}, {"f": "b"}]), adapter)
        assert [r.status for r in result.records] == ["ok", "ok"]
        assert all(r.measurements["value"]["value"] == 7.0 for r in result.records)
        assert result.environment is not None

    def test_missing_placeholder_fails_before_any_run(self):
        adapter = BenchmarkAdapter(
            name="broken",
            command=f"{sys.executable} -c pass --x {{factor:missing}}",
            timeout=5,
            rules=(ExtractionRule(metric="m", pattern=r"(\d+)"),),
        )
        with pytest.raises(AdapterMismatchError):
            execute_plan(plan_of([{"f": "a"}]), adapter)

    def test_duplicate_rules_for_metric_rejected(self):
        adapter = BenchmarkAdapter(
            name="dup",
            command=f'{sys.executable} -c "print(1)"',
            timeout=5,
            rules=(
                ExtractionRule(metric="m", pattern=r"(\d+)"),
                ExtractionRule(metric="m", field_index=0),
            ),
        )
        with pytest.raises(AdapterMismatchError):
            execute_plan(plan_of([{"f": "a"}]), adapter, response_metrics=["m"])

    def test_failure_recorded_and_execution_continues(self):
        adapter = BenchmarkAdapter.from_dict(
            fixture_adapter_dict(factors=("mode",), fail_when="mode=bad")
        )
        plan = plan_of([{"mode": "ok1"}, {"mode": "bad"}, {"mode": "ok2"}])
        result = execute_plan(plan, adapter, failure_budget=0.5)
        assert [r.status for r in result.records] == ["ok", "failed", "ok"]
        assert "exit code 3" in result.records[1].failure

    def test_failure_budget_aborts_with_partial_records(self):
        adapter = BenchmarkAdapter.from_dict(
            fixture_adapter_dict(factors=("mode",), fail_when="mode=bad")
        )
        plan = plan_of([{"mode": "ok1"}, {"mode": "bad"}, {"mode": "ok2"}])
        with pytest.raises(FailureBudgetError) as err:
            execute_plan(plan, adapter, failure_budget=0.2)
        assert [r.status for r in err.value.result.records] == ["ok", "failed"]

    def test_empty_plan_rejected(self):
        with pytest.raises(AdapterMismatchError):
            execute_plan([], echo_adapter("value=1"))

    def test_execution_follows_plan_order(self):
        adapter = BenchmarkAdapter.from_dict(fixture_adapter_dict(factors=("n",)))
        plan = plan_of([{"n": str(i)} for i in range(5)])
        result = execute_plan(plan, adapter)
        assert [r.index for r in result.records] == [r.index for r in plan]
        starts = [r.started_at for r in result.records]
        assert starts == sorted(starts)

    def test_rerun_reproduces_measurements(self):
        adapter = BenchmarkAdapter.from_dict(fixture_adapter_dict(factors=("n",)))
        plan = plan_of([{"n": "1"}, {"n": "2"}])
        first = execute_plan(plan, adapter)
        second = execute_plan(plan, adapter)
        assert [r.measurements for r in first.records] == [
            r.measurements for r in second.records
        ]
        assert [r.raw_digest for r in first.records] == [
            r.raw_digest for r in second.records
        ]

    def test_timeout_recorded(self):
        adapter = BenchmarkAdapter.from_dict(
            fixture_adapter_dict(factors=("n",), sleep=5.0, timeout=0.4)
        )
        with pytest.raises(FailureBudgetError) as err:
            execute_plan(plan_of([{"n": "1"}]), adapter, failure_budget=0.0)
        assert err.value.result.records[0].status == "timeout"

    def test_extraction_miss_marks_run_failed(self):
        adapter = echo_adapter("nothing here", pattern=r"value=([0-9.]+)")
        with pytest.raises(FailureBudgetError) as err:
            execute_plan(plan_of([{"f": "a"}]), adapter, failure_budget=0.0)
        record = err.value.result.records[0]
        assert record.status == "failed"
        assert "extraction failed" in record.failure


class TestParseOutput:
    rules = (
        ExtractionRule(metric="throughput", unit="Mbit/s", pattern=r"throughput:\s*([0-9.]+)"),
    )

    def test_basic_extraction(self):
        measurements, errors = parse_output("throughput: 943.2 Mbit/s", self.rules)
        assert measurements["throughput"] == {"value": 943.2, "unit": "Mbit/s"}
        assert errors == {}

    def test_empty_output_errors_for_every_rule(self):
        more = self.rules + (ExtractionRule(metric="latency", pattern=r"latency=(\d+)"),)
        measurements, errors = parse_output("", more)
        assert measurements == {}
        assert set(errors) == {"throughput", "latency"}

    def test_first_match_wins(self):
        text = "throughput: 10.0\nthroughput: 99.0"
        measurements, _ = parse_output(text, self.rules)
        assert measurements["throughput"]["value"] == 10.0

    def test_field_index_rule(self):
        rule = ExtractionRule(metric="m", field_index=2)
        measurements, _ = parse_output("a b 42.5 c", (rule,))
        assert measurements["m"]["value"] == 42.5

    def test_field_index_out_of_range(self):
        rule = ExtractionRule(metric="m", field_index=9)
        _, errors = parse_output("a b", (rule,))
        assert "out of range" in errors["m"]


class TestCaptureEnvironment:
    def test_snapshot_has_timestamp_and_host(self):
        snap = capture_environment()
        assert snap.timestamp
        assert snap.host
        assert snap.hardware["cpu_count"] not in ("", None)

    def test_timestamps_non_decreasing(self):
        first = capture_environment()
        second = capture_environment()
        assert second.timestamp >= first.timestamp

    def test_total_even_when_probes_fail(self, monkeypatch):
        import socket

        monkeypatch.setattr(socket, "gethostname", lambda: (_ for _ in ()).throw(OSError()))
        snap = capture_environment()
        assert snap.host == "unavailable"
        assert snap.timestamp  # still a full snapshot
