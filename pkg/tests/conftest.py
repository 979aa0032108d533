import shutil
import sys
from pathlib import Path

import pytest

from evalbench.artefacts import load_bundle, sample_bundle_path

sys.path.insert(0, str(Path(__file__).parent))

FIXTURE_BENCH = Path(__file__).parent.parent / "scripts" / "fixture_benchmark.py"


@pytest.fixture(scope="session")
def bundle():
    return load_bundle(sample_bundle_path())


@pytest.fixture()
def bundle_copy(tmp_path):
    """Writable copy of the sample bundle (for template-saving tests)."""
    dest = tmp_path / "bundle"
    shutil.copytree(sample_bundle_path(), dest)
    return dest


@pytest.fixture()
def store_path(tmp_path):
    return tmp_path / "store"


def fixture_adapter_dict(
    metric: str = "throughput",
    factors: tuple[str, ...] = ("instance", "size"),
    unit: str = "Mbit/s",
    fail_when: str | None = None,
    sleep: float = 0.0,
    timeout: float = 30.0,
) -> dict:
    parts = [sys.executable, str(FIXTURE_BENCH), "--metric", f'"{metric}"', "--unit", unit]
    for name in factors:
        parts.append(f'--factor "{name}={{factor:{name}}}"')
    if fail_when:
        parts.append(f'--fail-when "{fail_when}"')
    if sleep:
        parts.append(f"--sleep {sleep}")
    import re

    return {
        "name": "fixture-benchmark",
        "command": " ".join(parts),
        "timeout": timeout,
        "version": "1.0",
        "rules": [
            {
                "metric": metric,
                "unit": unit,
                "pattern": re.escape(metric) + r":\s*([0-9.]+)",
            }
        ],
    }
