import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def acceptance():
    """Record one acceptance line: ``acceptance(cid, ok, detail)``."""

    def record(cid: str, ok: bool, detail: str) -> None:
        _ACCEPTANCE.append((cid, bool(ok), detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {cid}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {cid}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
