import csv
import io
import time

import pytest

from ota_ada.experiments import cli

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion and return ``ok``."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


@pytest.fixture(scope="session")
def default_attack_ladder(tmp_path_factory):
    """``ota-ada attack-demo`` at its defaults (n0=100, k=1001, 100 trials).

    Returns ``(rows, seconds)``.
    """
    out = tmp_path_factory.mktemp("ladder") / "ladder.csv"
    t0 = time.perf_counter()
    code = cli.main(["attack-demo", "--seed", "0", "--out", str(out)])
    elapsed = time.perf_counter() - t0
    assert code == 0
    body = "\n".join(l for l in out.read_text().splitlines() if not l.startswith("#"))
    return list(csv.DictReader(io.StringIO(body))), elapsed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
