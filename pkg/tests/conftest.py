import numpy as np
import pytest

from hydrocast import pipeline, series
from hydrocast._kernels import available_backends


@pytest.fixture(params=sorted(available_backends()))
def kern(request):
    """Each importable kernel backend in turn."""
    return available_backends()[request.param]


@pytest.fixture(scope="session")
def synth10():
    return pipeline.synth_dataset(10, seed=0)


@pytest.fixture
def csv_pair(tmp_path, synth10):
    gen, caps = synth10
    g, c = tmp_path / "gen.csv", tmp_path / "cap.csv"
    series.write_generation_csv(gen, g)
    series.write_capacity_csv(caps, c)
    return g, c


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion."""
    def record(number, name, ok, detail=""):
        _ACCEPTANCE.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}"
                           + (f" ({detail})" if detail else ""))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
