import numpy as np
import pytest

from layercache import Catalog


@pytest.fixture
def unit_catalog():
    """Builder for catalogs with all-unit layers and uniform rates."""

    def build(num_objects, num_versions):
        shape = (num_objects, num_versions)
        return Catalog(layer_size=np.ones(shape), rate=np.ones(shape))

    return build


def random_catalog(rng, max_objects=6, max_versions=3, max_size=5):
    """Small random integer-size catalog for fuzzing."""
    D = int(rng.integers(1, max_objects + 1))
    V = int(rng.integers(1, max_versions + 1))
    delta = rng.integers(1, max_size + 1, size=(D, V)).astype(float)
    rate = rng.random((D, V)) + 0.01
    return Catalog(layer_size=delta, rate=rate)


# One verdict line per acceptance criterion, echoed after the run so the
# outcome survives pytest's output capture.
ACCEPTANCE_VERDICTS = []


def record_verdict(line: str) -> None:
    ACCEPTANCE_VERDICTS.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)
