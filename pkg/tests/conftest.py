import numpy as np
import pytest

from fluidaqam import CorrelationSpec, PortStrategy, gain_moments, sample_ensemble, select_ports
from fluidaqam.config import ExperimentConfig
from fluidaqam import experiments


@pytest.fixture(scope="session")
def fa_spec():
    return CorrelationSpec(100, 0.5)


@pytest.fixture(scope="session")
def big_ensemble(fa_spec):
    return sample_ensemble(fa_spec, 100_000, 11)


@pytest.fixture(scope="session")
def desk_config():
    return ExperimentConfig()


@pytest.fixture(scope="session")
def design_moments(desk_config):
    ens = experiments.design_ensemble(desk_config)
    return gain_moments(select_ports(ens, PortStrategy.best()))


@pytest.fixture(scope="session")
def eval_gains():
    ens = sample_ensemble(CorrelationSpec(100, 0.5), 1000, 2024)
    return {s: select_ports(ens, PortStrategy(s), 5) for s in ("best", "fixed", "random")}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def report():
    def _report(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
