import json
from pathlib import Path

import numpy as np
import pytest

from xyloc.chain import ChainSpec, build_hopping_matrix, cauchy, fixed, sample_realization
from xyloc.spectral import eigendecompose

FROZEN = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())

ACCEPTANCE_LINES: list = []


def realization(n, delta=0.5, seed=42, index=0):
    field = fixed(0.0) if delta == 0 else cauchy(0.0, delta)
    return sample_realization(ChainSpec(n, field=field, master_seed=seed), index)


def decomposed(n, delta=0.5, seed=42, index=0):
    r = realization(n, delta, seed, index)
    return r, eigendecompose(build_hopping_matrix(r))


@pytest.fixture
def frozen():
    return FROZEN


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
