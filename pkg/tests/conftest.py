import random

import pytest
from hypothesis import HealthCheck, settings

from stategen.coverage import FrequencyRecorder
from stategen.program import build_program
from stategen.scenarios import get_scenario

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(params=["session", "tensor", "mcp"])
def scenario(request):
    return get_scenario(request.param)


def make_build(name, seed, n=5, split=True, mode="data-dependency"):
    from stategen.engine import EngineConfig
    rng = random.Random(seed)
    return build_program(get_scenario(name), n, FrequencyRecorder(), rng, seed,
                         EngineConfig(mode=mode), allow_split=split)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criteria gate")


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
