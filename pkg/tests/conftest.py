from fractions import Fraction as Fr

import pytest
from hypothesis import HealthCheck, settings

from attractorlab.perturbation import construct, random_ball_member
from attractorlab.plmap import PLMap

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# reversed 3-lap map of slope 3: the K=1 seed
THREE_LAP = PLMap((0, Fr(1, 3), Fr(2, 3), 1), (1, 0, 1, 0))

# 4-lap seed in F_2 (no 3-lap slope-3 map avoids 2-periodic endpoints)
FOUR_LAP = PLMap((0, Fr(3, 20), Fr(17, 40), Fr(29, 40), 1),
                 (Fr(9, 20), Fr(9, 10), Fr(3, 40), 1, Fr(7, 40)))


@pytest.fixture(scope="session")
def three_lap():
    return THREE_LAP


@pytest.fixture(scope="session")
def four_lap():
    return FOUR_LAP


@pytest.fixture(scope="session")
def k1():
    return construct(THREE_LAP, 1, Fr(1, 8))


@pytest.fixture(scope="session")
def k2():
    return construct(FOUR_LAP, 2, Fr(1, 8))


@pytest.fixture(scope="session")
def g1(k1):
    return random_ball_member(k1.hat, k1.params.rho, 0)


def pytest_terminal_summary(terminalreporter):
    from tests import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acceptance_log.LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
