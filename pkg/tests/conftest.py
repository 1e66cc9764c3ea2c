import logging

import pytest

from neqcasimir.materials import get_material
from neqcasimir.planeplane import PlatePair, PlateSpec

T_ROOM = 300.0

# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture(autouse=True)
def _quiet_warnings(caplog):
    caplog.set_level(logging.ERROR, logger="neqcasimir")


@pytest.fixture(scope="session")
def gaas():
    return get_material("gaas")


@pytest.fixture(scope="session")
def au():
    return get_material("au")


def biased_pair(material, plate2, relative_bias, temperature=T_ROOM):
    return PlatePair(PlateSpec.biased(material, relative_bias, temperature), PlateSpec(plate2))


@pytest.fixture(scope="session")
def gaas_au(gaas, au):
    return biased_pair(gaas, au, 0.95)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
