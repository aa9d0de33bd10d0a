from __future__ import annotations

from pathlib import Path

import pytest

from udrive.catalog import baseline_parameters, default_catalog

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

EXAMPLE_1 = """\
rule "VR1 speed boost"
trigger entering_motorway
condition !is_raining !is_foggy !is_snowing
then
    increase_max_speed(10)
until exiting_motorway
end
"""

EXAMPLE_2 = """\
rule "night vehicle caution"
trigger vehicle_detected
condition is_night
then
    set_light(low_beam)
    decrease_max_speed(5)
until vehicle_no_longer_detected
end

rule "night clear road"
trigger vehicle_no_longer_detected
condition is_night
then
    set_light(high_beam)
end
"""

EXAMPLE_4 = """\
rule "cautious intersection approach"
trigger always
then
    prep_dist(100)
    expect_speed(15)
end
"""

EXAMPLE_5 = """\
rule "hold before congested box"
trigger green_light_detected
condition is_jam
then
    stop
end

rule "resume when clear"
trigger always
condition !is_jam
then
    launch
end
"""

EXAMPLE_TEXTS = {
    "example1": EXAMPLE_1,
    "example2": EXAMPLE_2,
    "example4": EXAMPLE_4,
    "example5": EXAMPLE_5,
}


@pytest.fixture(scope="session")
def cat():
    return default_catalog()


@pytest.fixture()
def baseline():
    return baseline_parameters()


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES
