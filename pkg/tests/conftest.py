import pytest
from hypothesis import settings

from abpkit.field import FieldConfig
from abpkit.poly import Ring

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def f101():
    return FieldConfig.prime(101)


@pytest.fixture
def f7():
    return FieldConfig.prime(7)


@pytest.fixture
def qq():
    return FieldConfig.rational()


@pytest.fixture
def r3(f101):
    return Ring(f101, 3)


@pytest.fixture
def q3(qq):
    return Ring(qq, 3)


def pytest_terminal_summary(terminalreporter):
    import sys

    for mod in list(sys.modules.values()):
        results = getattr(mod, "ACCEPTANCE_RESULTS", None)
        if results:
            terminalreporter.section("acceptance criteria")
            for num in sorted(results):
                terminalreporter.write_line(results[num])
            break
