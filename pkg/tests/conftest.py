import pytest

from lorentzdg import make_model

_CRITERIA = []


@pytest.fixture(params=["drift2d", "energy-test", "tokamak"])
def experiment(request):
    return request.param


@pytest.fixture
def model(experiment):
    return make_model(experiment)


@pytest.fixture
def drift2d():
    return make_model("drift2d")


@pytest.fixture
def energy_test():
    return make_model("energy-test")


@pytest.fixture
def tokamak():
    return make_model("tokamak")


@pytest.fixture(scope="session")
def report_criterion():
    """Record one acceptance line ``(number, title, passed, detail)``."""

    def report(number, title, passed, detail=""):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        _CRITERIA.append((number, line))
        print(line)

    return report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA, key=lambda item: item[0]):
        terminalreporter.write_line(line)
