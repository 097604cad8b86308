import pytest

from sfwm_ladder.config import parse_config

ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): numbered acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def fig3a():
    return parse_config({"preset": "fig3a"})


@pytest.fixture(scope="session")
def experiment():
    return parse_config({"preset": "experiment"})


@pytest.fixture(scope="session", params=["fig3b_text", "fig3b_caption"])
def hot(request):
    return parse_config({"preset": request.param})
