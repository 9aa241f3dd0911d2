import pytest

from adtlearn.fixtures import coffee_machine


@pytest.fixture
def coffee():
    return coffee_machine()


def enc(machine, text):
    """Encode a space separated input word."""
    return tuple(machine.inputs.encode(text.split())) if text else ()


def pytest_terminal_summary(terminalreporter):
    import acceptance_report
    lines = acceptance_report.lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
