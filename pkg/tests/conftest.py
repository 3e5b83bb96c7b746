import pytest

_VERDICTS = {}


class Verdict:
    def __init__(self, number):
        self.number = number
        self.passed = False
        self.notes = []

    def note(self, text):
        self.notes.append(text)


@pytest.fixture
def criterion(request):
    """Records a pass/fail line for an acceptance criterion; a test that errors counts as FAIL."""
    number = request.node.get_closest_marker("criterion").args[0]
    verdict = Verdict(number)
    yield verdict
    _VERDICTS[number] = verdict


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        v = _VERDICTS[number]
        line = f"criterion {number}: {'pass' if v.passed else 'FAIL'}"
        if v.notes:
            line += "  (" + "; ".join(v.notes) + ")"
        terminalreporter.write_line(line)
