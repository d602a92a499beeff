import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERIA = {}


class CriterionRecorder:
    def __init__(self, number, title):
        self.number, self.title = number, title
        self.notes = []
        _CRITERIA[number] = (title, "FAIL", self.notes)

    def note(self, text):
        self.notes.append(text)

    def passed(self):
        _CRITERIA[self.number] = (self.title, "PASS", self.notes)


@pytest.fixture
def criterion():
    return CriterionRecorder


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status, notes = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {status} - {title}")
        for text in notes:
            terminalreporter.write_line(f"    {text}")
