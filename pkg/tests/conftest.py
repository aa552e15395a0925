import pytest
from hypothesis import settings

from oneshot import MessageEnsemble, peres_channel, prevedel_channel, prevedel_encoding

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def prevedel():
    N, E = prevedel_channel(), prevedel_encoding()
    return N, E, MessageEnsemble.uniform(E.messages)


@pytest.fixture(scope="session")
def peres():
    N, E = peres_channel()
    return N, E, MessageEnsemble.uniform(E.messages)


def pytest_terminal_summary(terminalreporter):
    lines = [
        value
        for key in ("passed", "failed")
        for rep in terminalreporter.stats.get(key, [])
        if rep.when == "call"
        for name, value in rep.user_properties
        if name == "acceptance"
    ]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
