import json
from pathlib import Path

import pytest

from amrforge.penman import iter_penman_blocks, parse_penman

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def caption_texts():
    return list(iter_penman_blocks((FIXTURES / "giraffes.penman").read_text(encoding="utf-8")))


@pytest.fixture(scope="session")
def caption_graphs(caption_texts):
    return [parse_penman(t) for t in caption_texts]


@pytest.fixture(scope="session")
def corpus_path():
    return FIXTURES / "giraffes.jsonl"


@pytest.fixture(scope="session")
def corpus_record(corpus_path):
    return json.loads(corpus_path.read_text(encoding="utf-8").splitlines()[0])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
