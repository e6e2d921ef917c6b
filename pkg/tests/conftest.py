import numpy as np
import pytest

from cepnet import corpus
from cepnet.audio_io import AudioSignal


@pytest.fixture(scope="session")
def speech():
    """A 6 s synthetic utterance at 8 kHz."""
    return corpus.make_utterances(1, 6.0, seed=11)[0]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_signal(rng, n, rate=8000, scale=0.3):
    return AudioSignal.saturated(scale * rng.standard_normal(n), rate)


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record and print one pass/fail line per acceptance criterion."""
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
