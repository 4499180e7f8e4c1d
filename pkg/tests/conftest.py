import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from synthetic import tweet_corpus  # noqa: E402

from sentimon.corpus import split  # noqa: E402
from sentimon.models import KINDS, train_bundle  # noqa: E402

# criterion name -> "PASS" / "FAIL", in first-seen order
_CRITERIA: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0]
    if rep.failed:
        _CRITERIA[name] = "FAIL"
    elif rep.when == "call" and rep.passed:
        _CRITERIA.setdefault(name, "PASS")
    elif rep.skipped:
        _CRITERIA[name] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _CRITERIA.items():
        terminalreporter.write_line(f"{status}  {name}")


@pytest.fixture(scope="session")
def small_corpus():
    return tweet_corpus(800, vocab_size=600, seed=7, signal=0.3)


@pytest.fixture(scope="session")
def bundles(small_corpus):
    """One trained bundle per model kind, from the train part of a small synthetic corpus."""
    train = split(small_corpus).train
    return {kind: train_bundle(train, kind)[0] for kind in KINDS}
