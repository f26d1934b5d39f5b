import os
from collections import defaultdict

import hypothesis
import numpy as np
import pytest

np.seterr(all="warn", under="ignore")

hypothesis.settings.register_profile("default", max_examples=40, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=300, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE = defaultdict(list)


@pytest.fixture
def criterion():
    """Record one check of a numbered acceptance criterion: criterion(n, ok, detail)."""

    def record(number, ok, detail):
        _ACCEPTANCE[number].append((bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        checks = _ACCEPTANCE[number]
        status = "PASS" if all(ok for ok, _ in checks) else "FAIL"
        details = "; ".join(d for _, d in checks)
        terminalreporter.write_line(f"criterion {number:2d} {status}  {details}")
