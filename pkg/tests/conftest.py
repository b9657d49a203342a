import pytest
from hypothesis import settings

RESULTS = pytest.StashKey[dict]()

# wall-clock deadlines are meaningless on a loaded single-core runner
settings.register_profile("default", deadline=None)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(RESULTS, None)
    if not results:
        return
    terminalreporter.section("ACCEPTANCE")
    for k in sorted(results):
        ok, detail = results[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def record(request):
    """Store one acceptance outcome, then fail the test if it did not pass."""
    results = request.config.stash.setdefault(RESULTS, {})

    def _record(criterion, ok, detail):
        results[criterion] = (ok, detail)
        assert ok, detail
    return _record
