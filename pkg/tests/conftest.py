import pytest
from hypothesis import settings

from twistorfam.familymodel import ConformalInvariant, build_family
from twistorfam.surgery import run_pipeline

settings.register_profile("default", deadline=None, print_blob=True)
settings.load_profile("default")

# filled by test_acceptance, printed once at the end of the session
CRITERIA: dict[int, tuple[str, str]] = {}


@pytest.fixture
def record():
    """record(n, ok, text) stores and prints one pass/fail line for criterion n."""

    def _record(n: int, ok: bool, text: str) -> bool:
        status = "PASS" if ok else "FAIL"
        CRITERIA[n] = (status, text)
        print(f"criterion {n}: {status}  {text}")
        return ok

    return _record


@pytest.fixture(scope="session")
def ci():
    return ConformalInvariant.canonical()


@pytest.fixture(scope="session")
def fm(ci):
    return build_family(ci)


@pytest.fixture(scope="session")
def run(fm):
    return run_pipeline(fm)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        status, text = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2}: {status}  {text}")
