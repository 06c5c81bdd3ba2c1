import pytest

from memcaprc.device import load_ledger, load_memristor_params

# criterion number -> list of (part, passed, detail), filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def ledger():
    return load_ledger()


@pytest.fixture(scope="session")
def memristor_params():
    return load_memristor_params()


def acceptance_lines():
    lines = []
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name}: {'ok' if good else 'FAILED'} ({text})" for name, good, text in parts)
        lines.append(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    return lines


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
