from fractions import Fraction as F

import pytest

from grc.subdist import make_matrix


def dense_product(m, n):
    """Schoolbook product over explicit index lists, independent of the sparse code path."""
    out = {}
    for x in m.dom:
        row = {}
        for z in n.cod:
            total = sum((m[x, y] * n[y, z] for y in m.cod), F(0))
            if total:
                row[z] = total
        out[x] = row
    return make_matrix(m.dom, n.cod, out)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Record one pass/fail line per acceptance criterion; lines are echoed in the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def record(ok: bool, text: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {text}"
        lines.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
