from __future__ import annotations

from pathlib import Path

import pytest

from alethecheck.frontend import parse_problem, parse_proof

CORPUS = Path(__file__).parent / "corpus"

# (problem, proof) pairs that check valid at the default strictness
VALID_CORPUS = [
    ("fragment.smt2", "fragment.alethe"),
    ("uf.smt2", "uf.alethe"),
    ("la.smt2", "la.alethe"),
    ("quant.smt2", "quant.alethe"),
    ("binders.smt2", "binders.alethe"),
    ("trans.smt2", "trans_level1.alethe"),
    ("trans.smt2", "trans_level2.alethe"),
    ("trans.smt2", "trans_level3.alethe"),
]


def read(name: str) -> str:
    return (CORPUS / name).read_text(encoding="utf-8")


def load(problem_name: str, proof_name: str):
    problem = parse_problem(read(problem_name))
    return problem, parse_proof(read(proof_name), problem)


@pytest.fixture
def fragment():
    return load("fragment.smt2", "fragment.alethe")


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
