"""Shared fixtures: sample corpus loaders, forge helpers, and an independent rotation oracle."""

from __future__ import annotations

import math
import random
import re
from contextlib import contextmanager
from pathlib import Path

import pytest

from canarylift import canary
from canarylift.forge import DEFAULT_PAYLOADS, ForgeManifest

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def alias_iife_source() -> str:
    return (DATA_DIR / "darcula_alias_iife.js").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def inline_table_source() -> str:
    return (DATA_DIR / "darcula_inline_table.js").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def shuffle_source() -> str:
    return (DATA_DIR / "emotet_shuffle.js").read_text(encoding="utf-8")


def make_manifest(
    seed: int,
    size: int,
    canary_count: int | None = None,
    rotation: int | None = None,
    base: int = 0x151,
    variant: str = "checksum",
    alias_functions: int | None = None,
) -> ForgeManifest:
    """Deterministic manifest whose unspecified knobs derive from the seed."""
    rng = random.Random(seed)
    payload = tuple(rng.choice(DEFAULT_PAYLOADS) for _ in range(size))
    return ForgeManifest(
        payload_strings=payload,
        canary_count=canary_count if canary_count is not None else rng.randint(1, max(1, size // 2)),
        rotation=rotation if rotation is not None else rng.randrange(size),
        base=base,
        seed=seed,
        variant=variant,
        alias_functions=alias_functions if alias_functions is not None else rng.randint(1, 4),
    )


@pytest.fixture(scope="session")
def manifest_factory():
    return make_manifest


# --- independent rotation oracle -------------------------------------------
#
# Written apart from the solver on purpose: a literal push(shift()) simulation
# over a mutable list with its own expression evaluator and its own digit-prefix
# parser, so agreement with solve_rotation is evidence rather than tautology.

_PREFIX_RE = re.compile(r"\s*([+-]?)(\d+)")


def _oracle_parse_int(text: str) -> float:
    match = _PREFIX_RE.match(text)
    if match is None:
        return math.nan
    sign, digits = match.groups()
    value = float(int(digits))
    return -value if sign == "-" else value


def _oracle_eval(node, table: list[str], base: int) -> float:
    if isinstance(node, canary.Term):
        return _oracle_parse_int(table[node.index - base])
    if isinstance(node, canary.Const):
        return node.value
    if isinstance(node, canary.Neg):
        return -_oracle_eval(node.operand, table, base)
    left = _oracle_eval(node.left, table, base)
    right = _oracle_eval(node.right, table, base)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if right == 0.0:
        return math.nan
    return left / right


def oracle_solve(expr, shipped, target: float, base: int):
    """Rotate a working copy one push(shift()) at a time; first match wins.

    Returns (rotation count, table state at the match) or None after a full
    cycle without a match.
    """
    table = list(shipped)
    for count in range(len(table)):
        if _oracle_eval(expr, table, base) == target:
            return count, tuple(table)
        table.append(table.pop(0))
    return None


@pytest.fixture(scope="session")
def rotation_oracle():
    return oracle_solve


# --- acceptance reporting ----------------------------------------------------

_ACCEPTANCE_RESULTS: list[tuple[int, str, str]] = []


@pytest.fixture
def criterion():
    """Context manager recording one acceptance criterion pass/fail line."""

    @contextmanager
    def _criterion(number: int, description: str):
        try:
            yield
        except BaseException:
            _ACCEPTANCE_RESULTS.append((number, "FAIL", description))
            raise
        else:
            _ACCEPTANCE_RESULTS.append((number, "PASS", description))

    return _criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number, status, description in sorted(_ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {number:>2} {status}  {description}")
