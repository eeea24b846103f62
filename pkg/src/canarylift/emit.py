"""Source rewriting, standalone harness assembly, and lift reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import syntax
from .canary import ResolutionTable
from .errors import AssemblyError, OverlapError, ParseError
from .syntax import (
    CallExpression,
    FunctionDeclaration,
    Identifier,
    NumericLiteral,
    Span,
    SyntaxTree,
    VariableDeclaration,
    walk,
)

__all__ = [
    "RewritePlan",
    "plan_rewrite",
    "apply_rewrite",
    "js_string_literal",
    "HarnessFile",
    "build_harness",
    "LiftReport",
    "report_to_dict",
    "write_report",
    "read_report",
    "validate_report",
]

_STRING_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
    "\v": "\\v",
    " ": "\\u2028",
    " ": "\\u2029",
}


def js_string_literal(value: str) -> str:
    """Render `value` as a double-quoted JavaScript string literal."""
    parts = ['"']
    for ch in value:
        escape = _STRING_ESCAPES.get(ch)
        if escape is not None:
            parts.append(escape)
        elif ord(ch) < 0x20:
            parts.append(f"\\u{ord(ch):04x}")
        else:
            parts.append(ch)
    parts.append('"')
    return "".join(parts)


@dataclass(frozen=True)
class RewritePlan:
    """Non-overlapping span replacements plus the count of call sites left alone."""

    edits: tuple[tuple[Span, str], ...]
    skipped: int


def plan_rewrite(
    tree: SyntaxTree,
    decoder_name: Optional[str],
    aliases: set[str],
    resolution: ResolutionTable,
) -> RewritePlan:
    """Plan the replacement of every resolvable decoder call with its string literal.

    A call qualifies when its callee names the decoder or one of its aliases
    and its single argument is an integral numeric literal inside the decoder's
    index range. Calls that do not qualify are counted as skipped.
    """
    names = set(aliases)
    if decoder_name is not None:
        names.add(decoder_name)
    edits: list[tuple[Span, str]] = []
    skipped = 0
    low = resolution.base
    high = resolution.base + len(resolution)
    for node in walk(tree.root):
        if not isinstance(node, CallExpression):
            continue
        if not (isinstance(node.callee, Identifier) and node.callee.name in names):
            continue
        argument = node.arguments[0] if len(node.arguments) == 1 else None
        if (
            isinstance(argument, NumericLiteral)
            and float(argument.value).is_integer()
            and low <= int(argument.value) < high
        ):
            edits.append((node.span, js_string_literal(resolution[int(argument.value)])))
        else:
            skipped += 1
    edits.sort(key=lambda edit: edit[0].start)
    return RewritePlan(tuple(edits), skipped)


def apply_rewrite(source: str, plan: RewritePlan) -> str:
    """Apply a rewrite plan, leaving every byte outside the edit spans untouched."""
    cursor = 0
    pieces: list[str] = []
    for span, replacement in plan.edits:
        if span.start < cursor or span.end < span.start or span.end > len(source):
            raise OverlapError(
                f"edit {span.start}..{span.end} overlaps a previous edit or exceeds the source"
            )
        pieces.append(source[cursor : span.start])
        pieces.append(replacement)
        cursor = span.end
    pieces.append(source[cursor:])
    return "".join(pieces)


_SECTION_ORDER = ("iife", "decoder", "array", "offsets", "driver")

# Names a harness may reference without defining them.
_ALLOWED_GLOBALS = frozenset({"console", "parseInt"})


@dataclass(frozen=True)
class HarnessFile:
    """Sections of a standalone dump program, assembled in a fixed order."""

    sections: tuple[tuple[str, str], ...]  # (section kind, text)

    def assemble(self) -> str:
        """Concatenate the sections and verify the result is self-contained.

        The program must keep the canonical section order, parse on its own,
        and reference no free identifiers beyond the engine globals it needs.
        """
        kinds = tuple(kind for kind, _ in self.sections)
        if kinds != _SECTION_ORDER:
            raise AssemblyError(
                f"sections out of order: {kinds!r}, expected {_SECTION_ORDER!r}"
            )
        text = "\n".join(body.rstrip("\n") for _, body in self.sections) + "\n"
        try:
            tree = syntax.parse(text)
        except ParseError as error:
            raise AssemblyError(f"assembled harness does not parse: {error}") from error
        from .analysis import inventory_symbols, _identifier_references, _local_names

        inventory = inventory_symbols(tree)
        defined = (
            set(inventory.functions)
            | set(inventory.variables)
            | _local_names(tree.root)
            | _ALLOWED_GLOBALS
        )
        for ident in _identifier_references(tree.root):
            if ident.name not in defined:
                raise AssemblyError(f"harness references undefined name {ident.name!r}")
        return text


def build_harness(
    iife,
    decoder_text: str,
    array_fn_text: str,
    base: int,
    end: int,
) -> HarnessFile:
    """Assemble a program that runs the canary loop and dumps the decoded table.

    `iife` may be an IifeExtract or its raw text. The decoder is rebound to
    the fixed name PLACEHOLDER so the driver loop is the same for every input;
    the loop prints `hexIndex<TAB>string` lines with the index zero-padded to
    the width of `end`.
    """
    iife_text = getattr(iife, "text", iife)
    # Declarator slices like `d = (i) => t[i]` parse as assignments but still
    # need a binding keyword; full declarations stand on their own.
    statement = None
    decoder_section = decoder_text
    try:
        decoder_tree = syntax.parse(decoder_text)
    except ParseError:
        pass
    else:
        body = decoder_tree.root.body
        if len(body) == 1 and isinstance(
            body[0], (FunctionDeclaration, VariableDeclaration)
        ):
            statement = body[0]
    if statement is None:
        decoder_section = f"const {decoder_text};"
        try:
            statement = syntax.parse(decoder_section).root.body[0]
        except ParseError as exc:
            raise AssemblyError("decoder text does not define a binding") from exc
        if not isinstance(statement, VariableDeclaration):
            raise AssemblyError("decoder text does not define a binding")
    if isinstance(statement, FunctionDeclaration):
        decoder_name = statement.id.name
    else:
        decoder_name = statement.declarations[0].id.name
    decoder_section = f"{decoder_section.rstrip()}\nconst PLACEHOLDER = {decoder_name};"
    width = len(f"{end:x}")
    driver = "\n".join(
        [
            "let cursor = BASE;",
            "while (cursor < END) {",
            "    let label = cursor.toString(16);",
            f"    while (label.length < {width}) {{",
            '        label = "0" + label;',
            "    }",
            '    console.log(label + "\\t" + PLACEHOLDER(cursor));',
            "    cursor = cursor + 1;",
            "}",
        ]
    )
    offsets = f"const BASE = {base:#x};\nconst END = {end:#x};"
    return HarnessFile(
        sections=(
            ("iife", iife_text.rstrip()),
            ("decoder", decoder_section),
            ("array", array_fn_text.rstrip()),
            ("offsets", offsets),
            ("driver", driver),
        )
    )


@dataclass(frozen=True)
class LiftReport:
    """Outcome record for one input file, serializable to a stable JSON object."""

    input: str
    sha256: str
    outcome: str  # "Solved" | "Unsatisfiable" | "UnrecognizedIife" | "ParseError"
    decoder: Optional[str] = None
    base: Optional[int] = None
    end: Optional[int] = None
    rotation: Optional[int] = None
    terms: Optional[tuple[int, ...]] = None
    resolved: Optional[int] = None
    skipped: Optional[int] = None
    elapsed_ms: float = 0.0


_REPORT_KEYS = (
    "input",
    "sha256",
    "outcome",
    "decoder",
    "base",
    "end",
    "rotation",
    "terms",
    "resolved",
    "skipped",
    "elapsed_ms",
)
_OUTCOMES = ("Solved", "Unsatisfiable", "UnrecognizedIife", "ParseError")


def report_to_dict(report: LiftReport) -> dict:
    """Render a report as a JSON-ready dict; offsets become hex strings, absent fields are omitted."""
    doc: dict = {
        "input": report.input,
        "sha256": report.sha256,
        "outcome": report.outcome,
    }
    if report.decoder is not None:
        doc["decoder"] = report.decoder
    if report.base is not None:
        doc["base"] = f"{report.base:#x}"
    if report.end is not None:
        doc["end"] = f"{report.end:#x}"
    if report.rotation is not None:
        doc["rotation"] = report.rotation
    if report.terms is not None:
        doc["terms"] = [f"{t:#x}" for t in report.terms]
    if report.resolved is not None:
        doc["resolved"] = report.resolved
    if report.skipped is not None:
        doc["skipped"] = report.skipped
    doc["elapsed_ms"] = report.elapsed_ms
    return doc


def write_report(report: LiftReport) -> str:
    """Serialize a report to JSON text."""
    return json.dumps(report_to_dict(report), indent=2)


def validate_report(doc: dict) -> None:
    """Check a decoded report document against the schema; raises ValueError."""
    if not isinstance(doc, dict):
        raise ValueError("report must be a JSON object")
    unknown = set(doc) - set(_REPORT_KEYS)
    if unknown:
        raise ValueError(f"unknown report keys: {sorted(unknown)}")
    for key in ("input", "sha256", "outcome"):
        if not isinstance(doc.get(key), str):
            raise ValueError(f"report field {key!r} must be a string")
    if doc["outcome"] not in _OUTCOMES:
        raise ValueError(f"unknown outcome {doc['outcome']!r}")
    for key in ("base", "end"):
        if key in doc and not (
            isinstance(doc[key], str) and doc[key].startswith("0x")
        ):
            raise ValueError(f"report field {key!r} must be a hex string")
    if "rotation" in doc and not isinstance(doc["rotation"], int):
        raise ValueError("report field 'rotation' must be an integer")
    if "terms" in doc:
        if not (
            isinstance(doc["terms"], list)
            and all(isinstance(t, str) and t.startswith("0x") for t in doc["terms"])
        ):
            raise ValueError("report field 'terms' must be a list of hex strings")
    for key in ("resolved", "skipped"):
        if key in doc and not isinstance(doc[key], int):
            raise ValueError(f"report field {key!r} must be an integer")
    if not isinstance(doc.get("elapsed_ms"), (int, float)):
        raise ValueError("report field 'elapsed_ms' must be a number")


def read_report(text: str) -> LiftReport:
    """Parse JSON report text back into a LiftReport."""
    doc = json.loads(text)
    validate_report(doc)
    return LiftReport(
        input=doc["input"],
        sha256=doc["sha256"],
        outcome=doc["outcome"],
        decoder=doc.get("decoder"),
        base=int(doc["base"], 16) if "base" in doc else None,
        end=int(doc["end"], 16) if "end" in doc else None,
        rotation=doc.get("rotation"),
        terms=tuple(int(t, 16) for t in doc["terms"]) if "terms" in doc else None,
        resolved=doc.get("resolved"),
        skipped=doc.get("skipped"),
        elapsed_ms=float(doc.get("elapsed_ms", 0.0)),
    )
