"""Canary checksum modeling: numeric-prefix parsing, checksum evaluation, and rotation solving."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

from . import syntax
from .analysis import IifeExtract
from .errors import IndexOutOfRange, UnrecognizedIife
from .syntax import (
    ArrowFunctionExpression,
    BinaryExpression,
    BlockStatement,
    BooleanLiteral,
    CallExpression,
    ExpressionStatement,
    FunctionExpression,
    Identifier,
    IfStatement,
    MemberExpression,
    Node,
    NumericLiteral,
    StringLiteral,
    TryStatement,
    UnaryExpression,
    VariableDeclaration,
    VariableDeclarator,
    WhileStatement,
    walk,
)

__all__ = [
    "numeric_prefix_parse",
    "Term",
    "Const",
    "Neg",
    "Binary",
    "ChecksumExpr",
    "ChecksumCanary",
    "FixedCountShuffle",
    "StringTable",
    "CanaryModel",
    "ResolutionTable",
    "extract_checksum",
    "evaluate_checksum",
    "term_indices",
    "solve_rotation",
    "resolve",
]

# ECMAScript WhiteSpace and LineTerminator characters, as trimmed by parseInt.
_JS_WHITESPACE = (
    "\t\n\v\f\r  ﻿       "
    "         　"
)
_HEX_DIGITS = "0123456789abcdefABCDEF"


def numeric_prefix_parse(text: str) -> float:
    """Evaluate `parseInt(text)` with no radix argument, per the language rules.

    Leading whitespace is stripped, an optional sign is honored, a `0x`/`0X`
    prefix switches to hexadecimal, and the longest run of valid digits is
    converted; no digits at all gives NaN. `parseInt("-0")` is negative zero.
    """
    i = 0
    n = len(text)
    while i < n and text[i] in _JS_WHITESPACE:
        i += 1
    sign = 1.0
    if i < n and text[i] in "+-":
        if text[i] == "-":
            sign = -1.0
        i += 1
    radix = 10
    digits = "0123456789"
    if text[i : i + 2] in ("0x", "0X"):
        i += 2
        radix = 16
        digits = _HEX_DIGITS
    start = i
    while i < n and text[i] in digits:
        i += 1
    if i == start:
        return math.nan
    try:
        magnitude = float(int(text[start:i], radix))
    except OverflowError:
        magnitude = math.inf
    return sign * magnitude


@dataclass(frozen=True)
class Term:
    """One `parseInt(decoder(index))` leaf of a checksum expression."""

    index: int


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Neg:
    operand: "ChecksumExpr"


@dataclass(frozen=True)
class Binary:
    op: str  # "+" | "-" | "*" | "/"
    left: "ChecksumExpr"
    right: "ChecksumExpr"


ChecksumExpr = Union[Term, Const, Neg, Binary]


@dataclass(frozen=True)
class ChecksumCanary:
    """A rotate-until-checksum-matches canary loop."""

    expr: ChecksumExpr
    target: float
    decoder_ref: Optional[str]  # name the in-loop alias points at; None for an inline table
    alias_name: str


@dataclass(frozen=True)
class FixedCountShuffle:
    """A rotate-exactly-count-times loop; count is the passed literal plus its pre-increment."""

    count: int


@dataclass(frozen=True)
class StringTable:
    """Obfuscator string table; rotation state is expressed as a count, never mutated."""

    entries: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def rotated(self, count: int) -> tuple[str, ...]:
        """Entries after `count` left rotations (one push(shift()) per step)."""
        if not self.entries:
            return ()
        k = count % len(self.entries)
        return self.entries[k:] + self.entries[:k]


@dataclass(frozen=True)
class CanaryModel:
    """Everything needed to solve one canaried file."""

    iife: IifeExtract
    decoder_name: Optional[str]
    base: int
    table: StringTable
    variant: Union[ChecksumCanary, FixedCountShuffle]


@dataclass(frozen=True)
class ResolutionTable:
    """Fixpoint decoder mapping: entries in canonical order, indexed from `base`."""

    base: int
    rotation: int
    entries: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: int) -> str:
        return resolve(self.entries, self.base, index)

    def items(self) -> Iterator[tuple[int, str]]:
        for offset, value in enumerate(self.entries):
            yield self.base + offset, value


def _fold_literal(node: Node) -> float:
    if isinstance(node, NumericLiteral):
        return float(node.value)
    if isinstance(node, UnaryExpression) and node.prefix and node.op == "-":
        return -_fold_literal(node.operand)
    raise UnrecognizedIife("IIFE argument is not a foldable numeric literal")


def _integral(value: float) -> int:
    if not float(value).is_integer():
        raise UnrecognizedIife(f"expected an integral value, got {value!r}")
    return int(value)


class _ExprBuilder:
    """Converts a checksum initializer into a ChecksumExpr, recording the term callee."""

    def __init__(self):
        self.callee: Optional[str] = None
        self.member_form = False
        self.terms = 0

    def build(self, node: Node) -> ChecksumExpr:
        if isinstance(node, NumericLiteral):
            return Const(float(node.value))
        if isinstance(node, UnaryExpression) and node.prefix and node.op == "-":
            return Neg(self.build(node.operand))
        if isinstance(node, BinaryExpression) and node.op in ("+", "-", "*", "/"):
            return Binary(node.op, self.build(node.left), self.build(node.right))
        if isinstance(node, CallExpression):
            return self._term(node)
        raise UnrecognizedIife(
            f"unsupported node in checksum expression: {type(node).__name__}"
        )

    def _term(self, call: CallExpression) -> Term:
        if not (isinstance(call.callee, Identifier) and call.callee.name == "parseInt"):
            raise UnrecognizedIife("checksum call is not parseInt")
        if len(call.arguments) != 1:
            raise UnrecognizedIife("parseInt with unexpected arity in checksum")
        inner = call.arguments[0]
        if (
            isinstance(inner, CallExpression)
            and isinstance(inner.callee, Identifier)
            and len(inner.arguments) == 1
            and isinstance(inner.arguments[0], NumericLiteral)
        ):
            name = inner.callee.name
            member = False
            index = _integral(inner.arguments[0].value)
        elif (
            isinstance(inner, MemberExpression)
            and inner.computed
            and isinstance(inner.object, Identifier)
            and isinstance(inner.property, NumericLiteral)
        ):
            name = inner.object.name
            member = True
            index = _integral(inner.property.value)
        else:
            raise UnrecognizedIife("parseInt argument is neither a decoder call nor a table index")
        if self.callee is None:
            self.callee = name
            self.member_form = member
        elif self.callee != name or self.member_form != member:
            raise UnrecognizedIife("checksum terms use inconsistent decoders")
        self.terms += 1
        return Term(index)


def _is_rotation_statement(node: Node) -> bool:
    """Matches `x["push"](x["shift"]())` and the dotted spelling."""
    if isinstance(node, ExpressionStatement):
        node = node.expression
    if not (isinstance(node, CallExpression) and isinstance(node.callee, MemberExpression)):
        return False
    prop = node.callee.property
    outer = prop.value if isinstance(prop, StringLiteral) else getattr(prop, "name", None)
    if outer != "push" or len(node.arguments) != 1:
        return False
    arg = node.arguments[0]
    if not (isinstance(arg, CallExpression) and isinstance(arg.callee, MemberExpression)):
        return False
    prop = arg.callee.property
    inner = prop.value if isinstance(prop, StringLiteral) else getattr(prop, "name", None)
    return inner == "shift"


def _contains_rotation(node: Node) -> bool:
    return any(_is_rotation_statement(n) for n in walk(node))


def _checksum_declarator(block: BlockStatement) -> Optional[VariableDeclarator]:
    for stmt in block.body:
        if isinstance(stmt, VariableDeclaration):
            for decl in stmt.declarations:
                if decl.init is None:
                    continue
                for inner in walk(decl.init):
                    if (
                        isinstance(inner, CallExpression)
                        and isinstance(inner.callee, Identifier)
                        and inner.callee.name == "parseInt"
                    ):
                        return decl
    return None


def _comparison_target(
    block: BlockStatement,
    checksum_name: str,
    params: tuple[str, ...],
    arguments: tuple[Node, ...],
) -> float:
    """Extract the break condition's comparison target."""
    for stmt in block.body:
        if not (isinstance(stmt, IfStatement) and isinstance(stmt.test, BinaryExpression)):
            continue
        test = stmt.test
        if test.op != "===":
            continue
        sides = (test.left, test.right)
        names = [s.name for s in sides if isinstance(s, Identifier)]
        if checksum_name not in names:
            continue
        other = test.right if getattr(test.left, "name", None) == checksum_name else test.left
        if isinstance(other, (NumericLiteral, UnaryExpression)):
            return _fold_literal(other)
        if isinstance(other, Identifier) and other.name in params:
            position = params.index(other.name)
            if position < len(arguments):
                return _fold_literal(arguments[position])
        raise UnrecognizedIife("checksum comparison target is not recoverable")
    raise UnrecognizedIife("no '===' break condition found in canary loop")


def _alias_referent(
    body: BlockStatement, alias: str, params: tuple[str, ...], arguments: tuple[Node, ...]
) -> Optional[str]:
    """Resolve the in-IIFE alias to the outer name it denotes."""
    for node in walk(body):
        if (
            isinstance(node, VariableDeclarator)
            and node.id.name == alias
            and isinstance(node.init, Identifier)
        ):
            return node.init.name
    if alias in params:
        argument = arguments[params.index(alias)] if params.index(alias) < len(arguments) else None
        if isinstance(argument, Identifier):
            return argument.name
        return None
    return alias  # a free name: the loop calls the decoder directly


def extract_checksum(iife: IifeExtract) -> Union[ChecksumCanary, FixedCountShuffle]:
    """Recognize the canary loop inside an extracted IIFE.

    Returns a ChecksumCanary for rotate-until-checksum loops and a
    FixedCountShuffle for rotate-n-times loops; anything else raises
    UnrecognizedIife.
    """
    tree = syntax.parse(iife.text)
    statements = tree.root.body
    if len(statements) != 1 or not isinstance(statements[0], ExpressionStatement):
        raise UnrecognizedIife("IIFE text is not a single expression statement")
    call = statements[0].expression
    if not isinstance(call, CallExpression) or not isinstance(
        call.callee, (FunctionExpression, ArrowFunctionExpression)
    ):
        raise UnrecognizedIife("IIFE text is not an immediately invoked function")
    callee = call.callee
    params = tuple(p.name for p in callee.params)
    arguments = call.arguments
    body = callee.body
    if not isinstance(body, BlockStatement):
        raise UnrecognizedIife("IIFE body is not a block")

    for loop in walk(body):
        if not isinstance(loop, WhileStatement):
            continue
        # Fixed-count form: while (--f) { rotate }
        if (
            isinstance(loop.test, UnaryExpression)
            and loop.test.prefix
            and loop.test.op == "--"
            and _contains_rotation(loop.body)
        ):
            if len(arguments) < 2:
                raise UnrecognizedIife("fixed-count shuffle without a count argument")
            literal = _integral(_fold_literal(arguments[1]))
            count = literal + 1  # the counter is pre-incremented before the call
            if count < 1:
                raise UnrecognizedIife(f"fixed-count shuffle with non-positive count {count}")
            return FixedCountShuffle(count=count)
        # Checksum form: while (...) { try { const D = <arith over parseInt>; if (D === T) break; ... } }
        for inner in walk(loop.body):
            if not isinstance(inner, TryStatement):
                continue
            declarator = _checksum_declarator(inner.block)
            if declarator is None or declarator.init is None:
                continue
            if not _contains_rotation(loop):
                continue
            builder = _ExprBuilder()
            expr = builder.build(declarator.init)
            if builder.terms == 0 or builder.callee is None:
                raise UnrecognizedIife("checksum expression has no parseInt terms")
            target = _comparison_target(
                inner.block, declarator.id.name, params, arguments
            )
            decoder_ref = None
            if not builder.member_form:
                decoder_ref = _alias_referent(body, builder.callee, params, arguments)
            return ChecksumCanary(
                expr=expr,
                target=float(target),
                decoder_ref=decoder_ref,
                alias_name=builder.callee,
            )
    raise UnrecognizedIife("no canary loop recognized in IIFE")


def _js_divide(left: float, right: float) -> float:
    try:
        return left / right
    except ZeroDivisionError:
        if math.isnan(left) or left == 0.0:
            return math.nan
        return math.copysign(math.inf, math.copysign(1.0, left) * math.copysign(1.0, right))


def evaluate_checksum(
    expr: ChecksumExpr,
    table: Union[StringTable, Sequence[str]],
    rotation: int,
    base: int,
) -> float:
    """Evaluate a checksum expression over `table` after `rotation` left rotations.

    Every arithmetic step is an IEEE-754 double operation mirroring the source
    expression's structure, so results (including NaN propagation) are
    bit-identical to an engine evaluating the original text.
    """
    entries = table.entries if isinstance(table, StringTable) else tuple(table)
    size = len(entries)

    def resolver(index: int) -> float:
        slot = index - base
        if not 0 <= slot < size:
            raise IndexOutOfRange(
                f"index {index:#x} outside [{base:#x}, {base + size:#x})"
            )
        return numeric_prefix_parse(entries[(slot + rotation) % size])

    def run(node: ChecksumExpr) -> float:
        if isinstance(node, Term):
            return resolver(node.index)
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Neg):
            return -run(node.operand)
        if node.op == "+":
            return run(node.left) + run(node.right)
        if node.op == "-":
            return run(node.left) - run(node.right)
        if node.op == "*":
            return run(node.left) * run(node.right)
        return _js_divide(run(node.left), run(node.right))

    return run(expr)


def term_indices(expr: ChecksumExpr) -> tuple[int, ...]:
    """Distinct decoder indices referenced by a checksum expression, ascending."""
    found: set[int] = set()
    stack: list[ChecksumExpr] = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Term):
            found.add(node.index)
        elif isinstance(node, Neg):
            stack.append(node.operand)
        elif isinstance(node, Binary):
            stack.append(node.left)
            stack.append(node.right)
    return tuple(sorted(found))


def solve_rotation(model: CanaryModel) -> Optional[ResolutionTable]:
    """Find the rotation count that satisfies the canary, or None when none does.

    At most `len(table)` rotations are tried: rotation is cyclic with period
    `len(table)`, so a loop that no rotation in that range satisfies never
    terminates, which this solver reports as None (unsatisfiable) instead.
    """
    size = len(model.table)
    if size == 0:
        return None
    if isinstance(model.variant, FixedCountShuffle):
        rotation = model.variant.count % size
        return ResolutionTable(
            base=model.base, rotation=rotation, entries=model.table.rotated(rotation)
        )
    for rotation in range(size):
        value = evaluate_checksum(model.variant.expr, model.table, rotation, model.base)
        if value == model.variant.target:  # exact double equality, as `===` would see it
            return ResolutionTable(
                base=model.base, rotation=rotation, entries=model.table.rotated(rotation)
            )
    return None


def resolve(entries: Sequence[str], base: int, index: int) -> str:
    """String at decoder `index` in a solved (canonical-order) table."""
    slot = index - base
    if not 0 <= slot < len(entries):
        raise IndexOutOfRange(
            f"index {index:#x} outside [{base:#x}, {base + len(entries):#x})"
        )
    return entries[slot]
