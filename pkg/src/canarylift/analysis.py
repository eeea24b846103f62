"""Structural analysis passes used to locate the decoder, the string table, and the canary IIFE."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import syntax
from .errors import OffsetConflict, OffsetNotFound, ParseError
from .syntax import (
    ArrayExpression,
    ArrowFunctionExpression,
    AssignmentExpression,
    BinaryExpression,
    BlockStatement,
    CallExpression,
    CatchClause,
    FunctionDeclaration,
    FunctionExpression,
    Identifier,
    MemberExpression,
    Node,
    NumericLiteral,
    Span,
    StringLiteral,
    SyntaxTree,
    VariableDeclarator,
    iter_child_nodes,
    walk,
)

__all__ = [
    "IifeExtract",
    "SymbolInventory",
    "ArrayCandidate",
    "find_iifes",
    "inventory_symbols",
    "filter_closed_functions",
    "reassignment_census",
    "most_reassigned_variable",
    "find_function_definition",
    "largest_string_array",
    "decoder_aliases",
    "decoder_base_offset",
    "offset_range",
]

_FUNCTION_KINDS = (FunctionDeclaration, FunctionExpression, ArrowFunctionExpression)


@dataclass(frozen=True)
class IifeExtract:
    """One immediately invoked function, captured as standalone text."""

    text: str
    span: Span
    callee_kind: str  # "FunctionExpression" | "ArrowFunctionExpression"
    argument_spans: tuple[Span, ...]


def find_iifes(tree: SyntaxTree) -> list[IifeExtract]:
    """Find calls whose callee is a function or arrow expression, in source order.

    The captured span is widened by one byte on the left when the call sits
    inside a wrapping parenthesis and one byte on the right over a trailing
    ';' or ')', so the extracted text always reparses as a single
    expression statement.
    """
    source = tree.source
    found: list[IifeExtract] = []
    for node in walk(tree.root):
        if not isinstance(node, CallExpression):
            continue
        if not isinstance(node.callee, (FunctionExpression, ArrowFunctionExpression)):
            continue
        start, end = node.span.start, node.span.end
        if start > 0 and source[start - 1] == "(":
            start -= 1
        if end < len(source) and source[end] in ");":
            end += 1
        span = Span(start, end)
        found.append(
            IifeExtract(
                text=source[start:end],
                span=span,
                callee_kind=type(node.callee).__name__,
                argument_spans=tuple(arg.span for arg in node.arguments),
            )
        )
    return found


@dataclass(frozen=True)
class SymbolInventory:
    """Names defined at any scope: declared functions and declared variables."""

    functions: tuple[str, ...]
    variables: tuple[str, ...]


def inventory_symbols(tree: SyntaxTree) -> SymbolInventory:
    """Collect defined function and variable names, first occurrence first, no duplicates.

    A declarator initialized with a function or arrow expression counts as
    both a variable and a function definition.
    """
    functions: list[str] = []
    variables: list[str] = []
    seen_fn: set[str] = set()
    seen_var: set[str] = set()
    for node in walk(tree.root):
        if isinstance(node, FunctionDeclaration):
            if node.id.name not in seen_fn:
                seen_fn.add(node.id.name)
                functions.append(node.id.name)
        elif isinstance(node, VariableDeclarator):
            if node.id.name not in seen_var:
                seen_var.add(node.id.name)
                variables.append(node.id.name)
            if isinstance(node.init, (FunctionExpression, ArrowFunctionExpression)):
                if node.id.name not in seen_fn:
                    seen_fn.add(node.id.name)
                    functions.append(node.id.name)
    return SymbolInventory(tuple(functions), tuple(variables))


def _local_names(fn: Node) -> set[str]:
    """Names bound anywhere inside a function: params, declarators, nested functions, catch params."""
    names: set[str] = set()
    stack = [fn]
    while stack:
        node = stack.pop()
        if isinstance(node, _FUNCTION_KINDS):
            for param in node.params:
                names.add(param.name)
            ident = getattr(node, "id", None)
            if ident is not None:
                names.add(ident.name)
        elif isinstance(node, VariableDeclarator):
            names.add(node.id.name)
        elif isinstance(node, CatchClause) and node.param is not None:
            names.add(node.param.name)
        stack.extend(iter_child_nodes(node))
    return names


def _identifier_references(node: Node):
    """Yield identifiers used as references, skipping defining and property positions."""
    if isinstance(node, Identifier):
        yield node
        return
    if isinstance(node, _FUNCTION_KINDS):
        yield from _identifier_references(node.body)
        return
    if isinstance(node, VariableDeclarator):
        if node.init is not None:
            yield from _identifier_references(node.init)
        return
    if isinstance(node, MemberExpression):
        yield from _identifier_references(node.object)
        if node.computed:
            yield from _identifier_references(node.property)
        return
    if isinstance(node, CatchClause):
        yield from _identifier_references(node.body)
        return
    for child in iter_child_nodes(node):
        yield from _identifier_references(child)


def filter_closed_functions(
    tree: SyntaxTree, inventory: SymbolInventory
) -> list[tuple[str, str]]:
    """Keep declared functions whose every referenced identifier is accounted for.

    A reference is valid when it names an inventoried function or variable, a
    parameter or local of the function under test (at any nesting depth), or a
    nested function. Functions touching anything else, such as host globals,
    are excluded. Returns (name, source text) pairs in source order.
    """
    defined = set(inventory.functions) | set(inventory.variables)
    result: list[tuple[str, str]] = []
    for node in walk(tree.root):
        if not isinstance(node, FunctionDeclaration):
            continue
        valid = defined | _local_names(node)
        if all(ident.name in valid for ident in _identifier_references(node.body)):
            result.append((node.id.name, tree.slice(node.span)))
    return result


def reassignment_census(tree: SyntaxTree) -> dict[str, int]:
    """Count, per identifier, how often it appears as the right side of a binding.

    Both declarator initializers (`const h = a0A`) and plain assignments
    (`h = a0A`) count toward the census of the right-hand name.
    """
    counts: dict[str, int] = {}
    for node in walk(tree.root):
        if isinstance(node, VariableDeclarator) and isinstance(node.init, Identifier):
            counts[node.init.name] = counts.get(node.init.name, 0) + 1
        elif isinstance(node, AssignmentExpression) and isinstance(node.right, Identifier):
            counts[node.right.name] = counts.get(node.right.name, 0) + 1
    return counts


def most_reassigned_variable(tree: SyntaxTree) -> Optional[tuple[str, int]]:
    """Name rebound to other identifiers most often, with its count; None if none is.

    Ties resolve to the name whose first counted occurrence comes earliest.
    """
    counts: dict[str, int] = {}
    best: Optional[str] = None
    for node in walk(tree.root):
        name = None
        if isinstance(node, VariableDeclarator) and isinstance(node.init, Identifier):
            name = node.init.name
        elif isinstance(node, AssignmentExpression) and isinstance(node.right, Identifier):
            name = node.right.name
        if name is None:
            continue
        counts[name] = counts.get(name, 0) + 1
        if best is None or counts[name] > counts[best]:
            best = name
    if best is None:
        return None
    return best, counts[best]


def find_function_definition(tree: SyntaxTree, name: str) -> Optional[str]:
    """Source text defining `name`: a function declaration or an initialized declarator.

    The declarator slice starts at the declared name, not the `var`/`let`/
    `const` keyword. When several definitions exist the last one in traversal
    order wins.
    """
    found: Optional[str] = None
    for node in walk(tree.root):
        if isinstance(node, FunctionDeclaration) and node.id.name == name:
            found = tree.slice(node.span)
        elif (
            isinstance(node, VariableDeclarator)
            and node.id.name == name
            and node.init is not None
        ):
            found = tree.slice(node.span)
    return found


@dataclass(frozen=True)
class ArrayCandidate:
    """An array literal whose elements are all string literals."""

    elements: tuple[str, ...]
    span: Span
    element_spans: tuple[Span, ...]
    owner_function: Optional[str]

    @property
    def length(self) -> int:
        return len(self.elements)


def _string_arrays(node: Node, owner: Optional[str], out: list[ArrayCandidate]) -> None:
    if isinstance(node, ArrayExpression):
        if node.elements and all(isinstance(el, StringLiteral) for el in node.elements):
            out.append(
                ArrayCandidate(
                    elements=tuple(el.value for el in node.elements),
                    span=node.span,
                    element_spans=tuple(el.span for el in node.elements),
                    owner_function=owner,
                )
            )
    next_owner = owner
    if isinstance(node, FunctionDeclaration):
        next_owner = node.id.name
    elif isinstance(node, FunctionExpression):
        next_owner = node.id.name if node.id is not None else None
    elif isinstance(node, ArrowFunctionExpression):
        next_owner = None
    elif isinstance(node, VariableDeclarator) and isinstance(
        node.init, (FunctionExpression, ArrowFunctionExpression)
    ):
        for child in iter_child_nodes(node.init):
            _string_arrays(child, node.id.name, out)
        return
    elif isinstance(node, AssignmentExpression) and (
        isinstance(node.left, Identifier)
        and isinstance(node.right, (FunctionExpression, ArrowFunctionExpression))
    ):
        for child in iter_child_nodes(node.right):
            _string_arrays(child, node.left.name, out)
        return
    for child in iter_child_nodes(node):
        _string_arrays(child, next_owner, out)


def largest_string_array(tree: SyntaxTree) -> Optional[ArrayCandidate]:
    """The all-string array literal with the most elements; earliest wins ties.

    Arrays with no elements or any non-string element are not candidates.
    """
    candidates: list[ArrayCandidate] = []
    _string_arrays(tree.root, None, candidates)
    best: Optional[ArrayCandidate] = None
    for candidate in candidates:
        if best is None or candidate.length > best.length:
            best = candidate
    return best


def decoder_aliases(tree: SyntaxTree, decoder_name: str, max_depth: int = 8) -> set[str]:
    """Names reaching `decoder_name` through chains of identifier declarators.

    Includes the decoder itself. Chains longer than `max_depth` hops are cut
    off; cycles terminate naturally because known names are never re-added.
    """
    links: list[tuple[str, str]] = []
    for node in walk(tree.root):
        if isinstance(node, VariableDeclarator) and isinstance(node.init, Identifier):
            links.append((node.id.name, node.init.name))

    known = {decoder_name}
    frontier = {decoder_name}
    for _ in range(max_depth):
        frontier = {
            name for name, init in links if init in frontier and name not in known
        }
        if not frontier:
            break
        known.update(frontier)
    return known


def _subtraction_offset(decoder_text: str) -> Optional[int]:
    """First `firstParam - K` constant found inside the decoder text, if any."""
    try:
        decoder_tree = syntax.parse(decoder_text)
    except ParseError:
        decoder_tree = syntax.parse(f"const {decoder_text};")

    def scan(node: Node, first_param: Optional[str]) -> Optional[int]:
        if isinstance(node, _FUNCTION_KINDS):
            inner = node.params[0].name if node.params else None
            for child in iter_child_nodes(node):
                hit = scan(child, inner)
                if hit is not None:
                    return hit
            return None
        if (
            isinstance(node, BinaryExpression)
            and node.op == "-"
            and isinstance(node.left, Identifier)
            and first_param is not None
            and node.left.name == first_param
            and isinstance(node.right, NumericLiteral)
            and float(node.right.value).is_integer()
        ):
            return int(node.right.value)
        for child in iter_child_nodes(node):
            hit = scan(child, first_param)
            if hit is not None:
                return hit
        return None

    return scan(decoder_tree.root, None)


def _call_site_minimum(tree: SyntaxTree, names: set[str]) -> Optional[int]:
    """Smallest integral literal passed to any call whose callee is in `names`."""
    minimum: Optional[int] = None
    for node in walk(tree.root):
        if not isinstance(node, CallExpression):
            continue
        if not (isinstance(node.callee, Identifier) and node.callee.name in names):
            continue
        for arg in node.arguments:
            if isinstance(arg, NumericLiteral) and float(arg.value).is_integer():
                value = int(arg.value)
                if minimum is None or value < minimum:
                    minimum = value
    return minimum


def decoder_base_offset(decoder_text: str, tree: SyntaxTree, decoder_name: str) -> int:
    """Base offset the decoder subtracts before indexing its table.

    The structural `param - K` subtraction inside the decoder is
    authoritative; the minimum integral literal across decoder call sites is
    the fallback when no subtraction exists. A call-site minimum below the
    structural constant indicates the decoder and the call sites disagree and
    raises OffsetConflict; a minimum above it merely means the lowest indices
    are never referenced.
    """
    structural = _subtraction_offset(decoder_text)
    call_minimum = _call_site_minimum(tree, decoder_aliases(tree, decoder_name))
    if structural is None and call_minimum is None:
        raise OffsetNotFound(f"no base offset discoverable for decoder {decoder_name!r}")
    if structural is None:
        return call_minimum
    if call_minimum is not None and call_minimum < structural:
        raise OffsetConflict(
            f"decoder {decoder_name!r} subtracts {structural:#x} but a call site uses "
            f"{call_minimum:#x}"
        )
    return structural


def offset_range(base: int, array: ArrayCandidate) -> tuple[int, int]:
    """Half-open index range [base, base + len) served by the decoder."""
    return base, base + array.length
