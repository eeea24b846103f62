"""Tokenizer, parser, and spanned syntax tree for the JavaScript subset found in canaried files.

Every node carries a byte span into the original source so later passes can
quote, measure, and rewrite text without a pretty-printer. Span conventions
follow the widely used ESTree tooling: a call on a parenthesized callee starts
at the opening parenthesis, parenthesized expressions are transparent (the
inner node is returned unchanged), and statement spans include their
terminating semicolon when one is present.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .errors import LexError, ParseError, RangeError

__all__ = [
    "Span",
    "Token",
    "Node",
    "Identifier",
    "StringLiteral",
    "NumericLiteral",
    "BooleanLiteral",
    "ArrayExpression",
    "CallExpression",
    "MemberExpression",
    "AssignmentExpression",
    "BinaryExpression",
    "UnaryExpression",
    "FunctionDeclaration",
    "FunctionExpression",
    "ArrowFunctionExpression",
    "VariableDeclaration",
    "VariableDeclarator",
    "BlockStatement",
    "ExpressionStatement",
    "IfStatement",
    "WhileStatement",
    "TryStatement",
    "CatchClause",
    "ReturnStatement",
    "BreakStatement",
    "Program",
    "SyntaxTree",
    "tokenize",
    "parse",
    "walk",
    "iter_child_nodes",
    "structurally_equal",
    "decode_numeric_raw",
]


@dataclass(frozen=True, order=True)
class Span:
    """Half-open byte range [start, end) into a source string."""

    start: int
    end: int

    def __len__(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Token:
    kind: str  # "name" | "number" | "string" | "punct" | "eof"
    text: str
    value: object
    span: Span
    newline_before: bool


@dataclass(frozen=True)
class Node:
    span: Span


@dataclass(frozen=True)
class Identifier(Node):
    name: str


@dataclass(frozen=True)
class StringLiteral(Node):
    value: str


@dataclass(frozen=True)
class NumericLiteral(Node):
    # Raw lexeme is kept alongside the double value: reports and offset
    # discovery care about the number, rewriting cares about the exact text.
    value: float
    raw: str


@dataclass(frozen=True)
class BooleanLiteral(Node):
    value: bool


@dataclass(frozen=True)
class ArrayExpression(Node):
    elements: tuple[Node, ...]


@dataclass(frozen=True)
class CallExpression(Node):
    callee: Node
    arguments: tuple[Node, ...]


@dataclass(frozen=True)
class MemberExpression(Node):
    object: Node
    property: Node
    computed: bool


@dataclass(frozen=True)
class AssignmentExpression(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class BinaryExpression(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class UnaryExpression(Node):
    # Covers prefix !, -, ++, -- and postfix ++, --.
    op: str
    operand: Node
    prefix: bool


@dataclass(frozen=True)
class BlockStatement(Node):
    body: tuple[Node, ...]


@dataclass(frozen=True)
class FunctionDeclaration(Node):
    id: Identifier
    params: tuple[Identifier, ...]
    body: BlockStatement


@dataclass(frozen=True)
class FunctionExpression(Node):
    id: Optional[Identifier]
    params: tuple[Identifier, ...]
    body: BlockStatement


@dataclass(frozen=True)
class ArrowFunctionExpression(Node):
    params: tuple[Identifier, ...]
    body: Node  # BlockStatement or a bare expression


@dataclass(frozen=True)
class VariableDeclarator(Node):
    id: Identifier
    init: Optional[Node]


@dataclass(frozen=True)
class VariableDeclaration(Node):
    kind: str  # "var" | "let" | "const"
    declarations: tuple[VariableDeclarator, ...]


@dataclass(frozen=True)
class ExpressionStatement(Node):
    expression: Node


@dataclass(frozen=True)
class IfStatement(Node):
    test: Node
    consequent: Node
    alternate: Optional[Node]


@dataclass(frozen=True)
class WhileStatement(Node):
    test: Node
    body: Node


@dataclass(frozen=True)
class CatchClause(Node):
    param: Optional[Identifier]
    body: BlockStatement


@dataclass(frozen=True)
class TryStatement(Node):
    block: BlockStatement
    handler: CatchClause


@dataclass(frozen=True)
class ReturnStatement(Node):
    argument: Optional[Node]


@dataclass(frozen=True)
class BreakStatement(Node):
    pass


@dataclass(frozen=True)
class Program(Node):
    body: tuple[Node, ...]


def iter_child_nodes(node: Node) -> Iterator[Node]:
    """Yield the direct child nodes of `node` in field order."""
    for f in dataclasses.fields(node):
        if f.name == "span":
            continue
        value = getattr(node, f.name)
        if isinstance(value, Node):
            yield value
        elif isinstance(value, tuple):
            for item in value:
                if isinstance(item, Node):
                    yield item


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal; visits every node exactly once, outermost first."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(list(iter_child_nodes(current))))


def structurally_equal(a: Node, b: Node) -> bool:
    """Compare two trees ignoring spans."""
    if type(a) is not type(b):
        return False
    for f in dataclasses.fields(a):
        if f.name == "span":
            continue
        va, vb = getattr(a, f.name), getattr(b, f.name)
        if isinstance(va, Node) or isinstance(vb, Node):
            if not (isinstance(va, Node) and isinstance(vb, Node)):
                return False
            if not structurally_equal(va, vb):
                return False
        elif isinstance(va, tuple) and isinstance(vb, tuple):
            if len(va) != len(vb):
                return False
            for ia, ib in zip(va, vb):
                if isinstance(ia, Node) and isinstance(ib, Node):
                    if not structurally_equal(ia, ib):
                        return False
                elif ia != ib:
                    return False
        elif va != vb:
            return False
    return True


@dataclass(frozen=True)
class SyntaxTree:
    root: Program
    source: str
    comments: tuple[Span, ...]

    def slice(self, span: Span) -> str:
        """Return the exact source text under `span`."""
        if span.start < 0 or span.end > len(self.source) or span.start > span.end:
            raise RangeError(
                f"span {span.start}..{span.end} outside source of length {len(self.source)}"
            )
        return self.source[span.start : span.end]


# ECMAScript WhiteSpace plus LineTerminator characters.
_LINE_TERMINATORS = "\n\r  "
_WHITESPACE = (
    "\t\v\f  ﻿        "
    "      　" + _LINE_TERMINATORS
)

_PUNCTUATORS = (
    "===", "!==",
    "=>", "==", "!=", "<=", ">=", "++", "--",
    "(", ")", "[", "]", "{", "}", ";", ",", ".", ":", "?",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "&", "|", "^", "~",
)

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f", "v": "\v", "0": "\0"}


def _is_ident_start(ch: str) -> bool:
    return ch.isascii() and (ch.isalpha() or ch in "$_")


def _is_ident_part(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch in "$_")


def decode_numeric_raw(raw: str) -> float:
    """Recover the double encoded by a numeric lexeme."""
    if raw[:2] in ("0x", "0X"):
        try:
            return float(int(raw, 16))
        except OverflowError:
            return float("inf")
    return float(raw)


def _tokenize_full(source: str) -> tuple[list[Token], list[Span]]:
    tokens: list[Token] = []
    comments: list[Span] = []
    i = 0
    n = len(source)
    newline = False
    while i < n:
        ch = source[i]
        if ch in _WHITESPACE:
            if ch in _LINE_TERMINATORS:
                newline = True
            i += 1
            continue
        if ch == "/" and i + 1 < n and source[i + 1] == "/":
            start = i
            while i < n and source[i] not in _LINE_TERMINATORS:
                i += 1
            comments.append(Span(start, i))
            continue
        if ch == "/" and i + 1 < n and source[i + 1] == "*":
            start = i
            end = source.find("*/", i + 2)
            if end < 0:
                raise LexError("unterminated comment", start)
            if any(c in _LINE_TERMINATORS for c in source[start : end + 2]):
                newline = True
            i = end + 2
            comments.append(Span(start, i))
            continue
        start = i
        if ch in "'\"":
            quote = ch
            i += 1
            parts: list[str] = []
            while True:
                if i >= n or source[i] in _LINE_TERMINATORS:
                    raise LexError("unterminated string literal", start)
                c = source[i]
                if c == quote:
                    i += 1
                    break
                if c == "\\":
                    i += 1
                    if i >= n:
                        raise LexError("unterminated string literal", start)
                    e = source[i]
                    if e in _LINE_TERMINATORS:
                        i += 1  # line continuation contributes nothing
                        continue
                    if e == "x":
                        hexits = source[i + 1 : i + 3]
                        if len(hexits) != 2 or not all(h in "0123456789abcdefABCDEF" for h in hexits):
                            raise LexError("invalid \\x escape", i - 1)
                        parts.append(chr(int(hexits, 16)))
                        i += 3
                        continue
                    if e == "u":
                        hexits = source[i + 1 : i + 5]
                        if len(hexits) != 4 or not all(h in "0123456789abcdefABCDEF" for h in hexits):
                            raise LexError("invalid \\u escape", i - 1)
                        parts.append(chr(int(hexits, 16)))
                        i += 5
                        continue
                    parts.append(_ESCAPES.get(e, e))
                    i += 1
                    continue
                parts.append(c)
                i += 1
            tokens.append(Token("string", source[start:i], "".join(parts), Span(start, i), newline))
            newline = False
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            if ch == "0" and i + 1 < n and source[i + 1] in "xX":
                i += 2
                digits = i
                while i < n and source[i] in "0123456789abcdefABCDEF":
                    i += 1
                if i == digits:
                    raise LexError("hex literal needs digits", start)
            else:
                if ch == "0" and i + 1 < n and source[i + 1] in "bBoO":
                    raise LexError("unsupported numeric literal prefix", start)
                while i < n and source[i].isdigit():
                    i += 1
                if i < n and source[i] == ".":
                    i += 1
                    while i < n and source[i].isdigit():
                        i += 1
                if i < n and source[i] in "eE":
                    i += 1
                    if i < n and source[i] in "+-":
                        i += 1
                    digits = i
                    while i < n and source[i].isdigit():
                        i += 1
                    if i == digits:
                        raise LexError("exponent needs digits", start)
            if i < n and _is_ident_start(source[i]):
                raise LexError("identifier starts immediately after numeric literal", i)
            raw = source[start:i]
            tokens.append(Token("number", raw, decode_numeric_raw(raw), Span(start, i), newline))
            newline = False
            continue
        if _is_ident_start(ch):
            i += 1
            while i < n and _is_ident_part(source[i]):
                i += 1
            tokens.append(Token("name", source[start:i], None, Span(start, i), newline))
            newline = False
            continue
        if ch == "`":
            raise LexError("unsupported construct: template literal", i)
        for punct in _PUNCTUATORS:
            if source.startswith(punct, i):
                i += len(punct)
                tokens.append(Token("punct", punct, None, Span(start, i), newline))
                newline = False
                break
        else:
            raise LexError(f"illegal character {ch!r}", i)
    tokens.append(Token("eof", "", None, Span(n, n), newline))
    return tokens, comments


def tokenize(source: str) -> list[Token]:
    """Lex `source` into tokens; whitespace and comments are skipped."""
    tokens, _ = _tokenize_full(source)
    return tokens


# Constructs recognized as keywords but outside the supported subset.
_UNSUPPORTED_WORDS = frozenset(
    {
        "for", "do", "switch", "case", "default", "class", "extends", "super",
        "new", "delete", "typeof", "void", "instanceof", "in", "of", "this",
        "throw", "finally", "continue", "with", "yield", "await", "async",
        "import", "export", "debugger", "null", "undefined",
    }
)

_STATEMENT_WORDS = frozenset(
    {"var", "let", "const", "function", "while", "if", "else", "try", "catch", "return", "break"}
)

_BINARY_PRECEDENCE = {
    "===": 6,
    "!==": 6,
    "<": 7,
    "<=": 7,
    ">": 7,
    ">=": 7,
    "+": 9,
    "-": 9,
    "*": 10,
    "/": 10,
}


class _Parser:
    def __init__(self, source: str, tokens: list[Token]):
        self.source = source
        self.tokens = tokens
        self.pos = 0

    def _cur(self) -> Token:
        return self.tokens[self.pos]

    def _peek(self, ahead: int = 1) -> Token:
        index = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[index]

    def _advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind != "eof":
            self.pos += 1
        return token

    def _at(self, kind: str, text: str | None = None) -> bool:
        token = self._cur()
        return token.kind == kind and (text is None or token.text == text)

    def _expect(self, text: str, what: str | None = None) -> Token:
        token = self._cur()
        if token.kind in ("punct", "name") and token.text == text:
            return self._advance()
        raise ParseError(
            f"unexpected token {token.text!r}" if token.text else "unexpected end of input",
            span=token.span,
            expected=what or repr(text),
        )

    def _unsupported(self, token: Token, what: str):
        raise ParseError(f"unsupported construct: {what}", span=token.span)

    # --- program ---

    def parse_program(self) -> Program:
        body: list[Node] = []
        while not self._at("eof"):
            stmt = self._parse_statement()
            if stmt is not None:
                body.append(stmt)
        return Program(Span(0, len(self.source)), tuple(body))

    # --- statements ---

    def _parse_statement(self) -> Optional[Node]:
        token = self._cur()
        if token.kind == "punct":
            if token.text == "{":
                return self._parse_block()
            if token.text == ";":
                self._advance()
                return None
        if token.kind == "name":
            word = token.text
            if word in ("var", "let", "const"):
                return self._parse_variable_declaration()
            if word == "function":
                return self._parse_function_declaration()
            if word == "while":
                return self._parse_while()
            if word == "if":
                return self._parse_if()
            if word == "try":
                return self._parse_try()
            if word == "return":
                return self._parse_return()
            if word == "break":
                self._advance()
                end = self._consume_semicolon(token.span.end)
                return BreakStatement(Span(token.span.start, end))
            if word == "else":
                raise ParseError("'else' without matching 'if'", span=token.span)
            if word in _UNSUPPORTED_WORDS:
                self._unsupported(token, f"'{word}'")
        expression = self._parse_expression()
        end = self._consume_semicolon(expression.span.end)
        return ExpressionStatement(Span(expression.span.start, end), expression)

    def _consume_semicolon(self, fallback_end: int) -> int:
        """Consume an explicit ';' or accept an automatic one; return the statement end."""
        token = self._cur()
        if token.kind == "punct" and token.text == ";":
            self._advance()
            return token.span.end
        if token.kind == "eof" or (token.kind == "punct" and token.text == "}"):
            return fallback_end
        if token.newline_before:
            return fallback_end
        raise ParseError(
            f"unexpected token {token.text!r}", span=token.span, expected="';'"
        )

    def _parse_block(self) -> BlockStatement:
        open_tok = self._expect("{")
        body: list[Node] = []
        while not self._at("punct", "}"):
            if self._at("eof"):
                raise ParseError("unexpected end of input", span=self._cur().span, expected="'}'")
            stmt = self._parse_statement()
            if stmt is not None:
                body.append(stmt)
        close_tok = self._advance()
        return BlockStatement(Span(open_tok.span.start, close_tok.span.end), tuple(body))

    def _parse_variable_declaration(self) -> VariableDeclaration:
        kind_tok = self._advance()
        declarations: list[VariableDeclarator] = []
        while True:
            name_tok = self._cur()
            ident = self._parse_identifier("variable name")
            init: Optional[Node] = None
            end = ident.span.end
            if self._at("punct", "="):
                self._advance()
                init = self._parse_assignment()
                end = init.span.end
            declarations.append(VariableDeclarator(Span(name_tok.span.start, end), ident, init))
            if self._at("punct", ","):
                self._advance()
                continue
            break
        end = self._consume_semicolon(declarations[-1].span.end)
        return VariableDeclaration(
            Span(kind_tok.span.start, end), kind_tok.text, tuple(declarations)
        )

    def _parse_identifier(self, what: str) -> Identifier:
        token = self._cur()
        if token.kind != "name" or token.text in _UNSUPPORTED_WORDS or token.text in _STATEMENT_WORDS:
            raise ParseError(
                f"unexpected token {token.text!r}" if token.text else "unexpected end of input",
                span=token.span,
                expected=what,
            )
        self._advance()
        return Identifier(token.span, token.text)

    def _parse_params(self) -> tuple[Identifier, ...]:
        self._expect("(")
        params: list[Identifier] = []
        if not self._at("punct", ")"):
            while True:
                params.append(self._parse_identifier("parameter name"))
                if self._at("punct", ","):
                    self._advance()
                    continue
                break
        self._expect(")")
        return tuple(params)

    def _parse_function_declaration(self) -> FunctionDeclaration:
        fn_tok = self._advance()
        ident = self._parse_identifier("function name")
        params = self._parse_params()
        body = self._parse_block()
        return FunctionDeclaration(Span(fn_tok.span.start, body.span.end), ident, params, body)

    def _parse_while(self) -> WhileStatement:
        while_tok = self._advance()
        self._expect("(")
        test = self._parse_expression()
        self._expect(")")
        body = self._parse_statement()
        if body is None:
            body = BlockStatement(Span(self._peek(0).span.start, self._peek(0).span.start), ())
        return WhileStatement(Span(while_tok.span.start, body.span.end), test, body)

    def _parse_if(self) -> IfStatement:
        if_tok = self._advance()
        self._expect("(")
        test = self._parse_expression()
        self._expect(")")
        consequent = self._parse_statement()
        if consequent is None:
            raise ParseError("empty 'if' consequent", span=self._cur().span)
        alternate: Optional[Node] = None
        end = consequent.span.end
        if self._at("name", "else"):
            self._advance()
            alternate = self._parse_statement()
            if alternate is None:
                raise ParseError("empty 'else' branch", span=self._cur().span)
            end = alternate.span.end
        return IfStatement(Span(if_tok.span.start, end), test, consequent, alternate)

    def _parse_try(self) -> TryStatement:
        try_tok = self._advance()
        block = self._parse_block()
        catch_tok = self._cur()
        if not self._at("name", "catch"):
            if self._at("name", "finally"):
                self._unsupported(catch_tok, "'finally'")
            raise ParseError("'try' without 'catch'", span=catch_tok.span, expected="'catch'")
        self._advance()
        param: Optional[Identifier] = None
        if self._at("punct", "("):
            self._advance()
            param = self._parse_identifier("catch parameter")
            self._expect(")")
        body = self._parse_block()
        handler = CatchClause(Span(catch_tok.span.start, body.span.end), param, body)
        return TryStatement(Span(try_tok.span.start, body.span.end), block, handler)

    def _parse_return(self) -> ReturnStatement:
        ret_tok = self._advance()
        token = self._cur()
        argument: Optional[Node] = None
        end = ret_tok.span.end
        no_argument = (
            token.kind == "eof"
            or (token.kind == "punct" and token.text in (";", "}"))
            or token.newline_before
        )
        if not no_argument:
            argument = self._parse_expression()
            end = argument.span.end
        end = self._consume_semicolon(end)
        return ReturnStatement(Span(ret_tok.span.start, end), argument)

    # --- expressions ---

    def _parse_expression(self) -> Node:
        return self._parse_assignment()

    def _parse_assignment(self) -> Node:
        left = self._parse_binary(0)
        if self._at("punct", "="):
            if not isinstance(left, (Identifier, MemberExpression)):
                raise ParseError("invalid assignment target", span=left.span)
            self._advance()
            right = self._parse_assignment()
            return AssignmentExpression(Span(left.span.start, right.span.end), left, right)
        return left

    def _parse_binary(self, min_precedence: int) -> Node:
        left = self._parse_unary()
        while True:
            token = self._cur()
            if token.kind != "punct":
                return left
            precedence = _BINARY_PRECEDENCE.get(token.text)
            if precedence is None or precedence < min_precedence:
                return left
            self._advance()
            right = self._parse_binary(precedence + 1)
            left = BinaryExpression(
                Span(left.span.start, right.span.end), token.text, left, right
            )

    def _parse_unary(self) -> Node:
        token = self._cur()
        if token.kind == "punct":
            if token.text in ("!", "-", "++", "--"):
                self._advance()
                operand = self._parse_unary()
                return UnaryExpression(
                    Span(token.span.start, operand.span.end), token.text, operand, prefix=True
                )
            if token.text == "/":
                self._unsupported(token, "regular expression literal")
        return self._parse_postfix()

    def _parse_postfix(self) -> Node:
        expression = self._parse_call_member()
        token = self._cur()
        if (
            token.kind == "punct"
            and token.text in ("++", "--")
            and not token.newline_before
        ):
            self._advance()
            return UnaryExpression(
                Span(expression.span.start, token.span.end), token.text, expression, prefix=False
            )
        return expression

    def _parse_call_member(self) -> Node:
        # Calls and members chain from the position where the whole expression
        # begins, so a call on a parenthesized callee spans the parenthesis.
        start = self._cur().span.start
        node = self._parse_primary()
        while True:
            token = self._cur()
            if token.kind != "punct":
                return node
            if token.text == ".":
                self._advance()
                prop = self._parse_identifier("property name")
                node = MemberExpression(Span(start, prop.span.end), node, prop, computed=False)
            elif token.text == "[":
                self._advance()
                prop = self._parse_expression()
                close = self._expect("]")
                node = MemberExpression(Span(start, close.span.end), node, prop, computed=True)
            elif token.text == "(":
                self._advance()
                arguments: list[Node] = []
                if not self._at("punct", ")"):
                    while True:
                        arguments.append(self._parse_assignment())
                        if self._at("punct", ","):
                            self._advance()
                            continue
                        break
                close = self._expect(")")
                node = CallExpression(Span(start, close.span.end), node, tuple(arguments))
            else:
                return node

    def _arrow_follows_paren(self) -> bool:
        """Lookahead from an opening '(' to decide arrow parameters vs grouping."""
        depth = 0
        index = self.pos
        while index < len(self.tokens):
            token = self.tokens[index]
            if token.kind == "punct" and token.text == "(":
                depth += 1
            elif token.kind == "punct" and token.text == ")":
                depth -= 1
                if depth == 0:
                    after = self.tokens[index + 1] if index + 1 < len(self.tokens) else None
                    return after is not None and after.kind == "punct" and after.text == "=>"
            elif token.kind == "eof":
                return False
            index += 1
        return False

    def _parse_arrow(self, start: int, params: tuple[Identifier, ...]) -> ArrowFunctionExpression:
        self._expect("=>")
        if self._at("punct", "{"):
            body: Node = self._parse_block()
        else:
            body = self._parse_assignment()
        return ArrowFunctionExpression(Span(start, body.span.end), params, body)

    def _parse_primary(self) -> Node:
        token = self._cur()
        if token.kind == "number":
            self._advance()
            return NumericLiteral(token.span, float(token.value), token.text)
        if token.kind == "string":
            self._advance()
            return StringLiteral(token.span, str(token.value))
        if token.kind == "name":
            word = token.text
            if word == "function":
                return self._parse_function_expression()
            if word in ("true", "false"):
                self._advance()
                return BooleanLiteral(token.span, word == "true")
            if word in _UNSUPPORTED_WORDS:
                self._unsupported(token, f"'{word}'")
            if word in _STATEMENT_WORDS:
                raise ParseError(f"unexpected keyword '{word}'", span=token.span)
            next_tok = self._peek()
            if next_tok.kind == "punct" and next_tok.text == "=>":
                ident = self._parse_identifier("parameter name")
                return self._parse_arrow(token.span.start, (ident,))
            self._advance()
            return Identifier(token.span, word)
        if token.kind == "punct":
            if token.text == "(":
                if self._arrow_follows_paren():
                    self._advance()
                    params: list[Identifier] = []
                    if not self._at("punct", ")"):
                        while True:
                            params.append(self._parse_identifier("parameter name"))
                            if self._at("punct", ","):
                                self._advance()
                                continue
                            break
                    self._expect(")")
                    return self._parse_arrow(token.span.start, tuple(params))
                self._advance()
                inner = self._parse_expression()
                self._expect(")")
                return inner
            if token.text == "[":
                return self._parse_array()
        raise ParseError(
            f"unexpected token {token.text!r}" if token.text else "unexpected end of input",
            span=token.span,
            expected="an expression",
        )

    def _parse_function_expression(self) -> FunctionExpression:
        fn_tok = self._advance()
        ident: Optional[Identifier] = None
        if self._at("name") and not self._at("punct", "("):
            if self._cur().text not in _UNSUPPORTED_WORDS and self._cur().text not in _STATEMENT_WORDS:
                ident = self._parse_identifier("function name")
        params = self._parse_params()
        body = self._parse_block()
        return FunctionExpression(Span(fn_tok.span.start, body.span.end), ident, params, body)

    def _parse_array(self) -> ArrayExpression:
        open_tok = self._advance()
        elements: list[Node] = []
        while not self._at("punct", "]"):
            if self._at("eof"):
                raise ParseError("unexpected end of input", span=self._cur().span, expected="']'")
            if self._at("punct", ","):
                raise ParseError("array holes are not supported", span=self._cur().span)
            elements.append(self._parse_assignment())
            if self._at("punct", ","):
                self._advance()
                continue
            break
        close = self._expect("]")
        return ArrayExpression(Span(open_tok.span.start, close.span.end), tuple(elements))


def parse(source: str) -> SyntaxTree:
    """Parse `source` into a spanned syntax tree."""
    tokens, comments = _tokenize_full(source)
    parser = _Parser(source, tokens)
    root = parser.parse_program()
    return SyntaxTree(root, source, tuple(comments))
