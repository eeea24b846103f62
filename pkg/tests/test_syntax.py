"""Tokenizer and parser behavior: spans, literal duality, subset boundaries."""

from __future__ import annotations

import random

import pytest

from canarylift import syntax
from canarylift.errors import LexError, ParseError, RangeError
from canarylift.syntax import (
    ArrayExpression,
    ArrowFunctionExpression,
    AssignmentExpression,
    BinaryExpression,
    BooleanLiteral,
    CallExpression,
    ExpressionStatement,
    FunctionDeclaration,
    FunctionExpression,
    Identifier,
    MemberExpression,
    NumericLiteral,
    Span,
    StringLiteral,
    TryStatement,
    UnaryExpression,
    VariableDeclaration,
    WhileStatement,
    decode_numeric_raw,
    iter_child_nodes,
    parse,
    structurally_equal,
    tokenize,
    walk,
)


def test_tokenize_hex_number_keeps_raw_and_value():
    tokens = tokenize("0x6f0ff")
    assert tokens[0].kind == "number"
    assert tokens[0].text == "0x6f0ff"
    assert tokens[0].value == 454911.0


def test_tokenize_string_value_decodes():
    tokens = tokenize('"763343ZEEmqI"')
    assert tokens[0].kind == "string"
    assert tokens[0].value == "763343ZEEmqI"


def test_tokenize_double_bang_brackets():
    kinds = [(t.kind, t.text) for t in tokenize("!![]") if t.kind != "eof"]
    assert kinds == [("punct", "!"), ("punct", "!"), ("punct", "["), ("punct", "]")]


def test_tokenize_empty_input_is_just_eof():
    tokens = tokenize("")
    assert len(tokens) == 1
    assert tokens[0].kind == "eof"


def test_tokens_cover_input_except_whitespace_and_comments():
    source = "const a = 1; // trailing\nfunction f(x) { return x + 0x1f; } /* block */\n"
    tokens, comments = syntax._tokenize_full(source)
    covered = [False] * len(source)
    for token in tokens:
        for i in range(token.span.start, token.span.end):
            covered[i] = True
    for span in comments:
        for i in range(span.start, span.end):
            covered[i] = True
    for i, ch in enumerate(source):
        if not covered[i]:
            assert ch in syntax._WHITESPACE, f"byte {i} ({ch!r}) uncovered"


def test_token_spans_slice_to_lexemes():
    source = "while (x <= 0xff) { q['push'](q['shift']()); }"
    for token in tokenize(source):
        if token.kind != "eof":
            assert source[token.span.start : token.span.end] == token.text


def test_lex_error_unterminated_string_has_offset():
    with pytest.raises(LexError) as info:
        tokenize('const s = "oops')
    assert info.value.offset == 10


def test_lex_error_illegal_character():
    with pytest.raises(LexError):
        tokenize("a # b")


def test_lex_error_template_literal():
    with pytest.raises(LexError) as info:
        tokenize("const t = `x`;")
    assert "template" in str(info.value)


def test_numeric_raw_value_duality():
    rng = random.Random(5)
    for _ in range(50):
        value = rng.randint(0, 2**40)
        for raw in (str(value), hex(value)):
            tree = parse(f"const x = {raw};")
            literal = tree.root.body[0].declarations[0].init
            assert isinstance(literal, NumericLiteral)
            assert literal.raw == raw
            assert literal.value == float(value)
            assert decode_numeric_raw(literal.raw) == literal.value


def test_parse_variable_declaration_multi_declarator():
    tree = parse("const h = a0A,\n    E = u();")
    decl = tree.root.body[0]
    assert isinstance(decl, VariableDeclaration)
    assert decl.kind == "const"
    assert [d.id.name for d in decl.declarations] == ["h", "E"]
    assert isinstance(decl.declarations[0].init, Identifier)
    assert isinstance(decl.declarations[1].init, CallExpression)


def test_parse_computed_member_rotation_statement():
    tree = parse('E["push"](E["shift"]());')
    call = tree.root.body[0].expression
    assert isinstance(call, CallExpression)
    assert isinstance(call.callee, MemberExpression)
    assert call.callee.computed
    assert isinstance(call.callee.property, StringLiteral)
    assert call.callee.property.value == "push"
    inner = call.arguments[0]
    assert isinstance(inner, CallExpression)
    assert inner.callee.property.value == "shift"


def test_parse_dotted_member_not_computed():
    tree = parse("label.length;")
    member = tree.root.body[0].expression
    assert isinstance(member, MemberExpression)
    assert not member.computed
    assert member.property.name == "length"


def test_parse_unary_minus_binds_tighter_than_divide():
    tree = parse("-parseInt(h(0x15b)) / 0x5;")
    expr = tree.root.body[0].expression
    assert isinstance(expr, BinaryExpression)
    assert expr.op == "/"
    assert isinstance(expr.left, UnaryExpression)
    assert expr.left.op == "-"


def test_parse_prefix_and_postfix_updates():
    tree = parse("e(++d); f--;")
    prefix = tree.root.body[0].expression.arguments[0]
    assert isinstance(prefix, UnaryExpression)
    assert prefix.op == "++" and prefix.prefix
    postfix = tree.root.body[1].expression
    assert isinstance(postfix, UnaryExpression)
    assert postfix.op == "--" and not postfix.prefix


def test_parse_arrow_function_forms():
    tree = parse("const d = (i) => tbl[i]; const g = x => x;")
    arrow = tree.root.body[0].declarations[0].init
    assert isinstance(arrow, ArrowFunctionExpression)
    assert [p.name for p in arrow.params] == ["i"]
    assert isinstance(arrow.body, MemberExpression)
    bare = tree.root.body[1].declarations[0].init
    assert isinstance(bare, ArrowFunctionExpression)
    assert [p.name for p in bare.params] == ["x"]


def test_parse_array_trailing_comma():
    tree = parse('const h = [ "a", "b", ];')
    array = tree.root.body[0].declarations[0].init
    assert isinstance(array, ArrayExpression)
    assert [el.value for el in array.elements] == ["a", "b"]


def test_parse_boolean_and_empty_array_condition():
    tree = parse("while (!![]) { break; }")
    loop = tree.root.body[0]
    assert isinstance(loop, WhileStatement)
    outer = loop.test
    assert isinstance(outer, UnaryExpression) and outer.op == "!"
    inner = outer.operand
    assert isinstance(inner, UnaryExpression) and inner.op == "!"
    assert isinstance(inner.operand, ArrayExpression)
    assert inner.operand.elements == ()


def test_parse_try_catch_and_if_else():
    tree = parse("try { if (D === A) break; else x = 1; } catch (v) { y = 2; }")
    statement = tree.root.body[0]
    assert isinstance(statement, TryStatement)
    assert statement.handler.param.name == "v"


@pytest.mark.parametrize(
    "source",
    [
        "for (;;) {}",
        "class Q {}",
        "const x = /re/;",
        "async function f() {}",
        "new Thing();",
        "switch (x) {}",
        "try { x; } finally { y; }",
    ],
)
def test_parse_error_unsupported_constructs(source):
    with pytest.raises(ParseError) as info:
        parse(source)
    assert "unsupported" in str(info.value) or "unexpected" in str(info.value)


def test_parse_error_carries_span():
    with pytest.raises(ParseError) as info:
        parse("const = 1;")
    assert info.value.span is not None


def test_automatic_semicolons_at_newlines():
    tree = parse("const a = 1\nconst b = 2\nreturn")
    assert len(tree.root.body) == 3


def test_missing_semicolon_same_line_is_an_error():
    with pytest.raises(ParseError):
        parse("const a = 1 const b = 2;")


def test_slice_whole_program_identity(alias_iife_source):
    tree = parse(alias_iife_source)
    assert tree.slice(tree.root.span) == alias_iife_source


def test_slice_zero_width_and_out_of_bounds():
    tree = parse("x;")
    assert tree.slice(Span(1, 1)) == ""
    with pytest.raises(RangeError):
        tree.slice(Span(0, 99))
    with pytest.raises(RangeError):
        tree.slice(Span(-1, 1))


def test_every_node_slices_to_its_exact_text(alias_iife_source):
    tree = parse(alias_iife_source)
    for node in walk(tree.root):
        text = tree.slice(node.span)
        assert text == alias_iife_source[node.span.start : node.span.end]
        if isinstance(node, NumericLiteral):
            assert text == node.raw


def test_child_spans_nest_within_parents(alias_iife_source):
    tree = parse(alias_iife_source)
    for node in walk(tree.root):
        for child in iter_child_nodes(node):
            assert node.span.start <= child.span.start
            assert child.span.end <= node.span.end


def test_walk_visits_each_node_once(alias_iife_source):
    tree = parse(alias_iife_source)
    seen = list(walk(tree.root))
    assert len(seen) == len(set(map(id, seen)))


def test_call_on_parenthesized_callee_spans_the_paren():
    source = "(function () {})(x);"
    tree = parse(source)
    call = tree.root.body[0].expression
    assert isinstance(call, CallExpression)
    assert tree.slice(call.span) == "(function () {})(x)"
    assert isinstance(call.callee, FunctionExpression)


def test_call_inside_wrapper_paren_spans_the_call_only():
    source = "(function () {}(x));"
    tree = parse(source)
    call = tree.root.body[0].expression
    assert isinstance(call, CallExpression)
    assert tree.slice(call.span) == "function () {}(x)"


def test_function_declaration_reparses_structurally(alias_iife_source):
    source = (
        "function a0A(u, A) {\n"
        "    const E = a0u();\n"
        "    a0A = function (D, v) {\n"
        "        D = D - 0x151;\n"
        "        const x = E[D];\n"
        "        return x;\n"
        "    };\n"
        "    return a0A(u, A);\n"
        "}\n" + alias_iife_source
    )
    tree = parse(source)
    for node in walk(tree.root):
        if isinstance(node, (FunctionDeclaration, ExpressionStatement)):
            again = parse(tree.slice(node.span))
            assert len(again.root.body) == 1
            assert structurally_equal(again.root.body[0], node)


def test_comment_spans_are_retained():
    source = "// header\nconst a = 1; /* mid */ const b = 2;\n"
    tree = parse(source)
    assert [tree.source[s.start : s.end] for s in tree.comments] == [
        "// header",
        "/* mid */",
    ]


def test_assignment_targets_validated():
    parse("a = 1; a0A = function (x) { return x; }; q[0] = 2;")
    with pytest.raises(ParseError):
        parse("1 = 2;")


def test_paper_listings_parse(alias_iife_source, inline_table_source, shuffle_source):
    for source in (alias_iife_source, inline_table_source, shuffle_source):
        tree = parse(source)
        assert len(tree.root.body) == 1
        statement = tree.root.body[0]
        assert isinstance(statement, ExpressionStatement)
        assert isinstance(statement.expression, CallExpression)


def test_string_escape_decoding():
    tree = parse(r'const s = "a\tbA\x42\\\"";')
    literal = tree.root.body[0].declarations[0].init
    assert literal.value == 'a\tbAB\\"'


def test_equality_and_relational_precedence():
    tree = parse("a < b === c;")
    expr = tree.root.body[0].expression
    assert isinstance(expr, BinaryExpression)
    assert expr.op == "==="
    assert isinstance(expr.left, BinaryExpression)
    assert expr.left.op == "<"


def test_boolean_literals():
    tree = parse("while (true) { break; } const f = false;")
    assert isinstance(tree.root.body[0].test, BooleanLiteral)
    assert tree.root.body[1].declarations[0].init.value is False
