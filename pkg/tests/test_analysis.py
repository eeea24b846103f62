"""Analysis passes: IIFE capture, inventories, census, table and offset discovery."""

from __future__ import annotations

import pytest

from canarylift import analysis, syntax
from canarylift.errors import OffsetConflict, OffsetNotFound
from canarylift.forge import generate
from canarylift.syntax import CallExpression, ExpressionStatement, parse

from conftest import make_manifest


@pytest.fixture(scope="module")
def forged():
    manifest = make_manifest(seed=11, size=14, canary_count=5, rotation=3)
    source, truth = generate(manifest)
    return parse(source), source, truth


def test_find_iifes_alias_listing(alias_iife_source):
    tree = parse(alias_iife_source)
    iifes = analysis.find_iifes(tree)
    assert len(iifes) == 1
    extract = iifes[0]
    assert extract.text.startswith("(function (u, A)")
    assert extract.text.endswith(");")
    assert extract.callee_kind == "FunctionExpression"
    assert [tree.slice(s) for s in extract.argument_spans] == ["a0u", "0x6f0ff"]


def test_find_iifes_shuffle_listing_widens_wrapper_paren(shuffle_source):
    tree = parse(shuffle_source)
    extract = analysis.find_iifes(tree)[0]
    assert extract.text.startswith("(function(c, d)")
    assert extract.text.endswith("(a, 0xea))")
    assert [tree.slice(s) for s in extract.argument_spans] == ["a", "0xea"]


def test_find_iifes_extract_reparses_as_expression_statement(
    alias_iife_source, shuffle_source, inline_table_source
):
    for source in (alias_iife_source, shuffle_source, inline_table_source):
        for extract in analysis.find_iifes(parse(source)):
            again = parse(extract.text)
            assert len(again.root.body) == 1
            assert isinstance(again.root.body[0], ExpressionStatement)
            assert isinstance(again.root.body[0].expression, CallExpression)


def test_find_iifes_ignores_plain_functions_and_calls():
    tree = parse("function f() { return 1; }\nf();\nconst g = () => 2;\n")
    assert analysis.find_iifes(tree) == []


def test_find_iifes_arrow_iife():
    tree = parse("(() => { run(); })();")
    extracts = analysis.find_iifes(tree)
    assert len(extracts) == 1
    assert extracts[0].callee_kind == "ArrowFunctionExpression"


def test_find_iifes_stable_under_whitespace_edits(alias_iife_source):
    baseline = analysis.find_iifes(parse(alias_iife_source))
    padded = "\n\n" + alias_iife_source.replace("    ", "\t")
    edited = analysis.find_iifes(parse(padded))
    assert len(edited) == len(baseline) == 1
    assert [len(e.argument_spans) for e in edited] == [2]


def test_inventory_symbols_mixed_definitions():
    tree = parse("function a0u() { return 1; }\nconst h = () => 1;\nlet x = 2;\n")
    inventory = analysis.inventory_symbols(tree)
    assert inventory.functions == ("a0u", "h")
    assert inventory.variables == ("h", "x")


def test_inventory_symbols_inline_listing(inline_table_source):
    inventory = analysis.inventory_symbols(parse(inline_table_source))
    assert inventory.functions == ()
    assert inventory.variables == ("h", "D")


def test_inventory_symbols_deduplicates_preserving_first():
    tree = parse("var a = 1; var b = 2; var a = 3; function f() { var b = 4; }")
    inventory = analysis.inventory_symbols(tree)
    assert inventory.variables == ("a", "b")
    assert inventory.functions == ("f",)


def test_inventory_symbols_empty_program():
    inventory = analysis.inventory_symbols(parse(""))
    assert inventory == analysis.SymbolInventory((), ())


def test_filter_closed_functions_param_and_global_rules():
    source = (
        "function keep(x) { return x + keep2(x); }\n"
        "function keep2(y) { const z = y; return z; }\n"
        "function leaky() { return atob(payload); }\n"
        "function dotted(q) { return q.length; }\n"
    )
    tree = parse(source)
    inventory = analysis.inventory_symbols(tree)
    names = [name for name, _ in analysis.filter_closed_functions(tree, inventory)]
    assert names == ["keep", "keep2", "dotted"]


def test_filter_closed_functions_nested_function_locals_count():
    source = "function outer() { const inner = function (k) { return k; }; return inner(1); }"
    tree = parse(source)
    inventory = analysis.inventory_symbols(tree)
    names = [name for name, _ in analysis.filter_closed_functions(tree, inventory)]
    assert names == ["outer"]


def test_filter_closed_functions_forged_matches_truth(forged):
    tree, _, truth = forged
    inventory = analysis.inventory_symbols(tree)
    names = [name for name, _ in analysis.filter_closed_functions(tree, inventory)]
    assert tuple(names) == truth.closed_function_names


def test_reassignment_census_counts_both_forms():
    tree = parse("const h = a0A; const k = a0A; b = a0A; const j = other;")
    census = analysis.reassignment_census(tree)
    assert census == {"a0A": 3, "other": 1}


def test_most_reassigned_variable_simple():
    tree = parse("const h = a0A; const k = a0A; b = a0A; const j = other;")
    assert analysis.most_reassigned_variable(tree) == ("a0A", 3)


def test_most_reassigned_variable_none_for_literal_inits():
    tree = parse("const a = 1; const b = [1]; c = f();")
    assert analysis.most_reassigned_variable(tree) is None


def test_most_reassigned_variable_tie_goes_to_earliest():
    tree = parse("const a = x; const b = y; const c = x2; const d = y2;")
    name, count = analysis.most_reassigned_variable(parse("const a = x; const b = y;"))
    assert (name, count) == ("x", 1)


def test_most_reassigned_variable_forged_is_decoder(forged):
    tree, _, truth = forged
    assert analysis.most_reassigned_variable(tree) == (
        truth.decoder_name,
        truth.alias_count,
    )


def test_find_function_definition_forged_decoder(forged):
    tree, _, truth = forged
    text = analysis.find_function_definition(tree, truth.decoder_name)
    assert text == truth.decoder_text
    assert text.startswith(f"function {truth.decoder_name}(")


def test_find_function_definition_declarator_slice():
    tree = parse("const d = (i) => tbl[i];")
    assert analysis.find_function_definition(tree, "d") == "d = (i) => tbl[i]"


def test_find_function_definition_absent_returns_none():
    assert analysis.find_function_definition(parse("const x = 1;"), "nope") is None


def test_find_function_definition_last_definition_wins():
    tree = parse("function f() { return 1; }\nfunction f() { return 2; }")
    assert "return 2" in analysis.find_function_definition(tree, "f")


def test_largest_string_array_inline_listing(inline_table_source):
    array = analysis.largest_string_array(parse(inline_table_source))
    assert array is not None
    assert array.length == 18
    assert array.elements[0] == "763343ZEEmqI"
    assert array.elements[17] == "VALUE_6"


def test_largest_string_array_rejects_mixed_and_empty():
    assert analysis.largest_string_array(parse('const a = ["x", 1];')) is None
    assert analysis.largest_string_array(parse("const a = [];")) is None


def test_largest_string_array_picks_biggest_then_earliest():
    tree = parse('const a = ["1", "2"]; const b = ["x", "y", "z"]; const c = ["q", "r", "s"];')
    array = analysis.largest_string_array(tree)
    assert array.elements == ("x", "y", "z")


def test_largest_string_array_owner_function(forged):
    tree, _, truth = forged
    array = analysis.largest_string_array(tree)
    assert array.owner_function == truth.array_function_name
    assert array.elements == truth.shipped_table


def test_largest_string_array_element_spans_slice_to_literals(forged):
    tree, source, _ = forged
    array = analysis.largest_string_array(tree)
    for span, value in zip(array.element_spans, array.elements):
        assert source[span.start + 1 : span.end - 1] == value


def test_decoder_base_offset_subtraction_primary(forged):
    tree, _, truth = forged
    assert (
        analysis.decoder_base_offset(truth.decoder_text, tree, truth.decoder_name)
        == truth.base
    )


def test_decoder_base_offset_fallback_call_minimum():
    source = (
        "function dec(i) { return tbl[i]; }\n"
        "function use() { const h = dec; return h(0x153) + h(0x151) + dec(0x155); }\n"
    )
    tree = parse(source)
    definition = analysis.find_function_definition(tree, "dec")
    assert analysis.decoder_base_offset(definition, tree, "dec") == 0x151


def test_decoder_base_offset_partial_reference_prefers_subtraction():
    source = (
        "function dec(i) { i = i - 0x151; return tbl[i]; }\n"
        "function use() { return dec(0x158); }\n"
    )
    tree = parse(source)
    definition = analysis.find_function_definition(tree, "dec")
    assert analysis.decoder_base_offset(definition, tree, "dec") == 0x151


def test_decoder_base_offset_conflict():
    source = (
        "function dec(i) { i = i - 0x151; return tbl[i]; }\n"
        "function use() { return dec(0x100); }\n"
    )
    tree = parse(source)
    definition = analysis.find_function_definition(tree, "dec")
    with pytest.raises(OffsetConflict):
        analysis.decoder_base_offset(definition, tree, "dec")


def test_decoder_base_offset_not_found():
    source = "function dec(i) { return tbl[i]; }\nfunction use(p) { return dec(p); }\n"
    tree = parse(source)
    definition = analysis.find_function_definition(tree, "dec")
    with pytest.raises(OffsetNotFound):
        analysis.decoder_base_offset(definition, tree, "dec")


def test_decoder_aliases_chain_and_cycle():
    source = "const a = dec; const b = a; const c = b; const d = c; const a2 = d; const b2 = a2;"
    tree = parse(source)
    aliases = analysis.decoder_aliases(tree, "dec")
    assert aliases == {"dec", "a", "b", "c", "d", "a2", "b2"}
    cyclic = parse("const p = q; const q2 = p;")
    assert analysis.decoder_aliases(cyclic, "q") == {"q", "p", "q2"}


def test_decoder_aliases_depth_cap():
    chain = "const a0 = dec;\n" + "\n".join(
        f"const a{i} = a{i - 1};" for i in range(1, 12)
    )
    aliases = analysis.decoder_aliases(parse(chain), "dec", max_depth=8)
    assert "a7" in aliases
    assert "a11" not in aliases


def test_offset_range(forged):
    tree, _, truth = forged
    array = analysis.largest_string_array(tree)
    assert analysis.offset_range(truth.base, array) == (
        truth.base,
        truth.base + len(truth.shipped_table),
    )
