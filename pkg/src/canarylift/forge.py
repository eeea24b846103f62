"""Ground-truth forge: emit canaried files whose solution is known by construction."""

from __future__ import annotations

import json
import math
import random
import string
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import syntax
from .analysis import find_iifes, largest_string_array
from .canary import (
    Binary,
    ChecksumCanary,
    ChecksumExpr,
    Const,
    Neg,
    Term,
    evaluate_checksum,
    extract_checksum,
    numeric_prefix_parse,
)
from .emit import js_string_literal
from .errors import CorruptionError, ForgeError, UnrecognizedIife

__all__ = ["ForgeManifest", "GroundTruth", "generate", "corrupt", "DEFAULT_PAYLOADS"]

_MAX_ATTEMPTS = 1000

DEFAULT_PAYLOADS = (
    "toLowerCase", "toUpperCase", "charCodeAt", "fromCharCode", "replace",
    "split", "substring", "indexOf", "lastIndexOf", "join", "slice",
    "concat", "trim", "includes", "startsWith", "endsWith", "location",
    "innerHTML", "appendChild", "createElement", "getElementById",
    "setAttribute", "getAttribute", "addEventListener", "querySelector",
    "removeChild", "parentNode", "textContent", "setItem", "getItem",
    "userAgent", "platform", "language", "referrer", "cookie", "hostname",
    "protocol", "pathname", "search", "hash",
)


@dataclass(frozen=True)
class ForgeManifest:
    """Everything a forged sample is built from; (manifest, seed) fixes every byte."""

    payload_strings: tuple[str, ...]
    canary_count: int
    rotation: int
    base: int
    seed: int
    variant: str = "checksum"  # "checksum" | "fixed_count"
    alias_functions: int = 3

    def validate(self) -> None:
        size = len(self.payload_strings)
        if size < 2:
            raise ForgeError("manifest needs at least two payload strings")
        if not 0 <= self.rotation < size:
            raise ForgeError(f"rotation {self.rotation} outside [0, {size})")
        if self.base < 0:
            raise ForgeError("base offset must be non-negative")
        if self.alias_functions < 1:
            raise ForgeError("at least one alias function is required")
        if self.variant not in ("checksum", "fixed_count"):
            raise ForgeError(f"unknown variant {self.variant!r}")
        if self.variant == "checksum" and not 1 <= self.canary_count < size:
            raise ForgeError(
                f"canary_count {self.canary_count} outside [1, {size})"
            )
        for text in self.payload_strings:
            if not math.isnan(numeric_prefix_parse(text)):
                raise ForgeError(
                    f"payload string {text!r} has a numeric prefix; those slots are "
                    "reserved for canaries"
                )

    def to_json(self) -> str:
        return json.dumps(
            {
                "payload_strings": list(self.payload_strings),
                "canary_count": self.canary_count,
                "rotation": self.rotation,
                "base": f"{self.base:#x}",
                "seed": self.seed,
                "variant": self.variant,
                "alias_functions": self.alias_functions,
            },
            indent=2,
        )

    @staticmethod
    def from_json(text: str) -> "ForgeManifest":
        doc = json.loads(text)
        base = doc["base"]
        return ForgeManifest(
            payload_strings=tuple(doc["payload_strings"]),
            canary_count=int(doc["canary_count"]),
            rotation=int(doc["rotation"]),
            base=int(base, 16) if isinstance(base, str) else int(base),
            seed=int(doc["seed"]),
            variant=doc.get("variant", "checksum"),
            alias_functions=int(doc.get("alias_functions", 3)),
        )


@dataclass(frozen=True)
class GroundTruth:
    """Sidecar record of everything the lift should recover from a forged sample."""

    variant: str
    shipped_table: tuple[str, ...]
    canonical_table: tuple[str, ...]
    rotation: int
    target: Optional[float]
    count: Optional[int]
    canary_indices: tuple[int, ...]  # decoder-space indices of canary slots
    decoder_name: str
    decoder_text: str
    array_function_name: Optional[str]
    base: int
    resolution: dict[int, str]
    closed_function_names: tuple[str, ...]
    alias_count: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "variant": self.variant,
                "shipped_table": list(self.shipped_table),
                "canonical_table": list(self.canonical_table),
                "rotation": self.rotation,
                "target": self.target,
                "count": self.count,
                "canary_indices": [f"{i:#x}" for i in self.canary_indices],
                "decoder_name": self.decoder_name,
                "decoder_text": self.decoder_text,
                "array_function_name": self.array_function_name,
                "base": f"{self.base:#x}",
                "resolution": {f"{i:#x}": s for i, s in sorted(self.resolution.items())},
                "closed_function_names": list(self.closed_function_names),
                "alias_count": self.alias_count,
            },
            indent=2,
        )

    @staticmethod
    def from_json(text: str) -> "GroundTruth":
        doc = json.loads(text)
        return GroundTruth(
            variant=doc["variant"],
            shipped_table=tuple(doc["shipped_table"]),
            canonical_table=tuple(doc["canonical_table"]),
            rotation=int(doc["rotation"]),
            target=None if doc["target"] is None else float(doc["target"]),
            count=None if doc.get("count") is None else int(doc["count"]),
            canary_indices=tuple(int(i, 16) for i in doc["canary_indices"]),
            decoder_name=doc["decoder_name"],
            decoder_text=doc["decoder_text"],
            array_function_name=doc.get("array_function_name"),
            base=int(doc["base"], 16),
            resolution={int(i, 16): s for i, s in doc["resolution"].items()},
            closed_function_names=tuple(doc["closed_function_names"]),
            alias_count=int(doc["alias_count"]),
        )


_LOWER = "abcdefghijklmnopqrstuvwxyz"
_NAME_ALPHABET = string.ascii_letters


def _global_name(rng: random.Random, prefix: str, taken: set[str]) -> str:
    while True:
        name = prefix + "".join(rng.choice(_NAME_ALPHABET) for _ in range(rng.randint(1, 3)))
        if name not in taken and name not in ("let", "var", "new", "for", "try"):
            taken.add(name)
            return name


def _canary_string(rng: random.Random) -> str:
    digits = rng.randint(1, 9_999_999)
    letters = "".join(rng.choice(_NAME_ALPHABET) for _ in range(6))
    return f"{digits}{letters}"


def _format_target(value: float) -> str:
    if value.is_integer() and abs(value) <= 2**53:
        magnitude = abs(int(value))
        return f"-{magnitude:#x}" if value < 0 else f"{magnitude:#x}"
    return repr(value)


def _rotate_right(entries: Sequence[str], count: int) -> tuple[str, ...]:
    size = len(entries)
    k = count % size
    return tuple(entries[size - k :]) + tuple(entries[: size - k])


def _quotient_source(alias: str, index: int, divisor: int, negate: bool) -> str:
    sign = "-" if negate else ""
    return f"{sign}parseInt({alias}({index:#x})) / {divisor:#x}"


def _build_checksum(
    rng: random.Random, canary_slots: list[int], base: int
) -> tuple[ChecksumExpr, str]:
    """Random sum-of-products over the canary slots; returns the tree and a source template.

    The template leaves the alias name as `{alias}`. Every canary slot is
    referenced at least once so tampering with any of them breaks the checksum.
    """
    term_count = max(len(canary_slots), rng.randint(7, 13))
    slots = list(canary_slots)
    rng.shuffle(slots)
    while len(slots) < term_count:
        slots.append(rng.choice(canary_slots))
    quotients: list[tuple[ChecksumExpr, str]] = []
    for position, slot in enumerate(slots):
        divisor = position + 1
        negate = rng.random() < 0.4
        term: ChecksumExpr = Term(base + slot)
        if negate:
            term = Neg(term)
        quotient = Binary("/", term, Const(float(divisor)))
        quotients.append(
            (quotient, _quotient_source("{alias}", base + slot, divisor, negate))
        )
    groups: list[tuple[ChecksumExpr, str]] = []
    position = 0
    while position < len(quotients):
        if position + 1 < len(quotients) and rng.random() < 0.4:
            left, right = quotients[position], quotients[position + 1]
            groups.append(
                (Binary("*", left[0], right[0]), f"({left[1]}) * ({right[1]})")
            )
            position += 2
        else:
            groups.append(quotients[position])
            position += 1
    expr, text = groups[0]
    for node, part in groups[1:]:
        expr = Binary("+", expr, node)
        text = f"{text} + {part}"
    return expr, text


def _checksum_iife(
    rng: random.Random,
    decoder_name: str,
    array_name: str,
    checksum_template: str,
    target_literal: str,
) -> tuple[str, str]:
    """The canary IIFE text and the alias name it binds."""
    names = rng.sample(_LOWER + string.ascii_uppercase, 6)
    table_arg, target_arg, alias, table_var, sum_var, err_var = names
    checksum = checksum_template.replace("{alias}", alias)
    text = (
        f"(function ({table_arg}, {target_arg}) {{\n"
        f"    const {alias} = {decoder_name},\n"
        f"        {table_var} = {table_arg}();\n"
        f"    while (!![]) {{\n"
        f"        try {{\n"
        f"            const {sum_var} = {checksum};\n"
        f"            if ({sum_var} === {target_arg}) break;\n"
        f"            else {table_var}[\"push\"]({table_var}[\"shift\"]());\n"
        f"        }} catch ({err_var}) {{\n"
        f"            {table_var}[\"push\"]({table_var}[\"shift\"]());\n"
        f"        }}\n"
        f"    }}\n"
        f"}})({array_name}, {target_literal});"
    )
    return text, alias


def _fixed_count_iife(
    rng: random.Random, array_name: str, count_literal: int
) -> str:
    names = rng.sample(_LOWER, 4)
    table_arg, count_arg, rotate_fn, loop_var = names
    return (
        f"(function({table_arg}, {count_arg}) {{\n"
        f"    var {rotate_fn} = function({loop_var}) {{\n"
        f"        while (--{loop_var}) {{\n"
        f"            {table_arg}['push']({table_arg}['shift']());\n"
        f"        }}\n"
        f"    }};\n"
        f"    {rotate_fn}(++{count_arg});\n"
        f"}} ({array_name}, {count_literal:#x}));"
    )


def _array_function(array_name: str, table_var: str, shipped: Sequence[str]) -> str:
    rows = []
    line: list[str] = []
    width = 0
    for entry in shipped:
        literal = js_string_literal(entry)
        width += len(literal) + 2
        line.append(literal)
        if width > 60:
            rows.append(", ".join(line) + ",")
            line = []
            width = 0
    if line:
        rows.append(", ".join(line) + ",")
    body = "\n        ".join(rows)
    return (
        f"function {array_name}() {{\n"
        f"    const {table_var} = [\n"
        f"        {body}\n"
        f"    ];\n"
        f"    {array_name} = function () {{\n"
        f"        return {table_var};\n"
        f"    }};\n"
        f"    return {array_name}();\n"
        f"}}"
    )


def _memoized_decoder(
    rng: random.Random, decoder_name: str, array_name: str, base: int
) -> str:
    names = rng.sample(_LOWER + string.ascii_uppercase, 6)
    p1, p2, table_var, q1, q2, out_var = names
    return (
        f"function {decoder_name}({p1}, {p2}) {{\n"
        f"    const {table_var} = {array_name}();\n"
        f"    {decoder_name} = function ({q1}, {q2}) {{\n"
        f"        {q1} = {q1} - {base:#x};\n"
        f"        const {out_var} = {table_var}[{q1}];\n"
        f"        return {out_var};\n"
        f"    }};\n"
        f"    return {decoder_name}({p1}, {p2});\n"
        f"}}"
    )


def _plain_decoder(decoder_name: str, array_name: str, base: int, rng: random.Random) -> str:
    param = rng.choice(_LOWER)
    return (
        f"function {decoder_name}({param}) {{\n"
        f"    {param} = {param} - {base:#x};\n"
        f"    return {array_name}[{param}];\n"
        f"}}"
    )


def _payload_functions(
    rng: random.Random,
    decoder_name: str,
    alias: str,
    indices: Sequence[int],
    how_many: int,
    taken: set[str],
) -> tuple[list[str], list[str]]:
    """Closed functions that alias the decoder and reference every index once."""
    chunks: list[list[int]] = [[] for _ in range(how_many)]
    for position, index in enumerate(indices):
        chunks[position % how_many].append(index)
    texts: list[str] = []
    names: list[str] = []
    for chunk in chunks:
        name = _global_name(rng, rng.choice(_LOWER) + str(rng.randint(0, 9)), taken)
        names.append(name)
        if chunk:
            calls = " + ".join(f"{alias}({index:#x})" for index in chunk)
            body = f"    const {alias} = {decoder_name};\n    return {calls};"
        else:
            body = f"    const {alias} = {decoder_name};\n    return {alias};"
        texts.append(f"function {name}() {{\n{body}\n}}")
    return texts, names


def _open_functions(rng: random.Random, taken: set[str]) -> list[str]:
    """Functions touching host globals; these must fail the closed-function filter."""
    first = _global_name(rng, rng.choice(_LOWER) + str(rng.randint(0, 9)), taken)
    second = _global_name(rng, rng.choice(_LOWER) + str(rng.randint(0, 9)), taken)
    return [
        f"function {first}() {{\n    return fetch(document[\"location\"]);\n}}",
        f"function {second}() {{\n    document[\"title\"] = navigator[\"userAgent\"];\n}}",
    ]


def _place_canaries(
    rng: random.Random, payload: Sequence[str], count: int
) -> tuple[list[str], list[int]]:
    canonical = list(payload)
    slots = sorted(rng.sample(range(len(canonical)), count))
    for slot in slots:
        canonical[slot] = _canary_string(rng)
    return canonical, slots


def generate(manifest: ForgeManifest) -> tuple[str, GroundTruth]:
    """Emit a forged sample and its ground truth.

    Construction is rejected and resampled (bounded attempts) until the
    checksum target is finite and the shipped table's first satisfying
    rotation is exactly the manifest rotation, so the lift/forge round trip
    is an identity by construction.
    """
    manifest.validate()
    rng = random.Random(manifest.seed)
    size = len(manifest.payload_strings)
    taken: set[str] = set()
    prefix = rng.choice(_LOWER) + str(rng.randint(0, 9))
    array_name = _global_name(rng, prefix, taken)
    decoder_name = _global_name(rng, prefix, taken)

    if manifest.variant == "fixed_count":
        return _generate_fixed_count(manifest, rng, array_name, decoder_name, taken)

    for _ in range(_MAX_ATTEMPTS):
        canonical, slots = _place_canaries(rng, manifest.payload_strings, manifest.canary_count)
        expr, template = _build_checksum(rng, slots, manifest.base)
        target = evaluate_checksum(expr, canonical, 0, manifest.base)
        if not math.isfinite(target):
            continue
        shipped = _rotate_right(canonical, manifest.rotation)
        first = None
        for rotation in range(size):
            if evaluate_checksum(expr, shipped, rotation, manifest.base) == target:
                first = rotation
                break
        if first != manifest.rotation:
            continue
        iife, alias = _checksum_iife(
            rng, decoder_name, array_name, template, _format_target(target)
        )
        decoder_text = _memoized_decoder(rng, decoder_name, array_name, manifest.base)
        array_text = _array_function(array_name, rng.choice(_LOWER), shipped)
        indices = range(manifest.base, manifest.base + size)
        payload_texts, payload_names = _payload_functions(
            rng, decoder_name, alias, indices, manifest.alias_functions, taken
        )
        open_texts = _open_functions(rng, taken)
        source = "\n".join([array_text, decoder_text, iife, *payload_texts, *open_texts]) + "\n"
        truth = GroundTruth(
            variant="checksum",
            shipped_table=tuple(shipped),
            canonical_table=tuple(canonical),
            rotation=manifest.rotation,
            target=target,
            count=None,
            canary_indices=tuple(manifest.base + slot for slot in slots),
            decoder_name=decoder_name,
            decoder_text=decoder_text,
            array_function_name=array_name,
            base=manifest.base,
            resolution={manifest.base + i: s for i, s in enumerate(canonical)},
            closed_function_names=(array_name, decoder_name, *payload_names),
            alias_count=1 + manifest.alias_functions,
        )
        return source, truth
    raise ForgeError(
        f"could not build a uniquely solvable checksum in {_MAX_ATTEMPTS} attempts"
    )


def _generate_fixed_count(
    manifest: ForgeManifest,
    rng: random.Random,
    array_name: str,
    decoder_name: str,
    taken: set[str],
) -> tuple[str, GroundTruth]:
    size = len(manifest.payload_strings)
    canonical = list(manifest.payload_strings)
    shipped = _rotate_right(canonical, manifest.rotation)
    # count must be >= 1 and congruent to the rotation; a few extra full
    # cycles make the counter look like an organically chosen constant.
    count = manifest.rotation + size * rng.randint(0 if manifest.rotation else 1, 3)
    iife = _fixed_count_iife(rng, array_name, count - 1)
    decoder_text = _plain_decoder(decoder_name, array_name, manifest.base, rng)
    table_rows = ",\n    ".join(js_string_literal(s) for s in shipped)
    array_text = f"var {array_name} = [\n    {table_rows},\n];"
    alias = rng.choice(_LOWER)
    indices = range(manifest.base, manifest.base + size)
    payload_texts, payload_names = _payload_functions(
        rng, decoder_name, alias, indices, manifest.alias_functions, taken
    )
    open_texts = _open_functions(rng, taken)
    source = "\n".join([array_text, decoder_text, iife, *payload_texts, *open_texts]) + "\n"
    truth = GroundTruth(
        variant="fixed_count",
        shipped_table=tuple(shipped),
        canonical_table=tuple(canonical),
        rotation=manifest.rotation,
        target=None,
        count=count,
        canary_indices=(),
        decoder_name=decoder_name,
        decoder_text=decoder_text,
        array_function_name=None,
        base=manifest.base,
        resolution={manifest.base + i: s for i, s in enumerate(canonical)},
        closed_function_names=(decoder_name, *payload_names),
        alias_count=manifest.alias_functions,
    )
    return source, truth


def corrupt(source: str, truth: GroundTruth, slot: int, seed: int) -> str:
    """Tamper with the canary string at decoder index `slot` so no rotation satisfies.

    The returned text differs from `source` in exactly one string literal. The
    result is verified by brute force over every rotation; digit prefixes are
    resampled (bounded attempts) if a substitution accidentally still solves.
    """
    if slot not in truth.canary_indices:
        raise CorruptionError(
            f"slot {slot:#x} is not a canary index of this sample"
        )
    tree = syntax.parse(source)
    loop = None
    for candidate in find_iifes(tree):
        try:
            extracted = extract_checksum(candidate)
        except UnrecognizedIife:
            continue
        if isinstance(extracted, ChecksumCanary):
            loop = extracted
            break
    if loop is None:
        raise CorruptionError("no checksum loop found in source")
    array = largest_string_array(tree)
    if array is None or tuple(array.elements) != truth.shipped_table:
        raise CorruptionError("string table in source does not match ground truth")
    size = array.length
    canonical_slot = slot - truth.base
    shipped_position = (canonical_slot + truth.rotation) % size
    original = array.elements[shipped_position]
    suffix = original.lstrip("0123456789")
    original_prefix = original[: len(original) - len(suffix)]
    if not original_prefix:
        raise CorruptionError(f"slot {slot:#x} holds no digit prefix to tamper with")

    rng = random.Random(seed)
    for _ in range(_MAX_ATTEMPTS):
        replacement_prefix = str(rng.randint(1, 9_999_999))
        if replacement_prefix == original_prefix:
            continue
        tampered_entry = f"{replacement_prefix}{suffix}"
        tampered = list(array.elements)
        tampered[shipped_position] = tampered_entry
        satisfiable = any(
            evaluate_checksum(loop.expr, tampered, rotation, truth.base) == loop.target
            for rotation in range(size)
        )
        if satisfiable:
            continue
        span = array.element_spans[shipped_position]
        return source[: span.start] + js_string_literal(tampered_entry) + source[span.end :]
    raise CorruptionError(
        f"no tampering of slot {slot:#x} became unsatisfiable in {_MAX_ATTEMPTS} attempts"
    )
