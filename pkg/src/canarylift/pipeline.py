"""End-to-end scan, lift, and harness pipelines over single sources."""

from __future__ import annotations

import dataclasses
import hashlib
import time
from dataclasses import dataclass
from typing import Optional

from . import syntax
from .analysis import (
    IifeExtract,
    decoder_aliases,
    decoder_base_offset,
    find_function_definition,
    find_iifes,
    largest_string_array,
    most_reassigned_variable,
)
from .canary import (
    CanaryModel,
    ChecksumCanary,
    FixedCountShuffle,
    ResolutionTable,
    StringTable,
    extract_checksum,
    solve_rotation,
    term_indices,
)
from .emit import LiftReport, RewritePlan, apply_rewrite, build_harness, plan_rewrite
from .errors import (
    AssemblyError,
    CanaryLiftError,
    OffsetConflict,
    OffsetNotFound,
    UnrecognizedIife,
)

__all__ = ["Lift", "classify_source", "lift_source", "harness_source", "sha256_text"]


def sha256_text(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8")).hexdigest()


def _recognized_iife(tree) -> Optional[tuple[IifeExtract, object]]:
    """First IIFE in source order that matches a known canary pattern."""
    for iife in find_iifes(tree):
        try:
            return iife, extract_checksum(iife)
        except UnrecognizedIife:
            continue
    return None


def classify_source(source: str) -> str:
    """Classify a file as "canaried", "emotet-style", or "clean"."""
    tree = syntax.parse(source)
    found = _recognized_iife(tree)
    if found is None:
        return "clean"
    return "canaried" if isinstance(found[1], ChecksumCanary) else "emotet-style"


@dataclass(frozen=True)
class Lift:
    """Result of lifting one source: its report plus the artifacts a caller may write."""

    report: LiftReport
    output: Optional[str]
    model: Optional[CanaryModel]
    resolution: Optional[ResolutionTable]
    plan: Optional[RewritePlan]


def lift_source(source: str, input_name: str = "<memory>") -> Lift:
    """Run the full pipeline: locate, model, solve, and rewrite one source.

    Parse failures propagate as ParseError; every structural dead end becomes
    an UnrecognizedIife outcome and an unsatisfiable canary becomes an
    Unsatisfiable outcome, both recorded in the report.
    """
    started = time.perf_counter()
    digest = sha256_text(source)

    def done(report: LiftReport, **extra) -> Lift:
        elapsed = (time.perf_counter() - started) * 1000.0
        report = dataclasses.replace(report, elapsed_ms=round(elapsed, 3))
        return Lift(
            report=report,
            output=extra.get("output"),
            model=extra.get("model"),
            resolution=extra.get("resolution"),
            plan=extra.get("plan"),
        )

    def unrecognized() -> Lift:
        return done(LiftReport(input=input_name, sha256=digest, outcome="UnrecognizedIife"))

    tree = syntax.parse(source)
    found = _recognized_iife(tree)
    if found is None:
        return unrecognized()
    iife, variant = found

    array = largest_string_array(tree)
    if array is None:
        return unrecognized()

    decoder_name: Optional[str] = None
    if isinstance(variant, ChecksumCanary):
        decoder_name = variant.decoder_ref
    if decoder_name is None and isinstance(variant, FixedCountShuffle):
        ranked = most_reassigned_variable(tree)
        decoder_name = ranked[0] if ranked else None
    if decoder_name is None and isinstance(variant, ChecksumCanary):
        # Inline-table loops have no decoder; indices address the table directly.
        base = 0
        aliases: set[str] = set()
    elif decoder_name is None:
        return unrecognized()
    else:
        definition = find_function_definition(tree, decoder_name)
        if definition is None:
            return unrecognized()
        try:
            base = decoder_base_offset(definition, tree, decoder_name)
        except (OffsetNotFound, OffsetConflict):
            return unrecognized()
        aliases = decoder_aliases(tree, decoder_name)

    model = CanaryModel(
        iife=iife,
        decoder_name=decoder_name,
        base=base,
        table=StringTable(tuple(array.elements)),
        variant=variant,
    )
    terms = (
        term_indices(variant.expr) if isinstance(variant, ChecksumCanary) else None
    )
    common = dict(
        input=input_name,
        sha256=digest,
        decoder=decoder_name,
        base=base,
        end=base + array.length,
        terms=terms,
    )

    resolution = solve_rotation(model)
    if resolution is None:
        return done(
            LiftReport(outcome="Unsatisfiable", **common), model=model
        )
    plan = plan_rewrite(tree, decoder_name, aliases, resolution)
    output = apply_rewrite(source, plan)
    report = LiftReport(
        outcome="Solved",
        rotation=resolution.rotation,
        resolved=len(resolution),
        skipped=plan.skipped,
        **common,
    )
    return done(report, output=output, model=model, resolution=resolution, plan=plan)


def harness_source(source: str) -> str:
    """Build the standalone dump harness for a checksum-canaried source."""
    tree = syntax.parse(source)
    found = _recognized_iife(tree)
    if found is None or not isinstance(found[1], ChecksumCanary):
        raise UnrecognizedIife("harness generation needs a checksum canary IIFE")
    iife, variant = found
    if variant.decoder_ref is None:
        raise UnrecognizedIife("inline-table loops have no decoder to harness")
    decoder_name = variant.decoder_ref
    definition = find_function_definition(tree, decoder_name)
    array = largest_string_array(tree)
    if definition is None or array is None:
        raise UnrecognizedIife("decoder or string table not found for harness")
    if array.owner_function is None:
        raise AssemblyError("string table is not owned by a named function")
    array_text = find_function_definition(tree, array.owner_function)
    if array_text is None:
        raise AssemblyError(f"no definition found for {array.owner_function!r}")
    base = decoder_base_offset(definition, tree, decoder_name)
    harness = build_harness(
        iife,
        decoder_text=definition,
        array_fn_text=array_text,
        base=base,
        end=base + array.length,
    )
    return harness.assemble()
