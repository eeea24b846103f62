"""canarylift: detect, solve, and strip Array Canary obfuscation in JavaScript files."""

from __future__ import annotations

from . import analysis, canary, cli, emit, errors, forge, pipeline, syntax
from .analysis import (
    ArrayCandidate,
    IifeExtract,
    SymbolInventory,
    decoder_base_offset,
    filter_closed_functions,
    find_function_definition,
    find_iifes,
    inventory_symbols,
    largest_string_array,
    most_reassigned_variable,
    offset_range,
)
from .canary import (
    CanaryModel,
    ChecksumCanary,
    FixedCountShuffle,
    ResolutionTable,
    StringTable,
    evaluate_checksum,
    extract_checksum,
    numeric_prefix_parse,
    resolve,
    solve_rotation,
)
from .emit import (
    HarnessFile,
    LiftReport,
    RewritePlan,
    apply_rewrite,
    build_harness,
    plan_rewrite,
    read_report,
    write_report,
)
from .forge import ForgeManifest, GroundTruth, corrupt, generate
from .pipeline import Lift, classify_source, harness_source, lift_source
from .syntax import SyntaxTree, parse, tokenize

__version__ = "0.1.0"
