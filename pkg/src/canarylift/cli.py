"""Command line interface: scan, lift, harness, forge, and corrupt."""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import forge as forge_mod
from . import pipeline
from .emit import report_to_dict
from .errors import (
    CanaryLiftError,
    CorruptionError,
    ForgeError,
    LexError,
    ParseError,
)
from .forge import DEFAULT_PAYLOADS, ForgeManifest, GroundTruth

EXIT_OK = 0
EXIT_IO = 2
EXIT_UNSATISFIABLE = 3
EXIT_UNRECOGNIZED = 4
EXIT_USAGE = 64
EXIT_DATA = 65


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_jobs() -> int:
    env = os.environ.get("CANARYLIFT_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _collect_inputs(paths: Sequence[str], recursive: bool) -> tuple[list[Path], list[str]]:
    """Expand files and directories into a sorted, de-duplicated input list."""
    files: list[Path] = []
    missing: list[str] = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            pattern = "**/*.js" if recursive else "*.js"
            files.extend(p for p in path.glob(pattern) if p.is_file())
        elif path.is_file():
            files.append(path)
        else:
            missing.append(raw)
    unique = sorted(set(files))
    return unique, missing


def _run_per_file(
    files: Sequence[Path],
    jobs: int,
    fail_fast: bool,
    worker: Callable[[Path], dict],
) -> tuple[list[dict], bool]:
    """Apply `worker` to each file, preserving input order in the results."""
    results: list[dict] = []
    stop = False
    if jobs <= 1 or len(files) <= 1:
        for path in files:
            result = worker(path)
            results.append(result)
            if fail_fast and result.get("exit", EXIT_OK) != EXIT_OK:
                stop = True
                break
        return results, stop
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for result in pool.map(worker, files):
            results.append(result)
            if fail_fast and result.get("exit", EXIT_OK) != EXIT_OK:
                stop = True
                break
    return results, stop


def _combined_exit(codes: Sequence[int]) -> int:
    # Severity order for mixed batches: I/O trouble first, then structural
    # failures, then unsatisfiable canaries.
    for code in (EXIT_IO, EXIT_UNRECOGNIZED, EXIT_UNSATISFIABLE):
        if code in codes:
            return code
    return EXIT_OK


def _write_report(path: Optional[str], documents: list[dict]) -> None:
    if path is None:
        return
    Path(path).write_text(json.dumps(documents, indent=2) + "\n", encoding="utf-8")


def cmd_scan(args) -> int:
    files, missing = _collect_inputs(args.paths, args.recursive)
    for raw in missing:
        print(f"{raw}\terror\tno such file", file=sys.stderr)
    if not files and missing:
        return EXIT_IO

    def worker(path: Path) -> dict:
        try:
            source = path.read_text(encoding="utf-8")
        except OSError as error:
            return {"input": str(path), "classification": "error", "detail": str(error), "exit": EXIT_IO}
        try:
            label = pipeline.classify_source(source)
        except (ParseError, LexError) as error:
            return {"input": str(path), "classification": "parse-error", "detail": str(error), "exit": EXIT_OK}
        return {"input": str(path), "classification": label, "exit": EXIT_OK}

    results, _ = _run_per_file(files, args.jobs, args.fail_fast, worker)
    for result in results:
        detail = f"\t{result['detail']}" if "detail" in result else ""
        print(f"{result['input']}\t{result['classification']}{detail}")
    _write_report(args.report, [{k: v for k, v in r.items() if k != "exit"} for r in results])
    if missing:
        return EXIT_IO
    return _combined_exit([r["exit"] for r in results])


def _lift_worker(path: Path, out_dir: Optional[Path], emit_output: bool) -> dict:
    try:
        source = path.read_text(encoding="utf-8")
    except OSError as error:
        return {
            "report": {"input": str(path), "sha256": "", "outcome": "ParseError"},
            "detail": str(error),
            "exit": EXIT_IO,
        }
    try:
        lift = pipeline.lift_source(source, input_name=str(path))
    except (ParseError, LexError) as error:
        report = {
            "input": str(path),
            "sha256": pipeline.sha256_text(source),
            "outcome": "ParseError",
            "elapsed_ms": 0.0,
        }
        return {"report": report, "detail": str(error), "exit": EXIT_UNRECOGNIZED}
    doc = report_to_dict(lift.report)
    outcome = lift.report.outcome
    result = {"report": doc, "exit": EXIT_OK}
    if outcome == "Unsatisfiable":
        result["exit"] = EXIT_UNSATISFIABLE
    elif outcome == "UnrecognizedIife":
        result["exit"] = EXIT_UNRECOGNIZED
    elif outcome == "Solved" and emit_output and lift.output is not None:
        target_dir = out_dir if out_dir is not None else path.parent
        target_dir.mkdir(parents=True, exist_ok=True)
        destination = target_dir / f"{path.stem}.lifted.js"
        destination.write_text(lift.output, encoding="utf-8")
        result["output"] = str(destination)
    return result


def cmd_lift(args) -> int:
    files, missing = _collect_inputs(args.paths, args.recursive)
    for raw in missing:
        print(f"{raw}\terror\tno such file", file=sys.stderr)
    out_dir = Path(args.out) if args.out else None

    def worker(path: Path) -> dict:
        return _lift_worker(path, out_dir, emit_output=True)

    results, _ = _run_per_file(files, args.jobs, args.fail_fast, worker)
    for result in results:
        report = result["report"]
        line = f"{report['input']}\t{report['outcome']}"
        if "output" in result:
            line += f"\t{result['output']}"
        if "detail" in result:
            line += f"\t{result['detail']}"
        print(line)
    _write_report(args.report, [r["report"] for r in results])
    codes = [r["exit"] for r in results]
    if missing:
        codes.append(EXIT_IO)
    return _combined_exit(codes)


def cmd_harness(args) -> int:
    files, missing = _collect_inputs(args.paths, args.recursive)
    for raw in missing:
        print(f"{raw}\terror\tno such file", file=sys.stderr)
    out_dir = Path(args.out) if args.out else None
    codes: list[int] = []
    for path in files:
        try:
            source = path.read_text(encoding="utf-8")
        except OSError as error:
            print(f"{path}\terror\t{error}", file=sys.stderr)
            codes.append(EXIT_IO)
            continue
        try:
            text = pipeline.harness_source(source)
        except (ParseError, LexError, CanaryLiftError) as error:
            print(f"{path}\terror\t{error}", file=sys.stderr)
            codes.append(EXIT_UNRECOGNIZED)
            if args.fail_fast:
                break
            continue
        target_dir = out_dir if out_dir is not None else path.parent
        target_dir.mkdir(parents=True, exist_ok=True)
        destination = target_dir / f"{path.stem}.harness.js"
        destination.write_text(text, encoding="utf-8")
        print(f"{path}\tharness\t{destination}")
        codes.append(EXIT_OK)
    if missing:
        codes.append(EXIT_IO)
    return _combined_exit(codes)


def _random_manifest(rng: random.Random, variant: str, sample_seed: int) -> ForgeManifest:
    size = rng.randint(8, 32)
    payload = tuple(rng.choice(DEFAULT_PAYLOADS) for _ in range(size))
    return ForgeManifest(
        payload_strings=payload,
        canary_count=rng.randint(1, max(1, size // 2)),
        rotation=rng.randrange(size),
        base=rng.choice((0x100, 0x151, 0x1a0, 0x200)),
        seed=sample_seed,
        variant=variant,
        alias_functions=rng.randint(1, 4),
    )


def cmd_forge(args) -> int:
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as error:
        print(f"{args.out}\terror\t{error}", file=sys.stderr)
        return EXIT_IO
    manifests: list[ForgeManifest] = []
    if args.manifest:
        try:
            text = Path(args.manifest).read_text(encoding="utf-8")
        except OSError as error:
            print(f"{args.manifest}\terror\t{error}", file=sys.stderr)
            return EXIT_IO
        try:
            manifests.append(ForgeManifest.from_json(text))
        except (ValueError, KeyError, ForgeError) as error:
            print(f"{args.manifest}\terror\t{error}", file=sys.stderr)
            return EXIT_DATA
    else:
        rng = random.Random(args.seed)
        for index in range(args.count):
            manifests.append(
                _random_manifest(rng, args.variant, rng.randrange(2**31))
            )
    for index, manifest in enumerate(manifests):
        try:
            source, truth = forge_mod.generate(manifest)
        except ForgeError as error:
            print(f"sample {index:03d}\terror\t{error}", file=sys.stderr)
            return EXIT_DATA
        sample_path = out_dir / f"forged_{index:03d}.js"
        sample_path.write_text(source, encoding="utf-8")
        sidecar = sample_path.with_name(sample_path.name + ".truth.json")
        sidecar.write_text(truth.to_json() + "\n", encoding="utf-8")
        print(f"{sample_path}\tforged\trotation={truth.rotation}")
    return EXIT_OK


def cmd_corrupt(args) -> int:
    path = Path(args.file)
    truth_path = Path(args.truth) if args.truth else path.with_name(path.name + ".truth.json")
    try:
        source = path.read_text(encoding="utf-8")
        truth_text = truth_path.read_text(encoding="utf-8")
    except OSError as error:
        print(f"{args.file}\terror\t{error}", file=sys.stderr)
        return EXIT_IO
    try:
        truth = GroundTruth.from_json(truth_text)
    except (ValueError, KeyError) as error:
        print(f"{truth_path}\terror\tbad ground truth: {error}", file=sys.stderr)
        return EXIT_DATA
    try:
        slot = int(args.slot, 0)
    except ValueError:
        print(f"{args.slot}\terror\tslot must be an integer", file=sys.stderr)
        return EXIT_USAGE
    try:
        tampered = forge_mod.corrupt(source, truth, slot, args.seed)
    except CorruptionError as error:
        print(f"{args.file}\terror\t{error}", file=sys.stderr)
        return EXIT_DATA
    except (ParseError, LexError) as error:
        print(f"{args.file}\terror\t{error}", file=sys.stderr)
        return EXIT_UNRECOGNIZED
    out_dir = Path(args.out) if args.out else path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    destination = out_dir / f"{path.stem}.corrupted.js"
    destination.write_text(tampered, encoding="utf-8")
    print(f"{path}\tcorrupted\t{destination}")
    return EXIT_OK


def _add_batch_flags(parser: _ArgumentParser) -> None:
    parser.add_argument("paths", nargs="+", help="input files or directories")
    parser.add_argument("--recursive", action="store_true", help="recurse into directories")
    parser.add_argument("--report", help="write a JSON report to this path")
    parser.add_argument(
        "--jobs",
        type=int,
        default=_default_jobs(),
        help="worker threads (default: CANARYLIFT_JOBS or CPU count)",
    )
    parser.add_argument("--fail-fast", action="store_true", help="stop after the first failure")


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(
        prog="canarylift",
        description="Detect, solve, and strip Array Canary obfuscation in JavaScript files.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    scan = commands.add_parser("scan", help="classify inputs without rewriting")
    _add_batch_flags(scan)
    scan.set_defaults(handler=cmd_scan)

    lift = commands.add_parser("lift", help="solve canaries and write deobfuscated files")
    _add_batch_flags(lift)
    lift.add_argument("--out", help="directory for .lifted.js outputs")
    lift.set_defaults(handler=cmd_lift)

    harness = commands.add_parser("harness", help="emit standalone table-dump programs")
    harness.add_argument("paths", nargs="+", help="input files or directories")
    harness.add_argument("--recursive", action="store_true", help="recurse into directories")
    harness.add_argument("--out", help="directory for .harness.js outputs")
    harness.add_argument("--fail-fast", action="store_true", help="stop after the first failure")
    harness.set_defaults(handler=cmd_harness)

    forge = commands.add_parser("forge", help="generate ground-truth samples")
    forge.add_argument("--out", required=True, help="output directory")
    forge.add_argument("--manifest", help="JSON manifest; omit for seeded random samples")
    forge.add_argument("--count", type=int, default=1, help="samples to generate without a manifest")
    forge.add_argument("--seed", type=int, default=0, help="master seed for random manifests")
    forge.add_argument(
        "--variant",
        choices=("checksum", "fixed_count"),
        default="checksum",
        help="canary variant for random manifests",
    )
    forge.set_defaults(handler=cmd_forge)

    corrupt = commands.add_parser("corrupt", help="tamper a forged sample into unsatisfiability")
    corrupt.add_argument("file", help="forged sample path")
    corrupt.add_argument("--slot", required=True, help="canary index to tamper (hex or decimal)")
    corrupt.add_argument("--seed", type=int, default=0, help="tamper seed")
    corrupt.add_argument("--truth", help="ground truth path (default: <file>.truth.json)")
    corrupt.add_argument("--out", help="output directory")
    corrupt.set_defaults(handler=cmd_corrupt)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        return exit_request.code if isinstance(exit_request.code, int) else EXIT_USAGE
    return args.handler(args)


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
