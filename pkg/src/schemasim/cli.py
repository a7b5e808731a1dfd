"""Command-line front end: ``schemasim compile|run|plot|metrics``.

Exit status is 0 on success, 1 on a domain failure (bad source, bad config,
malformed trace) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .dsl import AssemblageAst, AssemblageError, Diagnostic, SourceSpan, compile_assemblage, parse_assemblage, render_assemblage
from .fields import DomainError
from .fsm import Fsm, to_table, validate_fsm
from .metrics import TraceError, compute_metrics, read_trace, trace_bytes
from .plotting import load_snapshot, parse_snapshot, render_forcefield, render_trajectory
from .world import run_simulation

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2
BUNDLED = ("foraging", "soccer")


class _Failure(Exception):
    """Domain failure already reported on stderr."""


def _fail(msg: str) -> _Failure:
    print(f"error: {msg}", file=sys.stderr)
    return _Failure(msg)


# -- compile -------------------------------------------------------------------


def _finding_span(ast: AssemblageAst, detail: str) -> SourceSpan:
    for d in ast.state_defs:
        if d.name == detail:
            return d.span
        for a in d.alternatives:
            if a.releaser == detail:
                return a.span
    return SourceSpan(1, 1)


def to_dot(fsm: Fsm, name: str = "P") -> str:
    """Graphviz digraph of the machine, one edge per transition."""
    lines = [f'digraph "{name}" {{', "  rankdir=LR;"]
    for s in fsm.states:
        shape = "doublecircle" if s.index in fsm.finals else "circle"
        lines.append(f'  s{s.index} [label="{s.index} {s.label}", shape={shape}];')
    lines.append(f"  start [shape=point]; start -> s{fsm.start};")
    for t in fsm.transitions:
        lines.append(f'  s{t.source} -> s{t.target} [label="{t.releaser}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_compile(source: str, emit: str, out: Optional[str]) -> int:
    try:
        raw = Path(source).read_bytes()
    except OSError as exc:
        raise _fail(f"cannot read {source}: {exc.strerror}")
    try:
        ast = parse_assemblage(raw)
    except AssemblageError as exc:
        for d in exc.diagnostics:
            print(d.format(source), file=sys.stderr)
        return EXIT_DOMAIN
    fsm = compile_assemblage(ast)
    findings = validate_fsm(fsm)
    if findings:
        for f in findings:
            print(Diagnostic(str(f), _finding_span(ast, f.detail)).format(source), file=sys.stderr)
        return EXIT_DOMAIN
    if emit == "table":
        text = to_table(fsm)
    elif emit == "canonical-text":
        text = render_assemblage(fsm, ast.process_name)
    else:
        text = to_dot(fsm, ast.process_name)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- run -----------------------------------------------------------------------


@dataclass(frozen=True)
class RunManifest:
    config: str
    seed: int
    out: str
    artifacts: dict[str, str]  # file name -> sha256

    def to_json(self, created: str) -> str:
        doc = {"config": self.config, "seed": self.seed, "out": self.out, "created": created,
               "artifacts": [{"path": k, "sha256": v} for k, v in sorted(self.artifacts.items())]}
        return json.dumps(doc, indent=2) + "\n"


def _read_config(spec: str) -> ScenarioConfig:
    path = Path(spec)
    if not path.exists() and spec in BUNDLED:
        return parse_config(resources.files("schemasim.scenarios").joinpath(f"{spec}.ini").read_text("utf-8"))
    return load_config(path)


def _headline(metrics: dict) -> str:
    if metrics["kind"] == "foraging":
        c = metrics["completion_tick"]
        return f"completion_tick={c if c is not None else 'none'} delivered={metrics['delivered']}/{metrics['attractors']}"
    g = metrics["goals"]
    return f"goals red={g['red']} blue={g['blue']}"


def _run_one(config: ScenarioConfig, config_label: str, seed: int, out: Path) -> tuple[RunManifest, str]:
    trace, metrics = run_simulation(config, seed)
    out.mkdir(parents=True, exist_ok=True)
    blobs = {
        "trace.jsonl": trace_bytes(trace),
        "metrics.json": (json.dumps(metrics, indent=2, sort_keys=True) + "\n").encode("utf-8"),
    }
    for name, data in blobs.items():
        (out / name).write_bytes(data)
    manifest = RunManifest(config_label, seed, str(out), {k: hashlib.sha256(v).hexdigest() for k, v in blobs.items()})
    created = datetime.now(timezone.utc).isoformat(timespec="seconds")
    (out / "manifest.json").write_text(manifest.to_json(created), encoding="utf-8")
    summary = f"{metrics['kind']} seed={seed} ticks={metrics['ticks']} {_headline(metrics)}"
    return manifest, summary


def _run_job(args: tuple) -> str:
    config, label, seed, out = args
    return _run_one(config, label, seed, out)[1]


def parse_seed_range(text: str) -> list[int]:
    """``'a..b'`` inclusive."""
    try:
        lo, hi = (int(t) for t in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad seed range {text!r}")
    return list(range(lo, hi + 1))


def cmd_run(config_spec: str, seeds: Sequence[int], out: str, batch: bool, jobs: int = 1) -> int:
    try:
        config = _read_config(config_spec)
    except ConfigError as exc:
        raise _fail(str(exc))
    root = Path(out)
    if not batch:
        _, summary = _run_one(config, config_spec, seeds[0], root)
        print(summary)
        return EXIT_OK
    work = [(config, config_spec, s, root / f"seed-{s}") for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            summaries = list(pool.map(_run_job, work))
    else:
        summaries = [_run_job(w) for w in work]
    for line in summaries:  # already in seed order
        print(line)
    return EXIT_OK


# -- plot / metrics ------------------------------------------------------------


def cmd_plot(kind: str, source: str, out: str, grid: Optional[tuple[int, int]]) -> int:
    try:
        if kind == "forcefield":
            if not Path(source).exists() and source == "attack":
                snap = parse_snapshot(resources.files("schemasim.scenarios").joinpath("attack.snapshot").read_text("utf-8"))
            else:
                snap = load_snapshot(source)
            canvas = render_forcefield(snap, grid)
        else:
            canvas = render_trajectory(read_trace(source, allow_empty=True))
    except (ConfigError, TraceError, DomainError, OSError) as exc:
        raise _fail(str(exc))
    canvas.write(out)
    return EXIT_OK


def cmd_metrics(trace_path: str, out: Optional[str]) -> int:
    try:
        trace = read_trace(trace_path)
        metrics = compute_metrics(trace)
    except (TraceError, OSError) as exc:
        raise _fail(f"{trace_path}: {exc}")
    except (KeyError, TypeError, ValueError) as exc:
        raise _fail(f"{trace_path}: inconsistent trace ({exc!r})")
    text = json.dumps(metrics, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- entry point -----------------------------------------------------------------


def _grid(text: str) -> tuple[int, int]:
    parts = text.lower().replace("x", " ").replace(",", " ").split()
    try:
        nx, ny = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NXxNY, got {text!r}") from None
    if nx < 1 or ny < 1:
        raise argparse.ArgumentTypeError("grid dimensions must be >= 1")
    return nx, ny


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schemasim", description="Behavior-based multi-robot simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="parse, validate and convert an assemblage source")
    c.add_argument("source")
    c.add_argument("--emit", choices=("table", "canonical-text", "diagram"), default="table")
    c.add_argument("--out")

    r = sub.add_parser("run", help="simulate a scenario")
    r.add_argument("--config", required=True, help="INI path, or 'foraging' / 'soccer' for a bundled demo")
    g = r.add_mutually_exclusive_group(required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--seeds", type=parse_seed_range, help="inclusive range a..b")
    r.add_argument("--out", required=True)
    r.add_argument("--jobs", type=int, default=1)

    pl = sub.add_parser("plot", help="render an SVG")
    pl.add_argument("kind", choices=("trajectory", "forcefield"))
    pl.add_argument("input", help="trace file, or snapshot spec ('attack' for the bundled one)")
    pl.add_argument("--out", required=True)
    pl.add_argument("--grid", type=_grid, help="force-field grid, e.g. 36x24")

    m = sub.add_parser("metrics", help="recompute metrics from a trace")
    m.add_argument("trace")
    m.add_argument("--out")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "compile":
            return cmd_compile(args.source, args.emit, args.out)
        if args.command == "run":
            if args.seed is not None and args.seed < 0:
                parser.print_usage(sys.stderr)
                print("schemasim run: error: --seed must be >= 0", file=sys.stderr)
                return EXIT_USAGE
            if args.jobs < 1:
                print("schemasim run: error: --jobs must be >= 1", file=sys.stderr)
                return EXIT_USAGE
            seeds = [args.seed] if args.seed is not None else args.seeds
            return cmd_run(args.config, seeds, args.out, batch=args.seed is None, jobs=args.jobs)
        if args.command == "plot":
            return cmd_plot(args.kind, args.input, args.out, args.grid)
        return cmd_metrics(args.trace, args.out)
    except _Failure:
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
