"""Command line entry point.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import yaml

from .core import ContractViolation
from .engine import EngineConfig
from .evaluation import compare_damping, persons_at_start, run, sweep
from .report import emit_report, load_metrics, metrics_document, write_decisions, write_metrics_csv, write_trace
from .simulator import PRESETS, ScenarioConfig, generate, inject_distractor_swap
from .streamio import Stream, read_stream, write_stream

log = logging.getLogger("adaptreid")

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


def _load_structured(path: Path) -> dict:
    # YAML is a superset of JSON, so either spelling works
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ContractViolation(f"{path}: expected a mapping at the top level")
    return data


def _engine_config(path: Optional[Path], stream: Stream) -> EngineConfig:
    data = _load_structured(path) if path else {}
    data.setdefault("feature_dim", stream.feature_dim)
    if data["feature_dim"] != stream.feature_dim:
        raise ContractViolation(
            f"engine feature_dim {data['feature_dim']} does not match stream feature_dim {stream.feature_dim}"
        )
    return EngineConfig.from_dict(data)


def _read(path: Path) -> Stream:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return read_stream(fh)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.config:
        cfg = ScenarioConfig.from_dict(_load_structured(args.config))
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
    else:
        cfg = PRESETS[args.preset](seed=args.seed if args.seed is not None else 0)
    scenario = generate(cfg)
    for frame, a, b in args.swap or []:
        scenario = inject_distractor_swap(scenario, frame, a, b)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        write_stream(scenario, fh)
    log.info("wrote %d frames to %s", len(scenario.frames), args.out)
    return EXIT_OK


def _decisions_path(out: Path, stem: str, fmt: str) -> Path:
    return out / f"{stem}.{'csv' if fmt == 'csv' else 'jsonl'}"


def cmd_run(args: argparse.Namespace) -> int:
    stream = _read(args.stream)
    cfg = _engine_config(args.engine_config, stream)
    person = args.person if args.person is not None else (persons_at_start(stream.frames) or [0])[0]
    result = run(stream.frames, cfg, person, stream.fps)
    args.out.mkdir(parents=True, exist_ok=True)
    with open(_decisions_path(args.out, "decisions", args.format), "w", encoding="utf-8", newline="") as fh:
        write_decisions(result.decisions, fh, args.format)
    _write_json(args.out / "metrics.json", metrics_document([result.metrics], cfg.to_dict(), stream.header))
    with open(args.out / "metrics.csv", "w", encoding="utf-8", newline="") as fh:
        write_metrics_csv([result.metrics], fh)
    m = result.metrics
    print(f"person {person}: reid={m.reid_count} misid={m.misid_count} lost_frames={m.lost_frames} "
          f"mot_errors={m.mot_error_count} unrecovered={m.unrecovered_reentries}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    stream = _read(args.stream)
    cfg = _engine_config(args.engine_config, stream)
    results = sweep(stream.frames, cfg, stream.fps, workers=args.workers)
    args.out.mkdir(parents=True, exist_ok=True)
    for res in results:
        path = _decisions_path(args.out, f"decisions_person{res.metrics.target_person}", args.format)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            write_decisions(res.decisions, fh, args.format)
    runs = [r.metrics for r in results]
    _write_json(args.out / "metrics.json", metrics_document(runs, cfg.to_dict(), stream.header))
    with open(args.out / "metrics.csv", "w", encoding="utf-8", newline="") as fh:
        write_metrics_csv(runs, fh)
    print(f"evaluated {len(runs)} persons")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    stream = _read(args.stream)
    cfg = _engine_config(args.engine_config, stream)
    person = args.person if args.person is not None else (persons_at_start(stream.frames) or [0])[0]
    damped, plain = compare_damping(stream.frames, cfg, person)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        write_trace(damped, plain, fh, args.format)
    peak_d = max(r.lambda_d for r in damped)
    peak_p = max(r.lambda_d for r in plain)
    print(f"peak lambda_d: damped {peak_d:.6g}, plain {peak_p:.6g}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    runs = []
    for path in args.metrics:
        runs.extend(load_metrics(path))
    print(emit_report(runs, args.out, plots=args.plots))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaptreid", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic detection stream")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", type=Path, help="scenario config (JSON or YAML)")
    src.add_argument("--preset", choices=sorted(PRESETS), default="lab-default")
    p.add_argument("--seed", type=int)
    p.add_argument("--swap", type=int, nargs=3, action="append", metavar=("FRAME", "A", "B"),
                   help="exchange the track ids of persons A and B from FRAME on")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_simulate)

    def stream_args(p, out_help: str) -> None:
        p.add_argument("stream", type=Path)
        p.add_argument("--engine-config", type=Path)
        p.add_argument("--out", type=Path, required=True, help=out_help)
        p.add_argument("--format", choices=("csv", "jsonl"), default="csv")

    p = sub.add_parser("run", help="track one person through a stream")
    stream_args(p, "output directory")
    p.add_argument("--person", type=int, help="ground-truth person to track (default: lowest id at start)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="one run per person present at the start")
    stream_args(p, "output directory")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare-damping", help="gate traces with and without damping")
    stream_args(p, "trace file")
    p.add_argument("--person", type=int)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="aggregate metrics files")
    p.add_argument("metrics", type=Path, nargs="+")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--plots", action="store_true", help="also write SVG bar charts")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError, TypeError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
