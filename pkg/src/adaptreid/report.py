"""CSV/JSON writers for decisions, metrics, damping traces and reports."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import IO, Dict, List, Optional, Sequence

from .core import Decision
from .evaluation import Aggregate, RunMetrics, TraceRow, TRACE_COLUMNS, aggregate, summarize

DECISION_COLUMNS = ("frame_index", "kind", "track_id", "distance", "lambda_snapshot", "blacklist_size")

METRIC_COLUMNS = (
    "target_person",
    "total_frames",
    "direct_frames",
    "reidentified_frames",
    "lost_frames",
    "reid_count",
    "misid_count",
    "mot_error_count",
    "reentries",
    "unrecovered_reentries",
    "tracking_length_min_s",
    "tracking_length_mean_s",
    "tracking_length_max_s",
    "reid_delay_min_s",
    "reid_delay_mean_s",
    "reid_delay_max_s",
)

SUMMARY_COLUMNS = ("statistic", "min", "mean", "max", "count")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_writer(out: IO[str]):
    return csv.writer(out, lineterminator="\n")


def write_decisions(decisions: Sequence[Decision], out: IO[str], fmt: str = "csv") -> None:
    if fmt == "jsonl":
        for dec in decisions:
            out.write(json.dumps(dec.to_dict(), separators=(",", ":")) + "\n")
        return
    w = _csv_writer(out)
    w.writerow(DECISION_COLUMNS)
    for dec in decisions:
        row = dec.to_dict()
        w.writerow([_fmt(row[c]) for c in DECISION_COLUMNS])


def metrics_row(m: RunMetrics) -> Dict[str, object]:
    row: Dict[str, object] = {c: getattr(m, c) for c in METRIC_COLUMNS[:10]}
    for prefix, values in (("tracking_length", m.mot_tracking_lengths), ("reid_delay", m.reid_delays)):
        agg = aggregate(values)
        row[f"{prefix}_min_s"] = agg.minimum if agg else None
        row[f"{prefix}_mean_s"] = agg.mean if agg else None
        row[f"{prefix}_max_s"] = agg.maximum if agg else None
    return row


def write_metrics_csv(runs: Sequence[RunMetrics], out: IO[str]) -> None:
    w = _csv_writer(out)
    w.writerow(("run",) + METRIC_COLUMNS)
    for k, m in enumerate(runs):
        row = metrics_row(m)
        w.writerow([k] + [_fmt(row[c]) for c in METRIC_COLUMNS])


def metrics_document(runs: Sequence[RunMetrics], engine_config: Optional[dict] = None, stream_header: Optional[dict] = None) -> dict:
    doc = {"runs": [m.to_dict() for m in runs]}
    if engine_config is not None:
        doc["engine_config"] = engine_config
    if stream_header is not None:
        doc["stream"] = {k: stream_header.get(k) for k in ("seed", "prng_name", "num_frames", "fps", "feature_dim")}
    return doc


def load_metrics(path: Path) -> List[RunMetrics]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    runs = doc["runs"] if isinstance(doc, dict) else doc
    return [RunMetrics.from_dict(r) for r in runs]


def write_summary_csv(summary: Dict[str, Optional[Aggregate]], out: IO[str]) -> None:
    w = _csv_writer(out)
    w.writerow(SUMMARY_COLUMNS)
    for name, agg in summary.items():
        if agg is None:
            w.writerow([name, "", "", "", 0])
        else:
            w.writerow([name, _fmt(float(agg.minimum)), _fmt(float(agg.mean)), _fmt(float(agg.maximum)), agg.count])


def summary_text(summary: Dict[str, Optional[Aggregate]], runs: int) -> str:
    lines = [f"runs: {runs}"]
    for name, agg in summary.items():
        if agg is None:
            lines.append(f"{name:>18}: n/a")
        else:
            lines.append(f"{name:>18}: min {agg.minimum:.3f}  mean {agg.mean:.3f}  max {agg.maximum:.3f}  (n={agg.count})")
    return "\n".join(lines)


def write_trace(damped: Sequence[TraceRow], plain: Sequence[TraceRow], out: IO[str], fmt: str = "csv") -> None:
    """Side-by-side gate traces: one row per frame, damped columns then plain ones."""
    stats = TRACE_COLUMNS[1:]
    if fmt == "jsonl":
        for a, b in zip(damped, plain):
            rec = {"frame_index": a.frame_index}
            rec.update({f"damped_{c}": getattr(a, c) for c in stats})
            rec.update({f"plain_{c}": getattr(b, c) for c in stats})
            out.write(json.dumps(rec, separators=(",", ":")) + "\n")
        return
    w = _csv_writer(out)
    w.writerow(["frame_index"] + [f"damped_{c}" for c in stats] + [f"plain_{c}" for c in stats])
    for a, b in zip(damped, plain):
        w.writerow([a.frame_index] + [_fmt(getattr(a, c)) for c in stats] + [_fmt(getattr(b, c)) for c in stats])


def emit_report(runs: Sequence[RunMetrics], out_dir: Path, plots: bool = False) -> str:
    """Write report.csv (per run) and summary.csv (min/mean/max); return the summary text."""
    summary = summarize(runs)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.csv", "w", encoding="utf-8", newline="") as fh:
        write_metrics_csv(runs, fh)
    with open(out_dir / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        write_summary_csv(summary, fh)
    if plots:
        write_plots(runs, out_dir)
    return summary_text(summary, len(runs))


def write_plots(runs: Sequence[RunMetrics], out_dir: Path) -> List[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "adaptreid"
    labels = [str(k) for k in range(len(runs))]
    panels = [
        ("tracking_length.svg", "MOT tracking length (s)", [m.mot_tracking_lengths for m in runs]),
        ("reid_delay.svg", "re-identification delay (s)", [m.reid_delays for m in runs]),
    ]
    written = []
    for name, title, series in panels:
        fig, ax = plt.subplots(figsize=(6, 3))
        means = [sum(v) / len(v) if v else 0.0 for v in series]
        lo = [m - min(v) if v else 0.0 for m, v in zip(means, series)]
        hi = [max(v) - m if v else 0.0 for m, v in zip(means, series)]
        ax.bar(labels, means, yerr=[lo, hi], capsize=3, color="tab:blue")
        ax.set_title(title)
        ax.set_xlabel("run")
        fig.tight_layout()
        path = out_dir / name
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    for name, title, values in (
        ("mot_errors.svg", "MOT id changes of the target", [m.mot_error_count for m in runs]),
        ("reid_count.svg", "re-identifications", [m.reid_count for m in runs]),
    ):
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.bar(labels, values, color="tab:orange")
        ax.set_title(title)
        ax.set_xlabel("run")
        fig.tight_layout()
        path = out_dir / name
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written
