"""Line-delimited JSON detection streams.

Line 1 is a header object; every following line is one detection. Records are
ordered by (frame_index, track_id). Floats go through ``repr`` so they
round-trip bit-exactly. Frames without detections simply have no records;
``num_frames`` in the header fixes the stream length.

Header keys: format_version, feature_dim, fps, num_frames, prng_name, seed,
config (scenario config echo, optional), swaps (optional).
Record keys: frame_index, timestamp, track_id, person_id (optional),
feature, bbox (optional).
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import IO, Iterable, List, Optional, Union

import numpy as np

from .core import Detection
from .simulator import Scenario, ScenarioConfig

FORMAT_VERSION = 1
HEADER_KEYS = ("format_version", "feature_dim", "fps", "num_frames")


class StreamFormatError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class Stream:
    header: dict
    frames: List[List[Detection]]

    @property
    def fps(self) -> float:
        return float(self.header["fps"])

    @property
    def feature_dim(self) -> int:
        return int(self.header["feature_dim"])

    def scenario(self) -> Scenario:
        if "config" not in self.header:
            raise StreamFormatError("stream header carries no scenario config")
        cfg = ScenarioConfig.from_dict(self.header["config"])
        return Scenario(cfg, self.frames, self.header.get("prng_name", ""), [tuple(s) for s in self.header.get("swaps", [])])


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def scenario_header(scenario: Scenario) -> dict:
    cfg = scenario.config
    return {
        "format_version": FORMAT_VERSION,
        "feature_dim": cfg.feature_dim,
        "fps": cfg.fps,
        "num_frames": len(scenario.frames),
        "prng_name": scenario.prng_name,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "swaps": [list(s) for s in scenario.swaps],
    }


def write_stream(scenario: Scenario, out: IO[str]) -> None:
    write_frames(scenario_header(scenario), scenario.frames, out)


def write_frames(header: dict, frames: Iterable[Iterable[Detection]], out: IO[str]) -> None:
    out.write(_dumps(header) + "\n")
    for dets in frames:
        for det in sorted(dets, key=lambda d: d.track_id):
            rec = {
                "frame_index": det.frame_index,
                "timestamp": det.timestamp,
                "track_id": det.track_id,
            }
            if det.person_id is not None:
                rec["person_id"] = det.person_id
            rec["feature"] = det.feature.tolist()
            if det.bbox is not None:
                rec["bbox"] = list(det.bbox)
            out.write(_dumps(rec) + "\n")


def dumps_stream(scenario: Scenario) -> str:
    buf = io.StringIO()
    write_stream(scenario, buf)
    return buf.getvalue()


def read_stream(source: Union[str, IO[str]]) -> Stream:
    """Parse a stream; any defect raises :class:`StreamFormatError` naming the line."""
    text = source if isinstance(source, str) else source.read()
    if not text:
        raise StreamFormatError("empty stream", 1)
    lines = text.split("\n")
    if lines[-1] != "":
        raise StreamFormatError("truncated final line (missing line terminator)", len(lines))
    lines.pop()

    header = _parse_line(lines[0], 1)
    for key in HEADER_KEYS:
        if key not in header:
            raise StreamFormatError(f"header missing {key!r}", 1)
    if header["format_version"] != FORMAT_VERSION:
        raise StreamFormatError(
            f"unsupported format_version {header['format_version']!r} (expected {FORMAT_VERSION})", 1
        )
    dim, num_frames = header["feature_dim"], header["num_frames"]
    if not isinstance(dim, int) or dim < 1:
        raise StreamFormatError("feature_dim must be a positive integer", 1)
    if not isinstance(num_frames, int) or num_frames < 0:
        raise StreamFormatError("num_frames must be a non-negative integer", 1)

    frames: List[List[Detection]] = [[] for _ in range(num_frames)]
    last = (-1, -1)
    for lineno, line in enumerate(lines[1:], start=2):
        rec = _parse_line(line, lineno)
        try:
            f = rec["frame_index"]
            tid = rec["track_id"]
            feature = rec["feature"]
            ts = rec["timestamp"]
        except KeyError as exc:
            raise StreamFormatError(f"record missing {exc.args[0]!r}", lineno) from None
        if not isinstance(f, int) or not isinstance(tid, int) or f < 0 or tid < 0:
            raise StreamFormatError("frame_index and track_id must be non-negative integers", lineno)
        if f >= num_frames:
            raise StreamFormatError(f"frame_index {f} beyond num_frames {num_frames}", lineno)
        if (f, tid) <= last:
            raise StreamFormatError(f"record ({f}, {tid}) out of order after {last}", lineno)
        last = (f, tid)
        if not isinstance(feature, list) or len(feature) != dim:
            got = len(feature) if isinstance(feature, list) else type(feature).__name__
            raise StreamFormatError(f"feature has {got} values, header feature_dim is {dim}", lineno)
        try:
            arr = np.array(feature, dtype=np.float64)
        except (TypeError, ValueError):
            raise StreamFormatError("feature values must be numbers", lineno) from None
        if not np.all(np.isfinite(arr)):
            raise StreamFormatError("feature contains non-finite values", lineno)
        bbox = rec.get("bbox")
        frames[f].append(
            Detection(
                frame_index=f,
                timestamp=float(ts),
                track_id=tid,
                feature=arr,
                person_id=rec.get("person_id"),
                bbox=tuple(bbox) if bbox is not None else None,
            )
        )
    return Stream(header, frames)


def _parse_line(line: str, lineno: int) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise StreamFormatError(f"malformed JSON ({exc.msg})", lineno) from None
    if not isinstance(obj, dict):
        raise StreamFormatError("expected a JSON object", lineno)
    return obj
