"""Drive engines over detection streams and score them against ground truth."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .core import Decision, DecisionKind, Detection
from .engine import EngineConfig, ReidEngine

Frames = Sequence[Sequence[Detection]]


class EvaluationError(ValueError):
    pass


@dataclass
class RunMetrics:
    target_person: int
    fps: float
    total_frames: int = 0
    mot_tracking_lengths: List[float] = field(default_factory=list)
    reid_delays: List[float] = field(default_factory=list)
    mot_error_count: int = 0
    reid_count: int = 0
    misid_count: int = 0
    lost_frames: int = 0
    direct_frames: int = 0
    reidentified_frames: int = 0
    reentries: int = 0
    unrecovered_reentries: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunMetrics":
        return cls(**data)


@dataclass
class RunResult:
    decisions: List[Decision]
    metrics: RunMetrics


def initial_binding(frames: Frames, person: int) -> Tuple[int, Detection]:
    """Track id and detection of ``person`` in the first frame."""
    if not frames:
        raise EvaluationError("empty stream")
    for det in frames[0]:
        if det.person_id == person:
            return det.track_id, det
    raise EvaluationError(f"person {person} is not present in the first frame")


def drive(engine: ReidEngine, frames: Frames) -> List[Decision]:
    return [engine.process_frame(dets, frame_index=f) for f, dets in enumerate(frames)]


def run(frames: Frames, config: EngineConfig, target_person: int, fps: float) -> RunResult:
    """Track ``target_person`` from the first frame to the end of the stream."""
    track_id, det = initial_binding(frames, target_person)
    engine = ReidEngine(config, track_id, det.feature)
    decisions = drive(engine, frames)
    return RunResult(decisions, compute_metrics(frames, decisions, target_person, fps))


def persons_at_start(frames: Frames) -> List[int]:
    if not frames:
        return []
    return sorted(det.person_id for det in frames[0] if det.person_id is not None)


def sweep(frames: Frames, config: EngineConfig, fps: float, workers: int = 1) -> List[RunResult]:
    """One independent run per person present in the first frame."""
    persons = persons_at_start(frames)
    if not persons:
        raise EvaluationError("no ground-truth persons in the first frame")
    if workers <= 1:
        return [run(frames, config, p, fps) for p in persons]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: run(frames, config, p, fps), persons))


def compute_metrics(frames: Frames, decisions: Sequence[Decision], target: int, fps: float) -> RunMetrics:
    if len(frames) != len(decisions):
        raise EvaluationError("one decision per frame required")
    owner: List[Dict[int, Optional[int]]] = [{det.track_id: det.person_id for det in dets} for dets in frames]
    target_track: List[Optional[int]] = [
        next((det.track_id for det in dets if det.person_id == target), None) for dets in frames
    ]
    m = RunMetrics(target_person=target, fps=fps, total_frames=len(frames))

    # MOT side: maximal runs on one track id, and id changes between sightings
    run_len = 0
    prev_present: Optional[int] = None
    for f, tid in enumerate(target_track):
        if tid is not None and f > 0 and target_track[f - 1] == tid:
            run_len += 1
        else:
            if run_len:
                m.mot_tracking_lengths.append(run_len / fps)
            run_len = 1 if tid is not None else 0
        if tid is not None:
            if prev_present is not None and tid != prev_present:
                m.mot_error_count += 1
            prev_present = tid
    if run_len:
        m.mot_tracking_lengths.append(run_len / fps)

    bound_to_target = []
    for f, dec in enumerate(decisions):
        hit = False
        if dec.kind is DecisionKind.LOST:
            m.lost_frames += 1
        else:
            person = owner[f].get(dec.track_id)
            hit = person == target
            if not hit:
                m.misid_count += 1
            if dec.kind is DecisionKind.DIRECT_TRACK:
                m.direct_frames += 1
            else:
                m.reidentified_frames += 1
                if hit:
                    m.reid_count += 1
        bound_to_target.append(hit)

    n = len(frames)
    for f in range(1, n):
        if target_track[f] is None or target_track[f - 1] is not None:
            continue
        m.reentries += 1
        g = f
        while g < n and target_track[g] is not None and not bound_to_target[g]:
            g += 1
        if g < n and target_track[g] is not None:
            m.reid_delays.append((g - f + 1) / fps)
        else:
            m.unrecovered_reentries += 1
    return m


@dataclass(frozen=True)
class Aggregate:
    minimum: float
    mean: float
    maximum: float
    count: int


def aggregate(values: Sequence[float]) -> Optional[Aggregate]:
    if not values:
        return None
    return Aggregate(min(values), math.fsum(values) / len(values), max(values), len(values))


SUMMARY_STATISTICS = ("tracking_length_s", "reid_delay_s", "mot_error_count", "reid_count", "misid_count", "lost_frames")


def summarize(runs: Sequence[RunMetrics]) -> Dict[str, Optional[Aggregate]]:
    """Min/mean/max across runs; per-event lists are pooled, counts are per run."""
    if not runs:
        raise EvaluationError("at least one run is required")
    return {
        "tracking_length_s": aggregate([v for r in runs for v in r.mot_tracking_lengths]),
        "reid_delay_s": aggregate([v for r in runs for v in r.reid_delays]),
        "mot_error_count": aggregate([r.mot_error_count for r in runs]),
        "reid_count": aggregate([r.reid_count for r in runs]),
        "misid_count": aggregate([r.misid_count for r in runs]),
        "lost_frames": aggregate([r.lost_frames for r in runs]),
    }


# --- damping comparison -------------------------------------------------------


@dataclass
class TraceRow:
    frame_index: int
    distance: Optional[float]
    mu_d: float
    sigma_d: float
    lambda_d: float


TRACE_COLUMNS = ("frame_index", "distance", "mu_d", "sigma_d", "lambda_d")


def _trace_engine(engine: ReidEngine, frames: Frames) -> List[TraceRow]:
    rows = []
    for f, dets in enumerate(frames):
        dec = engine.process_frame(dets, frame_index=f)
        th = engine.threshold
        rows.append(TraceRow(f, dec.distance, th.mu_d, th.sigma_d, th.lambda_d))
    return rows


def compare_damping(
    frames: Frames, config: EngineConfig, target_person: int
) -> Tuple[List[TraceRow], List[TraceRow]]:
    """Per-frame gate statistics with damping on and with both damping factors pinned to 1."""
    track_id, det = initial_binding(frames, target_person)
    damped = ReidEngine(replace(config, damping=True), track_id, det.feature)
    plain = ReidEngine(replace(config, damping=False), track_id, det.feature)
    return _trace_engine(damped, frames), _trace_engine(plain, frames)


def threshold_trace(distances: Sequence[float], damping: bool = True, n_max: int = 100) -> List[TraceRow]:
    """Feed a raw distance sequence through the gate statistics alone."""
    engine = ReidEngine(EngineConfig(feature_dim=1, n_max=n_max, damping=damping), 0, [0.0])
    rows = []
    for k, d in enumerate(distances):
        engine.update_threshold(float(d))
        th = engine.threshold
        rows.append(TraceRow(k, float(d), th.mu_d, th.sigma_d, th.lambda_d))
    return rows
