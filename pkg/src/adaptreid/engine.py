"""Per-frame target re-identification state machine.

Each frame either keeps the MOT track the target is bound to (direct path),
rebinds to the closest non-blacklisted detection whose distance is under the
adaptive gate, or reports the target lost. Whenever a detection is chosen,
its feature and distance update the appearance model and the gate.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import asdict, dataclass
from typing import Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .core import (
    DEFAULT_EPS,
    ContractViolation,
    Decision,
    DecisionKind,
    Detection,
    TargetModel,
    ThresholdModel,
    as_feature,
    elementwise_squared_deviation,
    l2_normalize,
    scalar_squared_deviation,
    statistical_distance,
)
from .dema import DemaState, dema_update, delta_f, delta_lambda, delta_lambda_fallback


@dataclass(frozen=True)
class EngineConfig:
    feature_dim: int
    eps_sigma: float = DEFAULT_EPS
    n_max: int = 100
    blacklist_stable_frames: int = 30
    lambda_init: float = 1.0
    normalize_features: bool = False
    # Switches used by the ablation experiments.
    use_blacklist: bool = True
    damping: bool = True
    # The gate statistics ignore distances until the appearance model has seen
    # this many samples; earlier sigma estimates are near zero and blow d up.
    threshold_warmup: int = 10

    def __post_init__(self) -> None:
        problems = []
        if self.feature_dim < 1:
            problems.append("feature_dim must be positive")
        if not self.eps_sigma > 0:
            problems.append("eps_sigma must be positive")
        if self.n_max < 1:
            problems.append("n_max must be positive")
        if self.blacklist_stable_frames < 1:
            problems.append("blacklist_stable_frames must be positive")
        if not self.lambda_init > 0:
            problems.append("lambda_init must be positive")
        if not 0 <= self.threshold_warmup <= self.n_max:
            problems.append("threshold_warmup must lie in [0, n_max]")
        if problems:
            raise ContractViolation("; ".join(problems))

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ContractViolation(f"unknown engine config fields: {', '.join(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


class ReidEngine:
    """Single-target re-identification engine driven one frame at a time."""

    def __init__(self, config: EngineConfig, initial_id: int, initial_feature) -> None:
        self.config = config
        x = self._prepare(initial_feature)
        self.tracked_id = int(initial_id)
        self.target = TargetModel(mu=x.copy(), sigma=np.zeros_like(x), n_feat=1, n_max=config.n_max)
        self.threshold = ThresholdModel(lambda_d=config.lambda_init, n_max=config.n_max)
        self.blacklist: Set[int] = set()
        self.stable_run = 0
        # diagnostics, untouched on Lost frames
        self.lambda_fallbacks = 0

    def _prepare(self, feature) -> np.ndarray:
        x = as_feature(feature, self.config.feature_dim)
        if self.config.normalize_features:
            x = l2_normalize(x)
        return x

    def distance(self, x: np.ndarray) -> float:
        return statistical_distance(x, self.target, self.config.eps_sigma)

    def reidentify(self, candidates: Iterable[Tuple[int, np.ndarray]]) -> Optional[Tuple[int, float]]:
        """Closest non-blacklisted candidate strictly under the gate, or None.

        Equal distances resolve to the smaller track id.
        """
        best: Optional[Tuple[float, int]] = None
        for track_id, x in candidates:
            if track_id in self.blacklist:
                continue
            d = self.distance(x)
            if best is None or (d, track_id) < best:
                best = (d, track_id)
        if best is None or not best[0] < self.threshold.lambda_d:
            return None
        return best[1], best[0]

    def update_target(self, x: np.ndarray, d: float) -> None:
        delta = delta_f(d) if self.config.damping else 1.0
        t = self.target
        var = elementwise_squared_deviation(t.mu, x)
        mu = dema_update(DemaState(t.mu, t.n_feat, t.n_max), x, delta)
        sigma = dema_update(DemaState(t.sigma, t.n_feat, t.n_max), var, delta)
        # weights above 1 (small delta, few updates) can overshoot below zero
        self.target = TargetModel(mu.value, np.maximum(sigma.value, 0.0), mu.n, t.n_max)

    def update_threshold(self, d: float) -> None:
        th = self.threshold
        if self.config.damping:
            if delta_lambda_fallback(th.lambda_d):
                self.lambda_fallbacks += 1
            delta = delta_lambda(d, th.lambda_d)
        else:
            delta = 1.0
        # before the first distance there is no mean to deviate from
        var_d = scalar_squared_deviation(th.mu_d, d) if th.n_dist > 0 else 0.0
        mu_d = dema_update(DemaState(th.mu_d, th.n_dist, th.n_max), d, delta)
        sigma_d = dema_update(DemaState(th.sigma_d, th.n_dist, th.n_max), var_d, delta)
        self.threshold = ThresholdModel(
            mu_d=mu_d.value,
            sigma_d=sigma_d.value,
            lambda_d=mu_d.value + 2.0 * sigma_d.value,
            n_dist=mu_d.n,
            n_max=th.n_max,
        )

    def update_models(self, x, d: float) -> None:
        """Fold a chosen detection into the appearance model, then the gate."""
        x = self._prepare(x)
        if not (np.isfinite(d) and d >= 0):
            raise ContractViolation("distance must be finite and non-negative")
        self.update_target(x, d)
        self.update_threshold(d)

    def process_frame(self, detections: Sequence[Detection], frame_index: Optional[int] = None) -> Decision:
        """Decide on one frame and update the engine in place.

        ``frame_index`` labels the decision when ``detections`` is empty.
        """
        seen = _validate_frame(detections, self.config.feature_dim)
        if seen is not None:
            frame_index = seen
        elif frame_index is None:
            frame_index = -1
        lam = self.threshold.lambda_d
        features = [(det.track_id, self._prepare(det.feature)) for det in detections]

        chosen: Optional[Tuple[int, np.ndarray, float]] = None
        kind = DecisionKind.LOST
        for track_id, x in features:
            if track_id == self.tracked_id:
                chosen = (track_id, x, self.distance(x))
                kind = DecisionKind.DIRECT_TRACK
                break
        if chosen is None:
            hit = self.reidentify(features)
            if hit is not None:
                track_id, d = hit
                x = next(f for t, f in features if t == track_id)
                chosen = (track_id, x, d)
                kind = DecisionKind.REIDENTIFIED

        if chosen is None:
            return Decision(frame_index, kind, None, None, lam, len(self.blacklist))

        track_id, x, d = chosen
        self.update_target(x, d)
        if self.target.n_feat >= self.config.threshold_warmup:
            self.update_threshold(d)

        if kind is DecisionKind.DIRECT_TRACK:
            self.stable_run += 1
            if self.config.use_blacklist and self.stable_run >= self.config.blacklist_stable_frames:
                self.blacklist.update(t for t, _ in features if t != track_id)
        else:
            self.tracked_id = track_id
            self.stable_run = 0
            self.blacklist.discard(track_id)
        return Decision(frame_index, kind, track_id, d, lam, len(self.blacklist))

    def copy(self) -> "ReidEngine":
        other = object.__new__(ReidEngine)
        other.config = self.config
        other.tracked_id = self.tracked_id
        other.target = self.target.copy()
        other.threshold = self.threshold.copy()
        other.blacklist = set(self.blacklist)
        other.stable_run = self.stable_run
        other.lambda_fallbacks = self.lambda_fallbacks
        return other

    def state_hash(self) -> str:
        h = hashlib.sha256()
        h.update(struct.pack("<qqq", self.tracked_id, self.stable_run, self.target.n_feat))
        h.update(self.target.mu.tobytes())
        h.update(self.target.sigma.tobytes())
        th = self.threshold
        h.update(struct.pack("<dddq", th.mu_d, th.sigma_d, th.lambda_d, th.n_dist))
        for t in sorted(self.blacklist):
            h.update(struct.pack("<q", t))
        return h.hexdigest()


def new_engine(config: EngineConfig, initial_id: int, initial_feature) -> ReidEngine:
    return ReidEngine(config, initial_id, initial_feature)


def _validate_frame(detections: Sequence[Detection], dim: int) -> Optional[int]:
    if not detections:
        return None
    frames = {det.frame_index for det in detections}
    if len(frames) != 1:
        raise ContractViolation(f"detections span several frames: {sorted(frames)}")
    ids = [det.track_id for det in detections]
    if len(set(ids)) != len(ids):
        raise ContractViolation(f"duplicate track ids in frame {ids}")
    for det in detections:
        if det.feature.size != dim:
            raise ContractViolation(f"track {det.track_id}: feature dimension {det.feature.size}, expected {dim}")
    return frames.pop()
