"""Synthetic detection streams with ground truth.

Every person has a latent appearance vector that random-walks frame to frame
and may jump abruptly (a change of clothes). Visible persons emit one noisy
observation of their latent vector per frame. An MOT emulator hands out track
ids: a person keeps its id while continuously visible and, by default, gets a
fresh id after every occlusion.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .core import Detection
from .rng import Xoshiro256StarStar


class ScenarioError(ValueError):
    """Invalid scenario configuration or event request."""


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    num_frames: int = 300
    fps: float = 30.0
    num_persons: int = 3
    feature_dim: int = 256
    base_separation: float = 6.0
    drift_sd: float = 0.005
    obs_noise_sd: float = 1.0
    # (person_index, start_frame, duration_frames)
    occlusion_events: Tuple[Tuple[int, int, int], ...] = ()
    # (person_index, frame, magnitude)
    appearance_changes: Tuple[Tuple[int, int, float], ...] = ()
    id_switch_on_reentry: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "occlusion_events", tuple(tuple(int(v) for v in e) for e in self.occlusion_events))
        object.__setattr__(
            self,
            "appearance_changes",
            tuple((int(p), int(f), float(m)) for p, f, m in self.appearance_changes),
        )

    def violations(self) -> List[str]:
        problems = []
        if not 0 <= self.seed < 2**64:
            problems.append("seed must fit in an unsigned 64-bit integer")
        if self.num_frames < 1:
            problems.append("num_frames must be positive")
        if not self.fps > 0:
            problems.append("fps must be positive")
        if self.num_persons < 1:
            problems.append("num_persons must be positive")
        if self.feature_dim < 1:
            problems.append("feature_dim must be positive")
        if self.num_persons > self.feature_dim:
            problems.append("num_persons cannot exceed feature_dim")
        if not self.base_separation > 0:
            problems.append("base_separation must be positive")
        if self.drift_sd < 0:
            problems.append("drift_sd must be non-negative")
        if self.obs_noise_sd < 0:
            problems.append("obs_noise_sd must be non-negative")
        for i, event in enumerate(self.occlusion_events):
            if len(event) != 3:
                problems.append(f"occlusion_events[{i}] must be (person, start, duration)")
                continue
            person, start, duration = event
            if not 0 <= person < self.num_persons:
                problems.append(f"occlusion_events[{i}]: unknown person {person}")
            if not 0 <= start < self.num_frames:
                problems.append(f"occlusion_events[{i}]: start frame {start} out of range")
            if duration < 1:
                problems.append(f"occlusion_events[{i}]: duration must be >= 1")
        for i, (person, frame, magnitude) in enumerate(self.appearance_changes):
            if not 0 <= person < self.num_persons:
                problems.append(f"appearance_changes[{i}]: unknown person {person}")
            if not 0 <= frame < self.num_frames:
                problems.append(f"appearance_changes[{i}]: frame {frame} out of range")
            if magnitude < 0 or not np.isfinite(magnitude):
                problems.append(f"appearance_changes[{i}]: magnitude must be finite and >= 0")
        return problems

    def validate(self) -> None:
        problems = self.violations()
        if problems:
            raise ScenarioError("invalid scenario config: " + "; ".join(problems))

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        unknown = sorted(set(data) - set(cls.__dataclass_fields__))
        if unknown:
            raise ScenarioError(f"unknown scenario config fields: {', '.join(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["occlusion_events"] = [list(e) for e in self.occlusion_events]
        d["appearance_changes"] = [list(e) for e in self.appearance_changes]
        return d


def lab_default(seed: int = 0, **overrides) -> ScenarioConfig:
    """Three people, 3 minutes at 30 fps, the target (person 0) leaves six times
    and changes clothes twice while in view."""
    dim = overrides.get("feature_dim", 256)
    noise = overrides.get("obs_noise_sd", 1.0)
    params = dict(
        seed=seed,
        num_frames=5400,
        fps=30.0,
        num_persons=3,
        feature_dim=dim,
        base_separation=6.0,
        drift_sd=0.005,
        obs_noise_sd=noise,
        occlusion_events=(
            (0, 600, 60),
            (0, 1400, 90),
            (0, 2200, 120),
            (0, 3000, 150),
            (0, 3800, 75),
            (0, 4600, 105),
        ),
        appearance_changes=(
            (0, 1000, 2.0 * noise * np.sqrt(dim)),
            (0, 3400, 2.0 * noise * np.sqrt(dim)),
        ),
        id_switch_on_reentry=True,
    )
    params.update(overrides)
    return ScenarioConfig(**params)


PRESETS = {"lab-default": lab_default}


@dataclass
class Scenario:
    config: ScenarioConfig
    frames: List[List[Detection]]
    prng_name: str = ""
    # (frame, person_a, person_b) for every injected id swap, in order
    swaps: List[Tuple[int, int, int]] = field(default_factory=list)

    @property
    def ground_truth(self) -> List[Dict[int, int]]:
        """Per frame, person index -> track id for every visible person."""
        return [{det.person_id: det.track_id for det in frame} for frame in self.frames]

    def visible(self, frame: int, person: int) -> bool:
        return any(det.person_id == person for det in self.frames[frame])

    def track_id_of(self, frame: int, person: int) -> Optional[int]:
        for det in self.frames[frame]:
            if det.person_id == person:
                return det.track_id
        return None


def _centers(rng: Xoshiro256StarStar, cfg: ScenarioConfig) -> np.ndarray:
    """Centers on a regular simplex: pairwise distance exactly base_separation * obs_noise_sd."""
    p, dim = cfg.num_persons, cfg.feature_dim
    base = rng.normal(dim)
    raw = rng.normal(p * dim).reshape(p, dim)
    # Gram-Schmidt keeps the draw order explicit and avoids LAPACK in the hot path
    basis = np.zeros_like(raw)
    for i in range(p):
        v = raw[i].copy()
        for j in range(i):
            v -= np.dot(v, basis[j]) * basis[j]
        basis[i] = v / np.linalg.norm(v)
    # noiseless scenarios fall back to unit scale so persons stay distinct
    spacing = cfg.base_separation * (cfg.obs_noise_sd if cfg.obs_noise_sd > 0 else 1.0)
    return base + basis * (spacing / np.sqrt(2.0))


def generate(config: ScenarioConfig) -> Scenario:
    """Draw a scenario; the same config always yields the same bits."""
    config.validate()
    rng = Xoshiro256StarStar(config.seed)
    p, f_count, dim = config.num_persons, config.num_frames, config.feature_dim

    centers = _centers(rng, config)
    steps = rng.normal(f_count * p * dim).reshape(f_count, p, dim) * config.drift_sd
    steps[0] = 0.0
    latent = centers[None, :, :] + np.cumsum(steps, axis=0)
    for person, frame, magnitude in config.appearance_changes:
        direction = rng.normal(dim)
        latent[frame:, person] += direction * (magnitude / np.linalg.norm(direction))
    noise = rng.normal(f_count * p * dim).reshape(f_count, p, dim) * config.obs_noise_sd
    observed = latent + noise

    visible = np.ones((f_count, p), dtype=bool)
    for person, start, duration in config.occlusion_events:
        visible[start : start + duration, person] = False

    track = _assign_track_ids(visible, config.id_switch_on_reentry)
    frames: List[List[Detection]] = []
    for f in range(f_count):
        ts = f / config.fps
        dets = [
            Detection(f, ts, int(track[f, person]), observed[f, person].copy(), person_id=person)
            for person in range(p)
            if visible[f, person]
        ]
        dets.sort(key=lambda det: det.track_id)
        frames.append(dets)
    return Scenario(config, frames, rng.name)


def _assign_track_ids(visible: np.ndarray, fresh_on_reentry: bool) -> np.ndarray:
    f_count, p = visible.shape
    track = np.full((f_count, p), -1, dtype=np.int64)
    current = [-1] * p
    next_id = 1
    for f in range(f_count):
        for person in range(p):
            if not visible[f, person]:
                continue
            was_visible = f > 0 and visible[f - 1, person]
            if current[person] < 0 or (fresh_on_reentry and not was_visible):
                current[person] = next_id
                next_id += 1
            track[f, person] = current[person]
    return track


def inject_distractor_swap(scenario: Scenario, frame: int, person_a: int, person_b: int) -> Scenario:
    """Exchange the MOT track ids of two persons from ``frame`` onwards.

    Both must be visible at ``frame``. Ids are relabelled for every later frame,
    so whoever inherits an id keeps it until the MOT would have dropped it.
    """
    problems = []
    if not 0 <= frame < len(scenario.frames):
        raise ScenarioError(f"swap frame {frame} out of range")
    for person in (person_a, person_b):
        if not scenario.visible(frame, person):
            problems.append(f"person {person} not visible at frame {frame}")
    if problems:
        raise ScenarioError("; ".join(problems))
    swaps = scenario.swaps + [(frame, person_a, person_b)]
    if person_a == person_b:
        return Scenario(scenario.config, [list(fr) for fr in scenario.frames], scenario.prng_name, swaps)

    id_a = scenario.track_id_of(frame, person_a)
    id_b = scenario.track_id_of(frame, person_b)
    mapping = {id_a: id_b, id_b: id_a}
    frames = []
    for f, dets in enumerate(scenario.frames):
        if f < frame:
            frames.append(list(dets))
            continue
        new = [replace(det, track_id=mapping.get(det.track_id, det.track_id)) for det in dets]
        new.sort(key=lambda det: det.track_id)
        frames.append(new)
    return Scenario(scenario.config, frames, scenario.prng_name, swaps)
