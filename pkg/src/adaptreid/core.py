"""Domain types and the statistical distance used to score detections."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

DEFAULT_EPS = 1e-6


class ContractViolation(ValueError):
    """Raised when an operation receives inputs outside its contract."""


def as_feature(values: Sequence[float] | np.ndarray, dim: Optional[int] = None) -> np.ndarray:
    """Return ``values`` as a 1-D float64 array, checking length and finiteness."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ContractViolation(f"feature must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ContractViolation("feature must have at least one component")
    if dim is not None and arr.size != dim:
        raise ContractViolation(f"feature has dimension {arr.size}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation("feature contains non-finite components")
    return arr


def l2_normalize(x: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        return x.copy()
    return x / norm


@dataclass
class Detection:
    """One observed person in one frame."""

    frame_index: int
    timestamp: float
    track_id: int
    feature: np.ndarray
    person_id: Optional[int] = None
    bbox: Optional[Tuple[float, float, float, float]] = None

    def __post_init__(self) -> None:
        self.feature = as_feature(self.feature)
        if self.frame_index < 0 or self.track_id < 0:
            raise ContractViolation("frame_index and track_id must be non-negative")


@dataclass
class TargetModel:
    """Per-dimension mean and dispersion of the tracked person's appearance.

    ``sigma`` holds the moving average of element-wise squared deviations and
    is used un-rooted as the distance scale.
    """

    mu: np.ndarray
    sigma: np.ndarray
    n_feat: int = 0
    n_max: int = 100

    @property
    def dim(self) -> int:
        return int(self.mu.size)

    def copy(self) -> "TargetModel":
        return TargetModel(self.mu.copy(), self.sigma.copy(), self.n_feat, self.n_max)


@dataclass
class ThresholdModel:
    """Running statistics of the target's own distances and the derived gate."""

    mu_d: float = 0.0
    sigma_d: float = 0.0
    lambda_d: float = 1.0
    n_dist: int = 0
    n_max: int = 100

    def copy(self) -> "ThresholdModel":
        return ThresholdModel(self.mu_d, self.sigma_d, self.lambda_d, self.n_dist, self.n_max)


class DecisionKind(str, enum.Enum):
    DIRECT_TRACK = "DirectTrack"
    REIDENTIFIED = "Reidentified"
    LOST = "Lost"


@dataclass(frozen=True)
class Decision:
    frame_index: int
    kind: DecisionKind
    track_id: Optional[int]
    distance: Optional[float]
    lambda_snapshot: float
    blacklist_size: int = 0

    def __post_init__(self) -> None:
        if self.kind is DecisionKind.LOST:
            if self.track_id is not None or self.distance is not None:
                raise ContractViolation("Lost decisions carry no track_id or distance")
        elif self.track_id is None:
            raise ContractViolation(f"{self.kind.value} decision requires a track_id")
        if self.kind is DecisionKind.REIDENTIFIED and not self.distance < self.lambda_snapshot:
            raise ContractViolation("Reidentified decision must satisfy distance < lambda")

    @property
    def bound(self) -> bool:
        return self.kind is not DecisionKind.LOST

    def to_dict(self) -> dict:
        return {
            "frame_index": self.frame_index,
            "kind": self.kind.value,
            "track_id": self.track_id,
            "distance": self.distance,
            "lambda_snapshot": self.lambda_snapshot,
            "blacklist_size": self.blacklist_size,
        }


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ContractViolation(f"dimension mismatch: {a.shape} vs {b.shape}")


def statistical_distance(x, model: TargetModel, eps: float = DEFAULT_EPS) -> float:
    """Dimension-normalised, sigma-scaled Euclidean deviation of ``x`` from ``model.mu``.

    Each denominator is floored at ``eps`` so a never-varied dimension does not
    divide by zero.
    """
    if not eps > 0:
        raise ContractViolation("eps must be positive")
    x = as_feature(x, model.dim)
    if model.sigma.shape != model.mu.shape:
        raise ContractViolation("model mu and sigma differ in dimension")
    if not (np.all(np.isfinite(model.mu)) and np.all(np.isfinite(model.sigma))):
        raise ContractViolation("model contains non-finite components")
    z = (x - model.mu) / np.maximum(model.sigma, eps)
    return float(np.sqrt(np.dot(z, z) / x.size))


def elementwise_squared_deviation(mu: np.ndarray, x) -> np.ndarray:
    x = as_feature(x)
    mu = np.asarray(mu, dtype=np.float64)
    _check_pair(mu, x)
    diff = x - mu
    return diff * diff


def scalar_squared_deviation(mu_d: float, d: float) -> float:
    if not (np.isfinite(mu_d) and np.isfinite(d)):
        raise ContractViolation("mu_d and d must be finite")
    diff = float(d) - float(mu_d)
    return diff * diff
