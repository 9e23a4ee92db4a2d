"""Independent reference computations used by the tests.

Everything here is written from scratch (plain lists and math, numpy only for
the closed-form weights) so it shares no code path with the implementation
under test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np


def distance_loop(x: Sequence[float], mu: Sequence[float], sigma: Sequence[float], eps: float = 1e-6) -> float:
    total = 0.0
    for xi, mi, si in zip(x, mu, sigma):
        term = (xi - mi) / max(si, eps)
        total += term * term
    return math.sqrt(total / len(x))


def dema_from_history(inputs: Sequence, deltas: Sequence[float], n_max: int) -> float:
    """Closed form of the damped average after ``len(inputs)`` updates.

    Update k (0-based) sees counter min(k, n_max); update 0 assigns outright.
    The result is the explicit weighted sum of every input: input k gets
    alpha_k times the product of (1 - alpha_j) over all later updates j.
    """
    k_total = len(inputs)
    n = np.minimum(np.arange(k_total), n_max).astype(np.float64)
    alphas = 2.0 / (n * np.asarray(deltas, dtype=np.float64) + 1.0)
    alphas[0] = 1.0
    keep = 1.0 - alphas
    # tails[k] = prod_{j > k} keep[j], multiplied from the newest update backwards
    tails = np.ones(k_total)
    tails[:-1] = np.cumprod(keep[:0:-1])[::-1]
    weights = alphas * tails
    return math.fsum((weights * np.asarray(inputs, dtype=np.float64)).tolist())


def exhaustive_choice(
    candidates: Sequence[Tuple[int, Sequence[float]]],
    tracked_id: int,
    blacklist: Set[int],
    mu: Sequence[float],
    sigma: Sequence[float],
    lam: float,
    eps: float,
) -> Tuple[str, Optional[int], Optional[float]]:
    """Decision for one frame by scanning every candidate from scratch."""
    for tid, x in candidates:
        if tid == tracked_id:
            return "DirectTrack", tid, distance_loop(x, mu, sigma, eps)
    scored = [(distance_loop(x, mu, sigma, eps), tid) for tid, x in candidates if tid not in blacklist]
    admissible = [s for s in scored if s[0] < lam]
    if not admissible:
        return "Lost", None, None
    best_d = min(d for d, _ in admissible)
    best_id = min(tid for d, tid in admissible if d == best_d)
    return "Reidentified", best_id, best_d


@dataclass
class ReferenceEngine:
    """Straight-line transcription of the per-frame procedure on Python lists."""

    mu: List[float]
    sigma: List[float]
    tracked_id: int
    n_max: int = 100
    eps: float = 1e-6
    lambda_init: float = 1.0
    stable_frames: int = 30
    warmup: int = 10
    n_feat: int = 1
    mu_d: float = 0.0
    sigma_d: float = 0.0
    n_dist: int = 0
    blacklist: Set[int] = field(default_factory=set)
    stable_run: int = 0

    def __post_init__(self) -> None:
        self.lam = self.lambda_init

    def step(self, candidates: Sequence[Tuple[int, Sequence[float]]]):
        kind, tid, d = exhaustive_choice(
            candidates, self.tracked_id, self.blacklist, self.mu, self.sigma, self.lam, self.eps
        )
        if kind == "Lost":
            return kind, None, None
        x = dict(candidates)[tid]

        # appearance model
        df = max(min(1.0, d / 2.0), 1e-3)
        a = 2.0 / (self.n_feat * df + 1.0)
        var = [(xi - mi) ** 2 for xi, mi in zip(x, self.mu)]
        self.mu = [a * xi + (1 - a) * mi for xi, mi in zip(x, self.mu)]
        self.sigma = [max(a * vi + (1 - a) * si, 0.0) for vi, si in zip(var, self.sigma)]
        self.n_feat = min(self.n_feat + 1, self.n_max)

        # gate statistics
        if self.n_feat >= self.warmup:
            if self.n_dist == 0:
                self.mu_d, self.sigma_d = d, 0.0
            else:
                dl = max(1.0, 2.0 * d / self.lam) if self.lam > 0 else 1.0
                b = 2.0 / (self.n_dist * dl + 1.0)
                var_d = (d - self.mu_d) ** 2
                self.mu_d = b * d + (1 - b) * self.mu_d
                self.sigma_d = b * var_d + (1 - b) * self.sigma_d
            self.n_dist = min(self.n_dist + 1, self.n_max)
            self.lam = self.mu_d + 2.0 * self.sigma_d

        if kind == "DirectTrack":
            self.stable_run += 1
            if self.stable_run >= self.stable_frames:
                self.blacklist |= {t for t, _ in candidates if t != tid}
        else:
            self.tracked_id = tid
            self.stable_run = 0
            self.blacklist.discard(tid)
        return kind, tid, d


def feature_at_distance(mu, sigma, d: float, axis: int = 0, sign: float = 1.0) -> List[float]:
    """Displace ``mu`` along one axis so the scaled distance equals ``d``.

    With a single non-zero term the distance is |t| / (sigma_axis * sqrt(D)),
    so t = d * sigma_axis * sqrt(D).
    """
    x = list(mu)
    x[axis] += sign * d * sigma[axis] * math.sqrt(len(mu))
    return x
