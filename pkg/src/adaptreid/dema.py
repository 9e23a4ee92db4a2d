"""Damped exponential moving average.

The weight given to a new sample is ``2 / (n * delta + 1)`` where ``n`` counts
the updates applied so far (capped at ``n_max``) and ``delta`` is a per-update
damping factor. ``delta > 1`` makes the average more sluggish, ``delta < 1``
makes it follow new samples more eagerly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import ContractViolation

DELTA_F_FLOOR = 1e-3

Value = Union[float, np.ndarray]


@dataclass(frozen=True, slots=True)
class DemaState:
    value: Value
    n: int = 0
    n_max: int = 100

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise ContractViolation("n_max must be positive")
        if not 0 <= self.n <= self.n_max:
            raise ContractViolation(f"n={self.n} outside [0, {self.n_max}]")


def alpha_damp(n: int, delta: float) -> float:
    if not delta > 0:
        raise ContractViolation(f"damping factor must be positive, got {delta}")
    if n < 0:
        raise ContractViolation("update count must be non-negative")
    return 2.0 / (n * delta + 1.0)


def dema_update(state: DemaState, psi: Value, delta: float = 1.0) -> DemaState:
    """Fold ``psi`` into ``state``.

    The first update (``n == 0``) assigns ``psi`` outright; the raw weight of 2
    at that point would extrapolate away from the stale initial value.
    """
    n, n_max, value = state.n, state.n_max, state.value
    alpha = alpha_damp(n, delta)
    if isinstance(value, np.ndarray):
        psi_arr = np.asarray(psi, dtype=np.float64)
        if psi_arr.shape != value.shape:
            raise ContractViolation(f"shape mismatch: {psi_arr.shape} vs {value.shape}")
        if not np.all(np.isfinite(psi_arr)):
            raise ContractViolation("psi contains non-finite components")
        if n == 0:
            new = psi_arr.copy()
        else:
            new = alpha * psi_arr + (1.0 - alpha) * value
    else:
        if isinstance(psi, (np.ndarray, list, tuple)) and np.ndim(psi) != 0:
            raise ContractViolation("scalar state requires a scalar psi")
        psi_f = float(psi)
        if not math.isfinite(psi_f):
            raise ContractViolation("psi must be finite")
        new = psi_f if n == 0 else alpha * psi_f + (1.0 - alpha) * float(value)
    return DemaState(new, n + 1 if n < n_max else n_max, n_max)


def delta_f(d: float) -> float:
    """Damping factor for the appearance model: ``min(1, d/2)``, floored above zero."""
    if d < 0:
        raise ContractViolation("distance must be non-negative")
    return max(min(1.0, d / 2.0), DELTA_F_FLOOR)


def delta_lambda(d: float, lambda_d: float) -> float:
    """Damping factor for the threshold statistics: ``max(1, 2 d / lambda_d)``.

    Returns 1.0 when ``lambda_d`` is not positive; callers that need to know
    check :func:`delta_lambda_fallback`.
    """
    if d < 0:
        raise ContractViolation("distance must be non-negative")
    if delta_lambda_fallback(lambda_d):
        return 1.0
    return max(1.0, 2.0 * d / lambda_d)


def delta_lambda_fallback(lambda_d: float) -> bool:
    return not lambda_d > 0
