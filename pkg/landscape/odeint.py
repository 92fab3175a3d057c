"""
Explicit Runge-Kutta integration: adaptive Dormand-Prince 5(4) and fixed-step RK4.

Every dynamical computation in the package (state, transition matrix, homotopy
flow) goes through `steps` or `integrate`. Both are pure functions of their
arguments and hold no module-level mutable state.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from landscape.config import DEFAULT_ABS_TOL, DEFAULT_MAX_STEPS, DEFAULT_REL_TOL
from landscape.errors import IntegrationError, StepLimitExceededError, StepUnderflowError

logger = logging.getLogger(__name__)

VectorField = Callable[[float, np.ndarray], np.ndarray]

# Dormand-Prince 5(4) tableau (Hairer, Norsett & Wanner, p. 178)
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
)
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# 5th-order weights minus embedded 4th-order weights
_DP_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ERROR_EXPONENT = -1.0 / 5.0


class Method(str, Enum):
    ADAPTIVE_RK45 = "adaptive-rk45"
    FIXED_RK4 = "fixed-rk4"


class IntegratorConfig(BaseModel):
    """Solver choice and error control for one integration."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    method: Method = Method.ADAPTIVE_RK45
    rel_tol: float = Field(DEFAULT_REL_TOL, gt=0)
    abs_tol: float = Field(DEFAULT_ABS_TOL, gt=0)
    # adaptive: first trial step (auto when None); fixed: the step size (span/1000 when None)
    initial_step: Optional[float] = Field(None, gt=0)
    max_steps: int = Field(DEFAULT_MAX_STEPS, ge=1)

    def tolerance_scale(self, magnitude: float) -> float:
        """Local error allowance rel_tol*|x| + abs_tol for a state of the given size."""
        return self.rel_tol * abs(magnitude) + self.abs_tol


@dataclass(frozen=True)
class DenseOutput:
    """Accepted-step samples of a solution with linear interpolation between them."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        grid = np.array(self.grid, dtype=float)
        values = np.array(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("dense output needs at least two grid times")
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != grid.size:
            raise ValueError(
                f"values length {values.shape[0]} != grid length {grid.size}"
            )
        diffs = np.diff(grid)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("dense output grid must be strictly monotone")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def start(self) -> float:
        return float(self.grid[0])

    @property
    def end(self) -> float:
        return float(self.grid[-1])

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return self.grid.size

    def __call__(self, t: float) -> np.ndarray:
        grid, values = self.grid, self.values
        if grid[0] > grid[-1]:
            grid, values = grid[::-1], values[::-1]
        lo, hi = grid[0], grid[-1]
        slack = 64 * np.finfo(float).eps * max(abs(lo), abs(hi), 1.0)
        if t < lo - slack or t > hi + slack:
            raise ValueError(f"t={t!r} outside dense output span [{lo}, {hi}]")
        k = int(np.searchsorted(grid, t, side="right")) - 1
        k = min(max(k, 0), grid.size - 2)
        t0, t1 = grid[k], grid[k + 1]
        theta = min(max((t - t0) / (t1 - t0), 0.0), 1.0)
        if theta == 0.0:
            return values[k]
        if theta == 1.0:
            return values[k + 1]
        return (1.0 - theta) * values[k] + theta * values[k + 1]

    def sample(self, times: Iterable[float]) -> np.ndarray:
        """Interpolated values at each of `times`, stacked row-wise."""
        return np.vstack([self(float(t)) for t in times])


def _stops(t0: float, t1: float, breakpoints: Iterable[float], direction: float) -> List[float]:
    interior = sorted(
        {float(b) for b in breakpoints if direction * (b - t0) > 0 and direction * (t1 - b) > 0},
        reverse=direction < 0,
    )
    return interior + [t1]


def _scaled_rms(err: np.ndarray, x: np.ndarray, x_new: np.ndarray, rtol: float, atol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(x), np.abs(x_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _rk4_step(rhs: VectorField, t: float, x: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(t, x)
    k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2)
    k4 = rhs(t + h, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _dopri_step(
    rhs: VectorField, t: float, x: np.ndarray, h: float, f0: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One Dormand-Prince step; returns (x_new, rhs at x_new, error estimate)."""
    k = np.empty((7, x.size))
    k[0] = f0
    for i in range(1, 6):
        k[i] = rhs(t + _DP_C[i] * h, x + h * (_DP_A[i] @ k[:i]))
    x_new = x + h * (_DP_B @ k[:6])
    k[6] = rhs(t + h, x_new)
    return x_new, k[6].copy(), h * (_DP_E @ k)


def _initial_step(
    rhs: VectorField,
    t0: float,
    x0: np.ndarray,
    f0: np.ndarray,
    direction: float,
    span: float,
    config: IntegratorConfig,
) -> float:
    # Hairer-Wanner starting step heuristic (order 5 method)
    scale = config.abs_tol + np.abs(x0) * config.rel_tol
    d0 = float(np.sqrt(np.mean((x0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = np.asarray(rhs(t0 + direction * h0, x0 + direction * h0 * f0), dtype=float)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 5.0)
    return min(100.0 * h0, h1, span)


def _fixed_rk4(
    rhs: VectorField,
    t0: float,
    x: np.ndarray,
    stops: Sequence[float],
    span: float,
    config: IntegratorConfig,
) -> Iterator[Tuple[float, np.ndarray]]:
    h_target = config.initial_step or span / 1000.0
    taken = 0
    t = t0
    for stop in stops:
        seg_start = t
        n = max(1, math.ceil(abs(stop - seg_start) / h_target - 1e-9))
        h = (stop - seg_start) / n
        for i in range(n):
            if taken >= config.max_steps:
                raise StepLimitExceededError(
                    f"fixed-rk4 exceeded max_steps={config.max_steps}", t
                )
            x_new = _rk4_step(rhs, t, x, h)
            if not np.all(np.isfinite(x_new)):
                raise IntegrationError("non-finite state in fixed-rk4 step", t)
            t = stop if i == n - 1 else seg_start + (i + 1) * h
            x = x_new
            taken += 1
            yield t, x


def _adaptive_rk45(
    rhs: VectorField,
    t0: float,
    x: np.ndarray,
    stops: Sequence[float],
    direction: float,
    span: float,
    config: IntegratorConfig,
) -> Iterator[Tuple[float, np.ndarray]]:
    rtol, atol = config.rel_tol, config.abs_tol
    f = np.asarray(rhs(t0, x), dtype=float)
    h_abs = config.initial_step or _initial_step(rhs, t0, x, f, direction, span, config)
    taken = 0
    t = t0
    for stop in stops:
        while t != stop:
            if taken >= config.max_steps:
                raise StepLimitExceededError(
                    f"adaptive-rk45 exceeded max_steps={config.max_steps}", t
                )
            remaining = abs(stop - t)
            min_step = 16.0 * np.spacing(max(abs(t), abs(stop)))
            while True:
                if h_abs < min_step:
                    raise StepUnderflowError("step size underflow", t)
                land = h_abs >= remaining
                t_new = stop if land else t + direction * h_abs
                h = t_new - t
                x_new, f_new, err = _dopri_step(rhs, t, x, h, f)
                err_norm = _scaled_rms(err, x, x_new, rtol, atol)
                if math.isfinite(err_norm) and err_norm <= 1.0 and np.all(np.isfinite(x_new)):
                    if err_norm == 0.0:
                        proposal = abs(h) * _MAX_FACTOR
                    else:
                        proposal = abs(h) * min(
                            _MAX_FACTOR, _SAFETY * err_norm ** _ERROR_EXPONENT
                        )
                    # a step shortened to land on a stop says nothing about the next one
                    h_abs = max(h_abs, proposal) if land and abs(h) < h_abs else proposal
                    break
                if math.isfinite(err_norm):
                    shrink = max(_MIN_FACTOR, _SAFETY * err_norm ** _ERROR_EXPONENT)
                else:
                    shrink = _MIN_FACTOR
                h_abs = abs(h) * shrink
            t, x, f = t_new, x_new, f_new
            taken += 1
            yield t, x


def steps(
    rhs: VectorField,
    x0: Sequence[float],
    t_span: Tuple[float, float],
    config: Optional[IntegratorConfig] = None,
    breakpoints: Iterable[float] = (),
) -> Iterator[Tuple[float, np.ndarray]]:
    """
    Yield (t, x) for the initial condition and then every accepted step.

    The integrator never steps across a breakpoint and lands on each one exactly.
    t_span may run backwards (t1 < t0).
    """
    config = config or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (math.isfinite(t0) and math.isfinite(t1)) or t0 == t1:
        raise ValueError(f"invalid integration span {t_span!r}")
    x = np.array(x0, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("initial state must be finite")
    direction = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)
    stops = _stops(t0, t1, breakpoints, direction)

    def field(t: float, y: np.ndarray) -> np.ndarray:
        return np.asarray(rhs(t, y), dtype=float)

    yield t0, x.copy()
    if config.method is Method.FIXED_RK4:
        yield from _fixed_rk4(field, t0, x, stops, span, config)
    else:
        yield from _adaptive_rk45(field, t0, x, stops, direction, span, config)


def integrate(
    rhs: VectorField,
    x0: Sequence[float],
    t_span: Tuple[float, float],
    config: Optional[IntegratorConfig] = None,
    breakpoints: Iterable[float] = (),
) -> DenseOutput:
    """Integrate x' = rhs(t, x) over t_span and return every accepted step."""
    times: List[float] = []
    states: List[np.ndarray] = []
    for t, x in steps(rhs, x0, t_span, config, breakpoints):
        times.append(t)
        states.append(x)
    logger.debug("integrated over %s in %d steps", t_span, len(times) - 1)
    return DenseOutput(np.asarray(times), np.vstack(states))
