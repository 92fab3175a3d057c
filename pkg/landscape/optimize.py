"""
D-MORPH homotopy gradient flow on the control landscape.

The control samples w(s, .) evolve along dw/ds = beta * dPhi/dw with
Phi = -||x(T) - G||. Each evaluation of the right-hand side integrates the state
and the transition matrix M(t) together, then assembles

    dPhi/dw(t) = p^T M(T) M(t)^-1 B,    p = (G - x(T)) / ||G - x(T)||.

Runs that time out or stall are handed to a stochastic hill climber; if it finds
an improvement the flow restarts from the improved control.
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from landscape.config import (
    AT_GOAL_DISTANCE,
    CONVERGENCE_THRESHOLD,
    DEFAULT_BETA,
    HILL_CLIMB_SIGMA_SCALE,
    HILL_CLIMB_TRIES,
    MAX_RESTARTS,
    STALL_TOLERANCE,
    STALL_WINDOW,
)
from landscape.errors import (
    AtGoalError,
    IntegrationError,
    NumericalFailureError,
    RunAbortedError,
    StepLimitExceededError,
    StepUnderflowError,
)
from landscape.odeint import DenseOutput, IntegratorConfig, integrate, steps
from landscape.system import (
    ControlSignal,
    Goal,
    NonlinearSystem,
    endpoint_map,
    evaluate_control,
    fidelity,
)

logger = logging.getLogger(__name__)


class Outcome(str, Enum):
    CONVERGED = "converged"
    TIMED_OUT = "timed_out"
    PRECISION_STALL = "precision_stall"
    TRAP_SUSPECTED = "trap_suspected"
    ABORTED = "aborted"


_RESCUABLE = (Outcome.TIMED_OUT, Outcome.PRECISION_STALL)


# -- transition matrix and gradient ----------------------------------------------------------


@dataclass(frozen=True)
class TransitionMatrixPath:
    """M(t) sampled on a time grid; M(0) = I."""

    grid: np.ndarray
    M: np.ndarray

    def __post_init__(self) -> None:
        grid = np.array(self.grid, dtype=float)
        M = np.array(self.M, dtype=float)
        if M.ndim != 3 or M.shape[0] != grid.size or M.shape[1] != M.shape[2]:
            raise ValueError(f"M must have shape ({grid.size}, n, n), got {M.shape}")
        grid.setflags(write=False)
        M.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "M", M)

    @property
    def final(self) -> np.ndarray:
        return self.M[-1]

    def determinants(self) -> np.ndarray:
        return np.linalg.det(self.M)


def _sample_matrix_path(
    path: DenseOutput, n: int, start: float, grid: Optional[np.ndarray]
) -> TransitionMatrixPath:
    times = path.grid if grid is None else np.asarray(grid, dtype=float)
    M = path.sample(times).reshape(-1, n, n)
    if times[0] == start:
        M[0] = np.eye(n)
    return TransitionMatrixPath(times, M)


def transition_matrix(
    sys: NonlinearSystem,
    traj: DenseOutput,
    config: Optional[IntegratorConfig] = None,
    grid: Optional[np.ndarray] = None,
) -> TransitionMatrixPath:
    """Integrate M' = (A + Df(x(t))) M, M(0) = I along a stored state trajectory."""
    n = sys.dim

    def field(t: float, m: np.ndarray) -> np.ndarray:
        return (sys.linearization(traj(t)) @ m.reshape(n, n)).ravel()

    path = integrate(field, np.eye(n).ravel(), (traj.start, traj.end), config, breakpoints=traj.grid)
    return _sample_matrix_path(path, n, traj.start, grid)


def propagator_inverse(
    sys: NonlinearSystem,
    traj: DenseOutput,
    config: Optional[IntegratorConfig] = None,
    grid: Optional[np.ndarray] = None,
) -> TransitionMatrixPath:
    """Integrate N' = -N (A + Df(x(t))), N(0) = I, so that N(t) = M(t)^-1."""
    n = sys.dim

    def field(t: float, m: np.ndarray) -> np.ndarray:
        return -(m.reshape(n, n) @ sys.linearization(traj(t))).ravel()

    path = integrate(field, np.eye(n).ravel(), (traj.start, traj.end), config, breakpoints=traj.grid)
    return _sample_matrix_path(path, n, traj.start, grid)


def _solve_stack(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rows M_k^-1 b for every k; adjugate formula for planar systems."""
    if M.shape[1] == 2:
        a, c = M[:, 0, 0], M[:, 1, 0]
        d, e = M[:, 0, 1], M[:, 1, 1]
        det = a * e - d * c
        if not np.all(np.isfinite(det)) or np.any(det <= 0.0):
            raise NumericalFailureError("transition matrix lost invertibility (det M <= 0)")
        return np.stack([e * b[0] - d * b[1], -c * b[0] + a * b[1]], axis=1) / det[:, None]
    sign, _ = np.linalg.slogdet(M)
    if np.any(sign <= 0):
        raise NumericalFailureError("transition matrix lost invertibility (det M <= 0)")
    try:
        return np.linalg.solve(M, np.broadcast_to(b, M.shape[:2])[..., None])[..., 0]
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(f"singular transition matrix: {e}") from e


def control_gradient(
    sys: NonlinearSystem,
    traj: DenseOutput,
    M_path: TransitionMatrixPath,
    goal: Goal,
) -> np.ndarray:
    """dPhi/dw(t) = p^T M(T) M(t)^-1 B at every time of M_path.grid."""
    if not np.isclose(M_path.grid[-1], traj.end, rtol=0.0, atol=1e-12 * max(1.0, abs(traj.end))):
        raise ValueError("transition-matrix grid must end at the final time")
    error = goal.point - traj.final
    distance = float(np.linalg.norm(error))
    if distance <= AT_GOAL_DISTANCE:
        raise AtGoalError(f"end point within {distance:.3g} of the goal")
    p = error / distance
    sensitivities = _solve_stack(M_path.M, sys.B) @ M_path.final.T
    return sensitivities @ p


def state_and_transition(
    sys: NonlinearSystem,
    x0: np.ndarray,
    w: ControlSignal,
    config: Optional[IntegratorConfig] = None,
) -> Tuple[DenseOutput, TransitionMatrixPath]:
    """
    Integrate x and M as one (n + n^2)-vector in a single pass.

    Returns the state trajectory and M sampled on the control grid. The control knots
    are breakpoints, so the grid samples are integrator nodes and need no interpolation.
    """
    n = sys.dim
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != n:
        raise ValueError(f"x0 has {x0.size} entries, system dimension is {n}")
    A, B = sys.A, sys.B

    def field(t: float, y: np.ndarray) -> np.ndarray:
        x = y[:n]
        dx = A @ x + B * evaluate_control(w, t) + sys.f(x)
        dm = sys.linearization(x) @ y[n:].reshape(n, n)
        return np.concatenate((dx, dm.ravel()))

    grid = w.grid
    y0 = np.concatenate((x0, np.eye(n).ravel()))
    path = integrate(field, y0, (0.0, w.t_final), config, breakpoints=grid)
    traj = DenseOutput(path.grid, path.values[:, :n])
    nodes = np.minimum(np.searchsorted(path.grid, grid), path.grid.size - 1)
    if np.array_equal(path.grid[nodes], grid):
        M = path.values[nodes, n:]
    else:
        M = path.sample(grid)[:, n:]
    M = M.reshape(-1, n, n)
    M[0] = np.eye(n)
    return traj, TransitionMatrixPath(grid, M)


def landscape_gradient(
    sys: NonlinearSystem,
    x0: np.ndarray,
    w: ControlSignal,
    goal: Goal,
    config: Optional[IntegratorConfig] = None,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """(Phi, dPhi/dw on the control grid, x(T)) for one control."""
    traj, path = state_and_transition(sys, x0, w, config)
    x_final = traj.final.copy()
    return fidelity(x_final, goal), control_gradient(sys, traj, path, goal), x_final


# -- configuration and records ---------------------------------------------------------------


class HillClimbConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    max_tries: int = Field(HILL_CLIMB_TRIES, ge=1)
    # starting sigma = sigma_scale * (control RMS + 1)
    sigma_scale: float = Field(HILL_CLIMB_SIGMA_SCALE, gt=0)


def _flow_integrator() -> IntegratorConfig:
    return IntegratorConfig(rel_tol=1e-6, abs_tol=1e-8, max_steps=500)


class FlowConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    beta: float = Field(DEFAULT_BETA, gt=0)
    s_max: float = Field(1e4, gt=0)
    convergence_threshold: float = Field(CONVERGENCE_THRESHOLD, gt=0)
    stall_window: int = Field(STALL_WINDOW, ge=1)
    stall_tolerance: float = Field(STALL_TOLERANCE, gt=0)
    integrator: IntegratorConfig = Field(default_factory=_flow_integrator)
    inner_integrator: IntegratorConfig = Field(default_factory=IntegratorConfig)
    max_restarts: int = Field(MAX_RESTARTS, ge=0)
    hill_climb: HillClimbConfig = Field(default_factory=HillClimbConfig)
    # store the control every m-th accepted s-step (0: never)
    snapshot_every: int = Field(0, ge=0)

    def monotone_slack(self, phi: float) -> float:
        """Allowed fidelity decrease between accepted s-steps."""
        return 10.0 * self.integrator.tolerance_scale(phi)


class RescueAttempt(BaseModel):
    model_config = ConfigDict(extra="forbid")

    cycle: int
    sigma: float
    tries: int
    delta_fidelity: float
    improved: bool
    # gains at or below this were treated as integrator noise
    noise_floor: float = 0.0


class Snapshot(BaseModel):
    """Control at one accepted value of the homotopy parameter."""

    model_config = ConfigDict(extra="forbid")

    s: float
    control: List[float]


class RunRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int
    indices: Optional[Tuple[int, int, int]] = None
    outcome: Outcome
    direct_outcome: Outcome
    convergence_threshold: float
    # None when not even the initial control could be evaluated
    final_distance: Optional[float]
    fidelity_curve: List[Tuple[float, float]]
    t_final: float
    control_final: List[float]
    wall_iterations: int
    s_final: float
    restarts: int = 0
    rescues: List[RescueAttempt] = Field(default_factory=list)
    snapshots: List[Snapshot] = Field(default_factory=list)
    error: Optional[str] = None

    @model_validator(mode="after")
    def _converged_iff_close(self) -> "RunRecord":
        close = self.final_distance is not None and self.final_distance < self.convergence_threshold
        if (self.outcome is Outcome.CONVERGED) != close:
            raise ValueError("outcome 'converged' must coincide with final_distance < threshold")
        return self

    def control(self) -> ControlSignal:
        return ControlSignal(self.t_final, np.asarray(self.control_final))

    def curve_rows(self) -> List[Tuple[float, float]]:
        return [(float(s), float(phi)) for s, phi in self.fidelity_curve]


# -- homotopy flow ---------------------------------------------------------------------------


class _LandscapeOracle:
    """Phi and dPhi/dw for one (system, x0, goal), memoized on recent controls."""

    _CACHE_SIZE = 8

    def __init__(
        self,
        sys: NonlinearSystem,
        x0: np.ndarray,
        goal: Goal,
        template: ControlSignal,
        config: IntegratorConfig,
    ) -> None:
        self.sys = sys
        self.x0 = np.asarray(x0, dtype=float)
        self.goal = goal
        self.template = template
        self.config = config
        self.evaluations = 0
        self._phi: "OrderedDict[bytes, float]" = OrderedDict()
        self._grad: "OrderedDict[bytes, np.ndarray]" = OrderedDict()

    def _remember(self, cache: OrderedDict, key: bytes, value) -> None:
        cache[key] = value
        if len(cache) > self._CACHE_SIZE:
            cache.popitem(last=False)

    def _endpoint(self, samples: np.ndarray) -> Tuple[np.ndarray, DenseOutput]:
        self.evaluations += 1
        try:
            return endpoint_map(self.sys, self.x0, self.template.with_samples(samples), self.config)
        except (IntegrationError, ValueError) as e:
            raise RunAbortedError(f"state integration failed: {e}") from e

    def fidelity(self, samples: np.ndarray) -> float:
        key = samples.tobytes()
        if key not in self._phi:
            x_final, _ = self._endpoint(samples)
            self._remember(self._phi, key, fidelity(x_final, self.goal))
        return self._phi[key]

    def gradient(self, samples: np.ndarray) -> np.ndarray:
        key = samples.tobytes()
        if key in self._grad:
            return self._grad[key]
        self.evaluations += 1
        try:
            w = self.template.with_samples(samples)
            traj, path = state_and_transition(self.sys, self.x0, w, self.config)
        except (IntegrationError, ValueError) as e:
            raise RunAbortedError(f"state and transition-matrix integration failed: {e}") from e
        try:
            grad = control_gradient(self.sys, traj, path, self.goal)
        except AtGoalError:
            grad = np.zeros(samples.size)
        except NumericalFailureError as e:
            raise RunAbortedError(f"transition matrix became singular: {e}") from e
        self._remember(self._grad, key, grad)
        return grad


class _Progress:
    """Classifies each accepted s-step: converged, stalled, or keep going."""

    def __init__(self, config: FlowConfig, phi0: float) -> None:
        self.config = config
        self.best = phi0
        self.since_improvement = 0

    def update(self, phi: float) -> Optional[Outcome]:
        config = self.config
        if -phi < config.convergence_threshold:
            return Outcome.CONVERGED
        if phi < self.best - config.monotone_slack(self.best):
            return Outcome.PRECISION_STALL
        if phi > self.best + config.stall_tolerance:
            self.best = phi
            self.since_improvement = 0
            return None
        self.since_improvement += 1
        if self.since_improvement >= config.stall_window:
            return Outcome.PRECISION_STALL
        return None

    def exhausted(self) -> Outcome:
        """Outcome when the s budget runs out: timed_out only if the last step still gained."""
        if self.since_improvement > 0:
            return Outcome.PRECISION_STALL
        return Outcome.TIMED_OUT


def _record(
    *,
    seed: int,
    outcome: Outcome,
    direct_outcome: Outcome,
    config: FlowConfig,
    phi: Optional[float],
    curve: List[Tuple[float, float]],
    control: ControlSignal,
    iterations: int,
    s_final: float,
    restarts: int = 0,
    rescues: Optional[List[RescueAttempt]] = None,
    snapshots: Optional[List[Snapshot]] = None,
    error: Optional[str] = None,
) -> RunRecord:
    return RunRecord(
        seed=seed,
        outcome=outcome,
        direct_outcome=direct_outcome,
        convergence_threshold=config.convergence_threshold,
        final_distance=None if phi is None else -phi,
        fidelity_curve=curve,
        t_final=control.t_final,
        control_final=control.samples.tolist(),
        wall_iterations=iterations,
        s_final=s_final,
        restarts=restarts,
        rescues=rescues or [],
        snapshots=snapshots or [],
        error=error,
    )


def dmorph_flow(
    sys: NonlinearSystem,
    x0: np.ndarray,
    w0: ControlSignal,
    goal: Goal,
    config: Optional[FlowConfig] = None,
    seed: int = 0,
) -> RunRecord:
    """
    Ascend Phi along dw/ds = beta * dPhi/dw with the adaptive s-integrator.

    Stops on convergence (distance below threshold), on a fidelity decrease beyond
    the integrator slack or no gain over stall_window steps (precision_stall), or
    when s_max / max_steps runs out. Running out is timed_out only while the last
    accepted step still gained fidelity, otherwise precision_stall. A step that
    lowered the fidelity is not kept: the record holds the best control reached.
    With snapshot_every = m > 0 the control at s = 0 and at every m-th accepted
    step is stored for trajectory plots.
    """
    config = config or FlowConfig()
    oracle = _LandscapeOracle(sys, x0, goal, w0, config.inner_integrator)
    try:
        phi0 = oracle.fidelity(w0.samples)
    except RunAbortedError as e:
        logger.error("initial control could not be evaluated: %s", e)
        raise RunAbortedError(str(e), aborted_record(seed, w0, str(e), config)) from e

    curve = [(0.0, phi0)]
    best_samples, best_phi, best_s = w0.samples, phi0, 0.0
    iterations = 0
    progress = _Progress(config, phi0)
    snapshots = [Snapshot(s=0.0, control=w0.samples.tolist())] if config.snapshot_every else []
    outcome: Optional[Outcome] = Outcome.CONVERGED if -phi0 < config.convergence_threshold else None

    def rhs(s: float, samples: np.ndarray) -> np.ndarray:
        return config.beta * oracle.gradient(samples)

    if outcome is None:
        stepper = steps(rhs, w0.samples, (0.0, config.s_max), config.integrator)
        next(stepper)
        try:
            for s, samples in stepper:
                iterations += 1
                phi = oracle.fidelity(samples)
                outcome = progress.update(phi)
                if outcome is Outcome.PRECISION_STALL and phi < best_phi:
                    break
                curve.append((s, phi))
                if config.snapshot_every and iterations % config.snapshot_every == 0:
                    snapshots.append(Snapshot(s=s, control=samples.tolist()))
                if phi >= best_phi:
                    best_samples, best_phi, best_s = samples, phi, s
                if outcome is not None:
                    break
            else:
                outcome = progress.exhausted()
        except StepLimitExceededError:
            outcome = progress.exhausted()
        except StepUnderflowError:
            outcome = Outcome.PRECISION_STALL
        except RunAbortedError as e:
            logger.error("flow aborted after %d steps: %s", iterations, e)
            record = _record(
                seed=seed, outcome=Outcome.ABORTED, direct_outcome=Outcome.ABORTED,
                config=config, phi=best_phi, curve=curve,
                control=w0.with_samples(best_samples), iterations=iterations,
                s_final=curve[-1][0], snapshots=snapshots, error=str(e),
            )
            raise RunAbortedError(str(e), record) from e

    if outcome is not Outcome.CONVERGED and -best_phi < config.convergence_threshold:
        outcome = Outcome.CONVERGED
    logger.info(
        "flow finished: %s after %d steps, s=%.4g, distance=%.3e (%d evaluations)",
        outcome.value,
        iterations,
        best_s,
        -best_phi,
        oracle.evaluations,
    )
    return _record(
        seed=seed, outcome=outcome, direct_outcome=outcome, config=config, phi=best_phi,
        curve=curve, control=w0.with_samples(best_samples), iterations=iterations,
        s_final=curve[-1][0], snapshots=snapshots,
    )


# -- stochastic hill climbing ----------------------------------------------------------------


def initial_sigma(w: ControlSignal, scale: float = HILL_CLIMB_SIGMA_SCALE) -> float:
    return scale * (w.rms + 1.0)


def noise_floor(phi: float, config: Optional[IntegratorConfig] = None) -> float:
    """Smallest fidelity gain a hill climb counts: ten inner-integrator tolerances at phi."""
    return 10.0 * (config or IntegratorConfig()).tolerance_scale(phi)


def _climb(
    sys: NonlinearSystem,
    x0: np.ndarray,
    w: ControlSignal,
    goal: Goal,
    sigma: float,
    max_tries: int,
    rng_seed: int,
    config: Optional[IntegratorConfig],
) -> Tuple[ControlSignal, float, int, float, float]:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(rng_seed)
    phi0 = fidelity(endpoint_map(sys, x0, w, config)[0], goal)
    floor = noise_floor(phi0, config)
    halve_every = max(1, max_tries // 4)
    for attempt in range(max_tries):
        # every failure so far is consecutive: the first success returns
        if attempt and attempt % halve_every == 0:
            sigma *= 0.5
        candidate = w.with_samples(w.samples + sigma * rng.standard_normal(w.size))
        try:
            phi = fidelity(endpoint_map(sys, x0, candidate, config)[0], goal)
        except IntegrationError as e:
            logger.debug("hill-climb proposal %d failed to integrate: %s", attempt, e)
            continue
        if phi - phi0 > floor:
            return candidate, phi - phi0, attempt + 1, sigma, floor
    return w, 0.0, max_tries, sigma, floor


def hill_climb(
    sys: NonlinearSystem,
    x0: np.ndarray,
    w: ControlSignal,
    goal: Goal,
    sigma: float,
    max_tries: int,
    rng_seed: int,
    config: Optional[IntegratorConfig] = None,
) -> Tuple[ControlSignal, float]:
    """
    Propose w + sigma * N(0, I) until one raises Phi by more than the noise floor
    of the inner integrator.

    sigma is halved after every max_tries/4 consecutive failures. Returns the first
    accepted control and its fidelity gain, or (w, 0.0) after max_tries failures.
    """
    improved, delta, _, _, _ = _climb(sys, x0, w, goal, sigma, max_tries, rng_seed, config)
    return improved, delta


def _cycle_seed(seed: int, cycle: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(cycle,)).generate_state(1)[0])


def optimize_with_rescue(
    sys: NonlinearSystem,
    x0: np.ndarray,
    w0: ControlSignal,
    goal: Goal,
    config: Optional[FlowConfig] = None,
    seed: int = 0,
) -> RunRecord:
    """
    D-MORPH, then hill climbing and a restart for every timed_out / precision_stall
    segment, up to max_restarts restarts. A hill climb that finds nothing marks the
    run trap_suspected.
    """
    config = config or FlowConfig()
    record = dmorph_flow(sys, x0, w0, goal, config, seed)
    direct = record.outcome
    curve = list(record.fidelity_curve)
    iterations = record.wall_iterations
    s_total = record.s_final
    control = record.control()
    outcome = record.outcome
    phi = -record.final_distance
    rescues: List[RescueAttempt] = []
    snapshots = list(record.snapshots)
    restarts = 0

    while outcome in _RESCUABLE and config.max_restarts > 0:
        cycle = len(rescues) + 1
        improved, delta, tries, sigma, floor = _climb(
            sys,
            x0,
            control,
            goal,
            initial_sigma(control, config.hill_climb.sigma_scale),
            config.hill_climb.max_tries,
            _cycle_seed(seed, cycle),
            config.inner_integrator,
        )
        rescues.append(
            RescueAttempt(
                cycle=cycle, sigma=sigma, tries=tries, delta_fidelity=delta, improved=delta > 0,
                noise_floor=floor,
            )
        )
        iterations += tries
        if delta <= 0:
            logger.warning("hill climbing found no improvement after %d tries: trap suspected", tries)
            outcome = Outcome.TRAP_SUSPECTED
            break
        logger.info("hill climbing raised fidelity by %.3e after %d tries", delta, tries)
        control, phi = improved, phi + delta
        curve.append((s_total, phi))
        if -phi < config.convergence_threshold:
            outcome = Outcome.CONVERGED
            break
        if restarts == config.max_restarts:
            break
        restarts += 1
        try:
            record = dmorph_flow(sys, x0, control, goal, config, seed)
        except RunAbortedError as e:
            partial = e.record
            aborted = _record(
                seed=seed, outcome=Outcome.ABORTED, direct_outcome=direct, config=config,
                phi=phi, curve=curve, control=control,
                iterations=iterations + (partial.wall_iterations if partial else 0),
                s_final=s_total, restarts=restarts, rescues=rescues, snapshots=snapshots,
                error=str(e),
            )
            raise RunAbortedError(str(e), aborted) from e
        curve.extend((s_total + s, value) for s, value in record.fidelity_curve[1:])
        snapshots.extend(Snapshot(s=s_total + snap.s, control=snap.control) for snap in record.snapshots)
        s_total += record.s_final
        iterations += record.wall_iterations
        control = record.control()
        phi = -record.final_distance
        outcome = record.outcome

    return _record(
        seed=seed, outcome=outcome, direct_outcome=direct, config=config, phi=phi,
        curve=curve, control=control, iterations=iterations, s_final=s_total,
        restarts=restarts, rescues=rescues, snapshots=snapshots,
    )


def aborted_record(
    seed: int,
    control: ControlSignal,
    error: str,
    config: Optional[FlowConfig] = None,
) -> RunRecord:
    """Record for a run that failed before any flow step was taken."""
    config = config or FlowConfig()
    return _record(
        seed=seed, outcome=Outcome.ABORTED, direct_outcome=Outcome.ABORTED, config=config,
        phi=None, curve=[], control=control, iterations=0, s_final=0.0, error=error,
    )
