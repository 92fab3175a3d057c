"""
Batch study of random planar trig systems: generation with rejection filtering,
random goals and initial controls, D-MORPH runs with hill-climbing rescue, and
outcome statistics. Also two-parameter landscape slices for plotting.

All randomness derives from ProtocolConfig.master_seed through
`derive_seed(master, *indices)`, so results do not depend on execution order.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from landscape.artifacts import write_csv, write_json, write_jsonl
from landscape.certify import controllability_rank, local_margin, trig_df_bound
from landscape.config import DEFAULT_FINAL_TIME, DEFAULT_GRID_SIZE, MAX_REJECTIONS
from landscape.errors import (
    DegenerateInputError,
    GenerationError,
    IntegrationError,
    LandscapeError,
    RunAbortedError,
)
from landscape.odeint import IntegratorConfig
from landscape.optimize import FlowConfig, Outcome, RunRecord, aborted_record, optimize_with_rescue
from landscape.system import ControlSignal, Goal, NonlinearSystem, TrigSystem, endpoint_map, fidelity

logger = logging.getLogger(__name__)

Noise = Literal["uniform", "gaussian"]


class ProtocolConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_systems: int = Field(100, ge=1)
    n_goals: int = Field(10, ge=1)
    n_controls: int = Field(10, ge=1)
    ab_range: float = Field(1.0, gt=0)
    trig_range: float = Field(0.1, gt=0)
    goal_range: float = Field(2.0, gt=0)
    master_seed: int = 0
    grid_size: int = Field(DEFAULT_GRID_SIZE, ge=2)
    t_final: float = Field(DEFAULT_FINAL_TIME, gt=0)
    # origin when unset
    initial_state: Optional[List[float]] = None
    noise: Noise = "uniform"
    max_rejections: int = Field(MAX_REJECTIONS, ge=1)
    flow: FlowConfig = Field(default_factory=FlowConfig)

    @property
    def total_runs(self) -> int:
        return self.n_systems * self.n_goals * self.n_controls

    def x0(self) -> np.ndarray:
        if self.initial_state is None:
            return np.zeros(2)
        if len(self.initial_state) != 2:
            raise ValueError("initial_state must be planar")
        return np.asarray(self.initial_state, dtype=float)


class BatchSummary(BaseModel):
    model_config = ConfigDict(extra="forbid")

    total_runs: int
    pct_converged: float
    pct_timed_out: float
    pct_precision_stall: float
    pct_trap_suspected: float
    pct_aborted: float
    pct_converged_directly: float
    n_trap_suspected: int
    stall_rescues: int
    systems_generated: int
    systems_rejected: int
    filter_acceptance_rate: float


# -- seeding and random generation -----------------------------------------------------------


def derive_seed(master: int, *indices: int) -> int:
    """Child seed for a (system, goal, control, ...) index path; splittable and order-free."""
    return int(np.random.SeedSequence(master, spawn_key=tuple(indices)).generate_state(1)[0])


def _rng(master: int, *indices: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master, spawn_key=tuple(indices)))


def _passes_filter(sys: TrigSystem) -> bool:
    _, controllable = controllability_rank(sys.A, sys.B)
    if not controllable:
        return False
    try:
        return trig_df_bound(sys) < local_margin(sys.A, sys.B)
    except DegenerateInputError:
        return False


def generate_system(
    rng: np.random.Generator,
    ab_range: float = 1.0,
    trig_range: float = 0.1,
    max_rejections: int = MAX_REJECTIONS,
) -> Tuple[TrigSystem, int]:
    """
    Draw A, B ~ U(-ab_range, ab_range) and C1, S1, C2, S2 ~ U(-trig_range, trig_range)
    until the Kalman rank is full and trig_df_bound < local_margin.

    Returns the accepted system and the number of rejected draws.
    """
    for rejections in range(max_rejections + 1):
        A = rng.uniform(-ab_range, ab_range, (2, 2))
        B = rng.uniform(-ab_range, ab_range, 2)
        C1, S1, C2, S2 = (rng.uniform(-trig_range, trig_range, (2, 2)) for _ in range(4))
        candidate = TrigSystem(A, B, C1, S1, C2, S2)
        if _passes_filter(candidate):
            logger.debug("system accepted after %d rejections", rejections)
            return candidate, rejections
    raise GenerationError(
        f"no system passed the certificate filter in {max_rejections} draws "
        f"(ab_range={ab_range}, trig_range={trig_range})"
    )


def control_from_noise(noise: Sequence[float], t_final: float = DEFAULT_FINAL_TIME) -> ControlSignal:
    """Running prefix sums of the noise draws."""
    return ControlSignal(t_final, np.cumsum(np.asarray(noise, dtype=float)))


def generate_initial_control(
    rng: np.random.Generator,
    n: int = DEFAULT_GRID_SIZE,
    t_final: float = DEFAULT_FINAL_TIME,
    noise: Noise = "uniform",
) -> ControlSignal:
    """Cumulative sum of unit-amplitude white noise (uniform(-1, 1), or N(0, 1))."""
    if n < 2:
        raise ValueError("a control needs at least two samples")
    draws = rng.standard_normal(n) if noise == "gaussian" else rng.uniform(-1.0, 1.0, n)
    return control_from_noise(draws, t_final)


def generate_goal(rng: np.random.Generator, goal_range: float = 2.0, dim: int = 2) -> Goal:
    return Goal(rng.uniform(-goal_range, goal_range, dim))


# -- batch -----------------------------------------------------------------------------------


@dataclass(frozen=True)
class _RunTask:
    indices: Tuple[int, int, int]
    system: TrigSystem
    goal: Goal
    seed: int
    config: ProtocolConfig


def _execute(task: _RunTask) -> RunRecord:
    config = task.config
    w0 = generate_initial_control(
        np.random.default_rng(task.seed), config.grid_size, config.t_final, config.noise
    )
    try:
        record = optimize_with_rescue(task.system, config.x0(), w0, task.goal, config.flow, task.seed)
    except RunAbortedError as e:
        logger.error("run %s aborted: %s", task.indices, e)
        record = e.record or aborted_record(task.seed, w0, str(e), config.flow)
    except LandscapeError as e:
        logger.exception("run %s failed: %s", task.indices, e)
        record = aborted_record(task.seed, w0, str(e), config.flow)
    logger.info("run %s: %s (distance %s)", task.indices, record.outcome.value, record.final_distance)
    return record.model_copy(update={"indices": task.indices})


def summarize(
    records: Sequence[RunRecord], systems_generated: int = 0, systems_rejected: int = 0
) -> BatchSummary:
    total = len(records)
    counts = {outcome: 0 for outcome in Outcome}
    for record in records:
        counts[record.outcome] += 1

    def pct(count: int) -> float:
        return 100.0 * count / total if total else 0.0

    drawn = systems_generated + systems_rejected
    return BatchSummary(
        total_runs=total,
        pct_converged=pct(counts[Outcome.CONVERGED]),
        pct_timed_out=pct(counts[Outcome.TIMED_OUT]),
        pct_precision_stall=pct(counts[Outcome.PRECISION_STALL]),
        pct_trap_suspected=pct(counts[Outcome.TRAP_SUSPECTED]),
        pct_aborted=pct(counts[Outcome.ABORTED]),
        pct_converged_directly=pct(sum(r.direct_outcome is Outcome.CONVERGED for r in records)),
        n_trap_suspected=counts[Outcome.TRAP_SUSPECTED],
        stall_rescues=sum(1 for r in records for attempt in r.rescues if attempt.improved),
        systems_generated=systems_generated,
        systems_rejected=systems_rejected,
        filter_acceptance_rate=systems_generated / drawn if drawn else 0.0,
    )


def generate_systems(config: ProtocolConfig) -> Tuple[List[TrigSystem], int]:
    systems: List[TrigSystem] = []
    rejected = 0
    for i in range(config.n_systems):
        sys, rejections = generate_system(
            _rng(config.master_seed, i), config.ab_range, config.trig_range, config.max_rejections
        )
        systems.append(sys)
        rejected += rejections
    logger.info(
        "generated %d systems, %d rejected by the certificate filter", len(systems), rejected
    )
    return systems, rejected


def run_batch(config: ProtocolConfig, jobs: int = 1) -> Tuple[List[RunRecord], BatchSummary]:
    """
    Run every (system, goal, initial control) combination of the protocol.

    Records come back sorted by index regardless of `jobs`, so output is identical
    for serial and parallel execution.
    """
    systems, rejected = generate_systems(config)
    tasks = [
        _RunTask(
            indices=(i, j, k),
            system=sys,
            goal=generate_goal(_rng(config.master_seed, i, j), config.goal_range),
            seed=derive_seed(config.master_seed, i, j, k),
            config=config,
        )
        for i, sys in enumerate(systems)
        for j in range(config.n_goals)
        for k in range(config.n_controls)
    ]
    logger.info("running %d optimizations with %d worker(s)", len(tasks), jobs)
    if jobs <= 1:
        records = [_execute(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_execute, tasks, chunksize=1))
    records.sort(key=lambda r: r.indices)
    return records, summarize(records, len(systems), rejected)


# -- landscape slices ------------------------------------------------------------------------


@dataclass(frozen=True)
class LandscapeGrid:
    """Phi(center + a*phi1 + b*phi2) on an (a, b) grid; NaN marks failed cells."""

    a_values: np.ndarray
    b_values: np.ndarray
    fidelity: np.ndarray

    @property
    def missing(self) -> int:
        return int(np.count_nonzero(np.isnan(self.fidelity)))

    def argmax(self) -> Tuple[float, float, float]:
        i, j = np.unravel_index(np.nanargmax(self.fidelity), self.fidelity.shape)
        return float(self.a_values[i]), float(self.b_values[j]), float(self.fidelity[i, j])

    def rows(self) -> Iterable[Tuple[float, float, float]]:
        for i, a in enumerate(self.a_values):
            for j, b in enumerate(self.b_values):
                yield float(a), float(b), float(self.fidelity[i, j])


def default_basis(
    n: int = DEFAULT_GRID_SIZE, t_final: float = DEFAULT_FINAL_TIME
) -> Tuple[ControlSignal, ControlSignal]:
    """A constant control and a centred ramp from -1 to 1."""
    return ControlSignal(t_final, np.ones(n)), ControlSignal(t_final, np.linspace(-1.0, 1.0, n))


def landscape_grid(
    sys: NonlinearSystem,
    x0: np.ndarray,
    goal: Goal,
    basis: Tuple[ControlSignal, ControlSignal],
    a_range: Tuple[float, float],
    b_range: Tuple[float, float],
    resolution: int,
    config: Optional[IntegratorConfig] = None,
    center: Optional[ControlSignal] = None,
) -> LandscapeGrid:
    phi1, phi2 = basis
    if phi1.size != phi2.size or phi1.t_final != phi2.t_final:
        raise DegenerateInputError("basis controls must share grid size and final time")
    if np.linalg.matrix_rank(np.vstack([phi1.samples, phi2.samples])) < 2:
        raise DegenerateInputError("basis controls must be linearly independent")
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    offset = np.zeros(phi1.size) if center is None else center.samples
    a_values = np.linspace(a_range[0], a_range[1], resolution)
    b_values = np.linspace(b_range[0], b_range[1], resolution)
    values = np.full((resolution, resolution), np.nan)
    for i, a in enumerate(a_values):
        for j, b in enumerate(b_values):
            w = phi1.with_samples(offset + a * phi1.samples + b * phi2.samples)
            try:
                values[i, j] = fidelity(endpoint_map(sys, x0, w, config)[0], goal)
            except IntegrationError as e:
                logger.warning("landscape cell (a=%g, b=%g) failed: %s", a, b, e)
    return LandscapeGrid(a_values, b_values, values)


# -- artifacts -------------------------------------------------------------------------------


def write_grid(path: Path, grid: LandscapeGrid) -> Path:
    return write_csv(path, ("a", "b", "fidelity"), grid.rows())


def write_batch_artifacts(
    out_dir: Path,
    records: Sequence[RunRecord],
    summary: BatchSummary,
    grids: Optional[Dict[str, LandscapeGrid]] = None,
) -> Path:
    """summary.json, records.jsonl, curves/run_<i>_<j>_<k>.csv and grids/<name>.csv."""
    out_dir = Path(out_dir)
    write_json(out_dir / "summary.json", summary)
    write_jsonl(out_dir / "records.jsonl", records)
    for position, record in enumerate(records):
        i, j, k = record.indices or (position, 0, 0)
        write_csv(out_dir / "curves" / f"run_{i}_{j}_{k}.csv", ("s", "fidelity"), record.curve_rows())
    for name, grid in (grids or {}).items():
        write_grid(out_dir / "grids" / f"{name}.csv", grid)
    return out_dir
