"""
Command-line surface: binds one JSON config document to the library operations
and writes every artifact under --out.

Exit codes: 0 success, 1 input error, 2 certificate/landscape check failed,
3 runtime failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from landscape import __version__
from landscape.artifacts import write_csv, write_json
from landscape.certify import CertificateReport, certify
from landscape.config import (
    DEFAULT_GRID_SIZE,
    DEFAULT_JOBS,
    DEFAULT_OUT_DIR,
    LOG_FORMAT,
    LOG_LEVEL,
)
from landscape.errors import IntegrationError, LandscapeError, RunAbortedError
from landscape.experiment import (
    Noise,
    ProtocolConfig,
    default_basis,
    generate_initial_control,
    landscape_grid,
    run_batch,
    write_batch_artifacts,
    write_grid,
)
from landscape.odeint import DenseOutput
from landscape.optimize import FlowConfig, Outcome, RunRecord, optimize_with_rescue
from landscape.system import (
    ControlSignal,
    Goal,
    NonlinearSystem,
    SystemDocument,
    endpoint_map,
    fidelity,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CERTIFICATE = 2
EXIT_RUNTIME = 3


class InputError(Exception):
    """Config file missing, malformed, or lacking a section the subcommand needs."""


class ControlDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # defaults to the system document's T
    T: Optional[float] = Field(None, gt=0)
    N: int = Field(DEFAULT_GRID_SIZE, ge=2)
    samples: Optional[List[float]] = None
    noise: Noise = "uniform"


class LandscapeDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "landscape"
    basis: Union[Literal["default"], Tuple[List[float], List[float]]] = "default"
    a_range: Tuple[float, float] = (-1.0, 1.0)
    b_range: Tuple[float, float] = (-1.0, 1.0)
    resolution: int = Field(21, ge=1)
    center: Optional[List[float]] = None


class RunConfig(BaseModel):
    """One JSON document per invocation; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    seed: int = 0
    system: Optional[SystemDocument] = None
    initial_state: Optional[List[float]] = None
    goal: Optional[List[float]] = None
    control: ControlDocument = Field(default_factory=ControlDocument)
    flow: FlowConfig = Field(default_factory=FlowConfig)
    protocol: Optional[ProtocolConfig] = None
    landscape: Optional[LandscapeDocument] = None

    def require_system(self) -> NonlinearSystem:
        if self.system is None:
            raise InputError("config has no 'system' section")
        return self.system.to_system()

    def x0(self) -> np.ndarray:
        sys_doc = self.system
        state = self.initial_state or (sys_doc.x0 if sys_doc else None)
        dim = len(sys_doc.A) if sys_doc else 2
        x0 = np.zeros(dim) if state is None else np.asarray(state, dtype=float)
        if x0.size != dim:
            raise InputError(f"initial_state has {x0.size} entries, system dimension is {dim}")
        return x0

    def require_goal(self) -> Goal:
        point = self.goal or (self.system.goal if self.system else None)
        if point is None:
            raise InputError("config has no 'goal' (top level or inside 'system')")
        return Goal(np.asarray(point, dtype=float))

    def t_final(self) -> float:
        if self.control.T is not None:
            return self.control.T
        return self.system.T if self.system else 1.0

    def initial_control(self) -> ControlSignal:
        if self.control.samples is not None:
            return ControlSignal(self.t_final(), np.asarray(self.control.samples))
        rng = np.random.default_rng(self.seed)
        return generate_initial_control(rng, self.control.N, self.t_final(), self.control.noise)


def load_config(path: Path, seed_override: Optional[int] = None) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read config {path}: {e}") from e
    try:
        config = RunConfig.model_validate_json(text)
    except ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(part) for part in err['loc']) or '<document>'}: {err['msg']}"
            for err in e.errors()
        )
        raise InputError(f"invalid config {path}: {details}") from e
    except ValueError as e:
        raise InputError(f"invalid config {path}: {e}") from e
    if seed_override is not None:
        update = {"seed": seed_override}
        if config.protocol is not None:
            update["protocol"] = config.protocol.model_copy(update={"master_seed": seed_override})
        config = config.model_copy(update=update)
    return config


def _trajectory_rows(traj: DenseOutput):
    for t, x in zip(traj.grid, traj.values):
        yield (t, *x)


def _write_trajectory(path: Path, traj: DenseOutput) -> Path:
    header = ["t"] + [f"x{i}" for i in range(traj.dim)]
    return write_csv(path, header, _trajectory_rows(traj))


class EndpointReport(BaseModel):
    t_final: float
    x_final: List[float]
    fidelity: Optional[float] = None
    steps: int


# -- subcommands -----------------------------------------------------------------------------


def cmd_check(config: RunConfig, out_dir: Path) -> int:
    """
    Certificates for the configured system; the initial control supplies one trajectory.

    When that trajectory cannot be integrated the analytic certificates are still
    reported, without a trajectory check.
    """
    system = config.require_system()
    try:
        _, traj = endpoint_map(system, config.x0(), config.initial_control(), config.flow.inner_integrator)
    except IntegrationError as e:
        logger.warning("trajectory for the rank check could not be integrated: %s", e)
        trajectories = []
    else:
        trajectories = [traj]
    report: CertificateReport = certify(system, trajectories)
    write_json(out_dir / "certificate.json", report)
    print(report.model_dump_json(indent=2))
    return EXIT_OK if report.all_passed else EXIT_CERTIFICATE


def cmd_simulate(config: RunConfig, out_dir: Path) -> int:
    system = config.require_system()
    w = config.initial_control()
    x_final, traj = endpoint_map(system, config.x0(), w, config.flow.inner_integrator)
    phi = None
    if config.goal is not None or (config.system and config.system.goal is not None):
        phi = fidelity(x_final, config.require_goal())
    _write_trajectory(out_dir / "trajectory.csv", traj)
    report = EndpointReport(
        t_final=w.t_final, x_final=x_final.tolist(), fidelity=phi, steps=len(traj) - 1
    )
    write_json(out_dir / "endpoint.json", report)
    print(report.model_dump_json(indent=2))
    return EXIT_OK


def _write_snapshots(
    out_dir: Path,
    system: NonlinearSystem,
    x0: np.ndarray,
    w0: ControlSignal,
    record: RunRecord,
    flow: FlowConfig,
) -> None:
    """State trajectory of every stored control as s_<k>.csv, plus index.csv mapping k to s."""
    index = []
    for k, snapshot in enumerate(record.snapshots):
        try:
            w = w0.with_samples(np.asarray(snapshot.control))
            _, traj = endpoint_map(system, x0, w, flow.inner_integrator)
        except IntegrationError as e:
            logger.warning("snapshot %d at s=%g could not be integrated: %s", k, snapshot.s, e)
            continue
        _write_trajectory(out_dir / f"s_{k}.csv", traj)
        index.append((k, snapshot.s))
    write_csv(out_dir / "index.csv", ("k", "s"), index)


def cmd_optimize(config: RunConfig, out_dir: Path) -> int:
    system = config.require_system()
    x0, goal = config.x0(), config.require_goal()
    w0 = config.initial_control()
    exit_code = EXIT_OK
    try:
        record: RunRecord = optimize_with_rescue(system, x0, w0, goal, config.flow, config.seed)
    except RunAbortedError as e:
        logger.error("optimization aborted: %s", e)
        record = e.record
        exit_code = EXIT_RUNTIME
        if record is None:
            raise
    write_json(out_dir / "record.json", record)
    write_csv(out_dir / "fidelity.csv", ("s", "fidelity"), record.curve_rows())
    if record.outcome is not Outcome.ABORTED:
        _, traj = endpoint_map(system, x0, record.control(), config.flow.inner_integrator)
        _write_trajectory(out_dir / "trajectory.csv", traj)
    if record.snapshots:
        _write_snapshots(out_dir / "trajectories", system, x0, w0, record, config.flow)
    print(
        f"outcome={record.outcome.value} distance={record.final_distance} "
        f"steps={record.wall_iterations} restarts={record.restarts}"
    )
    return exit_code


def _print_summary(summary) -> None:
    print("Batch summary")
    print("=" * 50)
    for name, value in summary.model_dump().items():
        text = f"{value:.2f}" if isinstance(value, float) else str(value)
        print(f"  {name:<26} {text}")
    print("=" * 50)


def cmd_batch(config: RunConfig, out_dir: Path, jobs: int) -> int:
    if config.protocol is None:
        raise InputError("config has no 'protocol' section")
    records, summary = run_batch(config.protocol, jobs=jobs)
    write_batch_artifacts(out_dir, records, summary)
    _print_summary(summary)
    return EXIT_OK if summary.n_trap_suspected == 0 else EXIT_CERTIFICATE


def cmd_landscape_grid(config: RunConfig, out_dir: Path) -> int:
    system = config.require_system()
    doc = config.landscape or LandscapeDocument()
    t_final = config.t_final()
    if doc.basis == "default":
        basis = default_basis(config.control.N, t_final)
    else:
        basis = tuple(ControlSignal(t_final, np.asarray(s)) for s in doc.basis)
    center = None if doc.center is None else ControlSignal(t_final, np.asarray(doc.center))
    grid = landscape_grid(
        system,
        config.x0(),
        config.require_goal(),
        basis,
        doc.a_range,
        doc.b_range,
        doc.resolution,
        config.flow.inner_integrator,
        center,
    )
    write_grid(out_dir / "grids" / f"{doc.name}.csv", grid)
    a, b, phi = grid.argmax()
    print(f"max fidelity {phi:.6g} at a={a:.6g}, b={b:.6g} ({grid.missing} missing cells)")
    return EXIT_OK


# -- entry point -----------------------------------------------------------------------------

SUBCOMMANDS = ("check", "simulate", "optimize", "batch", "landscape-grid")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="JSON config document")
    common.add_argument("--out", type=Path, default=DEFAULT_OUT_DIR, help="output directory")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--jobs", type=int, default=DEFAULT_JOBS, help="parallel batch workers")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v INFO, -vv DEBUG")

    parser = argparse.ArgumentParser(
        prog="landscape",
        description="Certify and explore control landscapes of x' = Ax + Bw(t) + f(x)",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _configure_logging(verbosity: int) -> None:
    level = {0: LOG_LEVEL, 1: "INFO"}.get(verbosity, "DEBUG")
    logging.basicConfig(level=level, format=LOG_FORMAT)


def _input_error(message: str) -> int:
    """Log and report an input error; returns the input-error exit code."""
    logger.error("input error: %s", message)
    print(f"error: {message}", file=sys.stderr)
    return EXIT_INPUT


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = load_config(args.config, args.seed)
        out_dir: Path = args.out
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.subcommand == "check":
            return cmd_check(config, out_dir)
        if args.subcommand == "simulate":
            return cmd_simulate(config, out_dir)
        if args.subcommand == "optimize":
            return cmd_optimize(config, out_dir)
        if args.subcommand == "batch":
            return cmd_batch(config, out_dir, max(1, args.jobs))
        return cmd_landscape_grid(config, out_dir)
    except InputError as e:
        return _input_error(str(e))
    except (ValueError, OSError) as e:
        return _input_error(str(e))
    except LandscapeError as e:
        logger.exception("runtime failure: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
