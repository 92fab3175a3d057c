"""
Control signals, first-order control systems x' = Ax + Bw(t) + f(x), and the
end-point map V_T taking a control to the state at the final time.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.integrate
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from landscape.config import DEFAULT_FINAL_TIME
from landscape.errors import ControlDomainError, DegenerateInputError
from landscape.odeint import DenseOutput, IntegratorConfig, VectorField, integrate

logger = logging.getLogger(__name__)

StateMap = Callable[[np.ndarray], np.ndarray]

_EVAL_SLACK = 64 * np.finfo(float).eps


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ControlSignal:
    """Samples of w(t) on the uniform grid k*T/(N-1), linearly interpolated."""

    t_final: float
    samples: np.ndarray

    def __post_init__(self) -> None:
        t_final = float(self.t_final)
        samples = _frozen(self.samples)
        if not (np.isfinite(t_final) and t_final > 0):
            raise ValueError(f"t_final must be positive, got {self.t_final!r}")
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("a control needs at least two samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("control samples must be finite")
        object.__setattr__(self, "t_final", t_final)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def constant(cls, value: float, n: int, t_final: float = DEFAULT_FINAL_TIME) -> "ControlSignal":
        return cls(t_final, np.full(n, float(value)))

    @property
    def size(self) -> int:
        return self.samples.size

    @property
    def dt(self) -> float:
        return self.t_final / (self.samples.size - 1)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_final, self.samples.size)

    @property
    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.samples**2)))

    def quadrature_weights(self) -> np.ndarray:
        """Integral of each hat basis function: dt/2 at the ends, dt inside."""
        weights = np.full(self.samples.size, self.dt)
        weights[0] = weights[-1] = 0.5 * self.dt
        return weights

    def with_samples(self, samples: np.ndarray) -> "ControlSignal":
        return ControlSignal(self.t_final, samples)

    def __call__(self, t: float) -> float:
        return evaluate_control(self, t)


def evaluate_control(w: ControlSignal, t: float) -> float:
    """Linear interpolation of the samples; exact at grid points."""
    slack = _EVAL_SLACK * w.t_final
    if not (-slack <= t <= w.t_final + slack):
        raise ControlDomainError(f"t={t!r} outside control domain [0, {w.t_final}]")
    position = min(max(t, 0.0), w.t_final) / w.dt
    k = min(int(position), w.samples.size - 2)
    frac = position - k
    if frac == 0.0:
        return float(w.samples[k])
    return float((1.0 - frac) * w.samples[k] + frac * w.samples[k + 1])


@dataclass(frozen=True)
class Goal:
    point: np.ndarray

    def __post_init__(self) -> None:
        point = _frozen(self.point).ravel()
        if not np.all(np.isfinite(point)):
            raise ValueError("goal entries must be finite")
        object.__setattr__(self, "point", point)


def _zero_map(x: np.ndarray) -> np.ndarray:
    return np.zeros_like(x)


class NonlinearSystem:
    """
    x' = A x + B w(t) + f(x) with a single control channel.

    f and its Jacobian Df default to zero, giving the LTI system (A, B).
    """

    def __init__(
        self,
        A: np.ndarray,
        B: np.ndarray,
        f: Optional[StateMap] = None,
        Df: Optional[StateMap] = None,
    ) -> None:
        A = _frozen(A)
        B = _frozen(B).ravel()
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if B.size != A.shape[0]:
            raise ValueError(f"B has {B.size} entries, A is {A.shape[0]}x{A.shape[0]}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise ValueError("A and B must be finite")
        if (f is None) != (Df is None):
            raise ValueError("f and Df must be given together")
        self.A = A
        self.B = B
        self._f = f
        self._Df = Df

    @classmethod
    def linear(cls, A: np.ndarray, B: np.ndarray) -> "NonlinearSystem":
        return cls(A, B)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def is_linear(self) -> bool:
        return self._f is None

    def f(self, x: np.ndarray) -> np.ndarray:
        if self._f is None:
            return np.zeros(self.dim)
        return np.asarray(self._f(np.asarray(x, dtype=float)), dtype=float)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        if self._Df is None:
            return np.zeros((self.dim, self.dim))
        return np.asarray(self._Df(np.asarray(x, dtype=float)), dtype=float)

    def linearization(self, x: np.ndarray) -> np.ndarray:
        """A + Df(x): the matrix of the variational equation at state x."""
        return self.A + self.jacobian(x)

    def rhs(self, w: ControlSignal) -> VectorField:
        A, B = self.A, self.B

        def field(t: float, x: np.ndarray) -> np.ndarray:
            return A @ x + B * evaluate_control(w, t) + self.f(x)

        return field

    def jacobian_error(self, rng: np.random.Generator, n_points: int = 20, scale: float = 10.0) -> float:
        """Max relative error of Df against central differences of f at random points."""
        worst = 0.0
        for _ in range(n_points):
            x = rng.uniform(-scale, scale, self.dim)
            step = 1e-6 * (1.0 + np.linalg.norm(x))
            fd = np.empty((self.dim, self.dim))
            for j in range(self.dim):
                e = np.zeros(self.dim)
                e[j] = step
                fd[:, j] = (self.f(x + e) - self.f(x - e)) / (2.0 * step)
            exact = self.jacobian(x)
            denom = max(np.abs(exact).max(), 1e-12)
            worst = max(worst, float(np.abs(fd - exact).max() / denom))
        return worst


class TrigSystem(NonlinearSystem):
    """
    Planar system whose nonlinearity is a trigonometric polynomial in each coordinate:

        f(x) = C1 cos(x) + S1 sin(x) + C2 cos(2x) + S2 sin(2x)   (componentwise trig)
    """

    def __init__(
        self,
        A: np.ndarray,
        B: np.ndarray,
        C1: np.ndarray,
        S1: np.ndarray,
        C2: np.ndarray,
        S2: np.ndarray,
    ) -> None:
        mats = [_frozen(m) for m in (C1, S1, C2, S2)]
        for name, m in zip(("C1", "S1", "C2", "S2"), mats):
            if m.shape != (2, 2):
                raise ValueError(f"{name} must be 2x2, got shape {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{name} must be finite")
        self.C1, self.S1, self.C2, self.S2 = mats
        super().__init__(A, B, self._trig_f, self._trig_jacobian)
        if self.dim != 2:
            raise ValueError("TrigSystem is planar: A must be 2x2")

    def _trig_f(self, x: np.ndarray) -> np.ndarray:
        return (
            self.C1 @ np.cos(x)
            + self.S1 @ np.sin(x)
            + self.C2 @ np.cos(2.0 * x)
            + self.S2 @ np.sin(2.0 * x)
        )

    def _trig_jacobian(self, x: np.ndarray) -> np.ndarray:
        # M @ diag(v) == M * v (column scaling)
        return (
            self.C1 * -np.sin(x)
            + self.S1 * np.cos(x)
            + self.C2 * (-2.0 * np.sin(2.0 * x))
            + self.S2 * (2.0 * np.cos(2.0 * x))
        )

    @property
    def trig_matrices(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.C1, self.S1, self.C2, self.S2

    def __reduce__(self):
        return (TrigSystem, (self.A, self.B, self.C1, self.S1, self.C2, self.S2))


def endpoint_map(
    sys: NonlinearSystem,
    x0: np.ndarray,
    w: ControlSignal,
    config: Optional[IntegratorConfig] = None,
) -> Tuple[np.ndarray, DenseOutput]:
    """x(T) for x' = Ax + Bw(t) + f(x), x(0) = x0, plus the dense trajectory."""
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != sys.dim:
        raise ValueError(f"x0 has {x0.size} entries, system dimension is {sys.dim}")
    traj = integrate(sys.rhs(w), x0, (0.0, w.t_final), config, breakpoints=w.grid)
    return traj.final.copy(), traj


def fidelity(x_final: np.ndarray, goal: Goal) -> float:
    """Phi = -||x(T) - G||; maximal (zero) exactly at the goal."""
    x_final = np.asarray(x_final, dtype=float).ravel()
    if x_final.shape != goal.point.shape:
        raise ValueError(f"state {x_final.shape} and goal {goal.point.shape} differ in shape")
    return -float(np.linalg.norm(x_final - goal.point))


def reachability_gramian(A: np.ndarray, B: np.ndarray, t_final: float) -> np.ndarray:
    """
    W(T) = int_0^T e^{As} B B^T e^{A^T s} ds.

    The goal G is reachable from x0 iff G - e^{AT} x0 lies in range(W).
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(B, dtype=float).reshape(-1, 1)

    def integrand(s: float) -> np.ndarray:
        k = scipy.linalg.expm(A * s) @ b
        return k @ k.T

    gramian, _ = scipy.integrate.quad_vec(integrand, 0.0, t_final, epsabs=1e-12, epsrel=1e-10)
    return gramian


# -- JSON wire format ------------------------------------------------------------------------

Matrix = List[List[float]]


class SystemDocument(BaseModel):
    """
    Serialized system: row-major matrices, optional problem data (T, x0, goal).

    Without trig matrices the document describes a linear system of any dimension;
    with them it is a planar TrigSystem (missing trig matrices are zero).
    """

    model_config = ConfigDict(extra="forbid")

    A: Matrix
    B: List[float]
    C1: Optional[Matrix] = None
    S1: Optional[Matrix] = None
    C2: Optional[Matrix] = None
    S2: Optional[Matrix] = None
    T: float = Field(DEFAULT_FINAL_TIME, gt=0)
    x0: Optional[List[float]] = None
    goal: Optional[List[float]] = None

    @field_validator("A", "C1", "S1", "C2", "S2")
    @classmethod
    def _square(cls, value: Optional[Matrix]) -> Optional[Matrix]:
        if value is not None and any(len(row) != len(value) for row in value):
            raise ValueError("matrix must be square")
        return value

    @model_validator(mode="after")
    def _consistent(self) -> "SystemDocument":
        n = len(self.A)
        if len(self.B) != n:
            raise ValueError(f"B has {len(self.B)} entries, A is {n}x{n}")
        if self.has_trig and n != 2:
            raise ValueError("trig matrices require a planar (2x2) system")
        for name in ("x0", "goal"):
            vec = getattr(self, name)
            if vec is not None and len(vec) != n:
                raise ValueError(f"{name} has {len(vec)} entries, expected {n}")
        return self

    @property
    def has_trig(self) -> bool:
        return any(m is not None for m in (self.C1, self.S1, self.C2, self.S2))

    def to_system(self) -> NonlinearSystem:
        if not self.has_trig:
            return NonlinearSystem.linear(np.array(self.A), np.array(self.B))
        zero = [[0.0, 0.0], [0.0, 0.0]]
        return TrigSystem(
            np.array(self.A),
            np.array(self.B),
            *(np.array(m if m is not None else zero) for m in (self.C1, self.S1, self.C2, self.S2)),
        )

    @classmethod
    def from_system(
        cls,
        sys: NonlinearSystem,
        t_final: float = DEFAULT_FINAL_TIME,
        x0: Optional[np.ndarray] = None,
        goal: Optional[Goal] = None,
    ) -> "SystemDocument":
        if not isinstance(sys, TrigSystem) and not sys.is_linear:
            raise DegenerateInputError("only linear and trig systems have a JSON form")
        fields = {
            "A": sys.A.tolist(),
            "B": sys.B.tolist(),
            "T": float(t_final),
            "x0": None if x0 is None else np.asarray(x0, dtype=float).tolist(),
            "goal": None if goal is None else goal.point.tolist(),
        }
        if isinstance(sys, TrigSystem):
            for name, m in zip(("C1", "S1", "C2", "S2"), sys.trig_matrices):
                fields[name] = m.tolist()
        return cls(**fields)
