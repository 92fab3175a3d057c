"""
Analytic certificates for the three trap-freedom assumptions.

1. Global controllability: the linear part (A, B) has full Kalman rank and f is bounded.
2. Local controllability: ||Df|| stays below the planar margin m(A, B)/||B||, or the
   time-varying Kalman matrix is full rank along a computed trajectory.
3. Sufficient resources: controls are unconstrained, so this always holds here.

All matrix norms are spectral (largest singular value).
"""

import logging
from typing import Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from landscape.config import RANK_SAFETY_FACTOR
from landscape.errors import DegenerateInputError
from landscape.odeint import DenseOutput
from landscape.system import NonlinearSystem, TrigSystem

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


def spectral_norm(M: np.ndarray) -> float:
    """Largest singular value; closed form from the 2x2 Gram matrix for planar input."""
    M = np.asarray(M, dtype=float)
    if M.shape == (2, 2):
        gram = M.T @ M
        trace = gram[0, 0] + gram[1, 1]
        det = gram[0, 0] * gram[1, 1] - gram[0, 1] * gram[1, 0]
        disc = max(trace * trace - 4.0 * det, 0.0)
        return float(np.sqrt(max(0.5 * (trace + np.sqrt(disc)), 0.0)))
    return float(np.linalg.norm(M, 2))


def kalman_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """[B, AB, ..., A^(n-1) B] as columns."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float).ravel()
    n = A.shape[0]
    if A.shape != (n, n) or B.size != n:
        raise ValueError(f"inconsistent shapes A{A.shape}, B({B.size},)")
    ctrb = np.zeros((n, n))
    ctrb[:, 0] = B
    for k in range(1, n):
        ctrb[:, k] = A @ ctrb[:, k - 1]
    return ctrb


def numerical_rank(M: np.ndarray) -> int:
    """Singular values above n * sigma_max * eps * RANK_SAFETY_FACTOR."""
    M = np.asarray(M, dtype=float)
    sigma = np.linalg.svd(M, compute_uv=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    threshold = max(M.shape) * sigma[0] * _EPS * RANK_SAFETY_FACTOR
    return int(np.count_nonzero(sigma > threshold))


def controllability_rank(A: np.ndarray, B: np.ndarray) -> Tuple[int, bool]:
    n = np.asarray(A).shape[0]
    rank = numerical_rank(kalman_matrix(A, B))
    return rank, rank == n


def _planar_pair(A: np.ndarray, B: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float).ravel()
    if A.shape != (2, 2) or B.size != 2:
        raise DegenerateInputError("the local margin is defined for planar systems only")
    b_norm = float(np.linalg.norm(B))
    if b_norm == 0.0:
        raise DegenerateInputError("B must be nonzero")
    return A, B, b_norm


def lipschitz_m(A: np.ndarray, B: np.ndarray) -> float:
    """m(A, B) = ||AB - (<AB, B>/||B||^2) B|| / ||B||; invariant under B -> cB."""
    A, B, b_norm = _planar_pair(A, B)
    ab = A @ B
    residual = ab - (ab @ B) / (b_norm * b_norm) * B
    return float(np.linalg.norm(residual)) / b_norm


def local_margin(A: np.ndarray, B: np.ndarray) -> float:
    """Threshold m(A, B)/||B|| below which ||Df|| certifies local controllability."""
    _, _, b_norm = _planar_pair(A, B)
    return lipschitz_m(A, B) / b_norm


def trig_nonlinear_bound(sys: TrigSystem) -> float:
    """sup ||f|| <= 2 (||C1|| + ||S1|| + ||C2|| + ||S2||)."""
    C1, S1, C2, S2 = sys.trig_matrices
    return 2.0 * (spectral_norm(C1) + spectral_norm(S1) + spectral_norm(C2) + spectral_norm(S2))


def trig_df_bound(sys: TrigSystem) -> float:
    """sup ||Df|| <= sqrt(2) (||C1|| + ||S1|| + 2||C2|| + 2||S2||)."""
    C1, S1, C2, S2 = sys.trig_matrices
    return float(
        np.sqrt(2.0)
        * (
            spectral_norm(C1)
            + spectral_norm(S1)
            + 2.0 * spectral_norm(C2)
            + 2.0 * spectral_norm(S2)
        )
    )


def trajectory_kalman_check(sys: NonlinearSystem, traj: DenseOutput) -> bool:
    """Kalman matrix of (A + Df(x(t)), B) is full rank at every stored trajectory time."""
    for x in traj.values:
        if numerical_rank(kalman_matrix(sys.linearization(x), sys.B)) < sys.dim:
            return False
    return True


class CertificateReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dim: int
    norm: str = "spectral"
    kalman_rank: int
    controllable_linear_part: bool
    # None when f has no known analytic bound
    nonlinear_bound: Optional[float]
    global_controllability_certified: bool
    m_value: Optional[float] = None
    local_margin: Optional[float] = None
    df_bound: Optional[float] = None
    local_controllability_certified: bool
    trajectory_check: Optional[List[bool]] = None
    sufficient_resources: bool = True

    @model_validator(mode="after")
    def _rank_matches_flag(self) -> "CertificateReport":
        if self.controllable_linear_part != (self.kalman_rank == self.dim):
            raise ValueError("controllable_linear_part must equal (kalman_rank == dim)")
        return self

    @property
    def all_passed(self) -> bool:
        return (
            self.global_controllability_certified
            and self.local_controllability_certified
            and self.sufficient_resources
        )


def certify(sys: NonlinearSystem, trajectories: Iterable[DenseOutput] = ()) -> CertificateReport:
    """Assemble all certificates; analytic bounds for trig and linear systems."""
    rank, controllable = controllability_rank(sys.A, sys.B)

    if isinstance(sys, TrigSystem):
        nonlinear_bound: Optional[float] = trig_nonlinear_bound(sys)
        df_bound: Optional[float] = trig_df_bound(sys)
    elif sys.is_linear:
        nonlinear_bound, df_bound = 0.0, 0.0
    else:
        nonlinear_bound, df_bound = None, None

    m_value = margin = None
    if sys.dim == 2 and np.linalg.norm(sys.B) > 0:
        m_value = lipschitz_m(sys.A, sys.B)
        margin = local_margin(sys.A, sys.B)

    checks = [trajectory_kalman_check(sys, traj) for traj in trajectories]
    analytic = margin is not None and df_bound is not None and df_bound < margin
    local_ok = analytic or (bool(checks) and all(checks))

    report = CertificateReport(
        dim=sys.dim,
        kalman_rank=rank,
        controllable_linear_part=controllable,
        nonlinear_bound=nonlinear_bound,
        global_controllability_certified=controllable and nonlinear_bound is not None,
        m_value=m_value,
        local_margin=margin,
        df_bound=df_bound,
        local_controllability_certified=local_ok,
        trajectory_check=checks or None,
    )
    logger.debug(
        "certificate: rank=%d margin=%s df_bound=%s passed=%s",
        rank,
        margin,
        df_bound,
        report.all_passed,
    )
    return report
