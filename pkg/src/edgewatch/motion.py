"""
Constant-velocity Kalman filter in (u, v, gamma, h) box space.

The 8-dimensional state holds the box center, aspect ratio, height and their
per-frame velocities. Noise is scaled by the box height so the filter behaves
the same at every camera distance. All solves go through a Cholesky
factorization of the innovation covariance.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from edgewatch.geometry import Observation


NDIM = 4
CONDITION_LIMIT = 1e12


class DegenerateCovarianceError(ValueError):
    """Raised when an innovation covariance is numerically singular."""


@dataclass(frozen=True)
class MotionConfig:
    """
    Noise model for the filter. Defaults follow the height-scaled convention.
    """

    std_weight_position: float = 1.0 / 20
    std_weight_velocity: float = 1.0 / 160
    init_position_factor: float = 2.0
    init_velocity_factor: float = 10.0
    aspect_position_std: float = 1e-2
    aspect_velocity_std: float = 1e-5
    aspect_measurement_std: float = 1e-2


@dataclass(frozen=True, eq=False)
class TrackState:
    """Kalman mean (8,) and covariance (8, 8)."""

    mean: np.ndarray
    covariance: np.ndarray

    @property
    def observation(self) -> Observation:
        return Observation.from_array(self.mean[:NDIM])


@dataclass(frozen=True, eq=False)
class MeasurementDistribution:
    """Track distribution projected into measurement space: y and S."""

    y: np.ndarray
    S: np.ndarray
    factor: Optional[tuple] = field(default=None, repr=False)

    def cholesky(self):
        if self.factor is None:
            return _cholesky(self.S)
        return self.factor


class KalmanFilter:
    """
    Frame-indexed constant-velocity filter (time step fixed at one frame).

    Methods return new TrackState values; inputs are never modified.
    """

    def __init__(self, config: Optional[MotionConfig] = None):
        self.config = config or MotionConfig()
        self._motion_mat = np.eye(2 * NDIM)
        for i in range(NDIM):
            self._motion_mat[i, NDIM + i] = 1.0
        self._update_mat = np.eye(NDIM, 2 * NDIM)

    def initiate(self, obs: Observation) -> TrackState:
        cfg = self.config
        h = obs.h
        std = [
            cfg.init_position_factor * cfg.std_weight_position * h,
            cfg.init_position_factor * cfg.std_weight_position * h,
            cfg.aspect_position_std,
            cfg.init_position_factor * cfg.std_weight_position * h,
            cfg.init_velocity_factor * cfg.std_weight_velocity * h,
            cfg.init_velocity_factor * cfg.std_weight_velocity * h,
            cfg.aspect_velocity_std,
            cfg.init_velocity_factor * cfg.std_weight_velocity * h,
        ]
        mean = np.r_[obs.as_array(), np.zeros(NDIM)]
        return TrackState(mean, np.diag(np.square(std)))

    def process_noise(self, mean: np.ndarray) -> np.ndarray:
        cfg = self.config
        h = mean[3]
        std = [
            cfg.std_weight_position * h,
            cfg.std_weight_position * h,
            cfg.aspect_position_std,
            cfg.std_weight_position * h,
            cfg.std_weight_velocity * h,
            cfg.std_weight_velocity * h,
            cfg.aspect_velocity_std,
            cfg.std_weight_velocity * h,
        ]
        return np.diag(np.square(std))

    def measurement_noise(self, mean: np.ndarray) -> np.ndarray:
        cfg = self.config
        h = mean[3]
        std = [
            cfg.std_weight_position * h,
            cfg.std_weight_position * h,
            cfg.aspect_measurement_std,
            cfg.std_weight_position * h,
        ]
        return np.diag(np.square(std))

    def predict(self, state: TrackState) -> TrackState:
        F = self._motion_mat
        mean = F @ state.mean
        covariance = F @ state.covariance @ F.T + self.process_noise(state.mean)
        return TrackState(mean, _symmetrize(covariance))

    def project(
        self, state: TrackState, measurement_noise: Optional[np.ndarray] = None
    ) -> MeasurementDistribution:
        """
        y = H mean, S = H P H^T + R. R defaults to the height-scaled model.
        """
        H = self._update_mat
        R = self.measurement_noise(state.mean) if measurement_noise is None else measurement_noise
        y = H @ state.mean
        S = _symmetrize(H @ state.covariance @ H.T + R)
        return MeasurementDistribution(y, S, _cholesky(S))

    def update(
        self,
        state: TrackState,
        obs: Observation,
        measurement_noise: Optional[np.ndarray] = None,
    ) -> TrackState:
        projected = self.project(state, measurement_noise)
        chol = projected.cholesky()
        cross = state.covariance @ self._update_mat.T
        gain = scipy.linalg.cho_solve(chol, cross.T, check_finite=False).T

        innovation = obs.as_array() - projected.y
        mean = state.mean + gain @ innovation
        covariance = state.covariance - gain @ projected.S @ gain.T
        return TrackState(mean, _symmetrize(covariance))


def mahalanobis_sq(md: MeasurementDistribution, d: Observation) -> float:
    """(d - y)^T S^-1 (d - y) via the Cholesky factor of S."""
    return float(mahalanobis_sq_many(md, d.as_array()[None, :])[0])


def mahalanobis_sq_many(md: MeasurementDistribution, measurements: np.ndarray) -> np.ndarray:
    """Squared Mahalanobis distance for each row of an (n, 4) array."""
    factor, lower = md.cholesky()
    tri = np.tril(factor) if lower else np.triu(factor).T
    diff = np.asarray(measurements, dtype=np.float64) - md.y
    z = scipy.linalg.solve_triangular(
        tri, diff.T, lower=True, check_finite=False, overwrite_b=True
    )
    return np.sum(z * z, axis=0)


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.T) / 2.0


def _cholesky(S: np.ndarray):
    try:
        factor = scipy.linalg.cho_factor(S, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise DegenerateCovarianceError(
            "Innovation covariance is not positive definite"
        ) from exc
    diag = np.abs(np.diag(factor[0]))
    if not np.all(np.isfinite(diag)) or diag.min() <= 0:
        raise DegenerateCovarianceError("Innovation covariance is singular")
    condition = (diag.max() / diag.min()) ** 2
    if condition > CONDITION_LIMIT:
        raise DegenerateCovarianceError(
            f"Innovation covariance is ill-conditioned (estimate {condition:.3e})"
        )
    return factor
