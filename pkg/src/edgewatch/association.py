"""
Track lifecycle and detection-to-track association.

Costs blend the Mahalanobis motion distance and the minimum gallery cosine
distance; both metrics also gate. Each frame is a single global
minimum-cost assignment over the gated matrix.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple
import itertools
import logging

import numpy as np
from scipy.optimize import linear_sum_assignment

from edgewatch.appearance.gallery import Gallery
from edgewatch.geometry import BoundingBox, Detection, Observation, to_observation
from edgewatch.motion import (
    DegenerateCovarianceError,
    KalmanFilter,
    MotionConfig,
    TrackState,
    mahalanobis_sq_many,
)


logger = logging.getLogger(__name__)

INFEASIBLE = np.inf


class MissingDescriptorError(ValueError):
    """Raised when a detection reaches association without a descriptor."""


class FrameOrderError(ValueError):
    """Raised when frames are not strictly increasing."""


class TrackStatus(str, Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    DELETED = "deleted"


@dataclass(frozen=True)
class AssociationConfig:
    """
    Association and lifecycle parameters.

    lambda_weight blends motion (1.0) against appearance (0.0) in the cost;
    the Mahalanobis gate applies regardless of the blend.
    """

    lambda_weight: float = 0.0
    max_cos_distance: float = 0.9
    mahalanobis_gate: float = 9.4877
    i_max: int = 30
    n_init: int = 3
    gallery_capacity: int = 100

    def validate(self) -> List[str]:
        errors: List[str] = []
        if not 0.0 <= self.lambda_weight <= 1.0:
            errors.append(f"lambda_weight must lie in [0, 1], got {self.lambda_weight}")
        if self.max_cos_distance <= 0:
            errors.append(f"max_cos_distance must be positive, got {self.max_cos_distance}")
        if self.mahalanobis_gate <= 0:
            errors.append(f"mahalanobis_gate must be positive, got {self.mahalanobis_gate}")
        if self.i_max < 1:
            errors.append(f"i_max must be >= 1, got {self.i_max}")
        if self.n_init < 1:
            errors.append(f"n_init must be >= 1, got {self.n_init}")
        if self.gallery_capacity < 1:
            errors.append(f"gallery_capacity must be >= 1, got {self.gallery_capacity}")
        return errors


@dataclass(eq=False)
class Track:
    """
    One identity. history holds the associated measurements as
    (frame, Observation) in strictly increasing frame order.
    """

    id: int
    state: TrackState
    gallery: Gallery
    frames_since_association: int = 0
    hits: int = 1
    status: TrackStatus = TrackStatus.TENTATIVE
    history: List[Tuple[int, Observation]] = field(default_factory=list)

    @property
    def is_confirmed(self) -> bool:
        return self.status == TrackStatus.CONFIRMED

    @property
    def is_deleted(self) -> bool:
        return self.status == TrackStatus.DELETED


@dataclass(frozen=True)
class TrackSnapshot:
    """
    Immutable per-frame view of a confirmed track.
    measurement is the associated detection this frame, or None when missed.
    """

    track_id: int
    observation: Observation
    measurement: Optional[Observation]
    time_since_update: int
    hits: int

    @property
    def matched(self) -> bool:
        return self.measurement is not None

    @property
    def box(self) -> BoundingBox:
        return self.observation.to_box()


@dataclass(frozen=True)
class FrameResult:
    frame: int
    matches: Tuple[Tuple[int, int], ...] = ()
    new_tracks: Tuple[int, ...] = ()
    deleted_tracks: Tuple[int, ...] = ()
    active_tracks: Tuple[TrackSnapshot, ...] = ()


def combined_cost(c_motion, c_appearance, lambda_weight: float):
    """lambda * motion + (1 - lambda) * appearance; works on scalars and arrays."""
    return lambda_weight * c_motion + (1.0 - lambda_weight) * c_appearance


def build_cost_matrix(
    tracks: Sequence[Track],
    dets: Sequence[Detection],
    cfg: AssociationConfig,
    kalman: Optional[KalmanFilter] = None,
) -> np.ndarray:
    """
    Gated (tracks x detections) cost matrix. Gated-out pairs hold INFEASIBLE.
    Tracks are expected to be predicted to the detection frame already.
    """
    for index, det in enumerate(dets):
        if det.descriptor is None:
            raise MissingDescriptorError(
                f"Detection {index} in frame {det.frame} has no descriptor"
            )
    cost = np.full((len(tracks), len(dets)), INFEASIBLE)
    if not tracks or not dets:
        return cost

    kalman = kalman or KalmanFilter()
    measurements = np.stack([to_observation(det.box).as_array() for det in dets])
    descriptors = np.stack([det.descriptor for det in dets])

    for row, track in enumerate(tracks):
        try:
            projected = kalman.project(track.state)
        except DegenerateCovarianceError as exc:
            logger.warning("Track %d gated out: %s", track.id, exc)
            continue
        motion = mahalanobis_sq_many(projected, measurements)
        appearance = track.gallery.min_cosine_distance(descriptors)
        feasible = (motion <= cfg.mahalanobis_gate) & (appearance <= cfg.max_cos_distance)
        cost[row] = np.where(
            feasible, combined_cost(motion, appearance, cfg.lambda_weight), INFEASIBLE
        )
    return cost


def assign(cost: np.ndarray) -> Tuple[List[Tuple[int, int]], List[int], List[int]]:
    """
    Minimum-cost one-to-one matching over the feasible entries of cost.

    The matching has the largest possible number of feasible pairs and, among
    those, the smallest total cost. Returns (matches, unmatched_rows,
    unmatched_cols) with matches as (row, col) sorted by row.
    """
    cost = np.asarray(cost, dtype=np.float64)
    n_rows, n_cols = cost.shape
    feasible = np.isfinite(cost)
    if not feasible.any():
        return [], list(range(n_rows)), list(range(n_cols))

    # Infeasible cells get a penalty larger than any feasible matching total,
    # so the solver maximizes cardinality before minimizing cost.
    work = np.where(feasible, cost - cost[feasible].min(), 0.0)
    penalty = work.max() * (min(n_rows, n_cols) + 1) + 1.0
    work[~feasible] = penalty

    rows, cols = linear_sum_assignment(work)
    matches = [(int(r), int(c)) for r, c in zip(rows, cols) if feasible[r, c]]
    matched_rows = {r for r, _ in matches}
    matched_cols = {c for _, c in matches}
    unmatched_rows = [r for r in range(n_rows) if r not in matched_rows]
    unmatched_cols = [c for c in range(n_cols) if c not in matched_cols]
    return matches, unmatched_rows, unmatched_cols


class Tracker:
    """
    Single-writer tracking state machine; one instance per stream.
    """

    def __init__(
        self,
        config: Optional[AssociationConfig] = None,
        motion_config: Optional[MotionConfig] = None,
    ):
        self.config = config or AssociationConfig()
        self.kalman = KalmanFilter(motion_config)
        self.tracks: List[Track] = []
        self.last_frame: Optional[int] = None
        self._next_id = itertools.count(1)

    def step(self, frame: int, dets: Sequence[Detection]) -> FrameResult:
        if self.last_frame is not None and frame <= self.last_frame:
            raise FrameOrderError(
                f"Frame {frame} does not follow frame {self.last_frame}"
            )
        for index, det in enumerate(dets):
            if det.descriptor is None:
                raise MissingDescriptorError(
                    f"Detection {index} in frame {frame} has no descriptor"
                )
        self.last_frame = frame
        cfg = self.config

        # 1. predict
        for track in self.tracks:
            track.state = self.kalman.predict(track.state)
            track.frames_since_association += 1

        # 2. associate
        cost = build_cost_matrix(self.tracks, dets, cfg, self.kalman)
        pairs, unmatched_rows, unmatched_cols = assign(cost)

        # 3. correct matched tracks
        measured = {}
        matches: List[Tuple[int, int]] = []
        for row, col in pairs:
            track = self.tracks[row]
            det = dets[col]
            obs = to_observation(det.box)
            track.state = self.kalman.update(track.state, obs)
            track.gallery.push(det.descriptor)
            track.frames_since_association = 0
            track.hits += 1
            track.history.append((frame, obs))
            measured[track.id] = obs
            matches.append((track.id, col))

        # 4. retire
        deleted: List[int] = []
        for row in unmatched_rows:
            track = self.tracks[row]
            if track.status == TrackStatus.TENTATIVE:
                track.status = TrackStatus.DELETED
            elif track.frames_since_association >= cfg.i_max:
                track.status = TrackStatus.DELETED
            if track.is_deleted:
                deleted.append(track.id)
                logger.debug("Track %d deleted at frame %d", track.id, frame)

        # 5. spawn
        new_tracks: List[int] = []
        for col in unmatched_cols:
            det = dets[col]
            obs = to_observation(det.box)
            track = Track(
                id=next(self._next_id),
                state=self.kalman.initiate(obs),
                gallery=Gallery(cfg.gallery_capacity).push(det.descriptor),
                history=[(frame, obs)],
            )
            self.tracks.append(track)
            new_tracks.append(track.id)
            measured[track.id] = obs
            logger.debug("Track %d created at frame %d", track.id, frame)

        # 6. confirm
        for track in self.tracks:
            if track.status == TrackStatus.TENTATIVE and track.hits >= cfg.n_init:
                track.status = TrackStatus.CONFIRMED

        self.tracks = [track for track in self.tracks if not track.is_deleted]
        active = tuple(
            TrackSnapshot(
                track_id=track.id,
                observation=track.state.observation,
                measurement=measured.get(track.id),
                time_since_update=track.frames_since_association,
                hits=track.hits,
            )
            for track in self.tracks
            if track.is_confirmed
        )
        return FrameResult(
            frame=frame,
            matches=tuple(matches),
            new_tracks=tuple(new_tracks),
            deleted_tracks=tuple(deleted),
            active_tracks=active,
        )


__all__ = [
    "AssociationConfig",
    "FrameOrderError",
    "FrameResult",
    "INFEASIBLE",
    "MissingDescriptorError",
    "Track",
    "TrackSnapshot",
    "TrackStatus",
    "Tracker",
    "assign",
    "build_cost_matrix",
    "combined_cost",
]
