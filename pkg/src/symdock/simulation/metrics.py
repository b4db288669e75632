"""Episode outcomes and summary statistics."""

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from symdock.core.scenario import (
    Scenario,
    footprint_clearance,
    footprint_collisions,
    footprint_within,
)
from symdock.dynamics import Pose
from symdock.simulation.trajectory import Trajectory
from symdock.tools.io import atomic_write_text


class Outcome(enum.Enum):
    DOCKED = "docked"
    COLLIDED = "collided"
    TIMEOUT = "timeout"
    NOT_WINNING = "not_winning"


@dataclass
class EpisodeMetrics:
    """Summary of one closed-loop episode.

    Attributes:
        outcome: How the episode ended.
        completion_time: Time of the first target report, None if the target
            was never reached.
        min_clearance: Smallest footprint distance to a concrete obstacle.
        tracking_mse: Mean of ``(nu_ref - nu)^2`` per axis, in (m/s)^2,
            (m/s)^2 and (rad/s)^2.
        tracking_mse_deg: As ``tracking_mse`` with yaw in (deg/s)^2.
        synth_times: Planning time per epoch in milliseconds.
        footprint_in_target: Whether the final footprint lies inside the
            concrete target.
        epoch_misses: Epochs without a timely planner answer.
        final_pose: Last logged pose.
        duration: Simulated time covered by the log.
        steps: Number of logged control steps.
    """

    outcome: Outcome
    completion_time: Optional[float]
    min_clearance: float
    tracking_mse: Tuple[float, float, float]
    tracking_mse_deg: Tuple[float, float, float]
    synth_times: List[float] = field(default_factory=list)
    footprint_in_target: bool = False
    epoch_misses: int = 0
    final_pose: Optional[Pose] = None
    duration: float = 0.0
    steps: int = 0

    def to_dict(self) -> Dict[str, Any]:
        """JSON-compatible form; infinite clearances become None."""
        return {
            "outcome": self.outcome.value,
            "completion_time": self.completion_time,
            "min_clearance": (
                self.min_clearance
                if math.isfinite(self.min_clearance)
                else None
            ),
            "tracking_mse": list(self.tracking_mse),
            "tracking_mse_deg": list(self.tracking_mse_deg),
            "synth_times": list(self.synth_times),
            "footprint_in_target": self.footprint_in_target,
            "epoch_misses": self.epoch_misses,
            "final_pose": (
                None
                if self.final_pose is None
                else self.final_pose.to_array().tolist()
            ),
            "duration": self.duration,
            "steps": self.steps,
        }

    def write_json(self, path: str):
        atomic_write_text(path, json.dumps(self.to_dict(), indent=2) + "\n")


def _first_target_time(traj: Trajectory, scenario: Scenario):
    target = scenario.deflated_target
    x, y, psi = traj.poses.T
    inside = (
        (x >= target.x_min)
        & (x <= target.x_max)
        & (y >= target.y_min)
        & (y <= target.y_max)
    )
    if scenario.target_heading is not None:
        lower, upper = scenario.target_heading
        offset = np.mod(psi - lower, 2 * np.pi)
        inside &= offset <= upper - lower
    hits = np.flatnonzero(inside)
    return float(traj.t[hits[0]]) if hits.size else None


def compute_metrics(
    traj: Trajectory,
    scenario: Scenario,
    outcome: Optional[Outcome] = None,
) -> EpisodeMetrics:
    """Summarize a trajectory.

    Args:
        traj: The episode log.
        scenario: The arena the episode ran in.
        outcome: Outcome reported by the runner. When omitted it is inferred
            from the log: any footprint collision means collided, a target
            report with the final footprint inside the concrete target means
            docked, anything else a timeout.

    Raises:
        ValueError: If the trajectory is empty.
    """
    if len(traj) == 0:
        raise ValueError("Cannot summarize an empty trajectory")
    poses = traj.poses
    errors = traj.references - traj.velocities
    tracking_mse = tuple(float(value) for value in np.mean(errors**2, axis=0))
    tracking_mse_deg = tracking_mse[:2] + (
        tracking_mse[2] * np.rad2deg(1.0) ** 2,
    )

    vessel = scenario.vessel
    min_clearance = math.inf
    for obstacle in scenario.obstacles:
        clearance = footprint_clearance(
            poses, obstacle, vessel.length, vessel.beam
        )
        min_clearance = min(min_clearance, float(clearance.min()))

    footprint_in_target = bool(
        footprint_within(
            poses[-1], scenario.target, vessel.length, vessel.beam
        )[0]
    )
    completion_time = traj.at_target_time
    if completion_time is None:
        completion_time = _first_target_time(traj, scenario)
    if outcome is None:
        if np.any(footprint_collisions(poses, scenario)):
            outcome = Outcome.COLLIDED
        elif completion_time is not None and footprint_in_target:
            outcome = Outcome.DOCKED
        else:
            outcome = Outcome.TIMEOUT

    return EpisodeMetrics(
        outcome=outcome,
        completion_time=(
            completion_time if outcome == Outcome.DOCKED else None
        ),
        min_clearance=min_clearance,
        tracking_mse=tracking_mse,
        tracking_mse_deg=tuple(float(value) for value in tracking_mse_deg),
        synth_times=list(traj.synth_times),
        footprint_in_target=footprint_in_target,
        epoch_misses=traj.epoch_misses,
        final_pose=Pose.from_array(poses[-1]),
        duration=float(traj.t[-1] - traj.t[0]),
        steps=len(traj),
    )
