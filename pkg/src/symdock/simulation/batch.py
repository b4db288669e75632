"""Batches of closed-loop episodes from sampled start poses."""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from symdock.abstraction.labels import CellLabel
from symdock.core.scenario import Rect, Scenario, footprint_collisions
from symdock.dynamics import Pose
from symdock.simulation.episode import EpisodeConfig, run_episode
from symdock.simulation.metrics import EpisodeMetrics, Outcome
from symdock.simulation.planners import LocalPlanner, Planner
from symdock.synthesis.tables import ControllerTable
from symdock.tools import printer


def sample_winning_starts(
    scenario: Scenario,
    controller: ControllerTable,
    count: int,
    rng: np.random.Generator,
    region: Optional[Rect] = None,
    max_draws: int = 100000,
) -> List[Pose]:
    """Draw collision-free start poses from the winning set.

    Poses are drawn uniformly from ``region`` (the boundary by default) with
    uniform headings. A draw is kept if its cell is winning but not a target
    cell and the hull is clear of the concrete obstacles and the walls.

    Raises:
        ValueError: If fewer than ``count`` poses are found in
            ``max_draws`` draws.
    """
    if count < 0:
        raise ValueError(f"The count must be non-negative, got {count}")
    boundary = scenario.boundary
    if region is None:
        region = boundary
    lower = np.array(
        [max(region.x_min, boundary.x_min), max(region.y_min, boundary.y_min)]
    )
    upper = np.array(
        [min(region.x_max, boundary.x_max), min(region.y_max, boundary.y_max)]
    )
    if np.any(lower >= upper):
        raise ValueError(
            f"The region {region.to_list()} does not meet the boundary"
        )

    grid = controller.grid
    values = controller.values
    starts = []
    draws = 0
    batch = max(64, 4 * count)
    while len(starts) < count:
        if draws >= max_draws:
            raise ValueError(
                f"Found {len(starts)} of {count} winning starts in "
                f"{draws} draws"
            )
        poses = np.column_stack(
            [
                rng.uniform(lower, upper, size=(batch, 2)),
                rng.uniform(-np.pi, np.pi, size=batch),
            ]
        )
        draws += batch
        cells = grid.quantize_array(poses)
        index = tuple(cells.T)
        keep = values.winning[index] & (
            values.labels[index] != CellLabel.TARGET
        )
        keep &= ~footprint_collisions(poses, scenario)
        for pose in poses[keep]:
            starts.append(Pose.from_array(pose))
            if len(starts) == count:
                break
    return starts


@dataclass
class BatchSummary:
    """Statistics over a batch of episodes.

    Attributes:
        metrics: Metrics of every episode in start order.
        docked: Number of docked episodes.
        collisions: Number of episodes that ended in a collision.
        completion_mean: Mean completion time of the docked episodes.
        completion_min: Shortest completion time.
        completion_max: Longest completion time.
        tracking_mse: Per-axis tracking error pooled over all steps, yaw
            in (rad/s)^2.
        tracking_mse_deg: As ``tracking_mse`` with yaw in (deg/s)^2.
    """

    metrics: List[EpisodeMetrics]
    docked: int
    collisions: int
    completion_mean: Optional[float]
    completion_min: Optional[float]
    completion_max: Optional[float]
    tracking_mse: Tuple[float, float, float]
    tracking_mse_deg: Tuple[float, float, float]

    @property
    def episodes(self) -> int:
        return len(self.metrics)

    @classmethod
    def from_metrics(cls, metrics: Sequence[EpisodeMetrics]) -> "BatchSummary":
        metrics = list(metrics)
        if not metrics:
            raise ValueError("Cannot summarize an empty batch")
        times = [
            item.completion_time
            for item in metrics
            if item.outcome == Outcome.DOCKED
        ]
        steps = np.array([item.steps for item in metrics], dtype=float)
        errors = np.array([item.tracking_mse for item in metrics])
        pooled = tuple(
            float(value) for value in steps @ errors / np.sum(steps)
        )
        return cls(
            metrics=metrics,
            docked=len(times),
            collisions=sum(
                item.outcome == Outcome.COLLIDED for item in metrics
            ),
            completion_mean=float(np.mean(times)) if times else None,
            completion_min=float(np.min(times)) if times else None,
            completion_max=float(np.max(times)) if times else None,
            tracking_mse=pooled,
            tracking_mse_deg=pooled[:2]
            + (pooled[2] * np.rad2deg(1.0) ** 2,),
        )

    def to_dict(self):
        return {
            "episodes": self.episodes,
            "docked": self.docked,
            "collisions": self.collisions,
            "completion_mean": self.completion_mean,
            "completion_min": self.completion_min,
            "completion_max": self.completion_max,
            "tracking_mse": list(self.tracking_mse),
            "tracking_mse_deg": list(self.tracking_mse_deg),
            "metrics": [item.to_dict() for item in self.metrics],
        }


def run_batch(
    scenario: Scenario,
    starts: Sequence[Pose],
    config: EpisodeConfig,
    planner: Optional[Planner] = None,
    *,
    verbosity: int = 0,
    stream=None,
) -> BatchSummary:
    """Run one episode per start with a shared planner.

    ``config`` supplies every setting but the start pose. Episode ``i`` uses
    the seed ``config.seed + i``.
    """
    if not starts:
        raise ValueError("A batch needs at least one start pose")
    if planner is None:
        planner = LocalPlanner()
    column_printer = printer.make_printer(
        verbosity,
        columns=[
            ("Episode", "7d"),
            ("x", "7.3f"),
            ("y", "7.3f"),
            ("psi", "7.3f"),
            ("Outcome", "11s"),
            ("Time [s]", "8.2f"),
            ("Clearance [m]", "13.3f"),
        ],
        stream=stream,
    )
    column_printer.print_header()
    metrics = []
    for episode, start in enumerate(starts):
        _, result = run_episode(
            scenario,
            config.replace(start=start, seed=config.seed + episode),
            planner,
        )
        metrics.append(result)
        column_printer.print_row(
            [
                episode,
                start.x,
                start.y,
                start.psi,
                result.outcome.value,
                result.completion_time,
                result.min_clearance,
            ]
        )
    summary = BatchSummary.from_metrics(metrics)
    if verbosity >= 1:
        print(
            f"docked={summary.docked}/{summary.episodes} "
            f"collisions={summary.collisions}",
            file=stream,
        )
    return summary
