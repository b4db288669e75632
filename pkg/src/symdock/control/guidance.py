"""Final approach to a berthing point after the target is reached."""

from typing import Sequence, Tuple

import numpy as np

from symdock.abstraction.grid import INPUT_BOUNDS
from symdock.dynamics import BodyVelocity, Pose, rotation_matrix


def berth_velocity(
    pose: Pose,
    goal: Tuple[float, float],
    gain: float,
    bounds: Sequence[Tuple[float, float]] = INPUT_BOUNDS,
) -> BodyVelocity:
    """Body velocity that moves ``pose`` straight towards ``goal``.

    The command is proportional to the position error in the body frame and
    scaled down as a whole until surge and sway lie inside ``bounds``, so
    the direction of travel stays on the line to the goal. The heading is
    held.

    Args:
        pose: Current (measured or estimated) pose.
        goal: World-frame position to approach.
        gain: Proportional gain in 1/s; zero commands rest.
        bounds: Admissible (lower, upper) per body velocity component.
    """
    if gain < 0:
        raise ValueError(f"The berthing gain must be non-negative, got {gain}")
    error = np.asarray(goal, dtype=float) - (pose.x, pose.y)
    surge, sway = gain * rotation_matrix(pose.psi)[:2, :2].T @ error
    scale = 1.0
    for value, (lower, upper) in zip((surge, sway), bounds[:2]):
        if value > upper:
            scale = min(scale, upper / value)
        elif value < lower:
            scale = min(scale, lower / value)
    return BodyVelocity(scale * surge, scale * sway, 0.0)
