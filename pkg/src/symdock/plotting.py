"""Static plots of docking episodes."""

from typing import Optional

from symdock.core.scenario import Rect, Scenario
from symdock.simulation.trajectory import Trajectory
from symdock.tools.io import atomic_open


try:
    from matplotlib.figure import Figure
    from matplotlib.patches import Rectangle
except ImportError:
    Figure = None


def _rectangle(rect: Rect, **kwargs):
    return Rectangle(
        (rect.x_min, rect.y_min), rect.width, rect.height, **kwargs
    )


def plot_episode(
    traj: Trajectory,
    scenario: Scenario,
    title: Optional[str] = None,
):
    """Draw the arena and the path of an episode.

    The figure shows the boundary, the concrete and inflated obstacles, the
    concrete and deflated target, the path of the vessel center and markers
    at its start and end. Axes are in the scenario's frame.

    Returns:
        A :class:`matplotlib.figure.Figure` not attached to any pyplot
        state.

    Raises:
        ValueError: If the trajectory is empty.
        RuntimeError: If matplotlib is not installed.
    """
    if Figure is None:
        raise RuntimeError("Plotting requires matplotlib")
    if len(traj) == 0:
        raise ValueError("Cannot plot an empty trajectory")

    figure = Figure(figsize=(8, 6))
    ax = figure.add_subplot(1, 1, 1)
    boundary = scenario.boundary
    ax.add_patch(
        _rectangle(boundary, fill=False, edgecolor="black", linewidth=1.5)
    )
    for inflated in scenario.inflated_obstacles:
        ax.add_patch(
            _rectangle(
                inflated,
                facecolor="gold",
                alpha=0.3,
                edgecolor="goldenrod",
                linestyle="--",
            )
        )
    for index, obstacle in enumerate(scenario.obstacles):
        ax.add_patch(
            _rectangle(
                obstacle,
                facecolor="gold",
                edgecolor="goldenrod",
                label="Obstacle" if index == 0 else None,
            )
        )
    ax.add_patch(
        _rectangle(
            scenario.target,
            facecolor="tab:green",
            alpha=0.25,
            edgecolor="tab:green",
            label="Target",
        )
    )
    ax.add_patch(
        _rectangle(
            scenario.deflated_target,
            fill=False,
            edgecolor="tab:green",
            linestyle="--",
        )
    )

    poses = traj.poses
    ax.plot(poses[:, 0], poses[:, 1], color="tab:blue", label="Path")
    ax.plot(
        poses[0, 0], poses[0, 1], marker="o", color="tab:blue", label="Start"
    )
    ax.plot(
        poses[-1, 0], poses[-1, 1], marker="s", color="tab:red", label="End"
    )

    ax.set_xlim(boundary.x_min, boundary.x_max)
    ax.set_ylim(boundary.y_min, boundary.y_max)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    if title is not None:
        ax.set_title(title)
    ax.legend(loc="upper right")
    return figure


def save_episode_svg(
    traj: Trajectory, scenario: Scenario, path: str, **kwargs
):
    """Write :func:`plot_episode` as an SVG file."""
    figure = plot_episode(traj, scenario, **kwargs)
    with atomic_open(path, "wb") as handle:
        figure.savefig(handle, format="svg")
