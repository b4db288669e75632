"""Cell labeling against inflated obstacles and the deflated target."""

import enum

import numpy as np

from symdock.abstraction.grid import Grid
from symdock.core.scenario import Scenario, footprint_sweep_extents


_TOLERANCE = 1e-9


class CellLabel(enum.IntEnum):
    FREE = 0
    OBSTACLE = 1
    TARGET = 2


def _overlap(lower, upper, rect_lower, rect_upper):
    return np.minimum(upper, rect_upper) - np.maximum(lower, rect_lower) > (
        _TOLERANCE
    )


def _heading_mask(grid: Grid, interval):
    npsi = grid.counts[2]
    if interval is None:
        return np.ones(npsi, dtype=bool)
    edges = grid.axis_edges(2)
    lower, upper = edges[:-1], edges[1:]
    inside = np.zeros(npsi, dtype=bool)
    # The interval may be written across the -pi seam.
    for shift in (-2 * np.pi, 0.0, 2 * np.pi):
        inside |= (lower + shift >= interval[0] - _TOLERANCE) & (
            upper + shift <= interval[1] + _TOLERANCE
        )
    return inside


def label_cells(grid: Grid, scenario: Scenario) -> np.ndarray:
    """Label every cell of ``grid`` as free, obstacle or target.

    A cell is an obstacle if its position rectangle overlaps an inflated
    obstacle with positive area. With ``scenario.footprint_clearance`` it is
    also an obstacle if some hull pose with center in the cell and heading in
    the cell's interval may reach past a wall or into a concrete obstacle.
    A cell is a target if its position rectangle lies inside the deflated
    target and its heading interval inside ``scenario.target_heading`` (when
    given). Obstacle wins over target.

    Returns:
        A ``nx x ny x npsi`` array of :class:`CellLabel` values.
    """
    x_edges, y_edges = grid.axis_edges(0), grid.axis_edges(1)
    x_lower, x_upper = x_edges[:-1], x_edges[1:]
    y_lower, y_upper = y_edges[:-1], y_edges[1:]

    target = scenario.deflated_target
    target_x = (x_lower >= target.x_min - _TOLERANCE) & (
        x_upper <= target.x_max + _TOLERANCE
    )
    target_y = (y_lower >= target.y_min - _TOLERANCE) & (
        y_upper <= target.y_max + _TOLERANCE
    )
    is_target = (
        target_x[:, None, None]
        & target_y[None, :, None]
        & _heading_mask(grid, scenario.target_heading)[None, None, :]
    )

    is_obstacle = np.zeros(grid.shape, dtype=bool)
    for obstacle in scenario.inflated_obstacles:
        overlap_x = _overlap(x_lower, x_upper, obstacle.x_min, obstacle.x_max)
        overlap_y = _overlap(y_lower, y_upper, obstacle.y_min, obstacle.y_max)
        is_obstacle |= (overlap_x[:, None] & overlap_y[None, :])[..., None]

    if scenario.footprint_clearance:
        psi_edges = grid.axis_edges(2)
        ext_x, ext_y = footprint_sweep_extents(
            psi_edges[:-1],
            psi_edges[1:],
            scenario.vessel.length,
            scenario.vessel.beam,
        )
        reach_x_lower = x_lower[:, None] - ext_x[None, :]
        reach_x_upper = x_upper[:, None] + ext_x[None, :]
        reach_y_lower = y_lower[:, None] - ext_y[None, :]
        reach_y_upper = y_upper[:, None] + ext_y[None, :]
        boundary = scenario.boundary
        off_x = (reach_x_lower < boundary.x_min - _TOLERANCE) | (
            reach_x_upper > boundary.x_max + _TOLERANCE
        )
        off_y = (reach_y_lower < boundary.y_min - _TOLERANCE) | (
            reach_y_upper > boundary.y_max + _TOLERANCE
        )
        is_obstacle |= off_x[:, None, :] | off_y[None, :, :]
        for obstacle in scenario.obstacles:
            hit_x = _overlap(
                reach_x_lower, reach_x_upper, obstacle.x_min, obstacle.x_max
            )
            hit_y = _overlap(
                reach_y_lower, reach_y_upper, obstacle.y_min, obstacle.y_max
            )
            is_obstacle |= hit_x[:, None, :] & hit_y[None, :, :]

    labels = np.full(grid.shape, CellLabel.FREE, dtype=np.uint8)
    labels[is_target] = CellLabel.TARGET
    labels[is_obstacle] = CellLabel.OBSTACLE
    return labels
