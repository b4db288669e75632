"""Numerical checks of the abstraction, the solver and the models."""

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from symdock.abstraction.grid import CellId
from symdock.abstraction.labels import CellLabel
from symdock.abstraction.symbolic import (
    BLOCKED,
    TransitionTable,
    nominal_displacement,
)
from symdock.control.allocation import ThrusterLayout, allocation_scale
from symdock.control.observer import jacobian
from symdock.dynamics import VesselParams, Wrench, discrete_step, wrap_angle
from symdock.synthesis.tables import UNREACHABLE, ControllerTable
from symdock.tools.multi import multiapply, multirotation


_TOLERANCE = 1e-9


@dataclass
class ContainmentReport:
    """Outcome of :func:`check_containment`.

    Attributes:
        pairs: Number of (cell, input) pairs checked.
        samples: Number of initial poses per pair.
        violations: Sampled successors outside their claimed rectangle or
            cell box.
        worst_excess: Largest distance, in cell widths, by which a successor
            left its rectangle.
    """

    pairs: int
    samples: int
    violations: int
    worst_excess: float


def _cell_samples(center, half, samples, rng):
    corners = np.array(
        [[sx, sy, sp] for sx in (-1, 1) for sy in (-1, 1) for sp in (-1, 1)],
        dtype=float,
    )
    interior = rng.uniform(
        -1.0, 1.0, size=(max(samples - len(corners), 0), 3)
    )
    offsets = np.concatenate([corners, interior])[:samples]
    return center + offsets * half


def _in_box(cells, box):
    """Vectorized ``cell in box`` over a ``k x 3`` index array."""
    span = box.upper.ipsi - box.lower.ipsi
    return (
        (cells[:, 0] >= box.lower.ix)
        & (cells[:, 0] <= box.upper.ix)
        & (cells[:, 1] >= box.lower.iy)
        & (cells[:, 1] <= box.upper.iy)
        & ((cells[:, 2] - box.lower.ipsi) % box.headings <= span)
    )


def check_containment(
    transitions: TransitionTable,
    pairs: int = 500,
    samples: int = 1000,
    rng: Optional[np.random.Generator] = None,
) -> ContainmentReport:
    """Monte Carlo check that successor boxes contain the exact flow.

    Random unblocked (cell, input) pairs are drawn. From each, ``samples``
    initial poses (the cell's vertices, then uniform interior points) are
    flowed exactly for one sampling period. A sample is a violation if its
    end pose leaves the rectangle the table claims for the pair, or if its
    cell lies outside the pair's successor box.
    """
    if pairs <= 0 or samples <= 0:
        raise ValueError(
            f"Need positive pair and sample counts, got {pairs}, {samples}"
        )
    if rng is None:
        rng = np.random.default_rng()
    grid = transitions.grid
    widths = np.asarray(grid.resolution)
    half = grid.half_widths
    lower_corner = np.asarray(grid.lower)
    velocities = transitions.inputs.values

    candidates = np.flatnonzero(~transitions.layout.blocked)
    chosen = rng.choice(
        candidates, size=min(pairs, candidates.size), replace=False
    )
    violations = 0
    worst_excess = 0.0
    for pair in chosen:
        flat_cell, input_index = divmod(int(pair), len(transitions.inputs))
        cell = grid.cell_from_flat(flat_cell)
        center = grid.cell_center(cell).to_array()
        poses = _cell_samples(center, half, samples, rng)
        dx, dy, dpsi = nominal_displacement(
            poses[:, 2], velocities[input_index], transitions.tau_s
        )
        ends = np.column_stack(
            [poses[:, 0] + dx, poses[:, 1] + dy, poses[:, 2] + dpsi]
        )

        cell_lower = lower_corner + np.asarray(cell) * widths
        rect_lower = (
            cell_lower
            + transitions.relative_lower[cell.ipsi, input_index] * widths
        )
        rect_upper = (
            cell_lower
            + transitions.relative_upper[cell.ipsi, input_index] * widths
        )
        offset = ends - rect_lower
        offset[:, 2] = np.mod(offset[:, 2] + _TOLERANCE, 2 * np.pi)
        offset[:, 2] -= _TOLERANCE
        extent = rect_upper - rect_lower
        excess = np.maximum(-offset, offset - extent) / widths
        if extent[2] >= 2 * np.pi:
            excess[:, 2] = 0.0
        excess = excess.max(axis=1)
        outside_rect = excess > _TOLERANCE

        box = transitions.successors(cell, input_index)
        inside_grid = (
            (ends[:, 0] >= grid.lower[0])
            & (ends[:, 0] <= grid.upper[0])
            & (ends[:, 1] >= grid.lower[1])
            & (ends[:, 1] <= grid.upper[1])
        )
        outside_box = np.zeros(len(ends), dtype=bool)
        if box is BLOCKED:
            outside_box[:] = True
        else:
            rows = np.flatnonzero(inside_grid & ~outside_rect)
            if rows.size:
                end_cells = grid.quantize_array(ends[rows])
                outside_box[rows] = ~_in_box(end_cells, box)
        violations += int(np.count_nonzero(outside_rect | outside_box))
        worst_excess = max(worst_excess, float(excess.max()))
    return ContainmentReport(
        pairs=len(chosen),
        samples=samples,
        violations=violations,
        worst_excess=worst_excess,
    )


@dataclass
class FixedPointReport:
    """Outcome of :func:`check_fixed_point`.

    Attributes:
        checked_cells: Number of cells whose value was recomputed.
        value_mismatches: Cells whose value differs from one plus the best
            worst-case successor value (zero at targets).
        unsafe_inputs: Listed inputs that are blocked, reach an obstacle
            cell or do not decrease the value.
    """

    checked_cells: int
    value_mismatches: int
    unsafe_inputs: int

    @property
    def violations(self) -> int:
        return self.value_mismatches + self.unsafe_inputs


def _box_values(values, box):
    npsi = values.shape[2]
    xs = np.arange(box.lower.ix, box.upper.ix + 1)
    ys = np.arange(box.lower.iy, box.upper.iy + 1)
    psis = np.arange(box.lower.ipsi, box.upper.ipsi + 1) % npsi
    return values[np.ix_(xs, ys, psis)]


def check_fixed_point(
    transitions: TransitionTable,
    controller: ControllerTable,
    cells: Optional[Sequence[CellId]] = None,
) -> FixedPointReport:
    """Recompute the value of cells from their successor boxes.

    Every free cell must carry one plus the minimum over inputs of the
    largest successor value, or be unreachable if no input has an all
    winning successor box. Every listed input must be unblocked and lead to
    non-obstacle cells of smaller value only.

    Args:
        transitions: Transition table the controller was solved on.
        controller: Controller to check.
        cells: Cells to check; every cell when omitted.
    """
    grid = controller.grid
    values = controller.values.values.astype(np.int64)
    labels = controller.values.labels
    if cells is None:
        cells = [grid.cell_from_flat(index) for index in range(grid.size)]

    value_mismatches = 0
    unsafe_inputs = 0
    for cell in cells:
        cell = CellId(*cell)
        label = labels[cell]
        value = values[cell]
        listed = set(controller.input_indices(cell))
        if label == CellLabel.OBSTACLE:
            value_mismatches += value != UNREACHABLE
            unsafe_inputs += len(listed)
            continue
        if label == CellLabel.TARGET:
            value_mismatches += value != 0
            continue

        best = UNREACHABLE
        for index in range(len(transitions.inputs)):
            box = transitions.successors(cell, index)
            if box is BLOCKED:
                unsafe_inputs += index in listed
                continue
            worst = int(_box_values(values, box).max())
            if index in listed:
                box_labels = _box_values(labels, box)
                if worst >= value or np.any(
                    box_labels == CellLabel.OBSTACLE
                ):
                    unsafe_inputs += 1
            best = min(best, worst)
        expected = UNREACHABLE if best == UNREACHABLE else best + 1
        value_mismatches += value != expected
    return FixedPointReport(
        checked_cells=len(cells),
        value_mismatches=int(value_mismatches),
        unsafe_inputs=int(unsafe_inputs),
    )


def check_jacobian(
    params: VesselParams,
    state: np.ndarray,
    tau: Wrench,
    dt: float,
    step: float = 1e-6,
) -> float:
    """Largest relative deviation of the EKF Jacobian from central
    differences of the discrete model.

    Deviations are relative to the largest Jacobian entry of each column, so
    structurally zero entries do not blow up the ratio.
    """
    state = np.asarray(state, dtype=float)
    analytic = jacobian(state, params, dt)
    numeric = np.empty_like(analytic)
    for column in range(state.size):
        delta = np.zeros_like(state)
        delta[column] = step
        numeric[:, column] = (
            discrete_step(state + delta, tau.to_array(), params, dt)
            - discrete_step(state - delta, tau.to_array(), params, dt)
        ) / (2 * step)
    scale = np.maximum(np.abs(analytic).max(axis=0), 1.0)
    return float(np.max(np.abs(analytic - numeric) / scale))


def check_flow(
    psi0: float,
    velocity: Sequence[float],
    tau_s: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> float:
    """Distance between the closed-form flow and a numerical integration of
    the kinematics at constant body velocity."""
    velocity = np.asarray(velocity, dtype=float)

    def kinematics(_, eta):
        return multiapply(multirotation(eta[2]), velocity)

    solution = solve_ivp(
        kinematics, (0.0, tau_s), [0.0, 0.0, psi0], rtol=rtol, atol=atol
    )
    end = solution.y[:, -1]
    dx, dy, dpsi = nominal_displacement(psi0, velocity, tau_s)
    difference = np.array(
        [end[0] - dx, end[1] - dy, wrap_angle(end[2] - psi0 - dpsi)],
        dtype=float,
    )
    return float(np.max(np.abs(difference)))


def check_allocation(layout: ThrusterLayout, wrenches) -> float:
    """Fraction of the given wrenches the thrusters cannot produce unscaled.

    Warns if any wrench saturates a thruster.
    """
    wrenches = np.atleast_2d(np.asarray(wrenches, dtype=float))
    scales = np.array(
        [
            allocation_scale(Wrench.from_array(wrench), layout)
            for wrench in wrenches
        ]
    )
    saturated = float(np.mean(scales < 1.0))
    if saturated > 0:
        warnings.warn(
            f"{saturated:.1%} of the wrenches saturate the thrusters; the "
            f"smallest scale factor is {scales.min():.3f}",
            RuntimeWarning,
        )
    return saturated
