"""Finite abstraction of the sampled kinematic model.

Over one sampling period ``tau_s`` the commanded body velocity is held
constant and the pose follows the planar kinematics exactly. Successor sets
are boxes of cells: the nominal successor of the cell center, grown by the
cell half-widths plus a growth bound on heading uncertainty. Because the flow
does not depend on position, the box of a cell is its own index plus integer
offsets that depend only on the heading cell and the input. The transition
table stores those offsets instead of an edge list.
"""

import functools
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Union

import numpy as np

from symdock.abstraction.grid import CellId, Grid, InputGrid
from symdock.dynamics import BodyVelocity, Pose


_TOLERANCE = 1e-9


def nominal_displacement(psi0, velocities, tau_s: float):
    """Displacement of the constant-velocity flow.

    Written with ``numpy.sinc`` so that the straight-line case ``r = 0`` is
    the continuous limit of the turning case rather than a separate branch.

    Args:
        psi0: Initial headings (broadcastable against ``velocities[..., 0]``).
        velocities: ``... x 3`` array of ``(u, v, r)``.
        tau_s: Flow duration.

    Returns:
        Tuple ``(dx, dy, dpsi)`` of broadcast arrays.
    """
    velocities = np.asarray(velocities, dtype=float)
    u, v, r = velocities[..., 0], velocities[..., 1], velocities[..., 2]
    dpsi = r * tau_s
    # 2 sin(r tau / 2) / r, well conditioned through r = 0.
    chord = tau_s * np.sinc(dpsi / (2 * np.pi))
    mid = np.asarray(psi0, dtype=float) + 0.5 * dpsi
    c, s = np.cos(mid), np.sin(mid)
    dx = chord * (u * c - v * s)
    dy = chord * (u * s + v * c)
    return dx, dy, np.broadcast_to(dpsi, np.shape(dx))


def nominal_successor(
    eta: Pose, nu_cmd: BodyVelocity, tau_s: float
) -> Pose:
    """Pose reached from ``eta`` after ``tau_s`` seconds at ``nu_cmd``."""
    if tau_s <= 0:
        raise ValueError(f"The sampling period must be positive, got {tau_s}")
    dx, dy, dpsi = nominal_displacement(eta.psi, nu_cmd.to_array(), tau_s)
    return Pose(eta.x + float(dx), eta.y + float(dy), eta.psi + float(dpsi))


def growth_bound(radius, nu_cmd, tau_s: float) -> np.ndarray:
    """Componentwise bound on successor deviation.

    Two initial poses at most ``radius = (rx, ry, rpsi)`` apart end at most
    ``(rx + k tau rpsi, ry + k tau rpsi, rpsi)`` apart, where
    ``k = sqrt(u^2 + v^2)`` bounds the heading sensitivity of ``R(psi) nu``.

    Args:
        radius: Initial deviation, componentwise non-negative.
        nu_cmd: Commanded velocity, a :class:`BodyVelocity` or an
            ``... x 3`` array.
        tau_s: Flow duration.
    """
    radius = np.asarray(radius, dtype=float)
    if np.any(radius < 0):
        raise ValueError(f"The radius must be non-negative, got {radius}")
    if isinstance(nu_cmd, BodyVelocity):
        nu_cmd = nu_cmd.to_array()
    nu_cmd = np.asarray(nu_cmd, dtype=float)
    speed = np.hypot(nu_cmd[..., 0], nu_cmd[..., 1])
    spread = speed * tau_s * radius[..., 2]
    return np.stack(
        [
            radius[..., 0] + spread,
            radius[..., 1] + spread,
            np.broadcast_to(radius[..., 2], np.shape(spread)),
        ],
        axis=-1,
    )


class _Blocked:
    """Marker for inputs whose successor box leaves the boundary."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Blocked"

    def __reduce__(self):
        return (_Blocked, ())


BLOCKED = _Blocked()


class SuccessorBox(NamedTuple):
    """Box of successor cells; heading indices wrap around."""

    lower: CellId
    upper: CellId
    headings: int

    def __iter__(self) -> Iterator[CellId]:
        ixs = range(self.lower.ix, self.upper.ix + 1)
        iys = range(self.lower.iy, self.upper.iy + 1)
        ipsis = [
            index % self.headings
            for index in range(self.lower.ipsi, self.upper.ipsi + 1)
        ]
        for ix in ixs:
            for iy in iys:
                for ipsi in ipsis:
                    yield CellId(ix, iy, ipsi)

    def __contains__(self, cell) -> bool:
        ix, iy, ipsi = cell
        span = self.upper.ipsi - self.lower.ipsi
        return (
            self.lower.ix <= ix <= self.upper.ix
            and self.lower.iy <= iy <= self.upper.iy
            and (ipsi - self.lower.ipsi) % self.headings <= span
        )

    def __len__(self):
        return (
            (self.upper.ix - self.lower.ix + 1)
            * (self.upper.iy - self.lower.iy + 1)
            * min(self.upper.ipsi - self.lower.ipsi + 1, self.headings)
        )


@dataclass(frozen=True)
class TransitionKey:
    grid: Grid
    inputs: InputGrid
    tau_s: float
    growth_scale: float = 1.0


class TransitionTable:
    """Successor boxes of every (cell, input) pair as index offsets.

    Args:
        grid: State grid.
        inputs: Input grid.
        tau_s: Sampling period.
        growth_scale: Factor on the heading-induced growth term. Only
            diagnostics use values other than one, to check that the
            containment test detects an unsound abstraction.
    """

    def __init__(
        self,
        grid: Grid,
        inputs: InputGrid,
        tau_s: float,
        *,
        growth_scale: float = 1.0,
    ):
        if tau_s <= 0:
            raise ValueError(
                f"The sampling period must be positive, got {tau_s}"
            )
        self.key = TransitionKey(grid, inputs, float(tau_s), growth_scale)
        self.grid = grid
        self.inputs = inputs
        self.tau_s = float(tau_s)

        widths = np.asarray(grid.resolution)
        half = grid.half_widths
        values = inputs.values
        dx, dy, dpsi = nominal_displacement(
            grid.axis_centers(2)[:, None], values[None, :, :], self.tau_s
        )
        growth = growth_bound(half, values, self.tau_s)
        growth = half + growth_scale * (growth - half)

        # Box edges relative to the cell's lower index, in cell units.
        # Arrays are npsi x ninputs.
        self.relative_lower = np.stack(
            [
                0.5 + (dx - growth[:, 0]) / widths[0],
                0.5 + (dy - growth[:, 1]) / widths[1],
                0.5 + (dpsi - growth[:, 2]) / widths[2],
            ],
            axis=-1,
        )
        self.relative_upper = np.stack(
            [
                0.5 + (dx + growth[:, 0]) / widths[0],
                0.5 + (dy + growth[:, 1]) / widths[1],
                0.5 + (dpsi + growth[:, 2]) / widths[2],
            ],
            axis=-1,
        )
        self.lower_offset = np.floor(self.relative_lower).astype(np.int64)
        self.upper_offset = np.floor(self.relative_upper).astype(np.int64)

    def _axis_boxes(self, axis: int):
        """Per-axis lower index, extent and blocked flag for ``x`` or ``y``.

        Returns:
            Arrays of shape ``n_axis x npsi x ninputs``.
        """
        count = self.grid.counts[axis]
        index = np.arange(count)[:, None, None]
        relative_lower = self.relative_lower[None, :, :, axis] + index
        relative_upper = self.relative_upper[None, :, :, axis] + index
        blocked = (relative_lower < -_TOLERANCE) | (
            relative_upper > count + _TOLERANCE
        )
        lower = np.clip(
            index + self.lower_offset[None, :, :, axis], 0, count - 1
        )
        upper = np.clip(
            index + self.upper_offset[None, :, :, axis], 0, count - 1
        )
        return lower, upper - lower + 1, blocked

    @functools.cached_property
    def layout(self) -> "PairLayout":
        """Flattened successor boxes of all pairs for sweep solvers."""
        nx, ny, npsi = self.grid.counts
        lower_x, extent_x, blocked_x = self._axis_boxes(0)
        lower_y, extent_y, blocked_y = self._axis_boxes(1)
        lower_psi = np.mod(
            np.arange(npsi)[:, None] + self.lower_offset[:, :, 2], npsi
        )
        extent_psi = np.minimum(
            self.upper_offset[:, :, 2] - self.lower_offset[:, :, 2] + 1, npsi
        )
        blocked = blocked_x[:, None] | blocked_y[None, :]

        max_extent = (
            int(extent_x[~blocked_x].max(initial=1)),
            int(extent_y[~blocked_y].max(initial=1)),
            int(extent_psi.max(initial=1)),
        )
        extent_x = np.minimum(extent_x, max_extent[0])
        extent_y = np.minimum(extent_y, max_extent[1])
        combination = (
            (extent_x[:, None] - 1) * max_extent[1] + (extent_y[None, :] - 1)
        ) * max_extent[2] + (extent_psi[None, None] - 1)
        start = (lower_x[:, None] * ny + lower_y[None, :]) * npsi + lower_psi[
            None, None
        ]
        ncells = nx * ny * npsi
        index = combination.astype(np.int64) * ncells + start
        sentinel = int(np.prod(max_extent)) * ncells
        index = np.where(blocked, sentinel, index)
        return PairLayout(
            index=index.reshape(ncells, len(self.inputs)),
            blocked=blocked.reshape(ncells, len(self.inputs)),
            max_extent=max_extent,
        )

    def successors(self, cell: CellId, input_index: int):
        """Successor box of ``cell`` under input ``input_index``."""
        nx, ny, npsi = self.grid.counts
        ix, iy, ipsi = cell
        relative_lower = self.relative_lower[ipsi, input_index]
        relative_upper = self.relative_upper[ipsi, input_index]
        if (
            ix + relative_lower[0] < -_TOLERANCE
            or iy + relative_lower[1] < -_TOLERANCE
            or ix + relative_upper[0] > nx + _TOLERANCE
            or iy + relative_upper[1] > ny + _TOLERANCE
        ):
            return BLOCKED
        lower = self.lower_offset[ipsi, input_index]
        upper = self.upper_offset[ipsi, input_index]
        psi_lower = ipsi + int(lower[2])
        psi_upper = ipsi + int(upper[2])
        if psi_upper - psi_lower + 1 > npsi:
            psi_upper = psi_lower + npsi - 1
        return SuccessorBox(
            lower=CellId(
                int(np.clip(ix + lower[0], 0, nx - 1)),
                int(np.clip(iy + lower[1], 0, ny - 1)),
                psi_lower,
            ),
            upper=CellId(
                int(np.clip(ix + upper[0], 0, nx - 1)),
                int(np.clip(iy + upper[1], 0, ny - 1)),
                psi_upper,
            ),
            headings=npsi,
        )


class PairLayout(NamedTuple):
    """Successor boxes of all (cell, input) pairs in flat form.

    Attributes:
        index: ``ncells x ninputs`` positions into a stack of sliding-window
            maxima; blocked pairs point at a trailing sentinel.
        blocked: ``ncells x ninputs`` mask of blocked pairs.
        max_extent: Largest box extent per dimension.
    """

    index: np.ndarray
    blocked: np.ndarray
    max_extent: tuple


class SymbolicSystem:
    """Labeled grid together with its transition table.

    Args:
        grid: State grid.
        inputs: Input grid.
        labels: Cell labels from
            :func:`symdock.abstraction.labels.label_cells`.
        transitions: Transition table for ``grid`` and ``inputs``.
    """

    def __init__(
        self,
        grid: Grid,
        inputs: InputGrid,
        labels: np.ndarray,
        transitions: TransitionTable,
    ):
        if labels.shape != grid.shape:
            raise ValueError(
                f"Labels of shape {labels.shape} do not match the grid "
                f"shape {grid.shape}"
            )
        if transitions.grid != grid or transitions.inputs != inputs:
            raise ValueError("The transition table belongs to another grid")
        self.grid = grid
        self.inputs = inputs
        self.labels = labels
        self.transitions = transitions

    @property
    def tau_s(self) -> float:
        return self.transitions.tau_s

    def successors(
        self, cell: CellId, nu_cmd: Union[int, BodyVelocity]
    ) -> Union[SuccessorBox, _Blocked]:
        """Successor cells of ``cell`` under an input of the input grid."""
        return successors(cell, nu_cmd, self.transitions)


def successors(
    cell: CellId,
    nu_cmd: Union[int, BodyVelocity],
    transitions: TransitionTable,
) -> Union[SuccessorBox, _Blocked]:
    """Successor cells of ``cell`` under an input of the input grid.

    Args:
        cell: Source cell.
        nu_cmd: Input, either as an index into the input grid or as a
            velocity on it.
        transitions: Transition table of the grid.

    Returns:
        A :class:`SuccessorBox`, or :data:`BLOCKED` if the successor
        rectangle leaves the boundary.
    """
    grid = transitions.grid
    for index, count in zip(cell, grid.counts):
        if not 0 <= index < count:
            raise ValueError(f"Cell {tuple(cell)} is outside the grid")
    if isinstance(nu_cmd, BodyVelocity):
        nu_cmd = transitions.inputs.index_of(nu_cmd)
    return transitions.successors(CellId(*cell), int(nu_cmd))
