"""Closed-loop logs and their CSV form."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from symdock.tools.io import atomic_open


COLUMNS = (
    "t",
    "x",
    "y",
    "psi",
    "u",
    "v",
    "r",
    "u_ref",
    "v_ref",
    "r_ref",
    "tau_x",
    "tau_y",
    "tau_n",
    "epoch_id",
)

_FORMATS = ["%.10g"] * (len(COLUMNS) - 1) + ["%d"]


@dataclass(eq=False)
class Trajectory:
    """Timestamped log of one episode, one row per control step.

    Attributes:
        data: ``n x 14`` array with the columns of :data:`COLUMNS`.
        at_target_time: Time at which the target was first reported, if
            ever.
        synth_times: Planning time per epoch in milliseconds.
        epoch_misses: Number of epochs without a timely planner answer.
        log: Per-epoch entries when the runner logs.
    """

    data: np.ndarray = field(
        default_factory=lambda: np.empty((0, len(COLUMNS)))
    )
    at_target_time: Optional[float] = None
    synth_times: List[float] = field(default_factory=list)
    epoch_misses: int = 0
    log: Optional[Dict] = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float).reshape(
            -1, len(COLUMNS)
        )
        if np.any(np.diff(self.data[:, 0]) <= 0):
            raise ValueError("Trajectory times must be strictly increasing")

    def __len__(self):
        return self.data.shape[0]

    @property
    def t(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def poses(self) -> np.ndarray:
        return self.data[:, 1:4]

    @property
    def velocities(self) -> np.ndarray:
        return self.data[:, 4:7]

    @property
    def references(self) -> np.ndarray:
        return self.data[:, 7:10]

    @property
    def wrenches(self) -> np.ndarray:
        return self.data[:, 10:13]

    @property
    def epoch_ids(self) -> np.ndarray:
        return self.data[:, 13].astype(int)

    def column(self, name: str) -> np.ndarray:
        return self.data[:, COLUMNS.index(name)]

    def to_csv(self, path: str):
        """Write the rows as CSV with a header line, atomically."""
        with atomic_open(path, "w", newline="") as handle:
            np.savetxt(
                handle,
                self.data,
                fmt=_FORMATS,
                delimiter=",",
                header=",".join(COLUMNS),
                comments="",
            )

    @classmethod
    def from_csv(cls, path: str) -> "Trajectory":
        """Read a CSV written by :meth:`to_csv`.

        Raises:
            ValueError: If the header does not match :data:`COLUMNS`.
        """
        with open(path, encoding="utf-8") as handle:
            header = handle.readline().strip()
            if tuple(header.split(",")) != COLUMNS:
                raise ValueError(f"{path} is not a trajectory file")
            rows = [line for line in handle if line.strip()]
        if not rows:
            return cls()
        return cls(np.loadtxt(rows, delimiter=",", ndmin=2))
