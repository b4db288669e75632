"""Controller dumps.

A dump is a UTF-8 CSV file with one row per winning cell::

    # symdock controller
    # grid {"lower": [...], "resolution": [...], "counts": [...]}
    # inputs {"surge": [...], "sway": [...], "yaw": [...]}
    cell_ix,cell_iy,cell_ipsi,V,input_bitmask
    31,2,16,7,1089

Bit ``k`` of ``input_bitmask`` is set when input ``k`` of the input grid is
enabled. Target cells appear with ``V = 0`` and an empty mask.
"""

import csv
import json

import numpy as np

from symdock.abstraction.grid import Grid, InputGrid
from symdock.abstraction.labels import CellLabel
from symdock.synthesis.tables import UNREACHABLE, ControllerTable, ValueTable
from symdock.tools.io import atomic_open


COLUMNS = ("cell_ix", "cell_iy", "cell_ipsi", "V", "input_bitmask")

_MAGIC = "symdock controller"


def write_controller_csv(path: str, controller: ControllerTable):
    """Write ``controller`` to ``path`` atomically."""
    grid, inputs = controller.grid, controller.inputs
    values = controller.values.values
    with atomic_open(path, "w", newline="") as handle:
        handle.write(f"# {_MAGIC}\n")
        handle.write(
            "# grid "
            + json.dumps(
                {
                    "lower": list(grid.lower),
                    "resolution": list(grid.resolution),
                    "counts": list(grid.counts),
                }
            )
            + "\n"
        )
        handle.write(
            "# inputs "
            + json.dumps(
                {
                    "surge": list(inputs.surge),
                    "sway": list(inputs.sway),
                    "yaw": list(inputs.yaw),
                }
            )
            + "\n"
        )
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(COLUMNS)
        for ix, iy, ipsi in zip(*np.nonzero(values != UNREACHABLE)):
            cell = (int(ix), int(iy), int(ipsi))
            writer.writerow(
                [*cell, int(values[cell]), controller.bitmask(cell)]
            )


def read_controller_csv(path: str) -> ControllerTable:
    """Read a dump written by :func:`write_controller_csv`.

    Obstacle labels are not part of a dump: cells with ``V = 0`` come back
    as targets and every other cell as free.

    Raises:
        ValueError: If the file is not a controller dump.
    """
    header = {}
    with open(path, encoding="utf-8", newline="") as handle:
        lines = iter(handle)
        first = next(lines, "").strip()
        if first != f"# {_MAGIC}":
            raise ValueError(f"{path} is not a controller dump")
        line = ""
        for line in lines:
            if not line.startswith("#"):
                break
            key, _, payload = line[1:].strip().partition(" ")
            header[key] = json.loads(payload)
        if "grid" not in header or "inputs" not in header:
            raise ValueError(f"{path} lacks the grid or input description")
        if tuple(line.strip().split(",")) != COLUMNS:
            raise ValueError(f"{path} has an unexpected column header")

        grid = Grid(**header["grid"])
        inputs = InputGrid(**header["inputs"])
        values = np.full(grid.shape, UNREACHABLE, dtype=np.int32)
        enabled = np.zeros((grid.size, len(inputs)), dtype=bool)
        for row in csv.reader(lines):
            if not row:
                continue
            ix, iy, ipsi, value, mask = map(int, row)
            cell = (ix, iy, ipsi)
            values[cell] = value
            flat = grid.flat_index(cell)
            for index in range(len(inputs)):
                enabled[flat, index] = bool(mask >> index & 1)

    labels = np.where(values == 0, CellLabel.TARGET, CellLabel.FREE).astype(
        np.uint8
    )
    return ControllerTable(
        grid=grid,
        inputs=inputs,
        enabled=enabled,
        values=ValueTable(grid=grid, values=values, labels=labels),
    )
