import random

import matplotlib
import numpy as np
import pytest

from symdock.abstraction.labels import CellLabel
from symdock.core.scenario import (
    Scenario,
    footprint_half_extents,
    load_scenario,
)
from symdock.dynamics import Pose
from symdock.simulation.planners import LocalPlanner
from symdock.synthesis.synthesizer import Synthesizer


matplotlib.use("Agg")


@pytest.fixture(autouse=True)
def initialize_test_state():
    seed = 42
    random.seed(seed)
    np.random.seed(seed)


@pytest.fixture(scope="session")
def scenario():
    return load_scenario()


@pytest.fixture(scope="session")
def synthesizer():
    return Synthesizer()


@pytest.fixture(scope="session")
def synthesis(scenario, synthesizer):
    """Solved controller of the bundled arena."""
    return synthesizer.resynthesize(scenario)


@pytest.fixture(scope="session")
def planner(synthesizer, synthesis):
    return LocalPlanner(synthesizer)


@pytest.fixture(scope="session")
def target_poses(scenario, synthesis):
    """Target cell centers keyed by whether the hull fits the berth.

    The fitting pose has the most room inside the concrete target, the other
    one reaches furthest out of it.
    """
    controller = synthesis.controller
    cells = np.argwhere(controller.values.labels == CellLabel.TARGET)
    poses = np.array(
        [controller.grid.cell_center(tuple(cell)).to_array() for cell in cells]
    )
    berth = scenario.target
    ext_x, ext_y = footprint_half_extents(
        poses[:, 2], scenario.vessel.length, scenario.vessel.beam
    )
    slack = np.min(
        [
            poses[:, 0] - ext_x - berth.x_min,
            berth.x_max - poses[:, 0] - ext_x,
            poses[:, 1] - ext_y - berth.y_min,
            berth.y_max - poses[:, 1] - ext_y,
        ],
        axis=0,
    )
    assert slack.max() > 0 > slack.min()
    return {
        True: Pose.from_array(poses[np.argmax(slack)]),
        False: Pose.from_array(poses[np.argmin(slack)]),
    }


@pytest.fixture(scope="session")
def small_scenario():
    """2 m x 1.5 m arena on an 8 x 6 x 16 grid.

    Small enough for exhaustive checks against an explicit transition
    system.
    """
    return Scenario.from_config(
        {
            "boundary": [0.0, 2.0, 0.0, 1.5],
            "obstacles": [[1.25, 1.5, 0.0, 0.5]],
            "target": [0.0, 0.5, 0.5, 1.0],
            "obstacle_margin": 0.25,
            "target_margin": 0.0,
            "footprint_clearance": False,
            "grid": {"resolution": [0.25, 0.25], "headings": 16},
        }
    )
