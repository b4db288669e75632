__all__ = [
    "__version__",
    "abstraction",
    "control",
    "core",
    "dynamics",
    "service",
    "simulation",
    "synthesis",
    "Scenario",
    "Synthesizer",
    "load_scenario",
    "run_episode",
]

from symdock import (
    abstraction,
    control,
    core,
    dynamics,
    service,
    simulation,
    synthesis,
)
from symdock.core.scenario import Scenario, load_scenario
from symdock.simulation.episode import run_episode
from symdock.synthesis.synthesizer import Synthesizer


try:
    from ._version import __version__
except ImportError:
    # Source checkout without an installed build.
    __version__ = "0.0.0"
