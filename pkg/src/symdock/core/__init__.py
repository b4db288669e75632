from .scenario import (
    Rect,
    Scenario,
    deflate_target,
    footprint_collision,
    inflate_obstacle,
    load_scenario,
)


__all__ = [
    "Rect",
    "Scenario",
    "deflate_target",
    "footprint_collision",
    "inflate_obstacle",
    "load_scenario",
]
