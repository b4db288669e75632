"""Choice of the executed command among the synthesized safe inputs.

The cost of a candidate ``sigma`` is the quadratic form ``beta^T W beta``
with ``beta = [sigma; sigma - sigma_prev]``. The diagonal weight depends on
the direction of travel: backing up is penalized on the surge axis, going
forward on the sway axis.
"""

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Tuple

import numpy as np

from symdock.dynamics import BodyVelocity
from symdock.exceptions import EmptyActionList


BACKWARD_WEIGHTS = (7.5, 3.0, 1.0, 1.0, 1.0, 2.5)
FORWARD_WEIGHTS = (1.0, 6.0, 1.0, 1.0, 1.0, 2.5)


def _check_weights(name, weights):
    weights = tuple(float(weight) for weight in weights)
    if len(weights) != 6:
        raise ValueError(
            f"{name} weights need 6 entries, got {len(weights)}"
        )
    if min(weights) < 0:
        raise ValueError(f"{name} weights must be non-negative, got {weights}")
    return weights


@dataclass(frozen=True)
class SelectionWeights:
    """Diagonals of the cost weight for negative and non-negative surge."""

    backward: Tuple[float, ...] = BACKWARD_WEIGHTS
    forward: Tuple[float, ...] = FORWARD_WEIGHTS

    def __post_init__(self):
        object.__setattr__(
            self, "backward", _check_weights("backward", self.backward)
        )
        object.__setattr__(
            self, "forward", _check_weights("forward", self.forward)
        )

    @classmethod
    def from_config(cls, config: Mapping) -> "SelectionWeights":
        """Build weights from the ``weights`` section of a scenario."""
        return cls(
            backward=config.get("backward", BACKWARD_WEIGHTS),
            forward=config.get("forward", FORWARD_WEIGHTS),
        )


@dataclass
class SelectorState:
    """Previously chosen action, zero at the start of an episode."""

    sigma_prev: BodyVelocity = field(default_factory=BodyVelocity.zero)


def weight_for(
    sigma: BodyVelocity, weights: SelectionWeights = SelectionWeights()
) -> np.ndarray:
    """Diagonal cost weight for candidate ``sigma``.

    A surge of exactly zero counts as forward.
    """
    if sigma.u < 0:
        return np.diag(weights.backward)
    return np.diag(weights.forward)


def cost(
    sigma: BodyVelocity,
    state: SelectorState,
    weights: SelectionWeights = SelectionWeights(),
) -> float:
    beta = np.concatenate(
        [sigma.to_array(), sigma.to_array() - state.sigma_prev.to_array()]
    )
    return float(beta @ weight_for(sigma, weights) @ beta)


def select(
    actions: Sequence[BodyVelocity],
    state: SelectorState,
    weights: SelectionWeights = SelectionWeights(),
) -> BodyVelocity:
    """Pick the cheapest action and remember it in ``state``.

    Ties go to the earliest action, which is the lowest input index when
    ``actions`` comes from the controller.

    Raises:
        EmptyActionList: If ``actions`` is empty.
    """
    if not actions:
        raise EmptyActionList("There is no action to select from")
    costs = [cost(sigma, state, weights) for sigma in actions]
    choice = actions[int(np.argmin(costs))]
    state.sigma_prev = choice
    return choice


class ActionSelector:
    """Stateful selector owned by one episode.

    Args:
        weights: Cost weights.
    """

    def __init__(self, weights: SelectionWeights = SelectionWeights()):
        self.weights = weights
        self.state = SelectorState()

    def reset(self, sigma_prev: BodyVelocity = None):
        self.state = SelectorState(
            BodyVelocity.zero() if sigma_prev is None else sigma_prev
        )

    def select(self, actions: Sequence[BodyVelocity]) -> BodyVelocity:
        return select(actions, self.state, self.weights)
