import collections
import dataclasses
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from symdock.control.allocation import ThrusterLayout, allocate, wrench_from
from symdock.control.guidance import berth_velocity
from symdock.control.observer import ExtendedKalmanFilter, ObserverConfig
from symdock.control.pid import PidGains, VelocityPid
from symdock.core.scenario import (
    Scenario,
    footprint_collision,
    footprint_within,
)
from symdock.dynamics import (
    BodyVelocity,
    Pose,
    Wrench,
    discrete_step,
    wrap_angle,
)
from symdock.exceptions import (
    EpochMiss,
    InvalidStart,
    NoWinningRegion,
    OutOfDomain,
)
from symdock.simulation.metrics import EpisodeMetrics, Outcome, compute_metrics
from symdock.simulation.planners import LocalPlanner, Planner
from symdock.simulation.trajectory import COLUMNS, Trajectory
from symdock.synthesis.tables import AT_TARGET, NOT_WINNING
from symdock.tools import printer


OBSERVERS = ("truth", "ekf")


@dataclass(frozen=True)
class EpisodeConfig:
    """Settings of one closed-loop run.

    Args:
        start: Initial pose.
        dt: Plant and low-level control step.
        epoch: Time between planner requests; a multiple of ``dt``.
        max_duration: Simulated time after which the run times out.
        seed: Seed of the measurement noise.
        noise: Whether pose measurements are noisy.
        observer: ``"truth"`` feeds the true state back, ``"ekf"`` the
            filter estimate built from pose measurements.
        hold_time: Minimum time spent berthing after reaching the target.
        berth_gain: Gain of the approach to the center of the concrete
            target once the target is reached; zero holds position.
        initial_velocity: Velocity at the start.
    """

    start: Pose
    dt: float = 0.01
    epoch: float = 2.0
    max_duration: float = 600.0
    seed: int = 0
    noise: bool = False
    observer: str = "truth"
    hold_time: float = 5.0
    berth_gain: float = 0.5
    initial_velocity: BodyVelocity = field(default_factory=BodyVelocity.zero)

    def __post_init__(self):
        if not 0 < self.dt <= self.epoch:
            raise ValueError(
                f"Need 0 < dt <= epoch, got dt={self.dt}, epoch={self.epoch}"
            )
        ratio = self.epoch / self.dt
        if abs(ratio - round(ratio)) > 1e-6:
            raise ValueError(
                f"The epoch {self.epoch} is not a multiple of dt={self.dt}"
            )
        if self.max_duration <= 0:
            raise ValueError(
                "The maximum duration must be positive, got "
                f"{self.max_duration}"
            )
        if self.hold_time < 0:
            raise ValueError(
                f"The hold time must be non-negative, got {self.hold_time}"
            )
        if self.berth_gain < 0:
            raise ValueError(
                "The berthing gain must be non-negative, got "
                f"{self.berth_gain}"
            )
        if self.observer not in OBSERVERS:
            raise ValueError(
                f"Observer must be one of {OBSERVERS}, got {self.observer!r}"
            )

    def replace(self, **changes) -> "EpisodeConfig":
        return dataclasses.replace(self, **changes)


class EpisodeRunner:
    """Closed loop of planner, velocity controller, allocation and plant.

    At every epoch boundary the runner reads the state (true or estimated),
    asks the planner for a command and keeps it for the epoch. In between it
    runs the PID velocity loop, allocates the commanded wrench to the
    thrusters and integrates the plant with forward Euler steps.

    Once the planner reports the target, the runner stops planning and steers
    the vessel straight towards the center of the concrete target at the
    current heading. The episode is docked when the hold time has passed and
    the whole footprint of the true pose lies inside the concrete target.

    Args:
        scenario: Arena, vessel and configuration sections.
        planner: Source of epoch commands; in-process synthesis by default.
        verbosity: Level of information printed per episode: 0 is silent, 1
            prints the outcome, 2 one line per epoch.
        log_verbosity: Level of information logged: 0 logs nothing, 1 logs
            every epoch into ``Trajectory.log``.
        stream: Text stream for printed output.
    """

    def __init__(
        self,
        scenario: Scenario,
        planner: Optional[Planner] = None,
        *,
        verbosity: int = 0,
        log_verbosity: int = 0,
        stream=None,
    ):
        self.scenario = scenario
        self.planner = planner if planner is not None else LocalPlanner()
        self._verbosity = verbosity
        self._log_verbosity = log_verbosity
        self._stream = stream

        control = scenario.section("control")
        self.gains = PidGains.from_config(control)
        self.bias_feedforward = bool(control.get("bias_feedforward", True))
        self.layout = ThrusterLayout.from_config(
            scenario.section("thrusters")
        )
        self.observer_config = ObserverConfig.from_config(
            scenario.section("observer")
        )
        self._log = None

    def _initialize_log(self, config: EpisodeConfig):
        self._log = {
            "runner": type(self).__name__,
            "planner": str(self.planner),
            "config": {
                "start": config.start.to_array().tolist(),
                "dt": config.dt,
                "epoch": config.epoch,
                "max_duration": config.max_duration,
                "seed": config.seed,
                "noise": config.noise,
                "observer": config.observer,
            },
            "epochs": collections.defaultdict(list)
            if self._log_verbosity >= 1
            else None,
        }

    def _add_log_entry(self, **kwargs):
        if self._log_verbosity <= 0:
            return
        self._log["epochs"]["wall_time"].append(time.time())
        for key, value in kwargs.items():
            self._log["epochs"][key].append(value)

    def _check_start(self, scenario: Scenario, start: Pose):
        if not scenario.boundary.contains_point(start.x, start.y):
            raise InvalidStart(
                f"Start ({start.x}, {start.y}) lies outside the boundary"
            )
        if footprint_collision(start, scenario):
            raise InvalidStart(
                f"The hull collides at the start pose "
                f"({start.x}, {start.y}, {start.psi})"
            )

    def run(
        self,
        config: EpisodeConfig,
        scenario_updates: Optional[Mapping[int, Scenario]] = None,
    ) -> Tuple[Trajectory, EpisodeMetrics]:
        """Run one episode.

        Args:
            config: Start pose and loop settings.
            scenario_updates: Scenarios that replace the current one from
                the given epoch on.

        Returns:
            The trajectory and its metrics.

        Raises:
            InvalidStart: If the start pose is outside the boundary or the
                hull collides there.
        """
        scenario = self.scenario
        scenario_updates = dict(scenario_updates or {})
        self._check_start(scenario, config.start)

        column_printer = printer.make_printer(
            self._verbosity,
            columns=[
                ("Epoch", "5d"),
                ("Time [s]", "8.2f"),
                ("x", "7.3f"),
                ("y", "7.3f"),
                ("psi", "7.3f"),
                ("Value", "5d"),
                ("Actions", "7d"),
                ("Synth [ms]", "10.1f"),
            ],
            stream=self._stream,
        )
        column_printer.print_header()
        self._initialize_log(config)

        params = scenario.vessel
        dt = config.dt
        steps_per_epoch = int(round(config.epoch / dt))
        max_steps = int(math.ceil(config.max_duration / dt - 1e-9))
        measurement_steps = max(
            1, int(round(self.observer_config.measurement_period / dt))
        )
        rng = np.random.default_rng(config.seed)

        pid = VelocityPid(
            self.gains, params.bias if self.bias_feedforward else None
        )
        ekf = None
        if config.observer == "ekf":
            ekf = ExtendedKalmanFilter(params, self.observer_config)
            ekf.reset(config.start, config.initial_velocity)

        state = np.concatenate(
            [config.start.to_array(), config.initial_velocity.to_array()]
        )
        rows = []
        trajectory = Trajectory()
        nu_ref = BodyVelocity.zero()
        prev_action = BodyVelocity.zero()
        epoch_id = -1
        consecutive_misses = 0
        hold_until = None
        outcome = None

        def record(t, tau_cmd):
            rows.append(
                np.concatenate(
                    [
                        [t],
                        state,
                        nu_ref.to_array(),
                        tau_cmd.to_array(),
                        [epoch_id],
                    ]
                )
            )

        for step in range(max_steps + 1):
            t = step * dt
            if hold_until is None and step % steps_per_epoch == 0:
                epoch_id += 1
                if epoch_id in scenario_updates:
                    scenario = scenario_updates[epoch_id]
                measured = Pose.from_array(
                    state[:3] if ekf is None else ekf.state.mean[:3]
                )
                try:
                    decision = self.planner.plan(
                        scenario, measured, prev_action, epoch_id
                    )
                except EpochMiss:
                    trajectory.epoch_misses += 1
                    consecutive_misses += 1
                    if consecutive_misses == 1:
                        warnings.warn(
                            f"Epoch {epoch_id} missed its planner answer; "
                            f"holding {nu_ref}",
                            RuntimeWarning,
                        )
                    else:
                        nu_ref = BodyVelocity.zero()
                        warnings.warn(
                            f"Epoch {epoch_id} missed its planner answer "
                            f"again; commanding zero velocity",
                            RuntimeWarning,
                        )
                    decision = None
                except NoWinningRegion:
                    outcome = Outcome.NOT_WINNING
                    decision = None
                except OutOfDomain as error:
                    warnings.warn(
                        f"Epoch {epoch_id} state left the grid: {error}",
                        RuntimeWarning,
                    )
                    outcome = Outcome.NOT_WINNING
                    decision = None
                else:
                    consecutive_misses = 0
                    trajectory.synth_times.append(decision.synth_ms)
                    if decision.action is AT_TARGET:
                        trajectory.at_target_time = t
                        hold_until = t + config.hold_time
                        nu_ref = BodyVelocity.zero()
                    elif decision.action is NOT_WINNING:
                        outcome = Outcome.NOT_WINNING
                    else:
                        nu_ref = prev_action = decision.action
                column_printer.print_row(
                    [
                        epoch_id,
                        t,
                        measured.x,
                        measured.y,
                        measured.psi,
                        None if decision is None else decision.value,
                        None if decision is None else decision.candidate_count,
                        None if decision is None else decision.synth_ms,
                    ]
                )
                self._add_log_entry(
                    epoch=epoch_id,
                    time=t,
                    state=measured,
                    action=None if decision is None else decision.action,
                    value=None if decision is None else decision.value,
                    candidates=(
                        None if decision is None else decision.candidate_count
                    ),
                    synth_ms=None if decision is None else decision.synth_ms,
                    reference=nu_ref,
                )

            if outcome is Outcome.NOT_WINNING:
                record(t, Wrench.zero())
                break
            if hold_until is not None:
                if t >= hold_until - 1e-9 and footprint_within(
                    state[:3], scenario.target, params.length, params.beam
                )[0]:
                    record(t, Wrench.zero())
                    outcome = Outcome.DOCKED
                    break
                nu_ref = berth_velocity(
                    Pose.from_array(
                        state[:3] if ekf is None else ekf.state.mean[:3]
                    ),
                    scenario.target.center,
                    config.berth_gain,
                )
            if step == max_steps:
                record(t, Wrench.zero())
                break

            nu_hat = BodyVelocity.from_array(
                state[3:] if ekf is None else ekf.state.mean[3:]
            )
            tau_cmd = pid(nu_ref, nu_hat, dt)
            tau = wrench_from(allocate(tau_cmd, self.layout), self.layout)
            record(t, tau_cmd)

            state = discrete_step(state, tau.to_array(), params, dt)
            state[2] = wrap_angle(state[2])
            if ekf is not None:
                ekf.predict(tau, dt)
                if (step + 1) % measurement_steps == 0:
                    eta = Pose.from_array(state[:3])
                    if config.noise:
                        eta = ekf.measure(eta, rng)
                    ekf.update(eta)

            if footprint_collision(Pose.from_array(state[:3]), scenario):
                outcome = Outcome.COLLIDED
                record(t + dt, tau_cmd)
                break

        if outcome is None:
            outcome = Outcome.TIMEOUT
        trajectory.data = np.array(rows).reshape(-1, len(COLUMNS))
        trajectory.log = self._log
        metrics = compute_metrics(trajectory, scenario, outcome)

        if self._verbosity >= 1:
            print(
                f"Terminated - {outcome.value} after {trajectory.t[-1]:.2f} "
                f"seconds, {epoch_id + 1} epochs.",
                file=self._stream,
            )
        return trajectory, metrics


def run_episode(
    scenario: Scenario,
    config: EpisodeConfig,
    planner: Optional[Planner] = None,
    scenario_updates: Optional[Dict[int, Scenario]] = None,
    **kwargs,
) -> Tuple[Trajectory, EpisodeMetrics]:
    """Run one closed-loop episode; see :class:`EpisodeRunner`."""
    runner = EpisodeRunner(scenario, planner, **kwargs)
    return runner.run(config, scenario_updates=scenario_updates)
