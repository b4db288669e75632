"""Command-line interface.

Exit codes: 0 on success, 1 if synthesis finds no winning region (or a
verification finds violations), 2 on usage, input or output errors and 3 if
an episode does not dock.
"""

import argparse
import json
import logging
import os
import signal
import sys
import threading
import warnings
from typing import List, Optional

import numpy as np

from symdock.abstraction.grid import Grid, InputGrid
from symdock.abstraction.symbolic import TransitionTable
from symdock.core.scenario import Rect, load_scenario
from symdock.dynamics import Pose
from symdock.exceptions import (
    ConnectionLost,
    InvalidScenario,
    InvalidStart,
    NoWinningRegion,
    UnsupportedVersion,
)
from symdock.plotting import save_episode_svg
from symdock.service.client import SynthesisClient
from symdock.service.server import serve as run_server
from symdock.simulation.batch import run_batch, sample_winning_starts
from symdock.simulation.episode import OBSERVERS, EpisodeConfig, run_episode
from symdock.simulation.metrics import Outcome
from symdock.simulation.planners import LocalPlanner, RemotePlanner
from symdock.simulation.trajectory import Trajectory
from symdock.synthesis.export import write_controller_csv
from symdock.synthesis.solver import ReachAvoidSolver
from symdock.synthesis.synthesizer import Synthesizer, build_symbolic
from symdock.tools import diagnostics
from symdock.tools.io import atomic_write_text


EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_USAGE = 2
EXIT_EPISODE_FAILED = 3

DEFAULT_START = "7.5,1.0,3.141592653589793"


class CliError(Exception):
    """Error reported as ``error: ...`` with an exit code."""

    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected an integer, got {text!r}"
        ) from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _pose(text):
    try:
        values = [float(item) for item in text.split(",")]
    except ValueError:
        values = []
    if len(values) != 3:
        raise argparse.ArgumentTypeError(
            f"expected X,Y,PSI, got {text!r}"
        )
    return Pose(*values)


def _load(path):
    try:
        return load_scenario(path)
    except OSError as error:
        raise CliError(f"cannot read scenario: {error}") from error
    except InvalidScenario as error:
        raise CliError(f"invalid scenario: {error}") from error


def _metrics_path(out):
    root, _ = os.path.splitext(out)
    return root + ".json"


def cmd_synth(args) -> int:
    """Synthesize a controller and write its table."""
    scenario = _load(args.scenario)
    synthesizer = Synthesizer(verbosity=args.verbosity)
    try:
        result = synthesizer.resynthesize(scenario)
    except NoWinningRegion as error:
        raise CliError(str(error), EXIT_INFEASIBLE) from error
    if args.out is not None:
        try:
            write_controller_csv(args.out, result.controller)
        except OSError as error:
            raise CliError(f"cannot write {args.out}: {error}") from error
    print(
        f"cells={result.controller.grid.size} winning={result.winning} "
        f"synth_ms={result.elapsed_ms:.1f}"
    )
    return EXIT_OK


def _episode_config(args, start):
    try:
        return EpisodeConfig(
            start=start,
            dt=args.dt,
            epoch=args.epoch,
            max_duration=args.max_duration,
            seed=args.seed,
            noise=args.noise,
            observer=args.observer,
        )
    except ValueError as error:
        raise CliError(str(error)) from error


def _planner(args):
    if args.service is None:
        return LocalPlanner()
    try:
        return RemotePlanner(SynthesisClient(args.service, args.timeout))
    except ValueError as error:
        raise CliError(str(error)) from error
    except (ConnectionLost, UnsupportedVersion) as error:
        raise CliError(f"cannot use service: {error}") from error


def cmd_simulate(args) -> int:
    """Run one closed-loop episode and write its log and metrics."""
    scenario = _load(args.scenario)
    config = _episode_config(args, args.start)
    with _planner(args) as planner:
        try:
            trajectory, metrics = run_episode(
                scenario, config, planner, verbosity=args.verbosity
            )
        except InvalidStart as error:
            print(f"error: {error}", file=sys.stderr)
            return EXIT_EPISODE_FAILED
        except ConnectionLost as error:
            raise CliError(f"service failed: {error}") from error
    try:
        trajectory.to_csv(args.out)
        metrics.write_json(args.metrics or _metrics_path(args.out))
    except OSError as error:
        raise CliError(f"cannot write output: {error}") from error
    completion = (
        "-"
        if metrics.completion_time is None
        else f"{metrics.completion_time:.2f}"
    )
    print(
        f"outcome={metrics.outcome.value} completion_time={completion} "
        f"min_clearance={metrics.min_clearance:.3f}"
    )
    if metrics.outcome != Outcome.DOCKED:
        return EXIT_EPISODE_FAILED
    return EXIT_OK


def cmd_verify(args) -> int:
    """Check abstraction soundness and the solved fixed point."""
    scenario = _load(args.scenario)
    rng = np.random.default_rng(args.seed)
    grid = Grid.from_config(scenario.section("grid"), scenario.boundary)
    inputs = InputGrid.from_config(scenario.section("inputs"))
    transitions = TransitionTable(
        grid,
        inputs,
        scenario.sampling_period,
        growth_scale=0.5 if args.debug_halve_growth else 1.0,
    )
    containment = diagnostics.check_containment(
        transitions, pairs=args.pairs, samples=args.samples, rng=rng
    )
    print(
        f"containment: pairs={containment.pairs} "
        f"samples={containment.samples} "
        f"violations={containment.violations}"
    )
    try:
        result = ReachAvoidSolver().run(build_symbolic(scenario, transitions))
    except NoWinningRegion as error:
        raise CliError(str(error), EXIT_INFEASIBLE) from error
    cells = None
    count = args.fixed_point_cells
    if count is not None and count < grid.size:
        chosen = rng.choice(grid.size, size=count, replace=False)
        cells = [grid.cell_from_flat(int(index)) for index in chosen]
    fixed_point = diagnostics.check_fixed_point(
        transitions, result.controller, cells
    )
    print(
        f"fixed point: cells={fixed_point.checked_cells} "
        f"value_mismatches={fixed_point.value_mismatches} "
        f"unsafe_inputs={fixed_point.unsafe_inputs}"
    )
    violations = containment.violations + fixed_point.violations
    print(f"violations={violations}")
    return EXIT_OK if violations == 0 else EXIT_INFEASIBLE


def cmd_plot(args) -> int:
    """Draw an episode log over its arena as SVG."""
    scenario = _load(args.scenario)
    try:
        trajectory = Trajectory.from_csv(args.traj)
    except (OSError, ValueError) as error:
        raise CliError(f"cannot read trajectory: {error}") from error
    if len(trajectory) == 0:
        raise CliError(f"{args.traj} holds no rows")
    try:
        save_episode_svg(trajectory, scenario, args.out)
    except RuntimeError as error:
        raise CliError(str(error)) from error
    except OSError as error:
        raise CliError(f"cannot write {args.out}: {error}") from error
    return EXIT_OK


def cmd_serve(args) -> int:
    """Serve synthesis requests until SIGTERM or SIGINT."""
    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    scenario = _load(args.scenario)
    stop = threading.Event()

    def request_stop(signum, _):
        logging.getLogger(__name__).info(
            "Received %s, shutting down", signal.Signals(signum).name
        )
        stop.set()

    previous = {
        signum: signal.signal(signum, request_stop)
        for signum in (signal.SIGTERM, signal.SIGINT)
    }

    def announce(server):
        print(f"listening on {args.host}:{server.port}", flush=True)

    try:
        run_server(
            args.port,
            scenario,
            host=args.host,
            stop=stop,
            on_ready=announce,
            delay=args.delay,
        )
    except OSError as error:
        raise CliError(f"cannot serve on port {args.port}: {error}") from error
    except NoWinningRegion as error:
        raise CliError(str(error), EXIT_INFEASIBLE) from error
    finally:
        for signum, handler in previous.items():
            signal.signal(signum, handler)
    return EXIT_OK


def cmd_batch(args) -> int:
    """Run episodes from sampled winning starts and summarize them."""
    scenario = _load(args.scenario)
    rng = np.random.default_rng(args.seed)
    planner = LocalPlanner()
    try:
        controller = planner.controller(scenario)
    except NoWinningRegion as error:
        raise CliError(str(error), EXIT_INFEASIBLE) from error
    boundary = scenario.boundary
    region = Rect(
        max(args.x_min, boundary.x_min),
        boundary.x_max,
        boundary.y_min,
        boundary.y_max,
    )
    try:
        starts = sample_winning_starts(
            scenario, controller, args.episodes, rng, region=region
        )
    except ValueError as error:
        raise CliError(str(error), EXIT_INFEASIBLE) from error
    config = _episode_config(args, starts[0])
    summary = run_batch(
        scenario, starts, config, planner, verbosity=args.verbosity
    )
    if args.out_dir is not None:
        try:
            os.makedirs(args.out_dir, exist_ok=True)
            atomic_write_text(
                os.path.join(args.out_dir, "summary.json"),
                json.dumps(summary.to_dict(), indent=2) + "\n",
            )
        except OSError as error:
            raise CliError(f"cannot write output: {error}") from error
    completion = (
        "-"
        if summary.completion_mean is None
        else f"{summary.completion_mean:.2f}"
    )
    print(
        f"docked={summary.docked}/{summary.episodes} "
        f"collisions={summary.collisions} completion_mean={completion}"
    )
    if summary.docked != summary.episodes:
        return EXIT_EPISODE_FAILED
    return EXIT_OK


def _add_episode_arguments(parser):
    parser.add_argument(
        "--seed", type=int, default=0, help="seed of the measurement noise"
    )
    parser.add_argument(
        "--observer",
        choices=OBSERVERS,
        default="truth",
        help="feed back the true state or the EKF estimate",
    )
    parser.add_argument(
        "--noise",
        action="store_true",
        help="add noise to the pose measurements",
    )
    parser.add_argument(
        "--dt", type=float, default=0.01, help="control step in seconds"
    )
    parser.add_argument(
        "--epoch", type=float, default=2.0, help="planning period in seconds"
    )
    parser.add_argument(
        "--max-duration",
        type=float,
        default=600.0,
        help="simulated seconds before the episode times out",
    )
    parser.add_argument(
        "--verbosity", type=int, default=0, help="0 silent, 2 per epoch"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symdock",
        description="Symbolic-control docking: synthesis, simulation and "
        "service.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    synth = subparsers.add_parser("synth", help=cmd_synth.__doc__)
    synth.add_argument(
        "--scenario", help="scenario JSON file (bundled arena by default)"
    )
    synth.add_argument("--out", help="controller CSV to write")
    synth.add_argument(
        "--verbosity", type=int, default=0, help="0 silent, 2 per sweep"
    )
    synth.set_defaults(handler=cmd_synth)

    simulate = subparsers.add_parser("simulate", help=cmd_simulate.__doc__)
    simulate.add_argument(
        "--scenario", help="scenario JSON file (bundled arena by default)"
    )
    simulate.add_argument(
        "--start",
        type=_pose,
        default=_pose(DEFAULT_START),
        help=f"start pose X,Y,PSI in the scenario frame ({DEFAULT_START})",
    )
    simulate.add_argument(
        "--out", required=True, help="trajectory CSV to write"
    )
    simulate.add_argument(
        "--metrics", help="metrics JSON to write (next to --out by default)"
    )
    simulate.add_argument(
        "--service", metavar="HOST:PORT", help="plan through a server"
    )
    simulate.add_argument(
        "--timeout",
        type=float,
        default=2.0,
        help="seconds to wait for the server per epoch",
    )
    _add_episode_arguments(simulate)
    simulate.set_defaults(handler=cmd_simulate)

    verify = subparsers.add_parser("verify", help=cmd_verify.__doc__)
    verify.add_argument(
        "--scenario", help="scenario JSON file (bundled arena by default)"
    )
    verify.add_argument(
        "--samples",
        type=_positive_int,
        default=1000,
        help="initial poses per (cell, input) pair",
    )
    verify.add_argument(
        "--pairs",
        type=_positive_int,
        default=500,
        help="(cell, input) pairs to sample",
    )
    verify.add_argument(
        "--fixed-point-cells",
        type=_positive_int,
        help="cells to recheck against the fixed point (all by default)",
    )
    verify.add_argument("--seed", type=int, default=0, help="sampling seed")
    verify.add_argument(
        "--debug-halve-growth",
        action="store_true",
        help="halve the heading growth term to check that violations are "
        "detected",
    )
    verify.set_defaults(handler=cmd_verify)

    plot = subparsers.add_parser("plot", help=cmd_plot.__doc__)
    plot.add_argument("--traj", required=True, help="trajectory CSV")
    plot.add_argument(
        "--scenario", help="scenario JSON file (bundled arena by default)"
    )
    plot.add_argument("--out", required=True, help="SVG file to write")
    plot.set_defaults(handler=cmd_plot)

    serve = subparsers.add_parser("serve", help=cmd_serve.__doc__)
    serve.add_argument(
        "--scenario", help="scenario JSON file (bundled arena by default)"
    )
    serve.add_argument(
        "--port", type=int, default=8765, help="TCP port, 0 for any free one"
    )
    serve.add_argument(
        "--host", default="127.0.0.1", help="interface to listen on"
    )
    serve.add_argument(
        "--log-level",
        default="info",
        choices=("debug", "info", "warning", "error"),
        help="logging level",
    )
    serve.add_argument(
        "--delay",
        type=float,
        default=0.0,
        help="seconds to delay each synthesis answer (fault injection)",
    )
    serve.set_defaults(handler=cmd_serve)

    batch = subparsers.add_parser("batch", help=cmd_batch.__doc__)
    batch.add_argument(
        "--scenario", help="scenario JSON file (bundled arena by default)"
    )
    batch.add_argument(
        "--episodes", type=_positive_int, default=10, help="episode count"
    )
    batch.add_argument(
        "--x-min",
        type=float,
        default=6.0,
        help="smallest x coordinate of sampled starts",
    )
    batch.add_argument(
        "--out-dir", help="directory for the summary JSON"
    )
    _add_episode_arguments(batch)
    batch.set_defaults(handler=cmd_batch)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default", RuntimeWarning)
            return args.handler(args)
    except CliError as error:
        print(f"error: {error}", file=sys.stderr)
        return error.code


if __name__ == "__main__":
    sys.exit(main())
