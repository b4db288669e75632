"""TCP synthesis server.

Each connection is served by its own thread and handles one request at a
time. Solved controllers are cached per scenario fingerprint and shared by
all connections, as are the transition tables underneath them.
"""

import logging
import socketserver
import threading
import time
from typing import Any, Callable, Dict, Optional

from symdock.core.scenario import Scenario
from symdock.exceptions import (
    InvalidScenario,
    MalformedMessage,
    NoWinningRegion,
    OutOfDomain,
    UnsupportedVersion,
)
from symdock.selection import SelectionWeights
from symdock.service import protocol
from symdock.simulation.planners import SynthesisCache, plan_action
from symdock.synthesis.synthesizer import Synthesizer


logger = logging.getLogger(__name__)


class _RequestError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class _ConnectionHandler(socketserver.StreamRequestHandler):
    server: "SynthesisServer"

    def handle(self):
        peer = "%s:%s" % self.client_address[:2]
        logger.info("Connection from %s", peer)
        while True:
            try:
                line = self.rfile.readline()
            except OSError as error:
                logger.info("Connection to %s failed: %s", peer, error)
                break
            if not line:
                break
            if not line.strip():
                continue
            response = self.server.respond(line)
            try:
                self.wfile.write(protocol.encode(response))
                self.wfile.flush()
            except OSError as error:
                logger.info("Connection to %s failed: %s", peer, error)
                break
        logger.info("Connection from %s closed", peer)


class SynthesisServer(socketserver.ThreadingTCPServer):
    """Server answering ``hello``, ``ping`` and ``synthesize`` messages.

    Args:
        address: ``(host, port)`` to bind; port 0 picks a free port.
        scenario: Preloaded scenario used by requests without a scenario
            document.
        synthesizer: Synthesizer shared by all connections.
        cache_size: Number of solved scenarios to keep.
        delay: Seconds to wait before answering a ``synthesize`` request;
            used to inject faults in tests.
        sleep: Function used for the delay.
    """

    allow_reuse_address = True
    daemon_threads = True

    def __init__(
        self,
        address,
        scenario: Scenario,
        *,
        synthesizer: Optional[Synthesizer] = None,
        cache_size: int = 8,
        delay: float = 0.0,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if delay < 0:
            raise ValueError(f"The delay must be non-negative, got {delay}")
        self.scenario = scenario
        self.cache = SynthesisCache(synthesizer, size=cache_size)
        self.delay = delay
        self._sleep = sleep
        super().__init__(address, _ConnectionHandler)

    @property
    def port(self) -> int:
        return self.server_address[1]

    def preload(self):
        """Solve the preloaded scenario into the cache.

        Returns:
            The synthesis result of :attr:`scenario`.
        """
        result, fresh = self.cache.get(self.scenario)
        if fresh:
            logger.info(
                "Solved scenario %s in %.1f ms",
                self.scenario.fingerprint[:12],
                result.elapsed_ms,
            )
        return result

    def respond(self, line: bytes) -> Dict[str, Any]:
        """Answer one raw request line; errors become error messages."""
        try:
            message = protocol.decode(line)
        except MalformedMessage as error:
            logger.warning("Malformed message: %s", error)
            extra = {}
            if error.position is not None:
                extra["position"] = error.position
            return protocol.error_message("malformed", str(error), **extra)
        try:
            return self.dispatch(message)
        except _RequestError as error:
            logger.warning("Rejected %s request: %s", message["type"], error)
            return protocol.error_message(error.code, str(error))

    def dispatch(self, message: Dict[str, Any]) -> Dict[str, Any]:
        kind = message["type"]
        if kind == protocol.HELLO:
            try:
                protocol.check_version(message.get("version"))
            except UnsupportedVersion as error:
                raise _RequestError(
                    "unsupported_version", str(error)
                ) from error
            return protocol.hello_message(self.scenario.fingerprint)
        if kind == protocol.PING:
            response = {"type": protocol.PONG}
            if "id" in message:
                response["id"] = message["id"]
            return response
        if kind == protocol.SYNTHESIZE:
            return self._synthesize(message)
        raise _RequestError(
            "unknown_type", f"Unknown message type {kind!r}"
        )

    def _synthesize(self, message):
        try:
            request = protocol.SynthRequest.from_message(message)
        except UnsupportedVersion as error:
            raise _RequestError("unsupported_version", str(error)) from error
        except (MalformedMessage, ValueError) as error:
            raise _RequestError("invalid_request", str(error)) from error

        scenario = self.scenario
        if request.scenario is not None:
            try:
                scenario = Scenario.from_config(request.scenario)
            except InvalidScenario as error:
                raise _RequestError("invalid_request", str(error)) from error
        logger.debug(
            "Epoch %d: state=%s scenario=%s",
            request.epoch_id,
            request.state,
            scenario.fingerprint[:12],
        )

        try:
            result, fresh = self.cache.get(scenario)
            decision = plan_action(
                result.controller,
                result.controller.grid,
                SelectionWeights.from_config(scenario.section("weights")),
                request.state,
                request.prev_action,
                request.epoch_id,
                synth_ms=result.elapsed_ms if fresh else 0.0,
            )
        except NoWinningRegion as error:
            raise _RequestError("no_winning_region", str(error)) from error
        except OutOfDomain as error:
            raise _RequestError("out_of_domain", str(error)) from error
        except (InvalidScenario, ValueError) as error:
            raise _RequestError("invalid_request", str(error)) from error

        if self.delay > 0:
            self._sleep(self.delay)
        response = protocol.SynthResponse(
            selected=decision.action,
            candidate_count=decision.candidate_count,
            value=decision.value,
            synth_ms=decision.synth_ms,
            epoch_id=decision.epoch_id,
        )
        logger.debug(
            "Epoch %d: %d candidates, synth_ms=%.1f",
            request.epoch_id,
            decision.candidate_count,
            decision.synth_ms,
        )
        return response.to_message()


def serve(
    port: int,
    scenario: Scenario,
    host: str = "127.0.0.1",
    *,
    stop: Optional[threading.Event] = None,
    on_ready: Optional[Callable[[SynthesisServer], None]] = None,
    **kwargs,
):
    """Serve synthesis requests until the server is shut down.

    Args:
        port: TCP port to listen on; 0 picks a free one.
        scenario: Preloaded scenario.
        host: Interface to bind.
        stop: Event that shuts the server down when set. Without it the
            call blocks until the process is interrupted.
        on_ready: Called with the bound server once the preloaded
            scenario is solved, before requests are served.
        **kwargs: Further :class:`SynthesisServer` arguments.

    Raises:
        OSError: If the port cannot be bound.
        NoWinningRegion: If the preloaded scenario cannot be solved.
    """
    with SynthesisServer((host, port), scenario, **kwargs) as server:
        server.preload()
        logger.info(
            "Serving scenario %s on %s:%d",
            scenario.fingerprint[:12],
            host,
            server.port,
        )
        if on_ready is not None:
            on_ready(server)
        if stop is None:
            server.serve_forever()
        else:
            worker = threading.Thread(
                target=server.serve_forever, name="symdock-server"
            )
            worker.start()
            try:
                stop.wait()
            finally:
                server.shutdown()
                worker.join()
        logger.info("Server on %s:%d stopped", host, server.port)
