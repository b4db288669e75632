"""Blocking client of the synthesis server."""

import logging
import socket
import time
from typing import Optional, Tuple, Union

from symdock.core.scenario import Scenario
from symdock.dynamics import BodyVelocity, Pose
from symdock.exceptions import (
    ConnectionLost,
    EpochMiss,
    InvalidScenario,
    MalformedMessage,
    NoWinningRegion,
    OutOfDomain,
    SynthTimeout,
    UnsupportedVersion,
)
from symdock.service import protocol


logger = logging.getLogger(__name__)

Endpoint = Union[str, Tuple[str, int]]

_ERRORS = {
    "malformed": MalformedMessage,
    "unsupported_version": UnsupportedVersion,
    "out_of_domain": OutOfDomain,
    "no_winning_region": NoWinningRegion,
    "invalid_request": InvalidScenario,
}


def parse_endpoint(endpoint: Endpoint) -> Tuple[str, int]:
    """Split ``"host:port"`` into its parts.

    Raises:
        ValueError: If the port is not an integer.
    """
    if isinstance(endpoint, tuple):
        host, port = endpoint
        return host, int(port)
    host, separator, port = endpoint.rpartition(":")
    if not separator or not port.isdigit():
        raise ValueError(f"Expected HOST:PORT, got {endpoint!r}")
    return host or "127.0.0.1", int(port)


def _raise_error(message):
    code = message.get("code")
    text = message.get("message", "")
    error = _ERRORS.get(code)
    if error is None:
        raise RuntimeError(f"Server error {code}: {text}")
    raise error(text)


class SynthesisClient:
    """Connection to a synthesis server.

    The constructor connects and exchanges ``hello`` messages. Replies that
    arrive after their request timed out are recognized by their epoch id
    and discarded.

    Args:
        endpoint: ``"host:port"`` or a ``(host, port)`` tuple.
        timeout: Seconds to wait for each reply.
        connect_timeout: Seconds to wait for the connection; defaults to
            ``timeout``.

    Raises:
        ConnectionLost: If the server cannot be reached.
        UnsupportedVersion: If the server rejects the protocol version.
    """

    def __init__(
        self,
        endpoint: Endpoint,
        timeout: float = 2.0,
        connect_timeout: Optional[float] = None,
    ):
        if timeout <= 0:
            raise ValueError(f"The timeout must be positive, got {timeout}")
        self.endpoint = parse_endpoint(endpoint)
        self.timeout = timeout
        self._buffer = b""
        try:
            self._socket = socket.create_connection(
                self.endpoint,
                timeout=(
                    timeout if connect_timeout is None else connect_timeout
                ),
            )
        except OSError as error:
            raise ConnectionLost(
                f"Cannot connect to {self.endpoint[0]}:{self.endpoint[1]}: "
                f"{error}"
            ) from error
        try:
            reply = self.call(protocol.hello_message())
        except BaseException:
            self.close()
            raise
        if reply.get("type") == protocol.ERROR:
            self.close()
            _raise_error(reply)
        self.version = protocol.check_version(reply.get("version"))
        self.server_fingerprint = reply.get("scenario")

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def close(self):
        sock, self._socket = self._socket, None
        if sock is not None:
            sock.close()

    def _send(self, message):
        if self._socket is None:
            raise ConnectionLost("The client is closed")
        try:
            self._socket.sendall(protocol.encode(message))
        except OSError as error:
            raise ConnectionLost(f"Sending failed: {error}") from error

    def _receive(self, deadline):
        while b"\n" not in self._buffer:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise SynthTimeout(
                    f"No reply within {self.timeout} seconds"
                )
            self._socket.settimeout(remaining)
            try:
                chunk = self._socket.recv(65536)
            except socket.timeout:
                raise SynthTimeout(
                    f"No reply within {self.timeout} seconds"
                ) from None
            except OSError as error:
                raise ConnectionLost(f"Receiving failed: {error}") from error
            if not chunk:
                raise ConnectionLost("The server closed the connection")
            self._buffer += chunk
        line, self._buffer = self._buffer.split(b"\n", 1)
        return protocol.decode(line)

    def call(self, message):
        """Send ``message`` and return the next reply.

        Raises:
            SynthTimeout: If no reply arrives within the timeout.
            ConnectionLost: If the connection fails.
        """
        self._send(message)
        return self._receive(time.monotonic() + self.timeout)

    def ping(self) -> bool:
        return self.call({"type": protocol.PING})["type"] == protocol.PONG

    def request(
        self, request: protocol.SynthRequest
    ) -> protocol.SynthResponse:
        """Send a synthesis request and wait for its result.

        Raises:
            EpochMiss: If the result does not arrive within the timeout.
            ConnectionLost: If the connection fails.
            NoWinningRegion, OutOfDomain, InvalidScenario: As reported by
                the server.
        """
        self._send(request.to_message())
        deadline = time.monotonic() + self.timeout
        while True:
            try:
                reply = self._receive(deadline)
            except SynthTimeout as error:
                raise EpochMiss(
                    f"Epoch {request.epoch_id}: {error}"
                ) from error
            if reply.get("type") == protocol.ERROR:
                _raise_error(reply)
            if reply.get("type") != protocol.RESULT:
                logger.debug("Ignoring %s reply", reply.get("type"))
                continue
            response = protocol.SynthResponse.from_message(reply)
            if response.epoch_id != request.epoch_id:
                logger.info(
                    "Discarding stale result of epoch %d", response.epoch_id
                )
                continue
            return response

    def synthesize(
        self,
        state: Pose,
        prev_action: BodyVelocity,
        epoch_id: int,
        scenario: Optional[Scenario] = None,
    ) -> protocol.SynthResponse:
        """Plan one epoch on the server; see :meth:`request`."""
        return self.request(
            protocol.SynthRequest(
                state=state,
                prev_action=prev_action,
                epoch_id=epoch_id,
                scenario=None if scenario is None else scenario.to_config(),
            )
        )


def client_call(
    endpoint: Endpoint,
    request: protocol.SynthRequest,
    timeout: float = 2.0,
) -> protocol.SynthResponse:
    """One-shot request over a fresh connection.

    Raises:
        ConnectionLost: If the server cannot be reached.
        EpochMiss: If the result does not arrive within ``timeout``.
    """
    with SynthesisClient(endpoint, timeout=timeout) as client:
        return client.request(request)
