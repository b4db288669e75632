"""Wire format of the synthesis service.

Messages are JSON objects, one per line, UTF-8 encoded. Every message has a
``type``; fields a peer does not know are ignored. Numbers are plain JSON
numbers, angles are in radians and poses in the scenario's frame.
"""

import json
import math
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Union

from symdock.dynamics import BodyVelocity, Pose
from symdock.exceptions import MalformedMessage, UnsupportedVersion
from symdock.synthesis.tables import ActionStatus


PROTOCOL_VERSION = 1
SUPPORTED_VERSIONS = (PROTOCOL_VERSION,)

HELLO = "hello"
PING = "ping"
PONG = "pong"
SYNTHESIZE = "synthesize"
RESULT = "result"
ERROR = "error"
MESSAGE_TYPES = (HELLO, PING, PONG, SYNTHESIZE, RESULT, ERROR)


def encode(message: Mapping[str, Any]) -> bytes:
    """Serialize ``message`` as one newline-terminated JSON line.

    Raises:
        ValueError: If the message holds non-finite numbers or values JSON
            cannot represent.
    """
    try:
        text = json.dumps(
            message, separators=(",", ":"), sort_keys=True, allow_nan=False
        )
    except TypeError as error:
        raise ValueError(f"Cannot encode message: {error}") from error
    return text.encode("utf-8") + b"\n"


def decode(line: Union[bytes, str]) -> Dict[str, Any]:
    """Parse one line into a message.

    Raises:
        MalformedMessage: If the line is not a JSON object with a string
            ``type``. ``position`` points at the offending character when
            the JSON itself is broken.
    """
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as error:
            raise MalformedMessage(
                "Message is not valid UTF-8", position=error.start
            ) from error
    line = line.rstrip("\r\n")
    try:
        message = json.loads(line)
    except json.JSONDecodeError as error:
        raise MalformedMessage(error.msg, position=error.pos) from error
    if not isinstance(message, dict):
        raise MalformedMessage(
            f"Expected a JSON object, got {type(message).__name__}"
        )
    if not isinstance(message.get("type"), str):
        raise MalformedMessage("Message has no string 'type'")
    return message


def check_version(version: Any) -> int:
    """Return ``version`` if it is spoken here.

    Raises:
        UnsupportedVersion: Otherwise.
    """
    if (
        isinstance(version, bool)
        or not isinstance(version, int)
        or version not in SUPPORTED_VERSIONS
    ):
        raise UnsupportedVersion(
            f"Protocol version {version!r} is not supported; "
            f"supported versions are {list(SUPPORTED_VERSIONS)}"
        )
    return version


def _triple(message, name):
    value = message.get(name)
    if (
        not isinstance(value, list)
        or len(value) != 3
        or not all(
            isinstance(item, (int, float)) and not isinstance(item, bool)
            for item in value
        )
        or not all(math.isfinite(item) for item in value)
    ):
        raise MalformedMessage(
            f"Field '{name}' must be a list of three finite numbers, "
            f"got {value!r}"
        )
    return [float(item) for item in value]


def _integer(message, name):
    value = message.get(name)
    if isinstance(value, bool) or not isinstance(value, int):
        raise MalformedMessage(
            f"Field '{name}' must be an integer, got {value!r}"
        )
    return value


@dataclass(frozen=True)
class SynthRequest:
    """Request to plan one epoch.

    Attributes:
        state: Measured pose.
        prev_action: Action selected in the previous epoch.
        epoch_id: Epoch the request belongs to; echoed in the response.
        scenario: Scenario document to plan in, or None for the one the
            server has preloaded.
        version: Protocol version of the sender.
    """

    state: Pose
    prev_action: BodyVelocity
    epoch_id: int
    scenario: Optional[Dict[str, Any]] = None
    version: int = PROTOCOL_VERSION

    def to_message(self) -> Dict[str, Any]:
        message = {
            "type": SYNTHESIZE,
            "version": self.version,
            "state": self.state.to_array().tolist(),
            "prev_action": self.prev_action.to_array().tolist(),
            "epoch_id": self.epoch_id,
        }
        if self.scenario is not None:
            message["scenario"] = self.scenario
        return message

    @classmethod
    def from_message(cls, message: Mapping[str, Any]) -> "SynthRequest":
        """Validate a ``synthesize`` message.

        Raises:
            MalformedMessage: If a field is missing or ill-typed.
            UnsupportedVersion: If the message names an unknown version.
        """
        version = check_version(message.get("version", PROTOCOL_VERSION))
        scenario = message.get("scenario")
        if scenario is not None and not isinstance(scenario, dict):
            raise MalformedMessage("Field 'scenario' must be an object")
        return cls(
            state=Pose(*_triple(message, "state")),
            prev_action=BodyVelocity(*_triple(message, "prev_action")),
            epoch_id=_integer(message, "epoch_id"),
            scenario=scenario,
            version=version,
        )


@dataclass(frozen=True)
class SynthResponse:
    """Planning result for one epoch.

    Attributes:
        selected: The chosen velocity or the target/not-winning status.
        candidate_count: Number of safe inputs at the quantized state.
        value: Steps-to-target of the quantized state, None if not winning.
        synth_ms: Synthesis time spent on this request.
        epoch_id: Epoch of the request being answered.
    """

    selected: Union[BodyVelocity, ActionStatus]
    candidate_count: int
    value: Optional[int]
    synth_ms: float
    epoch_id: int

    def to_message(self) -> Dict[str, Any]:
        if isinstance(self.selected, ActionStatus):
            selected = self.selected.value
        else:
            selected = self.selected.to_array().tolist()
        return {
            "type": RESULT,
            "selected": selected,
            "candidate_count": self.candidate_count,
            "value": self.value,
            "synth_ms": self.synth_ms,
            "epoch_id": self.epoch_id,
        }

    @classmethod
    def from_message(cls, message: Mapping[str, Any]) -> "SynthResponse":
        """Validate a ``result`` message.

        Raises:
            MalformedMessage: If a field is missing or ill-typed.
        """
        selected = message.get("selected")
        if isinstance(selected, str):
            try:
                selected = ActionStatus(selected)
            except ValueError as error:
                raise MalformedMessage(
                    f"Unknown selection status {selected!r}"
                ) from error
        else:
            selected = BodyVelocity(*_triple(message, "selected"))
        value = message.get("value")
        if value is not None:
            value = _integer(message, "value")
        synth_ms = message.get("synth_ms")
        if isinstance(synth_ms, bool) or not isinstance(
            synth_ms, (int, float)
        ):
            raise MalformedMessage(
                f"Field 'synth_ms' must be a number, got {synth_ms!r}"
            )
        return cls(
            selected=selected,
            candidate_count=_integer(message, "candidate_count"),
            value=value,
            synth_ms=float(synth_ms),
            epoch_id=_integer(message, "epoch_id"),
        )


def hello_message(fingerprint: Optional[str] = None) -> Dict[str, Any]:
    message = {"type": HELLO, "version": PROTOCOL_VERSION}
    if fingerprint is not None:
        message["scenario"] = fingerprint
    return message


def error_message(code: str, text: str, **extra) -> Dict[str, Any]:
    message = {"type": ERROR, "code": code, "message": text}
    message.update(extra)
    return message
